//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use affect_explore::arousal::HumanSession;
use affect_explore::env::{Action, CellKey, Endless, EnvConfig};
use affect_explore::experiment::{generate_synthetic_sessions, PolicyMix};

/// A 2.5 s session at 4 Hz: ten ticks, spawns every 0.75 to 1.0 s, objects
/// arriving three ticks after they appear.
pub fn tiny_config() -> EnvConfig {
    EnvConfig {
        session_length: 2.5,
        passive_point_interval: 1.0,
        band_times: [0.5, 0.75],
        spawn_lead_time: 0.75,
        spawn_min_gap: 0.75,
        spawn_max_gap: 1.0,
        ..EnvConfig::default()
    }
}

pub fn synthetic_sessions(config: &EnvConfig, n: usize, seed: u64) -> Vec<HumanSession> {
    generate_synthetic_sessions(config, 1000, n, PolicyMix::default(), seed).unwrap()
}

/// Highest score reachable from the initial state, by enumerating every
/// action at every tick and merging identical states.
pub fn brute_force_best_score(env: &Endless) -> i64 {
    let start = env.new_game();
    let mut best = start.score;
    let mut frontier = vec![start];
    while !frontier.is_empty() {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for state in &frontier {
            if env.is_finished(state) {
                continue;
            }
            for action in Action::ALL {
                let mut child = state.clone();
                env.step(&mut child, action).unwrap();
                if seen.insert(format!("{child:?}")) {
                    best = best.max(child.score);
                    next.push(child);
                }
            }
        }
        frontier = next;
    }
    best
}

/// Which window a timestamp belongs to, checked against every window's
/// bounds in turn.
pub fn window_by_scan(t: f64, w: f64, windows: usize) -> Option<usize> {
    if t == 0.0 {
        return (windows > 0).then_some(0);
    }
    (0..windows).find(|&i| (i as f64) * w < t && t <= (i as f64 + 1.0) * w)
}

/// Mean arousal of one session in every window, `None` where it is empty.
pub fn session_window_means(session: &HumanSession, w: f64, windows: usize) -> Vec<Option<f64>> {
    (0..windows)
        .map(|i| {
            let values: Vec<f64> = session
                .samples
                .iter()
                .filter(|s| window_by_scan(s.timestamp, w, windows) == Some(i))
                .map(|s| s.arousal)
                .collect();
            (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
        })
        .collect()
}

/// Nearest sample found by sorting every candidate.
pub fn nearest_by_sort(key: &CellKey, sessions: &[HumanSession]) -> (f64, String, f64, u32) {
    let mut all: Vec<(u32, f64, &str, f64)> = sessions
        .iter()
        .flat_map(|s| s.samples.iter().map(move |x| (key.hamming(&x.key), x.timestamp, s.session_id.as_str(), x.arousal)))
        .collect();
    all.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(b.2)));
    let (d, t, id, value) = all[0];
    (value, id.to_string(), t, d)
}

/// Hamming distance computed from the parameter vectors.
pub fn hamming_by_params(a: &CellKey, b: &CellKey) -> u32 {
    a.params().iter().zip(b.params()).filter(|(x, y)| **x != *y).count() as u32
}

/// 95% two-sided t quantiles from a printed table, indexed by degrees of
/// freedom.
pub fn t_table(df: usize) -> f64 {
    match df {
        1 => 12.706204736432095,
        2 => 4.302652729696142,
        3 => 3.182446305284263,
        4 => 2.7764451051977987,
        9 => 2.2621571628540993,
        19 => 2.093024054408263,
        _ => panic!("no table entry for df = {df}"),
    }
}
