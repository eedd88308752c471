//! Scripted stand-ins for human play sessions with annotated arousal.
//!
//! Each synthetic player runs a full session on its own schedule with one
//! of three scripted policies. Its arousal trace combines a slowly rising
//! baseline, a fading start-of-session excitement, a small random wobble
//! and decaying spikes triggered by collisions and close calls. The trace
//! is min-max normalized per session like loaded data.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arousal::{HumanSample, HumanSession};
use crate::env::{Action, Endless, EnvConfig, GameState, Lane, ObjectKind, SpawnSchedule, StepOutcome};
use crate::Result;

const COLLISION_SPIKE: f64 = 0.5;
const CLOSE_CALL_SPIKE: f64 = 0.12;
const COIN_SPIKE: f64 = 0.03;
const SPIKE_DECAY_SECONDS: f64 = 4.0;
const WOBBLE_STEP: f64 = 0.01;
const WOBBLE_LIMIT: f64 = 0.15;
const EXCITEMENT_DECAY_SECONDS: f64 = 8.0;
/// Chance that a skilled policy fumbles and acts at random.
const SLIP_RATE: f64 = 0.08;
/// Share of random actions in the noisy policy.
const NOISE_RATE: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    /// Chases the nearest coin and attacks obstacles in its way.
    Greedy,
    /// Ignores coins and keeps to the lane with the farthest obstacle.
    Cautious,
    /// Mostly random, occasionally greedy.
    Noisy,
}

/// Relative frequencies of the scripted policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyMix {
    pub greedy: f64,
    pub cautious: f64,
    pub noisy: f64,
}

impl Default for PolicyMix {
    fn default() -> Self {
        Self { greedy: 0.4, cautious: 0.3, noisy: 0.3 }
    }
}

impl PolicyMix {
    pub fn only(policy: Policy) -> Self {
        let mut mix = Self { greedy: 0.0, cautious: 0.0, noisy: 0.0 };
        match policy {
            Policy::Greedy => mix.greedy = 1.0,
            Policy::Cautious => mix.cautious = 1.0,
            Policy::Noisy => mix.noisy = 1.0,
        }
        mix
    }
}

fn with_lane(lane: Option<Lane>, attack: bool) -> Action {
    match (lane, attack) {
        (Some(Lane::Top), false) => Action::Up,
        (Some(Lane::Bottom), false) => Action::Down,
        (Some(Lane::Top), true) => Action::UpAttack,
        (Some(Lane::Bottom), true) => Action::DownAttack,
        (None, true) => Action::Attack,
        (None, false) => Action::NoOp,
    }
}

fn nearest(state: &GameState, lane: Lane, obstacle: bool) -> Option<f64> {
    state
        .objects
        .iter()
        .filter(|o| o.lane == lane && o.kind.is_obstacle() == obstacle && (obstacle || o.kind == ObjectKind::Coin))
        .map(|o| o.distance)
        .min_by(f64::total_cmp)
}

fn greedy_action(config: &EnvConfig, state: &GameState) -> Action {
    let target = [Lane::Top, Lane::Bottom]
        .into_iter()
        .filter_map(|lane| nearest(state, lane, false).map(|d| (d, lane)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(state.player_lane, |(_, lane)| lane);
    let threat = nearest(state, target, true).is_some_and(|d| d <= config.attack_range(state.speed));
    with_lane((target != state.player_lane).then_some(target), threat)
}

fn cautious_action(config: &EnvConfig, state: &GameState) -> Action {
    let clearance = |lane| nearest(state, lane, true).unwrap_or(f64::INFINITY);
    let here = state.player_lane;
    let there = here.other();
    let range = config.attack_range(state.speed);
    if clearance(here) > range {
        return Action::NoOp;
    }
    if clearance(there) > clearance(here) {
        with_lane(Some(there), clearance(there) <= range)
    } else {
        Action::Attack
    }
}

fn choose<R: Rng>(policy: Policy, config: &EnvConfig, state: &GameState, rng: &mut R) -> Action {
    let random = |rng: &mut R| Action::ALL[rng.gen_range(0..Action::ALL.len())];
    match policy {
        Policy::Greedy if rng.gen_bool(SLIP_RATE) => random(rng),
        Policy::Greedy => greedy_action(config, state),
        Policy::Cautious if rng.gen_bool(SLIP_RATE) => random(rng),
        Policy::Cautious => cautious_action(config, state),
        Policy::Noisy if rng.gen_bool(NOISE_RATE) => random(rng),
        Policy::Noisy => greedy_action(config, state),
    }
}

/// Raw (unnormalized) arousal process for one session.
struct ArousalModel {
    rise: f64,
    curvature: f64,
    excitement: f64,
    spikes: f64,
    wobble: f64,
    spike_decay: f64,
}

impl ArousalModel {
    fn new<R: Rng>(config: &EnvConfig, rng: &mut R) -> Self {
        Self {
            rise: rng.gen_range(0.6..1.2),
            curvature: rng.gen_range(0.8..1.5),
            excitement: rng.gen_range(0.0..0.5),
            spikes: 0.0,
            wobble: 0.0,
            spike_decay: (-config.tick_seconds() / SPIKE_DECAY_SECONDS).exp(),
        }
    }

    fn advance<R: Rng>(&mut self, config: &EnvConfig, time: f64, outcome: &StepOutcome, rng: &mut R) -> f64 {
        let close_calls = outcome.near_misses + outcome.obstacles_cleared;
        if outcome.collision {
            // No decay on a collision tick, so the trace always jumps up.
            self.spikes += COLLISION_SPIKE;
        } else {
            self.spikes = self.spikes * self.spike_decay
                + CLOSE_CALL_SPIKE * close_calls as f64
                + COIN_SPIKE * outcome.coins as f64;
        }
        self.wobble = (self.wobble + rng.gen_range(-WOBBLE_STEP..=WOBBLE_STEP)).clamp(-WOBBLE_LIMIT, WOBBLE_LIMIT);
        let progress = time / config.session_length;
        self.rise * progress.powf(self.curvature)
            + self.excitement * (-time / EXCITEMENT_DECAY_SECONDS).exp()
            + self.spikes
            + self.wobble
    }
}

/// Plays one scripted session, sampling after every tick.
pub fn simulate_session(
    config: &EnvConfig,
    schedule: SpawnSchedule,
    policy: Policy,
    session_id: String,
    seed: u64,
) -> Result<HumanSession> {
    let env = Endless::new(config.clone(), schedule)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arousal = ArousalModel::new(config, &mut rng);
    let mut state = env.new_game();
    let mut samples = Vec::with_capacity(env.total_ticks() as usize);
    while !env.is_finished(&state) {
        let action = choose(policy, config, &state, &mut rng);
        let outcome = env.step(&mut state, action)?;
        samples.push(HumanSample {
            timestamp: state.time,
            key: env.featurize(&state),
            score: state.score,
            arousal: arousal.advance(config, state.time, &outcome, &mut rng),
        });
    }
    let mut session = HumanSession { session_id, samples };
    session.normalize_arousal();
    Ok(session)
}

/// `n` synthetic sessions; session `j` plays the schedule seeded with
/// `schedule_seed_base + j`.
pub fn generate_synthetic_sessions(
    config: &EnvConfig,
    schedule_seed_base: u64,
    n: usize,
    mix: PolicyMix,
    seed: u64,
) -> Result<Vec<HumanSession>> {
    config.validate()?;
    let weights = WeightedIndex::new([mix.greedy, mix.cautious, mix.noisy])
        .map_err(|e| crate::Error::InvalidConfig(format!("policy mix: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|j| {
            let policy = [Policy::Greedy, Policy::Cautious, Policy::Noisy][weights.sample(&mut rng)];
            let schedule = SpawnSchedule::build(config, schedule_seed_base.wrapping_add(j as u64));
            simulate_session(config, schedule, policy, format!("syn{j:03}"), rng.gen())
        })
        .collect()
}
