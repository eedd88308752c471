//! Human arousal demonstrations.
//!
//! Sessions are loaded from playtrace files ([`io`]), averaged into a mean
//! arousal trace that supplies the per-window target, and indexed for
//! nearest-state lookup of the agent's estimated arousal.

pub mod io;

use std::cmp::Ordering;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{CellKey, CELL_KEY_SPACE};
use crate::{Error, Result};

pub use io::{load_sessions, read_sessions, write_sessions};

/// Default number of sessions drawn for nearest-state lookup.
pub const DEFAULT_SUBSET_SIZE: usize = 16;

const WINDOW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanSample {
    pub timestamp: f64,
    pub key: CellKey,
    pub score: i64,
    /// Normalized to `[0, 1]` once loaded.
    pub arousal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanSession {
    pub session_id: String,
    pub samples: Vec<HumanSample>,
}

impl HumanSession {
    pub fn final_score(&self) -> i64 {
        self.samples.last().map_or(0, |s| s.score)
    }

    /// Per-window mean arousal; `None` where the session has no samples.
    pub fn window_means(&self, window_length: f64, windows: usize) -> Vec<Option<f64>> {
        let mut sums = vec![(0.0, 0usize); windows];
        for sample in &self.samples {
            if let Some(i) = window_index(sample.timestamp, window_length, windows) {
                sums[i].0 += sample.arousal;
                sums[i].1 += 1;
            }
        }
        sums.into_iter()
            .map(|(sum, n)| (n > 0).then(|| sum / n as f64))
            .collect()
    }

    /// Rescales arousal to `[0, 1]` by min-max; a flat trace becomes 0.5.
    pub fn normalize_arousal(&mut self) {
        let (lo, hi) = self
            .samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.arousal), hi.max(s.arousal)));
        for sample in &mut self.samples {
            sample.arousal = if hi > lo { (sample.arousal - lo) / (hi - lo) } else { 0.5 };
        }
    }
}

/// Windows are `(i·w, (i+1)·w]`, except that time 0 falls in window 0.
/// Timestamps past the last window are dropped.
pub fn window_index(timestamp: f64, window_length: f64, windows: usize) -> Option<usize> {
    let scaled = timestamp / window_length;
    let index = (scaled - WINDOW_TOLERANCE).ceil().max(1.0) as usize - 1;
    (index < windows).then_some(index)
}

pub fn window_count(session_length: f64, window_length: f64) -> usize {
    (session_length / window_length - WINDOW_TOLERANCE).ceil().max(0.0) as usize
}

/// The target arousal a(i), one value per window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArousalTrace {
    pub window_length: f64,
    pub values: Vec<f64>,
}

impl ArousalTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn target(&self, window: usize) -> Result<f64> {
        self.values
            .get(window)
            .copied()
            .ok_or(Error::OutOfRange { index: window, len: self.values.len() })
    }
}

/// Averages each session's window means into the consensus trace. Sessions
/// with no samples in a window are left out of that window's average.
pub fn mean_arousal_trace(sessions: &[HumanSession], window_length: f64, session_length: f64) -> Result<ArousalTrace> {
    if sessions.is_empty() {
        return Err(Error::EmptyDataset("no sessions to average".into()));
    }
    if !(window_length > 0.0) {
        return Err(Error::InvalidConfig(format!("window_length must be positive, got {window_length}")));
    }
    let windows = window_count(session_length, window_length);
    let mut sums = vec![(0.0, 0usize); windows];
    for session in sessions {
        for (slot, mean) in sums.iter_mut().zip(session.window_means(window_length, windows)) {
            if let Some(mean) = mean {
                slot.0 += mean;
                slot.1 += 1;
            }
        }
    }
    let values = sums
        .into_iter()
        .enumerate()
        .map(|(i, (sum, n))| if n == 0 { Err(Error::EmptyWindow(i)) } else { Ok(sum / n as f64) })
        .collect::<Result<Vec<_>>>()?;
    Ok(ArousalTrace { window_length, values })
}

pub fn target_arousal(trace: &ArousalTrace, window: usize) -> Result<f64> {
    trace.target(window)
}

/// h(i): the arousal of the human sample whose state is closest to the
/// agent's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArousalEstimate {
    pub value: f64,
    pub source_session: String,
    pub source_timestamp: f64,
    pub distance: u32,
}

/// Orders candidates by (distance, timestamp, session id); smaller wins.
fn candidate_order(a: (u32, f64, &str), b: (u32, f64, &str)) -> Ordering {
    a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then_with(|| a.2.cmp(b.2))
}

/// Draws `size` sessions uniformly without replacement, kept in dataset
/// order. All sessions are used when there are no more than `size`.
pub fn sample_subset(sessions: &[HumanSession], size: usize, seed: u64) -> Vec<HumanSession> {
    if sessions.len() <= size {
        return sessions.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, sessions.len(), size).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| sessions[i].clone()).collect()
}

/// Nearest-state arousal lookup over a fixed set of sessions.
///
/// Construction scans the sessions once, then tabulates the answer for
/// every cell key, so lookups are a single array read.
#[derive(Debug, Clone)]
pub struct ArousalIndex {
    sessions: Vec<HumanSession>,
    table: Vec<ArousalEstimate>,
}

impl ArousalIndex {
    pub fn new(sessions: Vec<HumanSession>) -> Result<Self> {
        if sessions.iter().all(|s| s.samples.is_empty()) {
            return Err(Error::EmptyDataset("no samples to match against".into()));
        }
        // Best representative per distinct key: every sample with the same
        // key is equidistant from any query, so only the tie-break winner
        // can ever be returned.
        let mut reps: Vec<Option<(usize, usize)>> = vec![None; CELL_KEY_SPACE];
        for (si, session) in sessions.iter().enumerate() {
            for (ti, sample) in session.samples.iter().enumerate() {
                let slot = &mut reps[sample.key.index()];
                let better = match *slot {
                    None => true,
                    Some((bs, bt)) => {
                        let best = &sessions[bs];
                        candidate_order(
                            (0, sample.timestamp, &session.session_id),
                            (0, best.samples[bt].timestamp, &best.session_id),
                        ) == Ordering::Less
                    }
                };
                if better {
                    *slot = Some((si, ti));
                }
            }
        }
        let reps: Vec<(CellKey, usize, usize)> = reps
            .iter()
            .enumerate()
            .filter_map(|(k, r)| r.map(|(s, t)| (CellKey::from_index(k).expect("dense index"), s, t)))
            .collect();

        let table = CellKey::all()
            .map(|query| {
                let (_, si, ti, distance) = reps
                    .iter()
                    .map(|&(key, si, ti)| (key, si, ti, query.hamming(&key)))
                    .min_by(|a, b| {
                        let (sa, sb) = (&sessions[a.1], &sessions[b.1]);
                        candidate_order(
                            (a.3, sa.samples[a.2].timestamp, &sa.session_id),
                            (b.3, sb.samples[b.2].timestamp, &sb.session_id),
                        )
                    })
                    .expect("at least one sample");
                let session = &sessions[si];
                let sample = &session.samples[ti];
                ArousalEstimate {
                    value: sample.arousal,
                    source_session: session.session_id.clone(),
                    source_timestamp: sample.timestamp,
                    distance,
                }
            })
            .collect();
        Ok(Self { sessions, table })
    }

    /// Samples a subset of `size` sessions with `seed` and indexes it.
    pub fn from_subset(sessions: &[HumanSession], size: usize, seed: u64) -> Result<Self> {
        Self::new(sample_subset(sessions, size, seed))
    }

    pub fn sessions(&self) -> &[HumanSession] {
        &self.sessions
    }

    pub fn estimate(&self, key: &CellKey) -> &ArousalEstimate {
        &self.table[key.index()]
    }
}

/// Linear scan over every sample of the sampled subset.
pub fn estimate_agent_arousal(
    key: &CellKey,
    sessions: &[HumanSession],
    subset_size: usize,
    subset_seed: u64,
) -> Result<ArousalEstimate> {
    let subset = sample_subset(sessions, subset_size, subset_seed);
    nearest_sample(key, &subset)
}

/// Exhaustive nearest-sample search with the (distance, timestamp,
/// session id) tie-break.
pub fn nearest_sample(key: &CellKey, sessions: &[HumanSession]) -> Result<ArousalEstimate> {
    let mut best: Option<(u32, &HumanSession, &HumanSample)> = None;
    for session in sessions {
        for sample in &session.samples {
            let d = key.hamming(&sample.key);
            let better = best.is_none_or(|(bd, bs, bsample)| {
                candidate_order((d, sample.timestamp, &session.session_id), (bd, bsample.timestamp, &bs.session_id))
                    == Ordering::Less
            });
            if better {
                best = Some((d, session, sample));
            }
        }
    }
    let (distance, session, sample) = best.ok_or_else(|| Error::EmptyDataset("empty session subset".into()))?;
    Ok(ArousalEstimate {
        value: sample.arousal,
        source_session: session.session_id.clone(),
        source_timestamp: sample.timestamp,
        distance,
    })
}

/// Running mean of `1 - |h(i) - a(i)|`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ArousalAccumulator {
    sum: f64,
    count: usize,
}

impl ArousalAccumulator {
    pub fn push(&mut self, h: f64, a: f64) {
        self.sum += 1.0 - (h - a).abs();
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The reward so far, or `None` before the first observation.
    pub fn value(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    pub fn from_histories(h: &[f64], a: &[f64]) -> Self {
        let mut acc = Self::default();
        for (&h, &a) in h.iter().zip(a) {
            acc.push(h, a);
        }
        acc
    }
}

/// Mean agreement between estimated and target arousal over all windows
/// observed so far.
pub fn arousal_reward(h_history: &[f64], a_history: &[f64]) -> Result<f64> {
    if h_history.len() != a_history.len() {
        return Err(Error::LengthMismatch { h: h_history.len(), a: a_history.len() });
    }
    for &value in h_history.iter().chain(a_history) {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfUnitRange { what: "arousal", value });
        }
    }
    ArousalAccumulator::from_histories(h_history, a_history)
        .value()
        .ok_or(Error::EmptyHistory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Band, Lane};

    fn session(id: &str, points: &[(f64, CellKey, f64)]) -> HumanSession {
        HumanSession {
            session_id: id.into(),
            samples: points
                .iter()
                .map(|&(timestamp, key, arousal)| HumanSample { timestamp, key, score: 0, arousal })
                .collect(),
        }
    }

    fn key(lane: Lane, slot: usize, band: Band) -> CellKey {
        let mut k = CellKey::empty(lane);
        k.bands[slot] = band;
        k
    }

    #[test]
    fn reward_examples() {
        assert_eq!(arousal_reward(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 1.0);
        assert_eq!(arousal_reward(&[0.0, 1.0, 0.5], &[0.5, 0.5, 1.0]).unwrap(), 0.5);
        let r = arousal_reward(&[0.0, 1.0, 0.5], &[1.0, 1.0, 0.5]).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reward_errors() {
        assert!(matches!(arousal_reward(&[], &[]), Err(Error::EmptyHistory)));
        assert!(matches!(arousal_reward(&[0.1], &[0.1, 0.2]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(arousal_reward(&[1.5], &[0.1]), Err(Error::OutOfUnitRange { .. })));
    }

    #[test]
    fn window_boundaries() {
        assert_eq!(window_index(0.0, 1.0, 120), Some(0));
        assert_eq!(window_index(0.25, 1.0, 120), Some(0));
        assert_eq!(window_index(1.0, 1.0, 120), Some(0));
        assert_eq!(window_index(1.25, 1.0, 120), Some(1));
        assert_eq!(window_index(120.0, 1.0, 120), Some(119));
        assert_eq!(window_index(120.25, 1.0, 120), None);
        assert_eq!(window_count(120.0, 1.0), 120);
        assert_eq!(window_count(10.0, 3.0), 4);
    }

    #[test]
    fn trace_averages_window_means() {
        let k = CellKey::empty(Lane::Bottom);
        let a = session("a", &[(0.5, k, 0.2), (1.0, k, 0.2), (2.0, k, 0.4)]);
        let b = session("b", &[(1.0, k, 0.8), (1.5, k, 0.6)]);
        let trace = mean_arousal_trace(&[a.clone(), b], 1.0, 2.0).unwrap();
        assert_eq!(trace.len(), 2);
        assert!((trace.values[0] - 0.5).abs() < 1e-15);
        assert!((trace.values[1] - 0.5).abs() < 1e-15);

        let same = mean_arousal_trace(&[a.clone(), a.clone()], 1.0, 2.0).unwrap();
        assert_eq!(same.values, vec![0.2, 0.4]);
    }

    #[test]
    fn trace_rejects_uncovered_window() {
        let k = CellKey::empty(Lane::Bottom);
        let a = session("a", &[(0.5, k, 0.2)]);
        assert!(matches!(mean_arousal_trace(&[a], 1.0, 2.0), Err(Error::EmptyWindow(1))));
        assert!(mean_arousal_trace(&[], 1.0, 2.0).is_err());
    }

    #[test]
    fn target_indexing() {
        let trace = ArousalTrace { window_length: 1.0, values: vec![0.1, 0.9] };
        assert_eq!(target_arousal(&trace, 1).unwrap(), 0.9);
        assert!(matches!(target_arousal(&trace, 2), Err(Error::OutOfRange { index: 2, len: 2 })));
    }

    #[test]
    fn normalization() {
        let k = CellKey::empty(Lane::Bottom);
        let mut flat = session("f", &[(1.0, k, 3.0), (2.0, k, 3.0)]);
        flat.normalize_arousal();
        assert!(flat.samples.iter().all(|s| s.arousal == 0.5));
        let mut ramp = session("r", &[(1.0, k, 2.0), (2.0, k, 4.0), (3.0, k, 6.0)]);
        ramp.normalize_arousal();
        let values: Vec<f64> = ramp.samples.iter().map(|s| s.arousal).collect();
        assert_eq!(values, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn exact_match_and_tie_breaks() {
        let empty = CellKey::empty(Lane::Bottom);
        let coin = key(Lane::Bottom, 0, Band::Item);
        let wall = key(Lane::Bottom, 1, Band::Obstacle);
        let s1 = session("s1", &[(1.0, empty, 0.1), (2.0, coin, 0.7), (3.0, coin, 0.9)]);
        let s0 = session("s0", &[(2.0, coin, 0.3), (5.0, wall, 0.4)]);
        let sessions = vec![s1, s0];
        let index = ArousalIndex::new(sessions.clone()).unwrap();

        let hit = index.estimate(&coin);
        assert_eq!(hit.distance, 0);
        // Equal timestamps: lexicographically smaller session id wins.
        assert_eq!((hit.source_session.as_str(), hit.value), ("s0", 0.3));
        assert_eq!(index.estimate(&wall).value, 0.4);

        // One mismatch away from both `empty` (t=1) and `wall` (t=5).
        let query = key(Lane::Bottom, 4, Band::Item);
        let est = index.estimate(&query);
        assert_eq!((est.distance, est.source_timestamp), (1, 1.0));

        for q in CellKey::all() {
            assert_eq!(index.estimate(&q), &nearest_sample(&q, &sessions).unwrap());
        }
    }

    #[test]
    fn subset_is_seeded() {
        let k = CellKey::empty(Lane::Bottom);
        let sessions: Vec<HumanSession> = (0..30).map(|i| session(&format!("p{i:02}"), &[(1.0, k, 0.5)])).collect();
        let a = sample_subset(&sessions, 16, 9);
        assert_eq!(a.len(), 16);
        assert_eq!(a, sample_subset(&sessions, 16, 9));
        assert_ne!(a, sample_subset(&sessions, 16, 10));
        assert_eq!(sample_subset(&sessions[..5], 16, 9).len(), 5);
        assert!(estimate_agent_arousal(&k, &[], 16, 1).is_err());
    }

    #[test]
    fn accumulator_matches_append_identity() {
        let mut acc = ArousalAccumulator::from_histories(&[0.2, 0.4, 0.9], &[0.3, 0.1, 0.9]);
        let r = acc.value().unwrap();
        acc.push(0.6, 0.6);
        let expected = (3.0 * r + 1.0) / 4.0;
        assert!((acc.value().unwrap() - expected).abs() < 1e-15);
        assert_eq!(ArousalAccumulator::default().value(), None);
    }
}
