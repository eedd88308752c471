//! The exploration phase: pick a cell, return to it, act randomly, keep
//! whatever improves the archive.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::archive::{Archive, Trajectory, UpdateOutcome};
use crate::arousal::{ArousalAccumulator, ArousalIndex, ArousalTrace};
use crate::env::{Action, Endless, GameState};
use crate::reward::{behavior_reward, RewardBundle, RewardWeights};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExploreParams {
    pub iterations: usize,
    pub max_rollout_actions: usize,
    pub rng_seed: u64,
    pub weights: RewardWeights,
}

impl Default for ExploreParams {
    fn default() -> Self {
        Self {
            iterations: 4000,
            max_rollout_actions: 20,
            rng_seed: 0,
            weights: RewardWeights::new(0.0).expect("0 is a valid lambda"),
        }
    }
}

impl ExploreParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 || self.max_rollout_actions < 1 {
            return Err(Error::InvalidConfig("iterations and max_rollout_actions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Scores game states along a trajectory.
///
/// h(i) is looked up once per arousal window, from the state at the
/// window's last tick; r_a is the running mean over the windows completed
/// so far and is 0 before the first window closes.
#[derive(Debug, Clone)]
pub struct Scorer {
    trace: ArousalTrace,
    index: ArousalIndex,
    weights: RewardWeights,
    optimal: i64,
    ticks_per_window: u64,
}

impl Scorer {
    pub fn new(env: &Endless, trace: ArousalTrace, index: ArousalIndex, weights: RewardWeights) -> Result<Self> {
        let optimal = env.optimal_score();
        if optimal <= 0 {
            return Err(Error::NonPositiveOptimal(optimal));
        }
        let ticks_per_window = env.config().whole_ticks(trace.window_length).ok_or_else(|| {
            Error::InvalidConfig(format!("arousal window of {}s is not a whole number of ticks", trace.window_length))
        })?;
        Ok(Self { trace, index, weights, optimal, ticks_per_window })
    }

    pub fn weights(&self) -> RewardWeights {
        self.weights
    }

    pub fn optimal(&self) -> i64 {
        self.optimal
    }

    pub fn trace(&self) -> &ArousalTrace {
        &self.trace
    }

    pub fn index(&self) -> &ArousalIndex {
        &self.index
    }

    /// `(h, a)` if `state` sits on the last tick of an arousal window.
    pub fn observe(&self, env: &Endless, state: &GameState) -> Option<(f64, f64)> {
        if state.tick == 0 || !state.tick.is_multiple_of(self.ticks_per_window) {
            return None;
        }
        let window = (state.tick / self.ticks_per_window - 1) as usize;
        let a = *self.trace.values.get(window)?;
        let h = self.index.estimate(&env.featurize(state)).value;
        Some((h, a))
    }

    pub fn bundle(&self, score: i64, arousal: &ArousalAccumulator) -> Result<RewardBundle> {
        let r_b = behavior_reward(score, self.optimal)?;
        let r_a = arousal.value().unwrap_or(0.0);
        RewardBundle::new(r_b, r_a, self.weights)
    }
}

/// Up to `max_actions` uniformly random steps from `state`, stopping at the
/// end of the session.
pub fn rollout<R: Rng + ?Sized>(
    env: &Endless,
    state: &GameState,
    max_actions: usize,
    rng: &mut R,
) -> Result<Vec<(Action, GameState)>> {
    let steps = (env.remaining_ticks(state) as usize).min(max_actions);
    let mut current = state.clone();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let action = Action::ALL[rng.gen_range(0..Action::ALL.len())];
        env.step(&mut current, action)?;
        out.push((action, current.clone()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    pub archive_size: usize,
    /// Inserts plus updates caused by this iteration's rollout.
    pub updates: usize,
    pub best: RewardBundle,
}

#[derive(Debug, Clone)]
pub struct ExplorationResult {
    pub archive: Archive,
    pub log: Vec<IterationLog>,
}

/// Runs `params.iterations` select, return, explore and update cycles,
/// starting from an archive holding only the initial state.
pub fn run_exploration(env: &Endless, scorer: &Scorer, params: &ExploreParams) -> Result<ExplorationResult> {
    run_exploration_with(env, scorer, params, |_, _| {})
}

/// [`run_exploration`] that calls `observe` after every iteration.
pub fn run_exploration_with<F>(env: &Endless, scorer: &Scorer, params: &ExploreParams, mut observe: F) -> Result<ExplorationResult>
where
    F: FnMut(&Archive, &IterationLog),
{
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut archive = Archive::new();
    let start = env.new_game();
    let start_rewards = scorer.bundle(start.score, &ArousalAccumulator::default())?;
    archive.offer(env.featurize(&start), start_rewards, 0, || {
        (Trajectory { raw_score: start.score, ..Trajectory::default() }, env.snapshot(&start))
    });

    let mut log = Vec::with_capacity(params.iterations);
    for iteration in 0..params.iterations {
        let cell = archive.select_cell(&mut rng)?;
        let state = env.restore(&cell.snapshot);
        let mut actions = cell.trajectory.actions.clone();
        let mut h_history = cell.trajectory.h_history.clone();
        let mut a_history = cell.trajectory.a_history.clone();
        let mut arousal = ArousalAccumulator::from_histories(&h_history, &a_history);

        let mut updates = 0;
        for (action, next) in rollout(env, &state, params.max_rollout_actions, &mut rng)? {
            actions.push(action);
            if let Some((h, a)) = scorer.observe(env, &next) {
                h_history.push(h);
                a_history.push(a);
                arousal.push(h, a);
            }
            let rewards = scorer.bundle(next.score, &arousal)?;
            let outcome = archive.offer(env.featurize(&next), rewards, actions.len(), || {
                let trajectory = Trajectory {
                    actions: actions.clone(),
                    h_history: h_history.clone(),
                    a_history: a_history.clone(),
                    end_tick: next.tick,
                    raw_score: next.score,
                };
                (trajectory, env.snapshot(&next))
            });
            if outcome != UpdateOutcome::Rejected {
                updates += 1;
            }
        }
        let entry = IterationLog {
            iteration: iteration + 1,
            archive_size: archive.len(),
            updates,
            best: archive.best_cell()?.rewards,
        };
        observe(&archive, &entry);
        log.push(entry);
    }
    Ok(ExplorationResult { archive, log })
}

/// Result of replaying a trajectory from the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub state: GameState,
    pub rewards: RewardBundle,
    pub trajectory: Trajectory,
    /// Rewards after every tick, starting with the initial state.
    pub curve: Vec<RewardBundle>,
}

pub fn replay(env: &Endless, scorer: &Scorer, actions: &[Action]) -> Result<Replay> {
    if actions.len() as u64 > env.total_ticks() {
        return Err(Error::TrajectoryTooLong { len: actions.len(), max: env.total_ticks() });
    }
    let mut state = env.new_game();
    let mut arousal = ArousalAccumulator::default();
    let mut trajectory = Trajectory::default();
    let mut curve = Vec::with_capacity(actions.len() + 1);
    curve.push(scorer.bundle(state.score, &arousal)?);
    for &action in actions {
        env.step(&mut state, action)?;
        trajectory.actions.push(action);
        if let Some((h, a)) = scorer.observe(env, &state) {
            trajectory.h_history.push(h);
            trajectory.a_history.push(a);
            arousal.push(h, a);
        }
        curve.push(scorer.bundle(state.score, &arousal)?);
    }
    trajectory.end_tick = state.tick;
    trajectory.raw_score = state.score;
    let rewards = *curve.last().expect("curve starts with the initial state");
    Ok(Replay { state, rewards, trajectory, curve })
}

/// A whole session of uniformly random actions.
pub fn random_episode(env: &Endless, scorer: &Scorer, seed: u64) -> Result<Replay> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actions: Vec<Action> = rollout(env, &env.new_game(), env.total_ticks() as usize, &mut rng)?
        .into_iter()
        .map(|(action, _)| action)
        .collect();
    replay(env, scorer, &actions)
}
