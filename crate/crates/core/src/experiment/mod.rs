//! λ sweeps with repeated runs, a random-action baseline, human reference
//! statistics and CSV reporting.

pub mod stats;
pub mod synth;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::archive::write_actions;
use crate::arousal::{
    arousal_reward, load_sessions, mean_arousal_trace, write_sessions, ArousalIndex, ArousalTrace, HumanSession,
    DEFAULT_SUBSET_SIZE,
};
use crate::env::{Action, Endless, EnvConfig};
use crate::explorer::{random_episode, replay, run_exploration, ExploreParams, IterationLog, Replay, Scorer};
use crate::reward::{behavior_reward, RewardBundle, RewardWeights};
use crate::{Error, Result};

pub use stats::confidence_interval;
pub use synth::{generate_synthetic_sessions, Policy, PolicyMix};

/// Stream reserved for the random baseline; λ settings use their index.
const BASELINE_STREAM: u64 = u32::MAX as u64;

/// Everything that defines a sweep. Loadable from TOML; missing keys keep
/// their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lambdas: Vec<f64>,
    pub runs_per_lambda: usize,
    pub iterations: usize,
    pub max_rollout_actions: usize,
    pub master_seed: u64,
    /// Seed of the schedule every run plays.
    pub schedule_seed: u64,
    /// Give every run its own schedule instead of the shared one.
    pub vary_schedule: bool,
    pub window_length: f64,
    pub subset_size: usize,
    pub dataset_path: Option<PathBuf>,
    /// Synthetic sessions to generate when no dataset is given.
    pub synthetic_sessions: usize,
    pub synthetic_seed: u64,
    pub synthetic_schedule_base: u64,
    pub policy_mix: PolicyMix,
    pub output_dir: PathBuf,
    pub env: EnvConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            runs_per_lambda: 5,
            iterations: 4000,
            max_rollout_actions: 20,
            master_seed: 2021,
            schedule_seed: 1,
            vary_schedule: false,
            window_length: 1.0,
            subset_size: DEFAULT_SUBSET_SIZE,
            dataset_path: None,
            synthetic_sessions: 20,
            synthetic_seed: 7,
            synthetic_schedule_base: 1000,
            policy_mix: PolicyMix::default(),
            output_dir: PathBuf::from("results"),
            env: EnvConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        for &lambda in &self.lambdas {
            RewardWeights::new(lambda)?;
        }
        if self.lambdas.is_empty() {
            return Err(Error::InvalidConfig("at least one lambda is required".into()));
        }
        if self.runs_per_lambda < 1 {
            return Err(Error::InvalidConfig("runs_per_lambda must be at least 1".into()));
        }
        if self.subset_size < 1 {
            return Err(Error::InvalidConfig("subset_size must be at least 1".into()));
        }
        if self.env.whole_ticks(self.window_length).is_none() {
            return Err(Error::InvalidConfig(format!(
                "window_length {} is not a whole number of ticks",
                self.window_length
            )));
        }
        self.explore_params(0.0, 0).validate()
    }

    pub fn explore_params(&self, lambda: f64, rng_seed: u64) -> ExploreParams {
        ExploreParams {
            iterations: self.iterations,
            max_rollout_actions: self.max_rollout_actions,
            rng_seed,
            weights: RewardWeights::new(lambda.clamp(0.0, 1.0)).expect("clamped"),
        }
    }
}

/// Seeds for one run, all derived from the master seed and the run's
/// position so runs can execute in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub explore: u64,
    pub subset: u64,
    pub schedule: u64,
}

impl RunSeeds {
    pub fn derive(config: &ExperimentConfig, stream: u64, run: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
        rng.set_stream((stream << 32) | run as u64);
        let explore = rng.gen();
        let subset = rng.gen();
        let schedule = rng.gen();
        Self {
            explore,
            subset,
            schedule: if config.vary_schedule { schedule } else { config.schedule_seed },
        }
    }
}

/// One line of the results table. Baselines have no R_λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub n: usize,
    pub mean_r_b: f64,
    pub ci_r_b: f64,
    pub mean_r_a: f64,
    pub ci_r_a: f64,
    pub mean_r_lambda: Option<f64>,
    pub ci_r_lambda: Option<f64>,
}

impl SummaryRow {
    pub fn from_samples(label: &str, r_b: &[f64], r_a: &[f64], r_lambda: Option<&[f64]>) -> Self {
        let (mean_r_b, ci_r_b) = confidence_interval(r_b);
        let (mean_r_a, ci_r_a) = confidence_interval(r_a);
        let lambda = r_lambda.map(confidence_interval);
        Self {
            label: label.to_string(),
            n: r_b.len(),
            mean_r_b,
            ci_r_b,
            mean_r_a,
            ci_r_a,
            mean_r_lambda: lambda.map(|l| l.0),
            ci_r_lambda: lambda.map(|l| l.1),
        }
    }
}

/// Final outcome of one run, as persisted in `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub lambda: Option<f64>,
    pub run: usize,
    pub seeds: RunSeeds,
    pub rewards: RewardBundle,
    pub trajectory_length: usize,
    pub archive_size: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub best_actions: Vec<Action>,
    pub curve: Vec<RewardBundle>,
    pub log: Vec<IterationLog>,
}

/// Per-tick statistics across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub tick: usize,
    pub n: usize,
    pub r_b: (f64, f64),
    pub r_a: (f64, f64),
    pub r_lambda: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct GroupResult {
    pub row: SummaryRow,
    pub runs: Vec<RunOutput>,
    pub curve: Vec<CurvePoint>,
    /// File-name friendly label.
    pub slug: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub groups: Vec<GroupResult>,
    pub human: SummaryRow,
}

impl SweepResult {
    pub fn rows(&self) -> Vec<SummaryRow> {
        self.groups.iter().map(|g| g.row.clone()).chain(std::iter::once(self.human.clone())).collect()
    }
}

pub fn lambda_label(lambda: f64) -> String {
    format!("R_{lambda:.2}")
}

pub fn lambda_slug(lambda: f64) -> String {
    format!("lambda_{lambda:.2}")
}

/// Averages per-tick reward curves over the runs long enough to reach each
/// tick.
pub fn average_curves(curves: &[&[RewardBundle]]) -> Vec<CurvePoint> {
    let longest = curves.iter().map(|c| c.len()).max().unwrap_or(0);
    (0..longest)
        .map(|tick| {
            let at: Vec<&RewardBundle> = curves.iter().filter_map(|c| c.get(tick)).collect();
            let column = |f: fn(&RewardBundle) -> f64| confidence_interval(&at.iter().map(|b| f(b)).collect::<Vec<_>>());
            CurvePoint {
                tick,
                n: at.len(),
                r_b: column(|b| b.r_b),
                r_a: column(|b| b.r_a),
                r_lambda: column(|b| b.r_lambda),
            }
        })
        .collect()
}

/// Human reference row: each session's clamped final score against
/// `optimal`, and the agreement of its windowed arousal with the mean trace.
pub fn human_stats(sessions: &[HumanSession], trace: &ArousalTrace, optimal: i64) -> Result<SummaryRow> {
    if sessions.len() < 2 {
        return Err(Error::TooFewSessions { need: 2, got: sessions.len() });
    }
    let mut r_b = Vec::with_capacity(sessions.len());
    let mut r_a = Vec::with_capacity(sessions.len());
    for session in sessions {
        r_b.push(behavior_reward(session.final_score(), optimal)?);
        let (own, target): (Vec<f64>, Vec<f64>) = session
            .window_means(trace.window_length, trace.len())
            .into_iter()
            .zip(&trace.values)
            .filter_map(|(own, &target)| own.map(|o| (o, target)))
            .unzip();
        r_a.push(arousal_reward(&own, &target)?);
    }
    Ok(SummaryRow::from_samples("Human", &r_b, &r_a, None))
}

/// Loaded or generated demonstrations plus the shared session setup.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub sessions: Vec<HumanSession>,
    pub trace: ArousalTrace,
    pub env: Endless,
}

impl Experiment {
    /// Loads `dataset_path`, or generates synthetic sessions when it is
    /// unset.
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let sessions = match &config.dataset_path {
            Some(path) => load_sessions(path)?,
            None => generate_synthetic_sessions(
                &config.env,
                config.synthetic_schedule_base,
                config.synthetic_sessions,
                config.policy_mix,
                config.synthetic_seed,
            )?,
        };
        Self::with_sessions(config, sessions)
    }

    pub fn with_sessions(config: ExperimentConfig, sessions: Vec<HumanSession>) -> Result<Self> {
        config.validate()?;
        let trace = mean_arousal_trace(&sessions, config.window_length, config.env.session_length)?;
        let env = Endless::seeded(config.env.clone(), config.schedule_seed)?;
        Ok(Self { config, sessions, trace, env })
    }

    fn env_for(&self, seeds: &RunSeeds) -> Result<Endless> {
        if self.config.vary_schedule {
            Endless::seeded(self.config.env.clone(), seeds.schedule)
        } else {
            Ok(self.env.clone())
        }
    }

    fn scorer(&self, env: &Endless, seeds: &RunSeeds, lambda: f64) -> Result<Scorer> {
        let index = ArousalIndex::from_subset(&self.sessions, self.config.subset_size, seeds.subset)?;
        Scorer::new(env, self.trace.clone(), index, RewardWeights::new(lambda)?)
    }

    /// One exploration run; writes its archive, best trajectory and
    /// progress log to `out` when given.
    pub fn explore_run(&self, lambda_index: usize, run: usize, out: Option<&Path>) -> Result<RunOutput> {
        let lambda = self.config.lambdas[lambda_index];
        let seeds = RunSeeds::derive(&self.config, lambda_index as u64, run);
        let env = self.env_for(&seeds)?;
        let scorer = self.scorer(&env, &seeds, lambda)?;
        let result = run_exploration(&env, &scorer, &self.config.explore_params(lambda, seeds.explore))?;
        let best = result.archive.best_cell()?;
        let replayed = replay(&env, &scorer, &best.trajectory.actions)?;
        debug_assert_eq!(replayed.rewards, best.rewards);

        let slug = lambda_slug(lambda);
        if let Some(dir) = out {
            let mut archive_file = BufWriter::new(File::create(dir.join(format!("archive_{slug}_{run}.csv")))?);
            result.archive.write_csv(&mut archive_file)?;
            archive_file.flush()?;
            write_actions(
                BufWriter::new(File::create(dir.join(format!("best_{slug}_{run}.traj")))?),
                &best.trajectory.actions,
                &[
                    ("lambda", lambda.to_string()),
                    ("schedule_seed", seeds.schedule.to_string()),
                    ("subset_seed", seeds.subset.to_string()),
                    ("r_b", best.rewards.r_b.to_string()),
                    ("r_a", best.rewards.r_a.to_string()),
                    ("r_lambda", best.rewards.r_lambda.to_string()),
                ],
            )?;
            write_progress(&dir.join(format!("progress_{slug}_{run}.csv")), &result.log)?;
        }
        Ok(RunOutput {
            record: RunRecord {
                label: lambda_label(lambda),
                lambda: Some(lambda),
                run,
                seeds,
                rewards: best.rewards,
                trajectory_length: best.trajectory.len(),
                archive_size: result.archive.len(),
            },
            best_actions: best.trajectory.actions.clone(),
            curve: replayed.curve,
            log: result.log,
        })
    }

    /// One full session of random actions, scored like an agent.
    pub fn baseline_run(&self, run: usize) -> Result<RunOutput> {
        let seeds = RunSeeds::derive(&self.config, BASELINE_STREAM, run);
        let env = self.env_for(&seeds)?;
        let scorer = self.scorer(&env, &seeds, 0.0)?;
        let episode = random_episode(&env, &scorer, seeds.explore)?;
        Ok(RunOutput {
            record: RunRecord {
                label: "Random".into(),
                lambda: None,
                run,
                seeds,
                rewards: episode.rewards,
                trajectory_length: episode.trajectory.len(),
                archive_size: 0,
            },
            best_actions: episode.trajectory.actions,
            curve: episode.curve,
            log: Vec::new(),
        })
    }

    pub fn random_baseline(&self) -> Result<GroupResult> {
        let runs = (0..self.config.runs_per_lambda)
            .into_par_iter()
            .map(|run| self.baseline_run(run))
            .collect::<Result<Vec<_>>>()?;
        Ok(group("Random", "random", runs, false))
    }

    pub fn human_stats(&self) -> Result<SummaryRow> {
        human_stats(&self.sessions, &self.trace, self.env.optimal_score())
    }

    /// Runs every (λ, run) job in parallel plus the random baseline, and
    /// writes all outputs to `out` when given. Per-run files are written as
    /// each run finishes.
    pub fn run_sweep(&self, out: Option<&Path>) -> Result<SweepResult> {
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            let mut schedule = BufWriter::new(File::create(dir.join("schedule.csv"))?);
            self.env.schedule().write_csv(&mut schedule)?;
            if self.config.dataset_path.is_none() {
                write_sessions(BufWriter::new(File::create(dir.join("dataset.csv"))?), &self.sessions)?;
            }
        }
        let runs = self.config.runs_per_lambda;
        let jobs: Vec<(usize, usize)> =
            (0..self.config.lambdas.len()).flat_map(|l| (0..runs).map(move |r| (l, r))).collect();
        let mut outputs = jobs
            .into_par_iter()
            .map(|(l, r)| self.explore_run(l, r, out))
            .collect::<Result<Vec<_>>>()?
            .into_iter();

        let mut groups = Vec::with_capacity(self.config.lambdas.len() + 1);
        for &lambda in &self.config.lambdas {
            let group_runs: Vec<RunOutput> = outputs.by_ref().take(runs).collect();
            groups.push(group(&lambda_label(lambda), &lambda_slug(lambda), group_runs, true));
        }
        groups.push(self.random_baseline()?);
        let result = SweepResult { groups, human: self.human_stats()? };
        if let Some(dir) = out {
            write_sweep(dir, &result)?;
        }
        Ok(result)
    }

    /// Replays a saved trajectory with the arousal subset and λ recorded in
    /// its header.
    pub fn replay_file(&self, actions: &[Action], lambda: f64, subset_seed: u64, schedule_seed: u64) -> Result<Replay> {
        let env = if schedule_seed == self.config.schedule_seed {
            self.env.clone()
        } else {
            Endless::seeded(self.config.env.clone(), schedule_seed)?
        };
        let seeds = RunSeeds { explore: 0, subset: subset_seed, schedule: schedule_seed };
        let scorer = self.scorer(&env, &seeds, lambda)?;
        replay(&env, &scorer, actions)
    }
}

fn group(label: &str, slug: &str, runs: Vec<RunOutput>, with_lambda: bool) -> GroupResult {
    let pick = |f: fn(&RewardBundle) -> f64| runs.iter().map(|r| f(&r.record.rewards)).collect::<Vec<f64>>();
    let (r_b, r_a, r_lambda) = (pick(|b| b.r_b), pick(|b| b.r_a), pick(|b| b.r_lambda));
    let row = SummaryRow::from_samples(label, &r_b, &r_a, with_lambda.then_some(r_lambda.as_slice()));
    let curves: Vec<&[RewardBundle]> = runs.iter().map(|r| r.curve.as_slice()).collect();
    let curve = average_curves(&curves);
    GroupResult { row, runs, curve, slug: slug.to_string() }
}

fn opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["label", "n", "mean_r_b", "ci_r_b", "mean_r_a", "ci_r_a", "mean_r_lambda", "ci_r_lambda"])?;
    for row in rows {
        writer.write_record([
            row.label.clone(),
            row.n.to_string(),
            row.mean_r_b.to_string(),
            row.ci_r_b.to_string(),
            row.mean_r_a.to_string(),
            row.ci_r_a.to_string(),
            opt(row.mean_r_lambda),
            opt(row.ci_r_lambda),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_runs<W: Write>(out: W, records: &[&RunRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "label",
        "lambda",
        "run",
        "explore_seed",
        "subset_seed",
        "schedule_seed",
        "r_b",
        "r_a",
        "r_lambda",
        "trajectory_length",
        "archive_size",
    ])?;
    for r in records {
        writer.write_record([
            r.label.clone(),
            opt(r.lambda),
            r.run.to_string(),
            r.seeds.explore.to_string(),
            r.seeds.subset.to_string(),
            r.seeds.schedule.to_string(),
            r.rewards.r_b.to_string(),
            r.rewards.r_a.to_string(),
            r.rewards.r_lambda.to_string(),
            r.trajectory_length.to_string(),
            r.archive_size.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_curve<W: Write>(out: W, curve: &[CurvePoint], with_lambda: bool) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "tick",
        "n",
        "r_b_mean",
        "r_b_ci",
        "r_a_mean",
        "r_a_ci",
        "r_lambda_mean",
        "r_lambda_ci",
    ])?;
    for p in curve {
        let lambda = |v: f64| if with_lambda { v.to_string() } else { String::new() };
        writer.write_record([
            p.tick.to_string(),
            p.n.to_string(),
            p.r_b.0.to_string(),
            p.r_b.1.to_string(),
            p.r_a.0.to_string(),
            p.r_a.1.to_string(),
            lambda(p.r_lambda.0),
            lambda(p.r_lambda.1),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn write_progress(path: &Path, log: &[IterationLog]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    writer.write_record(["iteration", "archive_size", "updates", "best_r_b", "best_r_a", "best_r_lambda"])?;
    for entry in log {
        writer.write_record([
            entry.iteration.to_string(),
            entry.archive_size.to_string(),
            entry.updates.to_string(),
            entry.best.r_b.to_string(),
            entry.best.r_a.to_string(),
            entry.best.r_lambda.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn write_sweep(dir: &Path, result: &SweepResult) -> Result<()> {
    write_summary(BufWriter::new(File::create(dir.join("summary.csv"))?), &result.rows())?;
    let records: Vec<&RunRecord> = result.groups.iter().flat_map(|g| g.runs.iter().map(|r| &r.record)).collect();
    write_runs(BufWriter::new(File::create(dir.join("runs.csv"))?), &records)?;
    for g in &result.groups {
        let with_lambda = g.row.mean_r_lambda.is_some();
        write_curve(BufWriter::new(File::create(dir.join(format!("curves_{}.csv", g.slug)))?), &g.curve, with_lambda)?;
    }
    Ok(())
}

/// Fixed-width results table: rewards to two decimals with the CI
/// half-width in parentheses.
pub fn format_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<10} {:<18} {:<18} R_lambda", "Setup", "R_b", "R_a");
    let cell = |m: f64, ci: f64| format!("{m:.2} (±{ci:.4})");
    for row in rows {
        let lambda = match (row.mean_r_lambda, row.ci_r_lambda) {
            (Some(m), Some(ci)) => cell(m, ci),
            _ => "N/A".to_string(),
        };
        let _ = writeln!(
            out,
            "{:<10} {:<18} {:<18} {}",
            row.label,
            cell(row.mean_r_b, row.ci_r_b),
            cell(row.mean_r_a, row.ci_r_a),
            lambda
        );
    }
    out
}
