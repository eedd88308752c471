use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::time::Instant;

use affect_explore::archive::read_actions;
use affect_explore::arousal::write_sessions;
use affect_explore::experiment::{
    format_table, generate_synthetic_sessions, write_summary, Experiment, ExperimentConfig,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(version, about = "Explore an endless runner with score and arousal-imitation rewards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Playtrace CSV with human sessions.
    #[arg(long, conflicts_with = "synthetic")]
    dataset: Option<PathBuf>,
    /// Generate this many synthetic sessions instead of loading a dataset.
    #[arg(long)]
    synthetic: Option<usize>,
    /// Master seed for all runs.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = &self.dataset {
            config.dataset_path = Some(path.clone());
        }
        if let Some(n) = self.synthetic {
            config.dataset_path = None;
            config.synthetic_sessions = n;
        }
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(runs) = self.runs {
            config.runs_per_lambda = runs;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every λ setting, the random baseline and the human reference.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated λ values.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random-action baseline only.
    Baseline {
        #[command(flatten)]
        common: Common,
    },
    /// Score and arousal agreement of the human sessions.
    Humanstats {
        #[command(flatten)]
        common: Common,
    },
    /// Write synthetic sessions in the playtrace format.
    Gendata {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a saved best trajectory and report its rewards.
    Replay {
        trajectory: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sweep { common, lambdas, iterations, out } => {
            let mut config = common.load()?;
            if let Some(lambdas) = lambdas {
                config.lambdas = lambdas;
            }
            if let Some(iterations) = iterations {
                config.iterations = iterations;
            }
            if let Some(out) = out {
                config.output_dir = out;
            }
            config.validate()?;
            let started = Instant::now();
            let experiment = Experiment::prepare(config)?;
            let out = experiment.config.output_dir.clone();
            let result = experiment.run_sweep(Some(&out))?;
            print!("{}", format_table(&result.rows()));
            eprintln!("wrote {} in {:.1}s", out.display(), started.elapsed().as_secs_f64());
        }
        Command::Baseline { common } => {
            let experiment = Experiment::prepare(common.load()?)?;
            let group = experiment.random_baseline()?;
            print!("{}", format_table(&[group.row]));
        }
        Command::Humanstats { common } => {
            let experiment = Experiment::prepare(common.load()?)?;
            let row = experiment.human_stats()?;
            print!("{}", format_table(std::slice::from_ref(&row)));
            write_summary(std::io::stdout().lock(), &[row])?;
        }
        Command::Gendata { common, n, out } => {
            let config = common.load()?;
            let sessions = generate_synthetic_sessions(
                &config.env,
                config.synthetic_schedule_base,
                n,
                config.policy_mix,
                config.synthetic_seed,
            )?;
            write_sessions(BufWriter::new(File::create(&out)?), &sessions)?;
            eprintln!("wrote {n} sessions to {}", out.display());
        }
        Command::Replay { trajectory, common } => {
            let config = common.load()?;
            let file = read_actions(BufReader::new(
                File::open(&trajectory).with_context(|| format!("opening {}", trajectory.display()))?,
            ))?;
            let header = |key: &str| -> Result<String> {
                match file.comment(key) {
                    Some(value) => Ok(value.to_string()),
                    None => bail!("trajectory file lacks a `# {key}=...` header"),
                }
            };
            let lambda: f64 = header("lambda")?.parse()?;
            let subset_seed: u64 = header("subset_seed")?.parse()?;
            let schedule_seed: u64 = header("schedule_seed")?.parse()?;
            let experiment = Experiment::prepare(config)?;
            let replayed = experiment.replay_file(&file.actions, lambda, subset_seed, schedule_seed)?;
            println!("actions   {}", file.actions.len());
            println!("tick      {}", replayed.state.tick);
            println!("score     {}", replayed.state.score);
            println!("r_b       {}", replayed.rewards.r_b);
            println!("r_a       {}", replayed.rewards.r_a);
            println!("r_lambda  {}", replayed.rewards.r_lambda);
            for key in ["r_b", "r_a", "r_lambda"] {
                if let Some(stored) = file.comment(key) {
                    let value = match key {
                        "r_b" => replayed.rewards.r_b,
                        "r_a" => replayed.rewards.r_a,
                        _ => replayed.rewards.r_lambda,
                    };
                    if stored.parse::<f64>()? != value {
                        bail!("replayed {key} = {value} differs from stored {stored}");
                    }
                }
            }
        }
    }
    Ok(())
}
