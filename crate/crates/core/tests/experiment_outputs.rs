use std::collections::HashMap;
use std::fs;
use std::path::Path;

use affect_explore::archive::read_actions;
use affect_explore::experiment::{Experiment, ExperimentConfig, SweepResult};

mod common;

fn small_config(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        runs_per_lambda: 3,
        iterations: 300,
        synthetic_sessions: 6,
        output_dir: dir.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn sweep(config: ExperimentConfig) -> SweepResult {
    let out = config.output_dir.clone();
    Experiment::prepare(config).unwrap().run_sweep(Some(&out)).unwrap()
}

fn records(path: &Path) -> Vec<HashMap<String, String>> {
    csv::Reader::from_path(path).unwrap().deserialize().map(|r| r.unwrap()).collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

#[test]
fn summary_is_recomputable_from_the_run_records() {
    let dir = tempfile::tempdir().unwrap();
    let result = sweep(small_config(dir.path()));
    let summary = records(&dir.path().join("summary.csv"));
    let runs = records(&dir.path().join("runs.csv"));
    assert_eq!(summary.len(), 7);
    assert_eq!(runs.len(), 6 * 3);
    assert_eq!(result.rows().len(), 7);

    for row in summary.iter().filter(|r| r["label"] != "Human") {
        let mine: Vec<&HashMap<String, String>> = runs.iter().filter(|r| r["label"] == row["label"]).collect();
        assert_eq!(mine.len(), 3);
        for metric in ["r_b", "r_a", "r_lambda"] {
            let xs: Vec<f64> = mine.iter().map(|r| num(r, metric)).collect();
            let mean = xs.iter().sum::<f64>() / 3.0;
            let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
            let half = common::t_table(2) * sd / 3f64.sqrt();
            if row["label"] == "Random" && metric == "r_lambda" {
                assert_eq!(row["mean_r_lambda"], "");
                assert_eq!(row["ci_r_lambda"], "");
                continue;
            }
            assert!((num(row, &format!("mean_{metric}")) - mean).abs() <= 1e-12);
            assert!((num(row, &format!("ci_{metric}")) - half).abs() <= 1e-9);
        }
    }
    let human = summary.iter().find(|r| r["label"] == "Human").unwrap();
    assert_eq!(human["n"], "6");
    assert_eq!(human["mean_r_lambda"], "");
}

#[test]
fn saved_best_trajectories_replay_to_their_records() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let experiment = Experiment::prepare(config.clone()).unwrap();
    experiment.run_sweep(Some(dir.path())).unwrap();
    let runs = records(&dir.path().join("runs.csv"));
    for run in runs.iter().filter(|r| r["label"] != "Random") {
        let lambda = num(run, "lambda");
        let path = dir.path().join(format!("best_lambda_{lambda:.2}_{}.traj", run["run"]));
        let file = read_actions(fs::read(&path).unwrap().as_slice()).unwrap();
        assert_eq!(file.actions.len().to_string(), run["trajectory_length"]);
        let replayed = experiment
            .replay_file(
                &file.actions,
                file.comment("lambda").unwrap().parse().unwrap(),
                file.comment("subset_seed").unwrap().parse().unwrap(),
                file.comment("schedule_seed").unwrap().parse().unwrap(),
            )
            .unwrap();
        assert_eq!(replayed.rewards.r_b, num(run, "r_b"));
        assert_eq!(replayed.rewards.r_a, num(run, "r_a"));
        assert_eq!(replayed.rewards.r_lambda, num(run, "r_lambda"));
    }
}

#[test]
fn curves_cover_the_session_and_stay_in_range() {
    let dir = tempfile::tempdir().unwrap();
    sweep(small_config(dir.path()));
    for slug in ["lambda_0.00", "lambda_1.00", "random"] {
        let curve = records(&dir.path().join(format!("curves_{slug}.csv")));
        assert!(!curve.is_empty());
        assert_eq!(curve[0]["tick"], "0");
        for point in &curve {
            for key in ["r_b_mean", "r_a_mean"] {
                assert!((0.0..=1.0).contains(&num(point, key)), "{slug} {key}");
            }
        }
    }
    // The random baseline plays whole sessions.
    assert_eq!(records(&dir.path().join("curves_random.csv")).len(), 481);
}

#[test]
fn a_single_run_has_zero_width_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig { runs_per_lambda: 1, lambdas: vec![0.5], ..small_config(dir.path()) };
    let result = sweep(config);
    for row in result.rows().iter().filter(|r| r.label != "Human") {
        assert_eq!((row.n, row.ci_r_b, row.ci_r_a), (1, 0.0, 0.0));
    }
}

#[test]
fn varying_schedules_changes_results_but_stays_seeded() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let varied = |dir: &Path| ExperimentConfig { vary_schedule: true, ..small_config(dir) };
    let a = sweep(varied(d1.path()));
    let b = sweep(varied(d2.path()));
    assert_eq!(a.rows(), b.rows());
    let schedules: std::collections::HashSet<u64> =
        a.groups.iter().flat_map(|g| g.runs.iter().map(|r| r.record.seeds.schedule)).collect();
    assert!(schedules.len() > 1);
}

#[test]
fn config_files_parse_and_reject_unknown_keys() {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml")).unwrap();
    assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), ExperimentConfig::default());
    assert!(ExperimentConfig::from_toml_str("runs_per_lambda = 2\nbogus = 1\n").is_err());
    assert!(ExperimentConfig::from_toml_str("lambdas = [1.5]\n").is_err());
    let tweaked = ExperimentConfig::from_toml_str("iterations = 10\n[env]\ntick_hz = 8\n").unwrap();
    assert_eq!((tweaked.iterations, tweaked.env.tick_hz), (10, 8));
}

#[test]
fn loaded_datasets_drive_the_same_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let generated = sweep(small_config(dir.path()));
    let out = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        dataset_path: Some(dir.path().join("dataset.csv")),
        ..small_config(out.path())
    };
    let loaded = sweep(config);
    assert_eq!(generated.rows(), loaded.rows());
    assert!(!out.path().join("dataset.csv").exists());
}

#[test]
fn behavior_curves_only_drop_on_collisions() {
    let dir = tempfile::tempdir().unwrap();
    let experiment = Experiment::prepare(small_config(dir.path())).unwrap();
    let result = experiment.run_sweep(None).unwrap();
    for run in result.groups.iter().flat_map(|g| &g.runs) {
        let mut state = experiment.env.new_game();
        for (tick, &action) in run.best_actions.iter().enumerate() {
            let collision = experiment.env.step(&mut state, action).unwrap().collision;
            let (before, after) = (run.curve[tick].r_b, run.curve[tick + 1].r_b);
            assert!(after >= before || collision, "{} run {} tick {}", run.record.label, run.record.run, tick + 1);
            assert!((0.0..=1.0).contains(&run.curve[tick + 1].r_a));
        }
    }
}
