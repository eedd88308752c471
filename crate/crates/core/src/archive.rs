//! The cell archive: the best known way to reach each visited cell.

use std::io::{BufRead, Write};

use indexmap::map::Entry;
use indexmap::IndexMap;
use rand::Rng;

use crate::env::{Action, CellKey, Snapshot};
use crate::reward::RewardBundle;
use crate::{Error, Result};

/// Actions from the initial state to a cell, with the arousal histories
/// observed along the way.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub actions: Vec<Action>,
    pub h_history: Vec<f64>,
    pub a_history: Vec<f64>,
    pub end_tick: u64,
    pub raw_score: i64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub key: CellKey,
    pub trajectory: Trajectory,
    pub rewards: RewardBundle,
    pub visits: u64,
    /// Game state at the end of the trajectory, for returning without replay.
    pub snapshot: Snapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Inserted,
    Updated,
    Rejected,
}

/// Whether a candidate should replace the stored cell: strictly higher
/// r_λ, or equal r_λ reached with fewer actions.
fn improves(candidate: &RewardBundle, candidate_len: usize, stored: &Cell) -> bool {
    candidate.r_lambda > stored.rewards.r_lambda
        || (candidate.r_lambda == stored.rewards.r_lambda && candidate_len < stored.trajectory.len())
}

/// Cells keyed by [`CellKey`], in first-insertion order.
#[derive(Debug, Clone, Default)]
pub struct Archive {
    cells: IndexMap<CellKey, Cell>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, key: &CellKey) -> Option<&Cell> {
        self.cells.get(key)
    }

    /// Cells in insertion order.
    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.values()
    }

    pub fn insert_or_update(&mut self, candidate: Cell) -> UpdateOutcome {
        let key = candidate.key;
        let rewards = candidate.rewards;
        let len = candidate.trajectory.len();
        let mut candidate = Some(candidate);
        self.offer(key, rewards, len, || {
            let cell = candidate.take().expect("built once");
            (cell.trajectory, cell.snapshot)
        })
    }

    /// Like [`insert_or_update`](Self::insert_or_update), but only builds
    /// the trajectory and snapshot when the candidate is accepted.
    pub fn offer<F>(&mut self, key: CellKey, rewards: RewardBundle, trajectory_len: usize, build: F) -> UpdateOutcome
    where
        F: FnOnce() -> (Trajectory, Snapshot),
    {
        match self.cells.entry(key) {
            Entry::Vacant(slot) => {
                let (trajectory, snapshot) = build();
                slot.insert(Cell { key, trajectory, rewards, visits: 1, snapshot });
                UpdateOutcome::Inserted
            }
            Entry::Occupied(mut slot) => {
                let stored = slot.get_mut();
                stored.visits += 1;
                if improves(&rewards, trajectory_len, stored) {
                    let (trajectory, snapshot) = build();
                    stored.trajectory = trajectory;
                    stored.snapshot = snapshot;
                    stored.rewards = rewards;
                    UpdateOutcome::Updated
                } else {
                    UpdateOutcome::Rejected
                }
            }
        }
    }

    /// Uniform choice over the discovered cells, ignoring reward and visits.
    pub fn select_cell<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<&Cell> {
        if self.cells.is_empty() {
            return Err(Error::EmptyArchive);
        }
        let i = rng.gen_range(0..self.cells.len());
        Ok(&self.cells[i])
    }

    /// Highest r_λ; ties go to higher r_b, then the shorter trajectory, then
    /// the earlier-inserted cell.
    pub fn best_cell(&self) -> Result<&Cell> {
        let mut best: Option<&Cell> = None;
        for cell in self.cells.values() {
            let better = match best {
                None => true,
                Some(b) => {
                    let (c, s) = (&cell.rewards, &b.rewards);
                    c.r_lambda > s.r_lambda
                        || (c.r_lambda == s.r_lambda
                            && (c.r_b > s.r_b
                                || (c.r_b == s.r_b && cell.trajectory.len() < b.trajectory.len())))
                }
            };
            if better {
                best = Some(cell);
            }
        }
        best.ok_or(Error::EmptyArchive)
    }

    /// One CSV row per cell in insertion order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record([
            "lane_top",
            "lane_bottom",
            "b1",
            "b2",
            "b3",
            "b4",
            "b5",
            "b6",
            "r_b",
            "r_a",
            "r_lambda",
            "visits",
            "trajectory_length",
            "actions",
        ])?;
        for cell in self.cells.values() {
            let mut row: Vec<String> = cell.key.params().iter().map(u8::to_string).collect();
            row.push(cell.rewards.r_b.to_string());
            row.push(cell.rewards.r_a.to_string());
            row.push(cell.rewards.r_lambda.to_string());
            row.push(cell.visits.to_string());
            row.push(cell.trajectory.len().to_string());
            row.push(action_string(&cell.trajectory.actions));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

pub fn action_string(actions: &[Action]) -> String {
    actions.iter().map(|a| char::from(b'0' + a.code())).collect()
}

/// Writes a replayable trajectory: optional `# key=value` comment lines,
/// then one action code (0-5) per line.
pub fn write_actions<W: Write>(mut out: W, actions: &[Action], comments: &[(&str, String)]) -> Result<()> {
    for (key, value) in comments {
        writeln!(out, "# {key}={value}")?;
    }
    for action in actions {
        writeln!(out, "{}", action.code())?;
    }
    out.flush()?;
    Ok(())
}

/// Parsed trajectory file: the actions plus any `# key=value` comments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryFile {
    pub actions: Vec<Action>,
    pub comments: Vec<(String, String)>,
}

impl TrajectoryFile {
    pub fn comment(&self, key: &str) -> Option<&str> {
        self.comments.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn read_actions<R: BufRead>(input: R) -> Result<TrajectoryFile> {
    let mut file = TrajectoryFile::default();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                file.comments.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        let action = text
            .parse::<u8>()
            .ok()
            .and_then(Action::from_code)
            .ok_or_else(|| Error::Parse { line: i as u64 + 1, msg: format!("not an action code: `{text}`") })?;
        file.actions.push(action);
    }
    Ok(file)
}
