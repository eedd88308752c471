use std::fmt;
use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EnvConfig;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Lane {
    Top,
    Bottom,
}

impl Lane {
    pub fn index(self) -> usize {
        match self {
            Lane::Top => 0,
            Lane::Bottom => 1,
        }
    }

    pub fn other(self) -> Lane {
        match self {
            Lane::Top => Lane::Bottom,
            Lane::Bottom => Lane::Top,
        }
    }
}

impl fmt::Display for Lane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lane::Top => "top",
            Lane::Bottom => "bottom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PotionEffect {
    Faster,
    Slower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectKind {
    Coin,
    Potion(PotionEffect),
    Obstacle,
}

impl ObjectKind {
    pub fn is_obstacle(self) -> bool {
        matches!(self, ObjectKind::Obstacle)
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectKind::Coin => "coin",
            ObjectKind::Potion(PotionEffect::Faster) => "potion_fast",
            ObjectKind::Potion(PotionEffect::Slower) => "potion_slow",
            ObjectKind::Obstacle => "obstacle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpawnEvent {
    pub time: f64,
    pub lane: Lane,
    pub kind: ObjectKind,
}

/// The fixed sequence of objects for one session, sorted by spawn time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpawnSchedule {
    pub events: Vec<SpawnEvent>,
}

impl SpawnSchedule {
    pub fn new(mut events: Vec<SpawnEvent>) -> Self {
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Self { events }
    }

    /// Draws a schedule from `seed`. Gaps between consecutive events (and
    /// before the first) are uniform in `[spawn_min_gap, spawn_max_gap]`,
    /// lanes are uniform, kinds follow `object_weights` and potions are
    /// faster/slower with equal odds.
    pub fn build(config: &EnvConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kinds = WeightedIndex::new(config.object_weights)
            .expect("object weights are validated with the config");
        let mut events = Vec::new();
        let mut time = 0.0;
        loop {
            let gap = if config.spawn_min_gap == config.spawn_max_gap {
                config.spawn_min_gap
            } else {
                rng.gen_range(config.spawn_min_gap..=config.spawn_max_gap)
            };
            time += gap;
            if time > config.session_length {
                break;
            }
            let lane = if rng.gen_bool(0.5) { Lane::Top } else { Lane::Bottom };
            let kind = match kinds.sample(&mut rng) {
                0 => ObjectKind::Coin,
                1 => ObjectKind::Potion(if rng.gen_bool(0.5) {
                    PotionEffect::Faster
                } else {
                    PotionEffect::Slower
                }),
                _ => ObjectKind::Obstacle,
            };
            events.push(SpawnEvent { time, lane, kind });
        }
        Self { events }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn coin_count(&self) -> usize {
        self.events.iter().filter(|e| e.kind == ObjectKind::Coin).count()
    }

    /// Writes `spawn_time,lane,kind` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["spawn_time", "lane", "kind"])?;
        for event in &self.events {
            writer.write_record([event.time.to_string(), event.lane.to_string(), event.kind.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}
