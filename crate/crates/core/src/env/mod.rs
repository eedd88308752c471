//! Deterministic two-lane endless runner.
//!
//! The player runs along a top and a bottom lane while coins, potions and
//! obstacles scroll towards them. Spawns come from a fixed
//! [`SpawnSchedule`], so a session is fully determined by its schedule and
//! the action sequence, and any [`GameState`] can be snapshotted and resumed.

mod config;
mod features;
mod schedule;

use serde::{Deserialize, Serialize};

pub use config::EnvConfig;
pub use features::{featurize, Band, CellKey, CELL_KEY_SPACE};
pub use schedule::{Lane, ObjectKind, PotionEffect, SpawnEvent, SpawnSchedule};

use crate::{Error, Result};

const SPAWN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Action {
    Up = 0,
    Down = 1,
    UpAttack = 2,
    DownAttack = 3,
    Attack = 4,
    NoOp = 5,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::Up,
        Action::Down,
        Action::UpAttack,
        Action::DownAttack,
        Action::Attack,
        Action::NoOp,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Action> {
        Action::ALL.get(code as usize).copied()
    }

    pub fn target_lane(self) -> Option<Lane> {
        match self {
            Action::Up | Action::UpAttack => Some(Lane::Top),
            Action::Down | Action::DownAttack => Some(Lane::Bottom),
            Action::Attack | Action::NoOp => None,
        }
    }

    pub fn attacks(self) -> bool {
        matches!(self, Action::UpAttack | Action::DownAttack | Action::Attack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveObject {
    pub kind: ObjectKind,
    pub lane: Lane,
    /// Distance still to travel before reaching the player; never negative
    /// between steps.
    pub distance: f64,
}

/// Complete simulation state. Plain data, cheap to clone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub tick: u64,
    pub time: f64,
    pub player_lane: Lane,
    pub speed: f64,
    pub score: i64,
    pub objects: Vec<ActiveObject>,
    pub next_spawn_index: usize,
    pub passive_points: u32,
    pub coins_collected: u32,
    pub collisions: u32,
}

impl GameState {
    pub fn initial(config: &EnvConfig) -> Self {
        Self {
            tick: 0,
            time: 0.0,
            player_lane: Lane::Bottom,
            speed: config.base_speed,
            score: 0,
            objects: Vec::new(),
            next_spawn_index: 0,
            passive_points: 0,
            coins_collected: 0,
            collisions: 0,
        }
    }
}

/// A frozen copy of a [`GameState`], including the schedule cursor.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot(GameState);

impl Snapshot {
    pub fn tick(&self) -> u64 {
        self.0.tick
    }
}

/// What happened during one step, for callers that react to events.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepOutcome {
    pub coins: u32,
    pub potions: u32,
    pub collision: bool,
    pub obstacles_cleared: u32,
    /// Obstacles that reached the player's position in the other lane.
    pub near_misses: u32,
    pub passive_point: bool,
}

/// A session definition: constants plus the fixed spawn schedule.
#[derive(Debug, Clone)]
pub struct Endless {
    config: EnvConfig,
    schedule: SpawnSchedule,
    total_ticks: u64,
    passive_ticks: u64,
    speed_ticks: u64,
}

impl Endless {
    pub fn new(config: EnvConfig, schedule: SpawnSchedule) -> Result<Self> {
        config.validate()?;
        let sorted = schedule.events.windows(2).all(|w| w[0].time <= w[1].time);
        let in_range = schedule
            .events
            .iter()
            .all(|e| e.time >= 0.0 && e.time <= config.session_length);
        if !sorted || !in_range {
            return Err(Error::InvalidConfig(
                "spawn schedule must be sorted and within the session".into(),
            ));
        }
        Ok(Self {
            total_ticks: config.total_ticks(),
            passive_ticks: config.passive_ticks(),
            speed_ticks: config.speed_ticks(),
            config,
            schedule,
        })
    }

    /// Builds the environment with a schedule drawn from `seed`.
    pub fn seeded(config: EnvConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let schedule = SpawnSchedule::build(&config, seed);
        Self::new(config, schedule)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn schedule(&self) -> &SpawnSchedule {
        &self.schedule
    }

    pub fn total_ticks(&self) -> u64 {
        self.total_ticks
    }

    pub fn new_game(&self) -> GameState {
        GameState::initial(&self.config)
    }

    pub fn is_finished(&self, state: &GameState) -> bool {
        state.tick >= self.total_ticks
    }

    pub fn remaining_ticks(&self, state: &GameState) -> u64 {
        self.total_ticks.saturating_sub(state.tick)
    }

    pub fn featurize(&self, state: &GameState) -> CellKey {
        featurize(state, &self.config)
    }

    pub fn snapshot(&self, state: &GameState) -> Snapshot {
        Snapshot(state.clone())
    }

    pub fn restore(&self, snapshot: &Snapshot) -> GameState {
        snapshot.0.clone()
    }

    pub fn optimal_score(&self) -> i64 {
        optimal_score(&self.config, &self.schedule)
    }

    /// Advances one tick.
    ///
    /// Order within a tick: lane change, attack, object movement, arrivals
    /// (pickups, collision), spawns, passive point, speed increment.
    pub fn step(&self, state: &mut GameState, action: Action) -> Result<StepOutcome> {
        if self.is_finished(state) {
            return Err(Error::GameOver { tick: state.tick });
        }
        let config = &self.config;
        let mut outcome = StepOutcome::default();

        if let Some(lane) = action.target_lane() {
            state.player_lane = lane;
        }
        if action.attacks() {
            let range = config.attack_range(state.speed);
            let target = state
                .objects
                .iter()
                .enumerate()
                .filter(|(_, o)| o.kind.is_obstacle() && o.lane == state.player_lane && o.distance <= range)
                .min_by(|(_, a), (_, b)| a.distance.total_cmp(&b.distance))
                .map(|(i, _)| i);
            if let Some(i) = target {
                state.objects.remove(i);
                outcome.obstacles_cleared += 1;
            }
        }

        let travel = state.speed / config.tick_hz as f64;
        let mut arrived = Vec::new();
        state.objects.retain_mut(|o| {
            o.distance -= travel;
            if o.distance <= 0.0 {
                arrived.push(*o);
                false
            } else {
                true
            }
        });
        arrived.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        for object in arrived {
            if object.lane != state.player_lane {
                if object.kind.is_obstacle() {
                    outcome.near_misses += 1;
                }
                continue;
            }
            match object.kind {
                ObjectKind::Coin => {
                    state.score += config.coin_value;
                    state.coins_collected += 1;
                    outcome.coins += 1;
                }
                ObjectKind::Potion(effect) => {
                    state.speed = match effect {
                        PotionEffect::Faster => state.speed + config.potion_speed_delta,
                        PotionEffect::Slower => (state.speed - config.potion_speed_delta).max(config.min_speed),
                    };
                    outcome.potions += 1;
                }
                ObjectKind::Obstacle => {
                    state.score -= config.obstacle_penalty;
                    state.collisions += 1;
                    state.speed = config.base_speed;
                    state.objects.clear();
                    outcome.collision = true;
                    break;
                }
            }
        }

        state.tick += 1;
        state.time = state.tick as f64 / config.tick_hz as f64;

        let events = &self.schedule.events;
        while let Some(event) = events.get(state.next_spawn_index) {
            if event.time > state.time + SPAWN_TOLERANCE {
                break;
            }
            state.objects.push(ActiveObject {
                kind: event.kind,
                lane: event.lane,
                distance: config.spawn_lead_time * state.speed,
            });
            state.next_spawn_index += 1;
        }

        if state.tick.is_multiple_of(self.passive_ticks) {
            state.score += 1;
            state.passive_points += 1;
            outcome.passive_point = true;
        }
        if state.tick.is_multiple_of(self.speed_ticks) {
            state.speed += config.speed_increment;
        }
        Ok(outcome)
    }

    /// Replays `actions` from the initial state.
    pub fn play(&self, actions: &[Action]) -> Result<GameState> {
        let mut state = self.new_game();
        for &action in actions {
            self.step(&mut state, action)?;
        }
        Ok(state)
    }
}

/// Passive points over the whole session plus every scheduled coin.
pub fn optimal_score(config: &EnvConfig, schedule: &SpawnSchedule) -> i64 {
    let passive = (config.session_length / config.passive_point_interval).floor() as i64;
    passive + config.coin_value * schedule.coin_count() as i64
}
