use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const TICK_TOLERANCE: f64 = 1e-9;

/// Game constants for the endless runner.
///
/// Durations are in seconds, speeds in distance units per second. Every
/// duration that drives a periodic rule (session length, passive points,
/// speed increments) must be a whole number of ticks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub session_length: f64,
    pub tick_hz: u32,
    pub passive_point_interval: f64,
    pub speed_increase_interval: f64,
    pub speed_increment: f64,
    pub base_speed: f64,
    /// Floor applied when a slowing potion is picked up.
    pub min_speed: f64,
    pub obstacle_penalty: i64,
    pub coin_value: i64,
    pub potion_speed_delta: f64,
    /// Near/mid and mid/far boundaries, expressed as travel time at the
    /// current speed. The attack range equals the near boundary.
    pub band_times: [f64; 2],
    /// Objects appear this many seconds of travel ahead of the player.
    pub spawn_lead_time: f64,
    pub spawn_min_gap: f64,
    pub spawn_max_gap: f64,
    /// Relative spawn weights for coin, potion and obstacle.
    pub object_weights: [f64; 3],
    pub lane_count: u32,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            session_length: 120.0,
            tick_hz: 4,
            passive_point_interval: 3.0,
            speed_increase_interval: 10.0,
            speed_increment: 0.4,
            base_speed: 4.0,
            min_speed: 2.0,
            obstacle_penalty: 10,
            coin_value: 1,
            potion_speed_delta: 1.0,
            band_times: [1.0, 2.5],
            spawn_lead_time: 3.5,
            spawn_min_gap: 0.6,
            spawn_max_gap: 1.4,
            object_weights: [3.0, 1.0, 4.0],
            lane_count: 2,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.session_length > 0.0) {
            return bad(format!("session_length must be positive, got {}", self.session_length));
        }
        if self.tick_hz < 1 {
            return bad("tick_hz must be at least 1".into());
        }
        if self.lane_count != 2 {
            return bad(format!("lane_count must be 2, got {}", self.lane_count));
        }
        for (name, value) in [
            ("passive_point_interval", self.passive_point_interval),
            ("speed_increase_interval", self.speed_increase_interval),
            ("base_speed", self.base_speed),
            ("min_speed", self.min_speed),
            ("spawn_lead_time", self.spawn_lead_time),
            ("spawn_min_gap", self.spawn_min_gap),
            ("spawn_max_gap", self.spawn_max_gap),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return bad(format!("{name} must be positive and finite, got {value}"));
            }
        }
        if self.spawn_min_gap > self.spawn_max_gap {
            return bad(format!(
                "spawn_min_gap {} exceeds spawn_max_gap {}",
                self.spawn_min_gap, self.spawn_max_gap
            ));
        }
        if !(self.band_times[0] > 0.0 && self.band_times[0] < self.band_times[1]) {
            return bad(format!(
                "band_times must be positive and strictly increasing, got {:?}",
                self.band_times
            ));
        }
        if self.min_speed > self.base_speed {
            return bad("min_speed exceeds base_speed".into());
        }
        if self.speed_increment < 0.0 || self.potion_speed_delta < 0.0 {
            return bad("speed_increment and potion_speed_delta must be non-negative".into());
        }
        if self.obstacle_penalty < 0 || self.coin_value < 0 {
            return bad("obstacle_penalty and coin_value must be non-negative".into());
        }
        if self.object_weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite())
            || self.object_weights.iter().sum::<f64>() <= 0.0
        {
            return bad(format!("object_weights must be non-negative with a positive sum, got {:?}", self.object_weights));
        }
        for (name, secs) in [
            ("session_length", self.session_length),
            ("passive_point_interval", self.passive_point_interval),
            ("speed_increase_interval", self.speed_increase_interval),
        ] {
            if self.whole_ticks(secs).is_none() {
                return bad(format!("{name} = {secs}s is not a whole number of ticks at {} Hz", self.tick_hz));
            }
        }
        Ok(())
    }

    /// Converts a duration to ticks, if it is a whole number of them.
    pub fn whole_ticks(&self, secs: f64) -> Option<u64> {
        let ticks = secs * self.tick_hz as f64;
        let rounded = ticks.round();
        if rounded >= 1.0 && (ticks - rounded).abs() <= TICK_TOLERANCE * ticks.max(1.0) {
            Some(rounded as u64)
        } else {
            None
        }
    }

    pub fn total_ticks(&self) -> u64 {
        self.whole_ticks(self.session_length).unwrap_or(0)
    }

    pub fn passive_ticks(&self) -> u64 {
        self.whole_ticks(self.passive_point_interval).unwrap_or(u64::MAX)
    }

    pub fn speed_ticks(&self) -> u64 {
        self.whole_ticks(self.speed_increase_interval).unwrap_or(u64::MAX)
    }

    pub fn tick_seconds(&self) -> f64 {
        1.0 / self.tick_hz as f64
    }

    /// Upper bounds of the near and mid bands at `speed`.
    pub fn band_limits(&self, speed: f64) -> [f64; 2] {
        [self.band_times[0] * speed, self.band_times[1] * speed]
    }

    pub fn attack_range(&self, speed: f64) -> f64 {
        self.band_times[0] * speed
    }

    /// Loads a TOML file of `key = value` pairs; missing keys keep their
    /// defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}
