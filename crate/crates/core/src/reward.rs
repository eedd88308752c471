//! Behavior and blended rewards.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The blend weight λ: 0 rewards score only, 1 rewards arousal imitation
/// only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RewardWeights {
    lambda: f64,
}

impl RewardWeights {
    pub fn new(lambda: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&lambda) {
            Ok(Self { lambda })
        } else {
            Err(Error::OutOfUnitRange { what: "lambda", value: lambda })
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl TryFrom<f64> for RewardWeights {
    type Error = Error;

    fn try_from(lambda: f64) -> Result<Self> {
        Self::new(lambda)
    }
}

impl From<RewardWeights> for f64 {
    fn from(weights: RewardWeights) -> f64 {
        weights.lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBundle {
    pub r_b: f64,
    pub r_a: f64,
    pub r_lambda: f64,
}

impl RewardBundle {
    pub fn new(r_b: f64, r_a: f64, weights: RewardWeights) -> Result<Self> {
        Ok(Self { r_b, r_a, r_lambda: blended_reward(r_a, r_b, weights)? })
    }
}

/// Score as a fraction of the optimum, clamped to `[0, 1]`.
pub fn behavior_reward(score: i64, optimal: i64) -> Result<f64> {
    if optimal <= 0 {
        return Err(Error::NonPositiveOptimal(optimal));
    }
    Ok((score as f64 / optimal as f64).clamp(0.0, 1.0))
}

/// `λ·r_a + (1 − λ)·r_b`.
pub fn blended_reward(r_a: f64, r_b: f64, weights: RewardWeights) -> Result<f64> {
    for (what, value) in [("r_a", r_a), ("r_b", r_b)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfUnitRange { what, value });
        }
    }
    let lambda = weights.lambda;
    Ok(lambda * r_a + (1.0 - lambda) * r_b)
}
