use std::fmt;

use serde::{Deserialize, Serialize};

use super::{EnvConfig, GameState, Lane};

/// What a distance band on one lane contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    Empty = 0,
    Item = 1,
    Obstacle = 2,
}

impl Band {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Band> {
        match code {
            0 => Some(Band::Empty),
            1 => Some(Band::Item),
            2 => Some(Band::Obstacle),
            _ => None,
        }
    }
}

/// Number of distinct cell keys: two lanes times three values in six bands.
pub const CELL_KEY_SPACE: usize = 2 * 729;

/// The discretized game state that identifies an archive cell.
///
/// Band slots are ordered top-near, top-mid, top-far, bottom-near,
/// bottom-mid, bottom-far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub lane: Lane,
    pub bands: [Band; 6],
}

impl CellKey {
    pub fn empty(lane: Lane) -> Self {
        Self { lane, bands: [Band::Empty; 6] }
    }

    pub fn slot(lane: Lane, band: usize) -> usize {
        lane.index() * 3 + band
    }

    /// The eight parameters: lane_top, lane_bottom, then the band codes.
    pub fn params(&self) -> [u8; 8] {
        let mut out = [0u8; 8];
        out[0] = (self.lane == Lane::Top) as u8;
        out[1] = (self.lane == Lane::Bottom) as u8;
        for (dst, band) in out[2..].iter_mut().zip(self.bands) {
            *dst = band.code();
        }
        out
    }

    /// Hamming distance over the eight parameters.
    pub fn hamming(&self, other: &CellKey) -> u32 {
        let (a, b) = (self.params(), other.params());
        a.iter().zip(b.iter()).filter(|(x, y)| x != y).count() as u32
    }

    /// Dense index in `0..CELL_KEY_SPACE`.
    pub fn index(&self) -> usize {
        let bands = self.bands.iter().fold(0usize, |acc, b| acc * 3 + b.code() as usize);
        self.lane.index() * 729 + bands
    }

    pub fn from_index(index: usize) -> Option<CellKey> {
        if index >= CELL_KEY_SPACE {
            return None;
        }
        let lane = if index / 729 == 0 { Lane::Top } else { Lane::Bottom };
        let mut rest = index % 729;
        let mut bands = [Band::Empty; 6];
        for slot in bands.iter_mut().rev() {
            *slot = Band::from_code((rest % 3) as u8)?;
            rest /= 3;
        }
        Some(CellKey { lane, bands })
    }

    pub fn all() -> impl Iterator<Item = CellKey> {
        (0..CELL_KEY_SPACE).filter_map(CellKey::from_index)
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.params() {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Maps a state to its cell key.
///
/// Bands are `[0, near]`, `(near, mid]` and `(mid, ∞)` in distance, with
/// limits scaled by the current speed; an object sitting exactly on a limit
/// belongs to the nearer band. Obstacles dominate items within a band.
pub fn featurize(state: &GameState, config: &EnvConfig) -> CellKey {
    let [near, mid] = config.band_limits(state.speed);
    let mut key = CellKey::empty(state.player_lane);
    for object in &state.objects {
        let band = if object.distance <= near {
            0
        } else if object.distance <= mid {
            1
        } else {
            2
        };
        let slot = &mut key.bands[CellKey::slot(object.lane, band)];
        let seen = if object.kind.is_obstacle() { Band::Obstacle } else { Band::Item };
        *slot = (*slot).max(seen);
    }
    key
}
