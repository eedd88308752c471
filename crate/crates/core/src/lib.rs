//! Cell-archive exploration of a deterministic endless runner, rewarding
//! agents for a blend of game score and agreement with human arousal
//! annotations.
//!
//! The pieces are layered bottom-up:
//!
//! * [`env`]: the two-lane runner, its fixed spawn schedule, snapshots and
//!   the 8-parameter cell abstraction.
//! * [`arousal`]: human playtraces, the mean arousal trace and the
//!   nearest-state arousal lookup.
//! * [`reward`]: score normalization and the λ blend.
//! * [`archive`] and [`explorer`]: the exploration phase proper.
//! * [`experiment`]: λ sweeps, baselines, statistics and CSV output.

// Validation writes `!(x > 0.0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod archive;
pub mod arousal;
pub mod env;
pub mod error;
pub mod experiment;
pub mod explorer;
pub mod reward;

pub use error::{Error, Result};
