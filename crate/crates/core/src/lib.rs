//! Harvesting a renewable resource spread over a circle.
//!
//! A harvester circles the resource at constant speed, taking a share of the
//! local stock on each pass. The crate evaluates and optimizes such plans for
//! a non-durable good, solves the discretized optimal-control problem with an
//! adjoint sweep, and computes durable-good monopoly and Cournot outcomes
//! together with a limit-pricing analysis.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Grid recursions index several (round, node) arrays at once.
#![allow(clippy::needless_range_loop)]

pub mod durable;
pub mod error;
pub mod fmt;
pub mod game;
pub mod limitp;
pub mod model;
pub mod nondurable;
pub mod optctrl;
pub mod par;
pub mod scalar;
pub mod simplex;

pub use error::{Error, Result};
pub use model::{ModelParams, RoundGrid};
pub use par::Exec;
