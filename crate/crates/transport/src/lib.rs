//! Transport-map sampling from unnormalized densities.
//!
//! A single layer stores the square root of a target-to-reference ratio in
//! TT format; squaring it gives a nonnegative density whose marginals come
//! out in closed form from right-to-left Gram accumulators, so the
//! triangular (Rosenblatt) map and its inverse reduce to one-dimensional
//! monotone problems per coordinate.
//!
//! The multilayer map composes such layers over a tempering schedule
//! `beta_0 < ... < beta_L = 1`: each layer transports what the previous
//! composite leaves over, so every cross build only sees a mildly warped
//! density even when the final target is sharply concentrated.

mod dirt;
mod error;
mod reference;
mod schedule;
mod sirt;
mod snapshot;

pub use dirt::{dirt_build, DirtBuildReport, DirtConfig, DirtMap};
pub use error::TransportError;
pub use reference::ReferenceDensity;
pub use schedule::TemperingSchedule;
pub use sirt::{build_sirt_layer, build_sirt_layer_from_log, SirtLayer};
