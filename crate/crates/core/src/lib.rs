//! Simulation laboratory for query-bounded adversaries: spherical-cap
//! geometry, two synthetic tasks, black-box attacks and reductions, a
//! randomized partition defense, and seeded Monte Carlo experiment harnesses.

pub mod adversaries;
pub mod classifiers;
pub mod defense;
pub mod error;
pub mod estimate;
pub mod geometry;
pub mod label;
pub mod metrics;
pub mod rng;
pub mod tasks;

pub use error::{Error, Result};
pub use estimate::Estimate;
pub use label::Label;
pub use rng::RngStream;
