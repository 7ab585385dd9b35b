//! Fractional nonparametric Plateau problem with an obstacle, on an interval,
//! and a pixel geometry engine for planar sets.

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod domain;
pub mod functional;
pub mod geometry;
pub mod kernel;
pub mod quad;
pub mod solver;
