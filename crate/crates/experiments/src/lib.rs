//! Sweeps over the fractional order, report files, and the invariant
//! suites behind the `check` command.

pub mod checks;
pub mod config;
pub mod emit;
pub mod plot;
pub mod sweep;
