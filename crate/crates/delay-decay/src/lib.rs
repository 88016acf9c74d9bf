//! File formats and command line for `delay-decay-core`.

pub mod cli;
pub mod config;
pub mod output;
pub mod spec;

pub use cli::run;
pub use spec::{parse_dist_spec, render, SpecError};
