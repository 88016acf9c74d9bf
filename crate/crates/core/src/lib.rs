//! Exponential decay criteria for the scalar negative feedback equation with
//! distributed delay,
//!
//! ```text
//! u'(t) = -∫ u(t - s) dP(s),   u(s) = 1 for s <= 0,
//! ```
//!
//! where `P` is a probability measure on `[0, ∞)`.
//!
//! The crate is split along the analysis pipeline:
//!
//! - [`distributions`]: the delay measure and its exponential moments
//!   `M_P(μ) = ∫ e^{μs} dP(s)`.
//! - [`feasibility`]: the two moment conditions `M_P(2μ) <= μ²` and
//!   `M_P(μ)(M_P(μ) - 1) < μ` for some `μ > 1`, the guaranteed decay rate of
//!   `y = u²/2`, and the closed forms available for constant and Gamma delays.
//! - [`critical`]: bisection of the feasible/infeasible boundary along one
//!   distribution parameter, and whole critical curves.
//! - [`sim`]: fixed-step RK4 method-of-steps integration of the equation
//!   itself, trajectory classification and checks of the decay guarantees on
//!   simulated solutions.
//!
//! Everything here is `no_std` + `alloc`; IO and the command line live in the
//! `delay-decay` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod critical;
pub mod distributions;
mod error;
pub mod feasibility;
mod math;
pub mod quadrature;
pub mod sim;
pub mod special;

pub use critical::{CriticalCurve, CurveConfig, CurvePoint, FeasibleSide, PointStatus};
pub use distributions::{DelayDistribution, Family};
pub use error::{Error, ParamError};
pub use feasibility::{ConditionReport, FeasibilityResult, SearchConfig};
pub use sim::{Regime, SimConfig, Trajectory};

