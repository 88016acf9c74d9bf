//! Post-processing of simulated trajectories.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{simulate, SimConfig, Trajectory};
use crate::distributions::DelayDistribution;
use crate::error::Error;
use crate::feasibility::{find_feasible_mu, FeasibilityResult, SearchConfig};
use crate::math::{exp, ln};

/// Shortest horizon on which [`classify`] commits to a regime.
pub const CLASSIFY_MIN_HORIZON: f64 = 20.0;

/// Relative slack on both sides of the envelope inequalities.
pub const ENVELOPE_SLACK: f64 = 1e-6;

const MONOTONE_TOL: f64 = 1e-12;
const MAX_RECORDED_VIOLATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    MonotoneDecay,
    DampedOscillation,
    GrowingOscillation,
    Inconclusive,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::MonotoneDecay => "monotone_decay",
            Regime::DampedOscillation => "damped_oscillation",
            Regime::GrowingOscillation => "growing_oscillation",
            Regime::Inconclusive => "inconclusive",
        }
    }
}

/// Zero crossings of the grid values.
///
/// Adjacent values of opposite sign give a linearly interpolated time. When
/// the sign flips across a run of exact zeros the first zero's grid time is
/// used. A trajectory that never leaves zero has no crossings.
pub fn detect_sign_changes(traj: &Trajectory) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for (i, &u) in traj.values.iter().enumerate() {
        if u == 0.0 {
            continue;
        }
        if let Some((j, v)) = last {
            if (v < 0.0) != (u < 0.0) {
                let t = if j + 1 == i {
                    traj.time(j) + traj.h * v / (v - u)
                } else {
                    traj.time(j + 1)
                };
                out.push(t);
            }
        }
        last = Some((i, u));
    }
    out
}

/// `|u|` at interior local extrema, one entry per plateau.
fn extrema_magnitudes(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    // Direction of the last strict move: +1 up, -1 down.
    let mut dir = 0i8;
    for w in values.windows(2) {
        let d = if w[1] > w[0] {
            1
        } else if w[1] < w[0] {
            -1
        } else {
            0
        };
        if d != 0 {
            if dir != 0 && d != dir {
                out.push(w[0].abs());
            }
            dir = d;
        }
    }
    out
}

pub fn classify(traj: &Trajectory) -> Regime {
    if traj.blow_up {
        return Regime::GrowingOscillation;
    }
    if traj.t_last() < CLASSIFY_MIN_HORIZON || traj.len() < 3 {
        return Regime::Inconclusive;
    }
    let v = &traj.values;
    if detect_sign_changes(traj).is_empty() {
        let nonincreasing = v.windows(2).all(|w| w[1].abs() <= w[0].abs() + MONOTONE_TOL);
        let decayed = v[v.len() - 1].abs() < 0.5 * v[0].abs();
        return if nonincreasing && decayed { Regime::MonotoneDecay } else { Regime::Inconclusive };
    }
    let ext = extrema_magnitudes(v);
    if ext.len() < 2 {
        return Regime::Inconclusive;
    }
    if ext.windows(2).all(|w| w[1] < w[0]) {
        Regime::DampedOscillation
    } else if ext.windows(2).all(|w| w[1] > w[0]) {
        Regime::GrowingOscillation
    } else {
        Regime::Inconclusive
    }
}

/// Least-squares slope of `ln(u²/2)` against `t` over the last
/// `window_fraction` of the time span.
pub fn estimate_decay_rate(traj: &Trajectory, window_fraction: f64) -> Result<f64, Error> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::Domain { what: "window_fraction (must be in (0, 1])", value: window_fraction });
    }
    let t_end = traj.t_last();
    let t0 = t_end * (1.0 - window_fraction);
    let (mut n, mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &u) in traj.values.iter().enumerate() {
        let t = traj.time(i);
        if t < t0 {
            continue;
        }
        if !(u > 0.0) {
            return Err(Error::Precondition("trajectory is not positive on the fitting window"));
        }
        let y = ln(0.5 * u * u);
        n += 1.0;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    if n < 2.0 {
        return Err(Error::Precondition("fitting window holds fewer than two points"));
    }
    let denom = n * stt - st * st;
    Ok((n * sty - st * sy) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EnvelopeBound {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvelopeViolation {
    pub t: f64,
    pub s: f64,
    /// `y(t - s) / y(t)`.
    pub ratio: f64,
    pub bound: EnvelopeBound,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvelopeReport {
    pub mu: f64,
    pub checked: usize,
    pub total_violations: usize,
    /// The first violations found, capped at 1000.
    pub violations: Vec<EnvelopeViolation>,
}

impl EnvelopeReport {
    pub fn is_clean(&self) -> bool {
        self.total_violations == 0
    }
}

/// Check `e^{-2μs} y(t) < y(t-s) < e^{2μs} y(t)` at every grid `t > 0` and
/// every `s` in `s_grid`, with `y = u²/2` and `y = 1/2` on the history.
pub fn check_lemma1_envelope(traj: &Trajectory, mu: f64, s_grid: &[f64]) -> Result<EnvelopeReport, Error> {
    if !mu.is_finite() {
        return Err(Error::Domain { what: "mu", value: mu });
    }
    if let Some(&s) = s_grid.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
        return Err(Error::Domain { what: "envelope shift s (must be > 0)", value: s });
    }
    let mut report = EnvelopeReport { mu, checked: 0, total_violations: 0, violations: Vec::new() };
    for &s in s_grid {
        let lo = exp(-2.0 * mu * s) * (1.0 - ENVELOPE_SLACK);
        let hi = exp(2.0 * mu * s) * (1.0 + ENVELOPE_SLACK);
        for (i, &u) in traj.values.iter().enumerate().skip(1) {
            let t = traj.time(i);
            let Some(past) = traj.value_at(t - s) else { continue };
            let y = 0.5 * u * u;
            let y_past = 0.5 * past * past;
            report.checked += 1;
            let bound = if y_past < lo * y {
                Some(EnvelopeBound::Lower)
            } else if y_past > hi * y {
                Some(EnvelopeBound::Upper)
            } else {
                None
            };
            if let Some(bound) = bound {
                report.total_violations += 1;
                if report.violations.len() < MAX_RECORDED_VIOLATIONS {
                    report.violations.push(EnvelopeViolation { t, s, ratio: y_past / y, bound });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerifyConfig {
    pub search: SearchConfig,
    pub sim: SimConfig,
    pub window_fraction: f64,
    pub s_grid: Vec<f64>,
    /// Allowed excess of the fitted slope over the guaranteed rate.
    pub rate_slack: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            search: SearchConfig::default(),
            sim: SimConfig { t_end: 20.0, h: 5e-3, ..SimConfig::default() },
            window_fraction: 0.5,
            s_grid: alloc::vec![0.1, 0.3, 1.0],
            rate_slack: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerifyReport {
    pub feasibility: FeasibilityResult,
    pub regime: Option<Regime>,
    pub slope_y: Option<f64>,
    pub envelope: Option<EnvelopeReport>,
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> VerifyCheck {
    VerifyCheck { name: String::from(name), passed, detail }
}

/// Search for `μ`, simulate, and compare the solution against the rate bound
/// and the envelope at that `μ`.
pub fn verify(dist: &DelayDistribution, config: &VerifyConfig) -> Result<VerifyReport, Error> {
    let feasibility = find_feasible_mu(dist, &config.search)?;
    let traj = simulate(dist, &config.sim)?;
    let regime = classify(&traj);
    let mut checks = Vec::new();

    let mu = match (feasibility.best_mu, feasibility.best_rate_y) {
        (Some(mu), Some(rate)) => {
            checks.push(check("feasible_mu", true, format!("mu = {mu:.6}, rate_bound_y = {rate:.6}")));
            Some((mu, rate))
        }
        _ => {
            checks.push(check("feasible_mu", false, String::from("no mu > 1 satisfies both conditions")));
            None
        }
    };

    let crossings = detect_sign_changes(&traj);
    checks.push(check(
        "no_sign_change",
        crossings.is_empty() && !traj.blow_up,
        format!("{} sign changes, regime {}", crossings.len(), regime.as_str()),
    ));

    let mut slope_y = None;
    let mut envelope = None;
    if let Some((mu, rate)) = mu {
        match estimate_decay_rate(&traj, config.window_fraction) {
            Ok(slope) => {
                slope_y = Some(slope);
                checks.push(check(
                    "rate_bound",
                    slope <= rate + config.rate_slack,
                    format!("slope_y = {slope:.6} vs bound {rate:.6} + {}", config.rate_slack),
                ));
            }
            Err(e) => checks.push(check("rate_bound", false, format!("{e}"))),
        }
        let report = check_lemma1_envelope(&traj, mu, &config.s_grid)?;
        checks.push(check(
            "envelope",
            report.is_clean(),
            format!("{} violations in {} checks", report.total_violations, report.checked),
        ));
        envelope = Some(report);
    } else {
        checks.push(check("rate_bound", false, String::from("skipped: no feasible mu")));
        checks.push(check("envelope", false, String::from("skipped: no feasible mu")));
    }

    Ok(VerifyReport { feasibility, regime: Some(regime), slope_y, envelope, checks })
}
