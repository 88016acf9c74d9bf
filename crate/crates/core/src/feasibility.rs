//! The two exponential-moment conditions and the search for a `μ > 1`
//! satisfying both.
//!
//! For a delay measure `P` and `μ > 1`:
//!
//! ```text
//! (C1)  M_P(2μ) <= μ²
//! (C2)  M_P(μ) (M_P(μ) - 1) < μ
//! ```
//!
//! When both hold, every solution with constant initial datum decays
//! monotonically and `y = u²/2` satisfies `y' < r y` with
//! `r = 2 (M_P(μ)(M_P(μ) - 1)/μ - 1) < 0`. The amplitude `u` decays at `r/2`.

use alloc::vec::Vec;

use crate::distributions::{DelayDistribution, Family};
use crate::error::Error;
use crate::math::{exp, ln, powf};

/// Conditions (C1), (C2) evaluated at a single `μ`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionReport {
    pub mu: f64,
    /// `M_P(μ)`, possibly `+∞`.
    pub m_mu: f64,
    /// `M_P(2μ)`, possibly `+∞`.
    pub m_2mu: f64,
    pub cond1_ok: bool,
    pub cond2_ok: bool,
    /// Guaranteed exponential rate for `y = u²/2`; present iff both hold.
    pub rate_bound_y: Option<f64>,
}

impl ConditionReport {
    pub fn holds(&self) -> bool {
        self.cond1_ok && self.cond2_ok
    }
}

fn check_mu(mu: f64) -> Result<(), Error> {
    if mu > 1.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what: "mu (must be > 1)", value: mu })
    }
}

fn rate_from_moment(m_mu: f64, mu: f64) -> f64 {
    2.0 * (m_mu * (m_mu - 1.0) / mu - 1.0)
}

/// Evaluate both conditions at `mu`. (C1) is non-strict, (C2) strict.
pub fn check_conditions(dist: &DelayDistribution, mu: f64) -> Result<ConditionReport, Error> {
    check_mu(mu)?;
    let m_mu = dist.exp_moment(mu)?;
    let m_2mu = dist.exp_moment(2.0 * mu)?;
    let cond1_ok = m_2mu.is_finite() && m_2mu <= mu * mu;
    let cond2_ok = m_mu.is_finite() && m_mu * (m_mu - 1.0) < mu;
    let rate_bound_y = (cond1_ok && cond2_ok).then(|| rate_from_moment(m_mu, mu));
    Ok(ConditionReport { mu, m_mu, m_2mu, cond1_ok, cond2_ok, rate_bound_y })
}

/// `2 (M_P(μ)(M_P(μ) - 1)/μ - 1)`, the decay rate guaranteed for `y = u²/2`.
///
/// Fails with [`Error::Precondition`] unless both conditions hold at `mu`.
pub fn decay_rate_bound(dist: &DelayDistribution, mu: f64) -> Result<f64, Error> {
    check_conditions(dist, mu)?
        .rate_bound_y
        .ok_or(Error::Precondition("moment conditions do not hold at this mu"))
}

/// Signed distance from feasibility: `max(M(2μ) - μ², M(μ)(M(μ) - 1) - μ)`.
/// Negative means both conditions hold strictly; `+∞` when a moment diverges.
pub fn violation(dist: &DelayDistribution, mu: f64) -> Result<f64, Error> {
    let m_mu = dist.exp_moment(mu)?;
    let m_2mu = dist.exp_moment(2.0 * mu)?;
    if !m_mu.is_finite() || !m_2mu.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok((m_2mu - mu * mu).max(m_mu * (m_mu - 1.0) - mu))
}

/// Parameters of [`find_feasible_mu`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchConfig {
    pub mu_max: f64,
    /// Number of log-spaced scan points in `(1, mu_upper]`.
    pub grid_n: usize,
    /// Final bracket width of the golden-section refinement.
    pub refine_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { mu_max: 50.0, grid_n: 512, refine_tol: 1e-8 }
    }
}

/// Why a search ended without a feasible `μ`, when there is something more
/// specific to say than "the violation never went negative".
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SearchNote {
    /// The admissible window `(1, mu_upper)` is empty.
    EmptyRange { mu_upper: f64 },
    /// `M_P(2μ)` is infinite at every scanned `μ`.
    MomentsDiverge,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeasibilityResult {
    pub feasible: bool,
    pub best_mu: Option<f64>,
    /// Most negative rate bound among the feasible `μ` found.
    pub best_rate_y: Option<f64>,
    pub report_at_best: Option<ConditionReport>,
    /// Every `(μ, violation)` evaluated, scan first then refinement.
    pub search_trace: Vec<(f64, f64)>,
    pub note: Option<SearchNote>,
}

impl FeasibilityResult {
    fn infeasible(search_trace: Vec<(f64, f64)>, note: Option<SearchNote>) -> Self {
        FeasibilityResult {
            feasible: false,
            best_mu: None,
            best_rate_y: None,
            report_at_best: None,
            search_trace,
            note,
        }
    }
}

/// Upper end of the `μ` window. Gamma moments blow up at `2μ = λ`.
fn mu_upper(dist: &DelayDistribution, mu_max: f64) -> f64 {
    match dist.family() {
        Family::Gamma { lambda, .. } => mu_max.min(lambda / 2.0 - 1e-9 * lambda),
        _ => mu_max,
    }
}

/// Search `(1, mu_upper)` for a `μ` where both conditions hold.
///
/// A log-spaced scan locates the smallest violation (ties go to the smaller
/// `μ`), golden-section search refines it inside the neighbouring grid cells,
/// and every scanned or refined point is re-checked with
/// [`check_conditions`]. Among the feasible points the one with the most
/// negative rate bound wins.
pub fn find_feasible_mu(
    dist: &DelayDistribution,
    config: &SearchConfig,
) -> Result<FeasibilityResult, Error> {
    let SearchConfig { mu_max, grid_n, refine_tol } = *config;
    if !(mu_max > 1.0) || !mu_max.is_finite() {
        return Err(Error::Domain { what: "mu_max (must be > 1)", value: mu_max });
    }
    if grid_n < 8 {
        return Err(Error::Domain { what: "grid_n (must be >= 8)", value: grid_n as f64 });
    }
    if !(refine_tol > 0.0) {
        return Err(Error::Domain { what: "refine_tol", value: refine_tol });
    }

    let upper = mu_upper(dist, mu_max);
    if !(upper > 1.0) {
        return Ok(FeasibilityResult::infeasible(
            Vec::new(),
            Some(SearchNote::EmptyRange { mu_upper: upper }),
        ));
    }

    let log_upper = ln(upper);
    let mut grid = Vec::with_capacity(grid_n);
    let mut trace = Vec::with_capacity(grid_n + 64);
    for i in 1..=grid_n {
        let mu = if i == grid_n { upper } else { exp(log_upper * i as f64 / grid_n as f64) };
        let v = violation(dist, mu)?;
        grid.push(mu);
        trace.push((mu, v));
    }

    let mut best_i = 0;
    for i in 1..grid_n {
        if trace[i].1 < trace[best_i].1 {
            best_i = i;
        }
    }
    if trace[best_i].1 == f64::INFINITY {
        return Ok(FeasibilityResult::infeasible(trace, Some(SearchNote::MomentsDiverge)));
    }

    let lo = if best_i == 0 { 1.0 } else { grid[best_i - 1] };
    let hi = grid[(best_i + 1).min(grid_n - 1)];
    let mut refine_trace = Vec::new();
    let mut failure = None;
    let (mu_refined, _) = golden_section_min(
        |mu| match violation(dist, mu) {
            Ok(v) => {
                refine_trace.push((mu, v));
                v
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        refine_tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    trace.extend(refine_trace);

    let mut best: Option<ConditionReport> = None;
    let candidates = grid
        .iter()
        .zip(trace.iter())
        .filter(|(_, &(_, v))| v <= 0.0)
        .map(|(&mu, _)| mu)
        .chain(core::iter::once(mu_refined).filter(|&mu| mu > 1.0));
    for mu in candidates {
        let report = check_conditions(dist, mu)?;
        let Some(rate) = report.rate_bound_y else { continue };
        let better = match &best {
            None => true,
            Some(b) => {
                let br = b.rate_bound_y.unwrap_or(f64::INFINITY);
                rate < br || (rate == br && mu < b.mu)
            }
        };
        if better {
            best = Some(report);
        }
    }

    match best {
        Some(report) => {
            // The report at best_mu must agree with an independent re-check.
            let recheck = check_conditions(dist, report.mu)?;
            debug_assert!(recheck.holds() && recheck == report);
            if !recheck.holds() {
                return Ok(FeasibilityResult::infeasible(trace, None));
            }
            Ok(FeasibilityResult {
                feasible: true,
                best_mu: Some(report.mu),
                best_rate_y: report.rate_bound_y,
                report_at_best: Some(report),
                search_trace: trace,
                note: None,
            })
        }
        None => Ok(FeasibilityResult::infeasible(trace, None)),
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of `f` on `[a, b]` down to a bracket of width
/// `tol`. Returns the best point seen and its value; endpoints are never
/// evaluated.
pub(crate) fn golden_section_min(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (mut best_x, mut best_f) = if fd < fc { (d, fd) } else { (c, fc) };
    // Convergence is geometric; the cap only matters for tol below float spacing.
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc < best_f || (fc == best_f && c < best_x) {
                best_x = c;
                best_f = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd < best_f {
                best_x = d;
                best_f = fd;
            }
        }
    }
    (best_x, best_f)
}

/// Sharp monotone-decay criterion for a single constant delay: `tau <= 1/e`.
pub fn dirac_sharp_monotone(tau: f64) -> bool {
    tau >= 0.0 && tau <= exp(-1.0)
}

/// Closed-form boundary of (C1) for Gamma(k, λ) delays and the value of (C2)
/// there.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GammaCritical {
    /// (C1) is satisfiable for some μ iff `λ >= lambda_crit`.
    pub lambda_crit: f64,
    /// `M(μ)(M(μ) - 1)/μ` at `λ = lambda_crit`, `μ = λ/(k + 2)`.
    pub cond2_value: f64,
    /// Whether (C2) also holds there, i.e. `cond2_value < 1`.
    pub covered: bool,
}

pub fn gamma_analytic_critical(k: f64) -> Result<GammaCritical, Error> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain { what: "k", value: k });
    }
    let lambda_crit = powf(k + 2.0, (k + 2.0) / 2.0) / powf(k, k / 2.0);
    let cond2_value = powf(k * (k + 2.0), k / 2.0) / powf(k + 1.0, k)
        * (powf((k + 2.0) / (k + 1.0), k) - 1.0);
    Ok(GammaCritical { lambda_crit, cond2_value, covered: cond2_value < 1.0 })
}
