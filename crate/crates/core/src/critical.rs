//! Critical parameter values: where the moment conditions stop being
//! satisfiable as one distribution parameter is varied.
//!
//! Every point is found by bisection on the boolean predicate
//! `find_feasible_mu(..).feasible`, which is assumed monotone along the
//! scanned parameter. After bisection a handful of interior points of the
//! original bracket are re-checked and a [`Error::NonMonotone`] is returned if
//! any of them lands on the wrong side.

use alloc::string::String;
use alloc::vec::Vec;

use crate::distributions::DelayDistribution;
use crate::error::{Error, ParamError};
use crate::feasibility::{find_feasible_mu, SearchConfig};
use crate::math::ln;

/// Smallest interval length tried by the uniform sweep.
pub const UNIFORM_MIN_LENGTH: f64 = 1e-9;
/// Interval length the uniform sweep starts its upper bracket at.
pub const UNIFORM_START_LENGTH: f64 = 1.0;
/// Largest interval length the uniform sweep will grow its bracket to.
pub const UNIFORM_MAX_LENGTH: f64 = 1024.0;
/// Lower end of the truncated-normal σ range.
pub const TRUNCNORMAL_MIN_SIGMA: f64 = 1e-6;

const GUARD_POINTS: usize = 5;

/// `ln √2`, the critical constant delay.
pub fn ln_sqrt_2() -> f64 {
    0.5 * ln(2.0)
}

/// Which side of the critical value the feasible parameters lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum FeasibleSide {
    Below,
    Above,
}

impl FeasibleSide {
    pub fn as_str(self) -> &'static str {
        match self {
            FeasibleSide::Below => "below",
            FeasibleSide::Above => "above",
        }
    }

    fn feasible_at(self, x: f64, critical: f64) -> bool {
        match self {
            FeasibleSide::Below => x < critical,
            FeasibleSide::Above => x > critical,
        }
    }
}

/// How a curve point was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum PointStatus {
    /// A feasible/infeasible transition was bracketed.
    Critical,
    /// Infeasible over the whole scanned range; `critical_value` is the lower
    /// end of the range.
    InfeasibleEverywhere,
    /// Feasible over the whole scanned range; `critical_value` is the upper
    /// end of the range (a lower bound on the true value).
    FeasibleEverywhere,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvePoint {
    pub scan_value: f64,
    pub critical_value: f64,
    pub bracket_width: f64,
    pub feasible_side: FeasibleSide,
    pub status: PointStatus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveConfig {
    /// Bisection tolerance in the scanned parameter.
    pub tol: f64,
    pub search: SearchConfig,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig {
            tol: 1e-4,
            search: SearchConfig { refine_tol: 1e-6, ..SearchConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CriticalCurve {
    pub family: String,
    /// Name of the swept parameter and of the critical quantity.
    pub scan_name: String,
    pub critical_name: String,
    pub fixed_params: Vec<(String, f64)>,
    pub points: Vec<CurvePoint>,
    pub config: CurveConfig,
}

impl CriticalCurve {
    /// Sort points by scan value and drop duplicate scan values.
    pub fn normalize(&mut self) {
        self.points.sort_by(|a, b| a.scan_value.total_cmp(&b.scan_value));
        self.points.dedup_by(|a, b| a.scan_value == b.scan_value);
    }
}

/// Whether the moment conditions are satisfiable for `dist`.
pub fn is_feasible(dist: &DelayDistribution, search: &SearchConfig) -> Result<bool, Error> {
    Ok(find_feasible_mu(dist, search)?.feasible)
}

fn predicate<F>(build: &F, x: f64, search: &SearchConfig) -> Result<bool, Error>
where
    F: Fn(f64) -> Result<DelayDistribution, ParamError>,
{
    is_feasible(&build(x)?, search)
}

/// Bisect `[lo, hi]` for the parameter value where feasibility flips.
///
/// `feasible_side` states where feasible parameters are expected; the
/// endpoints must agree with it.
pub fn critical_scalar<F>(
    build: F,
    lo: f64,
    hi: f64,
    tol: f64,
    feasible_side: FeasibleSide,
    search: &SearchConfig,
) -> Result<CurvePoint, Error>
where
    F: Fn(f64) -> Result<DelayDistribution, ParamError>,
{
    if !lo.is_finite() {
        return Err(Error::Domain { what: "bracket lower end", value: lo });
    }
    if !hi.is_finite() || hi <= lo {
        return Err(Error::Domain { what: "bracket upper end", value: hi });
    }
    if !(tol > 0.0) {
        return Err(Error::Domain { what: "tol", value: tol });
    }
    let at_lo = predicate(&build, lo, search)?;
    let at_hi = predicate(&build, hi, search)?;
    if at_lo == at_hi {
        return Err(Error::Bracket { lo, hi, feasible: at_lo });
    }
    let lo_should_be_feasible = feasible_side == FeasibleSide::Below;
    if at_lo != lo_should_be_feasible {
        return Err(Error::NonMonotone { at: lo, expected_feasible: lo_should_be_feasible });
    }

    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if predicate(&build, mid, search)? == at_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    let critical = 0.5 * (a + b);
    let width = b - a;

    for i in 1..=GUARD_POINTS {
        let x = lo + (hi - lo) * i as f64 / (GUARD_POINTS + 1) as f64;
        if (x - critical).abs() <= 2.0 * width {
            continue;
        }
        let expected = feasible_side.feasible_at(x, critical);
        if predicate(&build, x, search)? != expected {
            return Err(Error::NonMonotone { at: x, expected_feasible: expected });
        }
    }

    Ok(CurvePoint {
        scan_value: f64::NAN,
        critical_value: critical,
        bracket_width: width,
        feasible_side,
        status: PointStatus::Critical,
    })
}

/// Critical interval length `b - a` of `Uniform[a, b]` for a fixed `a`.
///
/// The upper bracket starts at length 1 and doubles while still feasible; if
/// even a length of `UNIFORM_MIN_LENGTH` is infeasible the point is marked
/// [`PointStatus::InfeasibleEverywhere`].
pub fn uniform_point(a: f64, config: &CurveConfig) -> Result<CurvePoint, Error> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::Domain { what: "a", value: a });
    }
    let build = |len: f64| DelayDistribution::uniform(a, a + len);
    let search = &config.search;
    let side = FeasibleSide::Below;
    if !predicate(&build, UNIFORM_MIN_LENGTH, search)? {
        return Ok(edge_point(a, UNIFORM_MIN_LENGTH, side, PointStatus::InfeasibleEverywhere));
    }
    let mut hi = UNIFORM_START_LENGTH;
    while predicate(&build, hi, search)? {
        if hi >= UNIFORM_MAX_LENGTH {
            return Ok(edge_point(a, hi, side, PointStatus::FeasibleEverywhere));
        }
        hi *= 2.0;
    }
    let mut point = critical_scalar(build, UNIFORM_MIN_LENGTH, hi, config.tol, side, search)?;
    point.scan_value = a;
    Ok(point)
}

/// Critical `σ` of the truncated normal for a fixed location `m`, searched on
/// `[TRUNCNORMAL_MIN_SIGMA, sigma_hi]`.
pub fn truncnormal_point(m: f64, sigma_hi: f64, config: &CurveConfig) -> Result<CurvePoint, Error> {
    if !m.is_finite() {
        return Err(Error::Domain { what: "m", value: m });
    }
    if !(sigma_hi > TRUNCNORMAL_MIN_SIGMA) || !sigma_hi.is_finite() {
        return Err(Error::Domain { what: "sigma_hi", value: sigma_hi });
    }
    let build = |sigma: f64| DelayDistribution::truncated_normal(m, sigma);
    let search = &config.search;
    let side = FeasibleSide::Below;
    if !predicate(&build, TRUNCNORMAL_MIN_SIGMA, search)? {
        return Ok(edge_point(m, TRUNCNORMAL_MIN_SIGMA, side, PointStatus::InfeasibleEverywhere));
    }
    if predicate(&build, sigma_hi, search)? {
        return Ok(edge_point(m, sigma_hi, side, PointStatus::FeasibleEverywhere));
    }
    let mut point = critical_scalar(build, TRUNCNORMAL_MIN_SIGMA, sigma_hi, config.tol, side, search)?;
    point.scan_value = m;
    Ok(point)
}

fn edge_point(scan: f64, edge: f64, side: FeasibleSide, status: PointStatus) -> CurvePoint {
    CurvePoint { scan_value: scan, critical_value: edge, bracket_width: 0.0, feasible_side: side, status }
}

/// Empty uniform curve skeleton; fill `points` with [`uniform_point`].
pub fn uniform_curve(config: &CurveConfig) -> CriticalCurve {
    CriticalCurve {
        family: "uniform".into(),
        scan_name: "a".into(),
        critical_name: "b-a".into(),
        fixed_params: Vec::new(),
        points: Vec::new(),
        config: *config,
    }
}

/// Empty truncated-normal curve skeleton; fill `points` with [`truncnormal_point`].
pub fn truncnormal_curve(sigma_hi: f64, config: &CurveConfig) -> CriticalCurve {
    CriticalCurve {
        family: "truncnormal".into(),
        scan_name: "m".into(),
        critical_name: "sigma".into(),
        fixed_params: alloc::vec![("sigma_hi".into(), sigma_hi)],
        points: Vec::new(),
        config: *config,
    }
}

/// Critical interval length as a function of the left end `a` of a uniform
/// delay.
pub fn sweep_uniform_curve(a_grid: &[f64], config: &CurveConfig) -> Result<CriticalCurve, Error> {
    let mut curve = uniform_curve(config);
    curve.points = a_grid.iter().map(|&a| uniform_point(a, config)).collect::<Result<_, _>>()?;
    curve.normalize();
    Ok(curve)
}

/// Critical `σ` as a function of the location `m` of a truncated normal delay.
pub fn sweep_truncnormal_curve(
    m_grid: &[f64],
    sigma_hi: f64,
    config: &CurveConfig,
) -> Result<CriticalCurve, Error> {
    let mut curve = truncnormal_curve(sigma_hi, config);
    curve.points = m_grid
        .iter()
        .map(|&m| truncnormal_point(m, sigma_hi, config))
        .collect::<Result<_, _>>()?;
    curve.normalize();
    Ok(curve)
}

/// Critical constant delay, bisected on `[lo, hi]`.
pub fn dirac_critical(lo: f64, hi: f64, config: &CurveConfig) -> Result<CurvePoint, Error> {
    critical_scalar(DelayDistribution::dirac, lo, hi, config.tol, FeasibleSide::Below, &config.search)
}

/// Critical rate `λ` for Gamma(k, λ) delays, bisected on `[lo, hi]`.
pub fn gamma_critical(k: f64, lo: f64, hi: f64, config: &CurveConfig) -> Result<CurvePoint, Error> {
    let mut p = critical_scalar(
        |lambda| DelayDistribution::gamma(k, lambda),
        lo,
        hi,
        config.tol,
        FeasibleSide::Above,
        &config.search,
    )?;
    p.scan_value = k;
    Ok(p)
}

/// Evenly spaced grid `lo, lo + step, ...` up to and including `hi` (to within
/// a millionth of a step).
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::Domain { what: "grid bounds", value: hi });
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Domain { what: "grid step", value: step });
    }
    let n = crate::math::floor((hi - lo) / step + 1e-6) as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> CurveConfig {
        CurveConfig { tol: 1e-5, search: SearchConfig { refine_tol: 1e-8, ..Default::default() } }
    }

    #[test]
    fn dirac_critical_is_ln_sqrt_2() {
        let p = dirac_critical(0.2, 0.5, &quick()).unwrap();
        assert!((p.critical_value - ln_sqrt_2()).abs() < 1e-4, "{p:?}");
        assert!(p.bracket_width <= 1e-5);
        let s = &quick().search;
        let below = DelayDistribution::dirac(p.critical_value - 2.0 * p.bracket_width).unwrap();
        let above = DelayDistribution::dirac(p.critical_value + 2.0 * p.bracket_width).unwrap();
        assert!(is_feasible(&below, s).unwrap());
        assert!(!is_feasible(&above, s).unwrap());
    }

    #[test]
    fn degenerate_bracket_is_an_error() {
        let err = dirac_critical(0.1, 0.2, &quick()).unwrap_err();
        assert_eq!(err, Error::Bracket { lo: 0.1, hi: 0.2, feasible: true });
        assert!(matches!(dirac_critical(0.2, f64::INFINITY, &quick()), Err(Error::Domain { .. })));
    }

    #[test]
    fn reversed_orientation_is_reported() {
        let err = critical_scalar(
            DelayDistribution::dirac,
            0.2,
            0.5,
            1e-4,
            FeasibleSide::Above,
            &SearchConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonMonotone { .. }));
    }

    #[test]
    fn gamma_exponential_critical_rate() {
        let p = gamma_critical(1.0, 3.0, 8.0, &CurveConfig { tol: 1e-4, ..quick() }).unwrap();
        assert!((p.critical_value - 3f64.powf(1.5)).abs() < 1e-3, "{p:?}");
    }

    #[test]
    fn uniform_points() {
        let cfg = CurveConfig::default();
        let p = uniform_point(0.0, &cfg).unwrap();
        assert_eq!(p.status, PointStatus::Critical);
        assert!((p.critical_value - 0.59).abs() < 0.01, "{p:?}");
        let p = uniform_point(0.34, &cfg).unwrap();
        assert_eq!(p.status, PointStatus::Critical);
        assert!(p.critical_value > 0.0 && p.critical_value < 0.05, "{p:?}");
        let p = uniform_point(0.40, &cfg).unwrap();
        assert_eq!(p.status, PointStatus::InfeasibleEverywhere);
    }

    #[test]
    fn truncnormal_points() {
        let cfg = CurveConfig::default();
        let p = truncnormal_point(ln_sqrt_2(), 10.0, &cfg).unwrap();
        assert_eq!(p.status, PointStatus::InfeasibleEverywhere);
        assert_eq!(p.critical_value, TRUNCNORMAL_MIN_SIGMA);
        let left = truncnormal_point(-ln_sqrt_2(), 10.0, &cfg).unwrap();
        assert_eq!(left.status, PointStatus::Critical);
        assert!(left.critical_value > 0.0);
        let far = truncnormal_point(-10.0, 10.0, &cfg).unwrap();
        assert_eq!(far.status, PointStatus::Critical);
        assert!(far.critical_value > left.critical_value);
    }

    #[test]
    fn grid_includes_endpoint() {
        let g = linear_grid(0.0, 0.34, 0.02).unwrap();
        assert_eq!(g.len(), 18);
        assert!((g[17] - 0.34).abs() < 1e-12);
        assert!(linear_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn curves_are_sorted_and_deduplicated() {
        let cfg = CurveConfig { tol: 1e-3, ..Default::default() };
        let c = sweep_uniform_curve(&[0.2, 0.0, 0.2, 0.1], &cfg).unwrap();
        let scans: Vec<f64> = c.points.iter().map(|p| p.scan_value).collect();
        assert_eq!(scans, [0.0, 0.1, 0.2]);
        let again = sweep_uniform_curve(&[0.2, 0.0, 0.2, 0.1], &cfg).unwrap();
        assert_eq!(c, again);
    }
}
