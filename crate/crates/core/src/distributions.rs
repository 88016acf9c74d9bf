//! Delay measures on `[0, ∞)` and their exponential moments.
//!
//! [`DelayDistribution`] can only be obtained through validation, so every
//! value in circulation satisfies its family's invariants (unit mass, support
//! in `[0, ∞)`, positive scales).

use alloc::vec::Vec;

use crate::error::{Error, ParamError};
use crate::math::{exp, expm1, ln, powf};
use crate::special::{gamma_p, gamma_q, log_cdf_over_pdf};

/// Below this value of `μ(b - a)` the uniform moment uses its Taylor series.
const UNIFORM_SERIES_CUTOFF: f64 = 1e-6;

/// Gamma moments with `μ >= λ(1 - GAMMA_POLE_GUARD)` are reported as `+∞`.
const GAMMA_POLE_GUARD: f64 = 1e-12;

/// Atom weights may miss unit mass by this much; they are kept as given.
const ATOM_MASS_TOL: f64 = 1e-9;

/// Raw, unvalidated parameters of a delay measure.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "family", rename_all = "snake_case")
)]
pub enum Family {
    /// Point mass at `tau`.
    Dirac { tau: f64 },
    /// Density `λ^k s^{k-1} e^{-λs} / Γ(k)`.
    Gamma { k: f64, lambda: f64 },
    /// Uniform on `[a, b]`.
    Uniform { a: f64, b: f64 },
    /// Normal(`m`, `sigma`²) conditioned on `(0, ∞)`.
    TruncatedNormal { m: f64, sigma: f64 },
    /// Finitely many atoms `(position, weight)`.
    FiniteAtoms { atoms: Vec<(f64, f64)> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Dirac { .. } => "dirac",
            Family::Gamma { .. } => "gamma",
            Family::Uniform { .. } => "uniform",
            Family::TruncatedNormal { .. } => "truncnormal",
            Family::FiniteAtoms { .. } => "atoms",
        }
    }
}

/// A validated probability measure on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "Family", into = "Family")
)]
pub struct DelayDistribution(Family);

impl TryFrom<Family> for DelayDistribution {
    type Error = ParamError;

    fn try_from(family: Family) -> Result<Self, ParamError> {
        validate(family)
    }
}

impl From<DelayDistribution> for Family {
    fn from(d: DelayDistribution) -> Self {
        d.0
    }
}

fn finite(name: &'static str, v: f64) -> Result<f64, ParamError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ParamError::NonFinite { name })
    }
}

/// Check every invariant of `family` and return the validated measure.
///
/// Atom lists are sorted, atoms at identical positions are merged and the
/// weights are rescaled to sum to one when they already do so within `1e-9`.
pub fn validate(family: Family) -> Result<DelayDistribution, ParamError> {
    let family = match family {
        Family::Dirac { tau } => {
            finite("tau", tau)?;
            if tau < 0.0 {
                return Err(ParamError::NegativeSupport { name: "tau", value: tau });
            }
            Family::Dirac { tau }
        }
        Family::Gamma { k, lambda } => {
            finite("k", k)?;
            finite("lambda", lambda)?;
            if k <= 0.0 {
                return Err(ParamError::NonPositiveShape(k));
            }
            if lambda <= 0.0 {
                return Err(ParamError::NonPositiveRate(lambda));
            }
            Family::Gamma { k, lambda }
        }
        Family::Uniform { a, b } => {
            finite("a", a)?;
            finite("b", b)?;
            if a < 0.0 {
                return Err(ParamError::NegativeSupport { name: "a", value: a });
            }
            if b <= a {
                return Err(ParamError::EmptyInterval { a, b });
            }
            Family::Uniform { a, b }
        }
        Family::TruncatedNormal { m, sigma } => {
            finite("m", m)?;
            finite("sigma", sigma)?;
            if sigma <= 0.0 {
                return Err(ParamError::NonPositiveScale(sigma));
            }
            Family::TruncatedNormal { m, sigma }
        }
        Family::FiniteAtoms { mut atoms } => {
            if atoms.is_empty() {
                return Err(ParamError::NoAtoms);
            }
            let mut total = 0.0;
            for &(s, w) in &atoms {
                finite("atom position", s)?;
                finite("atom weight", w)?;
                if s < 0.0 {
                    return Err(ParamError::NegativeSupport { name: "atom position", value: s });
                }
                if w <= 0.0 {
                    return Err(ParamError::NonPositiveWeight(w));
                }
                total += w;
            }
            if (total - 1.0).abs() > ATOM_MASS_TOL {
                return Err(ParamError::WeightSum(total));
            }
            atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
            for (s, w) in atoms {
                match merged.last_mut() {
                    Some(last) if last.0 == s => last.1 += w,
                    _ => merged.push((s, w)),
                }
            }
            Family::FiniteAtoms { atoms: merged }
        }
    };
    Ok(DelayDistribution(family))
}

impl DelayDistribution {
    pub fn dirac(tau: f64) -> Result<Self, ParamError> {
        validate(Family::Dirac { tau })
    }

    pub fn gamma(k: f64, lambda: f64) -> Result<Self, ParamError> {
        validate(Family::Gamma { k, lambda })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self, ParamError> {
        validate(Family::Uniform { a, b })
    }

    pub fn truncated_normal(m: f64, sigma: f64) -> Result<Self, ParamError> {
        validate(Family::TruncatedNormal { m, sigma })
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self, ParamError> {
        validate(Family::FiniteAtoms { atoms })
    }

    pub fn family(&self) -> &Family {
        &self.0
    }

    /// Atom list for purely atomic measures (Dirac is a single atom).
    pub fn atom_list(&self) -> Option<Vec<(f64, f64)>> {
        match &self.0 {
            Family::Dirac { tau } => Some(alloc::vec![(*tau, 1.0)]),
            Family::FiniteAtoms { atoms } => Some(atoms.clone()),
            _ => None,
        }
    }

    /// Exponential moment `M_P(μ) = ∫ e^{μs} dP(s)`; `+∞` when it diverges.
    pub fn exp_moment(&self, mu: f64) -> Result<f64, Error> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::Domain { what: "mu", value: mu });
        }
        if mu == 0.0 {
            return Ok(1.0);
        }
        let m = match &self.0 {
            Family::Dirac { tau } => exp(mu * tau),
            Family::Gamma { k, lambda } => {
                if mu >= lambda * (1.0 - GAMMA_POLE_GUARD) {
                    f64::INFINITY
                } else {
                    powf(lambda / (lambda - mu), *k)
                }
            }
            Family::Uniform { a, b } => uniform_moment(*a, *b, mu),
            Family::TruncatedNormal { m, sigma } => {
                // ln Φ(α + σμ) - ln Φ(α) + mμ + σ²μ²/2 with the Gaussian
                // exponents cancelled analytically.
                let alpha = m / sigma;
                exp(log_cdf_over_pdf(alpha + sigma * mu) - log_cdf_over_pdf(alpha))
            }
            Family::FiniteAtoms { atoms } => atoms.iter().map(|&(s, w)| w * exp(mu * s)).sum(),
        };
        Ok(m)
    }

    /// `P([0, s])`.
    pub fn cdf(&self, s: f64) -> f64 {
        if !(s >= 0.0) {
            return 0.0;
        }
        match &self.0 {
            Family::Dirac { tau } => {
                if s >= *tau {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Gamma { k, lambda } => gamma_p(*k, lambda * s),
            Family::Uniform { a, b } => ((s - a) / (b - a)).clamp(0.0, 1.0),
            Family::TruncatedNormal { .. } => 1.0 - self.survival(s),
            Family::FiniteAtoms { atoms } => {
                let mass: f64 = atoms.iter().take_while(|a| a.0 <= s).map(|a| a.1).sum();
                mass.min(1.0)
            }
        }
    }

    /// `P((s, ∞))`, accurate in the upper tail.
    pub fn survival(&self, s: f64) -> f64 {
        if !(s >= 0.0) {
            return 1.0;
        }
        match &self.0 {
            Family::Gamma { k, lambda } => gamma_q(*k, lambda * s),
            Family::TruncatedNormal { m, sigma } => {
                let alpha = m / sigma;
                let x = s / sigma;
                exp(log_cdf_over_pdf(alpha - x) - log_cdf_over_pdf(alpha) + x * (alpha - 0.5 * x))
            }
            _ => 1.0 - self.cdf(s),
        }
    }

    /// Smallest `S` with `1 - cdf(S) <= eps`. Bounded supports return their
    /// supremum exactly.
    pub fn tail_cutoff(&self, eps: f64) -> Result<f64, Error> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain { what: "eps", value: eps });
        }
        if let Some(sup) = self.support_sup() {
            return Ok(sup);
        }
        let mut lo = 0.0;
        let mut hi = self.mean().max(f64::MIN_POSITIVE);
        while self.survival(hi) > eps {
            lo = hi;
            hi *= 2.0;
        }
        // Bisect down to adjacent floats.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.survival(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// Supremum of the support when it is bounded.
    pub fn support_sup(&self) -> Option<f64> {
        match &self.0 {
            Family::Dirac { tau } => Some(*tau),
            Family::Uniform { b, .. } => Some(*b),
            Family::FiniteAtoms { atoms } => atoms.last().map(|a| a.0),
            Family::Gamma { .. } | Family::TruncatedNormal { .. } => None,
        }
    }

    /// Infimum of the support.
    pub fn support_inf(&self) -> f64 {
        match &self.0 {
            Family::Dirac { tau } => *tau,
            Family::Uniform { a, .. } => *a,
            Family::FiniteAtoms { atoms } => atoms[0].0,
            Family::Gamma { .. } | Family::TruncatedNormal { .. } => 0.0,
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.0 {
            Family::Dirac { tau } => *tau,
            Family::Gamma { k, lambda } => k / lambda,
            Family::Uniform { a, b } => 0.5 * (a + b),
            Family::TruncatedNormal { m, sigma } => {
                m + sigma * exp(-log_cdf_over_pdf(m / sigma))
            }
            Family::FiniteAtoms { atoms } => atoms.iter().map(|&(s, w)| s * w).sum(),
        }
    }

    /// Lebesgue density for the continuous families, `None` for atomic ones.
    pub fn density(&self, s: f64) -> Option<f64> {
        let d = match &self.0 {
            Family::Dirac { .. } | Family::FiniteAtoms { .. } => return None,
            _ if s < 0.0 => 0.0,
            Family::Gamma { k, lambda } => {
                if s == 0.0 {
                    match k.partial_cmp(&1.0) {
                        Some(core::cmp::Ordering::Less) => f64::INFINITY,
                        Some(core::cmp::Ordering::Equal) => *lambda,
                        _ => 0.0,
                    }
                } else {
                    exp((k - 1.0) * ln(s) + k * ln(*lambda) - lambda * s - libm::lgamma(*k))
                }
            }
            Family::Uniform { a, b } => {
                if s >= *a && s <= *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Family::TruncatedNormal { m, sigma } => {
                let alpha = m / sigma;
                let x = s / sigma;
                exp(x * (alpha - 0.5 * x) - ln(*sigma) - log_cdf_over_pdf(alpha))
            }
        };
        Some(d)
    }
}

fn uniform_moment(a: f64, b: f64, mu: f64) -> f64 {
    let x = mu * (b - a);
    if x < UNIFORM_SERIES_CUTOFF {
        return exp(mu * a) * (1.0 + x * (0.5 + x * (1.0 / 6.0 + x / 24.0)));
    }
    // log of (e^x - 1)/x, written to survive e^x overflowing.
    let log_ratio = if x < 700.0 {
        ln(expm1(x) / x)
    } else {
        x + libm::log1p(-exp(-x)) - ln(x)
    };
    exp(mu * a + log_ratio)
}
