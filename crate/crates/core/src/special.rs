//! Normal and Gamma distribution functions used by the delay families.

use crate::math::{exp, ln, ln_1p};

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
/// ln(sqrt(2π))
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this argument `log_std_normal_cdf` switches to the Mills-ratio
/// continued fraction; erfc is still accurate here but `Φ` is ~1e-89.
const LOG_CDF_TAIL: f64 = -20.0;

/// Standard normal CDF `Φ(x)`.
///
/// Evaluated through erfc on the side where it does not cancel, so the left
/// tail keeps full relative precision (`Φ(-8) ≈ 6.22e-16`, not 0).
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    exp(-0.5 * x * x - LN_SQRT_2PI)
}

/// `ln Φ(x)`, finite for every finite `x`.
pub fn log_std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if x > 0.0 {
        ln_1p(-0.5 * libm::erfc(x * FRAC_1_SQRT_2))
    } else if x > LOG_CDF_TAIL {
        ln(0.5 * libm::erfc(-x * FRAC_1_SQRT_2))
    } else {
        // Φ(x) = φ(x) R(-x) with R the Mills ratio.
        -0.5 * x * x - LN_SQRT_2PI + ln(mills_ratio(-x))
    }
}

/// `ln(Φ(x)/φ(x))`, computed without forming either factor in the far left
/// tail. Differences of `ln Φ` at two points reduce to differences of this
/// function plus an exactly-cancelling quadratic.
pub fn log_cdf_over_pdf(x: f64) -> f64 {
    if x < LOG_CDF_TAIL {
        ln(mills_ratio(-x))
    } else {
        log_std_normal_cdf(x) + 0.5 * x * x + LN_SQRT_2PI
    }
}

/// Mills ratio `R(z) = (1 - Φ(z)) / φ(z)` for large positive `z`, by the
/// continued fraction `1/(z + 1/(z + 2/(z + 3/(z + ...))))` evaluated bottom-up.
fn mills_ratio(z: f64) -> f64 {
    let mut tail = z;
    for n in (1..=60).rev() {
        tail = z + n as f64 / tail;
    }
    1.0 / tail
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cont_frac(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`, accurate in the
/// far upper tail.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cont_frac(a, x)
    }
}

fn gamma_prefactor(a: f64, x: f64) -> f64 {
    exp(a * ln(x) - x - libm::lgamma(a))
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * gamma_prefactor(a, x)
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn gamma_cont_frac(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    gamma_prefactor(a, x) * h
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent route: Maclaurin series of erf for moderate |x| and the
    // Laplace continued fraction for the tails.
    fn phi_oracle(x: f64) -> f64 {
        if x.abs() <= 3.0 {
            let z = x / core::f64::consts::SQRT_2;
            let mut term = z;
            let mut sum = z;
            for n in 1..200 {
                term *= -z * z / n as f64;
                sum += term / (2 * n + 1) as f64;
            }
            0.5 + sum / core::f64::consts::PI.sqrt()
        } else {
            let z = x.abs();
            let mut cf = z;
            for n in (1..=400).rev() {
                cf = z + n as f64 / cf;
            }
            let tail = (-0.5 * z * z).exp() / (2.0 * core::f64::consts::PI).sqrt() / cf;
            if x < 0.0 {
                tail
            } else {
                1.0 - tail
            }
        }
    }

    #[test]
    fn phi_reference_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(1.959964) - 0.975).abs() < 1e-8);
        let v = std_normal_cdf(-8.0);
        assert!(v > 0.0);
        assert!((v - 6.220_960_574_271_785e-16).abs() / v < 1e-10);
    }

    #[test]
    fn phi_matches_oracle_and_symmetry() {
        let mut x = -12.0;
        while x <= 12.0 {
            let p = std_normal_cdf(x);
            assert!((p - phi_oracle(x)).abs() <= 1e-12, "x = {x}");
            assert!((std_normal_cdf(-x) - (1.0 - p)).abs() <= 1e-12, "x = {x}");
            x += 0.0625;
        }
    }

    #[test]
    fn log_phi_is_continuous_across_branches() {
        for &x in &[-20.0 - 1e-9, -20.0, -19.999_999] {
            let direct = (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).ln();
            assert!((log_std_normal_cdf(x) - direct).abs() < 1e-12 * direct.abs());
        }
        assert!(log_std_normal_cdf(-1e4).is_finite());
        assert!((log_std_normal_cdf(40.0)).abs() < 1e-300);
    }

    #[test]
    fn cdf_over_pdf_is_continuous_and_asymptotic() {
        let left = log_cdf_over_pdf(-20.0 - 1e-12);
        let right = log_cdf_over_pdf(-20.0 + 1e-12);
        assert!((left - right).abs() < 1e-12);
        // R(z) ~ 1/z - 1/z³ for large z
        let z = 1e6;
        assert!((log_cdf_over_pdf(-z) - (1.0 / z - 1.0 / (z * z * z)).ln()).abs() < 1e-15);
    }

    #[test]
    fn incomplete_gamma_exponential_case() {
        // k = 1: P(1, x) = 1 - e^{-x}
        for &x in &[0.1, 1.0, 2.5, 10.0, 30.0] {
            assert!((gamma_p(1.0, x) - (1.0 - (-x).exp())).abs() < 1e-14);
            let q = gamma_q(1.0, x);
            assert!(((q - (-x as f64).exp()) / q).abs() < 1e-12);
        }
    }

    #[test]
    fn incomplete_gamma_integer_shape() {
        // k = 3: Q(3, x) = e^{-x} (1 + x + x²/2)
        for &x in &[0.5, 2.0, 4.0, 9.0, 40.0] {
            let expect = (-x as f64).exp() * (1.0 + x + x * x / 2.0);
            assert!(((gamma_q(3.0, x) - expect) / expect).abs() < 1e-12, "x = {x}");
        }
    }
}
