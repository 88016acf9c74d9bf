//! Independent reference values for exponential moments.
//!
//! Densities are written out here from scratch and normalized by the same
//! quadrature, so neither the library's special functions nor its densities
//! enter the reference.
#![allow(dead_code)]

use delay_decay_core::{DelayDistribution, Family};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let pair = f(c - r * XGK[i]) + f(c + r * XGK[i]);
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    (k * r, (k - g).abs() * r)
}

/// Adaptive Gauss–Kronrod 7/15 on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= abs_tol || depth > 40 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * abs_tol, depth + 1) + rec(f, m, b, 0.5 * abs_tol, depth + 1)
    }
    let (rough, _) = gk15(f, a, b);
    rec(f, a, b, (rough.abs() * rel).max(1e-300), 0)
}

fn ratio(num: &dyn Fn(f64) -> f64, den: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    integrate(num, a, b, 1e-13) / integrate(den, a, b, 1e-13)
}

/// `∫ e^{μs} dP(s)` by quadrature; `None` where the moment diverges.
pub fn moment_oracle(dist: &DelayDistribution, mu: f64) -> Option<f64> {
    match dist.family() {
        Family::Dirac { tau } => Some((mu * tau).exp()),
        Family::FiniteAtoms { atoms } => Some(atoms.iter().map(|(s, w)| w * (mu * s).exp()).sum()),
        Family::Uniform { a, b } => {
            let (a, b) = (*a, *b);
            Some(integrate(&|s| (mu * s).exp(), a, b, 1e-14) / (b - a))
        }
        Family::Gamma { k, lambda } => {
            let (k, lambda) = (*k, *lambda);
            if mu >= lambda {
                return None;
            }
            // s = v², which removes the s^{k-1} singularity for k < 1.
            let unnorm = move |v: f64, rate: f64| {
                if v == 0.0 {
                    return if k == 0.5 { 2.0 } else { 0.0 };
                }
                let s = v * v;
                2.0 * v * s.powf(k - 1.0) * (-rate * s).exp()
            };
            let top = ((80.0 + 20.0 * k) / (lambda - mu)).sqrt();
            Some(ratio(&|v| unnorm(v, lambda - mu), &|v| unnorm(v, lambda), 0.0, top))
        }
        Family::TruncatedNormal { m, sigma } => {
            let (m, sigma) = (*m, *sigma);
            let top = m.max(0.0) + mu * sigma * sigma + 40.0 * sigma;
            // Shift the exponent so neither integral overflows or underflows.
            let peak_num = (m + mu * sigma * sigma).max(0.0);
            let peak_den = m.max(0.0);
            let g = |s: f64, peak: f64, mu: f64| {
                let z = (s - m) / sigma;
                let zp = (peak - m) / sigma;
                (mu * (s - peak) - 0.5 * (z * z - zp * zp)).exp()
            };
            let num = integrate(&|s| g(s, peak_num, mu), 0.0, top, 1e-13);
            let den = integrate(&|s| g(s, peak_den, 0.0), 0.0, top, 1e-13);
            let log_shift = mu * peak_num - 0.5 * (((peak_num - m) / sigma).powi(2) - ((peak_den - m) / sigma).powi(2));
            Some(num / den * log_shift.exp())
        }
    }
}
