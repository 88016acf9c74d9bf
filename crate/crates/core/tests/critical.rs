use delay_decay_core::critical::{is_feasible, linear_grid, sweep_truncnormal_curve, sweep_uniform_curve};
use delay_decay_core::feasibility::SearchConfig;
use delay_decay_core::{CurveConfig, DelayDistribution, PointStatus};

#[test]
fn uniform_is_sandwiched_by_its_endpoint_diracs() {
    let search = SearchConfig::default();
    let mut checked = 0;
    for i in 0..10 {
        for j in 0..10 {
            let a = 0.05 * i as f64;
            let b = a + 0.02 + 0.08 * j as f64;
            let u = is_feasible(&DelayDistribution::uniform(a, b).unwrap(), &search).unwrap();
            let lo = is_feasible(&DelayDistribution::dirac(a).unwrap(), &search).unwrap();
            let hi = is_feasible(&DelayDistribution::dirac(b).unwrap(), &search).unwrap();
            if u {
                assert!(lo, "Uniform[{a}, {b}] feasible but Dirac {a} is not");
            }
            if hi {
                assert!(u, "Dirac {b} feasible but Uniform[{a}, {b}] is not");
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn sweeps_are_bit_reproducible() {
    let cfg = CurveConfig::default();
    let grid = linear_grid(0.0, 0.34, 0.02).unwrap();
    let a = sweep_uniform_curve(&grid, &cfg).unwrap();
    let b = sweep_uniform_curve(&grid, &cfg).unwrap();
    assert_eq!(a.points.len(), 18);
    for (p, q) in a.points.iter().zip(&b.points) {
        assert_eq!(p.critical_value.to_bits(), q.critical_value.to_bits());
        assert_eq!(p.status, q.status);
    }
}

#[test]
fn truncated_normal_needs_small_mean() {
    let cfg = CurveConfig::default();
    let ms = [-2.0, -1.0, 0.0, 0.3, 0.35, 0.5, 1.0];
    let curve = sweep_truncnormal_curve(&ms, 10.0, &cfg).unwrap();
    for p in &curve.points {
        if p.scan_value > std::f64::consts::LN_2 / 2.0 {
            assert_eq!(p.status, PointStatus::InfeasibleEverywhere, "m = {}", p.scan_value);
        }
    }
    let at = |m: f64| curve.points.iter().find(|p| p.scan_value == m).unwrap().critical_value;
    assert!(at(-2.0) > at(0.0));
}
