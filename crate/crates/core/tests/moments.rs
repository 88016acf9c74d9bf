mod support;

use delay_decay_core::DelayDistribution;
use support::moment_oracle;

const MUS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

fn families() -> Vec<DelayDistribution> {
    vec![
        DelayDistribution::gamma(1.0, 6.0).unwrap(),
        DelayDistribution::gamma(2.0, 8.0).unwrap(),
        DelayDistribution::gamma(0.5, 3.0).unwrap(),
        DelayDistribution::gamma(3.5, 2.5).unwrap(),
        DelayDistribution::uniform(0.0, 0.3).unwrap(),
        DelayDistribution::uniform(0.2, 1.7).unwrap(),
        DelayDistribution::uniform(1.0, 1.0 + 1e-7).unwrap(),
        DelayDistribution::truncated_normal(0.1, 0.05).unwrap(),
        DelayDistribution::truncated_normal(0.2, 0.1).unwrap(),
        DelayDistribution::truncated_normal(-1.0, 0.5).unwrap(),
        DelayDistribution::truncated_normal(0.3, 2.0).unwrap(),
        DelayDistribution::truncated_normal(-3.0, 0.4).unwrap(),
        DelayDistribution::atoms(vec![(0.1, 0.25), (0.4, 0.5), (2.0, 0.25)]).unwrap(),
    ]
}

#[test]
fn closed_forms_match_quadrature() {
    for d in families() {
        for mu in MUS {
            let got = d.exp_moment(mu).unwrap();
            match moment_oracle(&d, mu) {
                Some(want) => {
                    let rel = ((got - want) / want).abs();
                    assert!(rel < 1e-8, "{:?} mu={mu}: {got} vs {want} (rel {rel:e})", d.family());
                }
                None => assert_eq!(got, f64::INFINITY, "{:?} mu={mu}", d.family()),
            }
        }
    }
}

#[test]
fn dirac_is_a_single_atom() {
    for tau in [0.0, 0.1, 0.3, 1.0, 2.5] {
        let d = DelayDistribution::dirac(tau).unwrap();
        let a = DelayDistribution::atoms(vec![(tau, 1.0)]).unwrap();
        for mu in MUS {
            assert_eq!(d.exp_moment(mu).unwrap(), a.exp_moment(mu).unwrap());
        }
    }
}

#[test]
fn oracle_sanity() {
    let g = moment_oracle(&DelayDistribution::gamma(1.0, 6.0).unwrap(), 2.0).unwrap();
    assert!((g - 1.5).abs() < 1e-12);
    let u = moment_oracle(&DelayDistribution::uniform(0.0, 1.0).unwrap(), 1.0).unwrap();
    assert!((u - (std::f64::consts::E - 1.0)).abs() < 1e-13);
    // half-normal: M(μ) = 2 e^{μ²/2} Φ(μ), Φ(1) = 0.8413447460685429
    let h = moment_oracle(&DelayDistribution::truncated_normal(0.0, 1.0).unwrap(), 1.0).unwrap();
    assert!((h - 2.0 * 0.5f64.exp() * 0.841_344_746_068_542_9).abs() < 1e-12);
}
