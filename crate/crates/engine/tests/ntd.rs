#![allow(clippy::excessive_precision)]

use approx::assert_relative_eq;
use singtrace_core::{Geometry, ModeSpec};
use singtrace_engine::ntd::{
    m_hat, m_tilde, ntd_exterior, ntd_interior, schatten_decay_probe, DecayAbscissa, DecayTarget,
    MTildeRoute, NtdEvaluator,
};

fn circle() -> Geometry {
    Geometry::circle(1.0).unwrap()
}

fn mode(g: &Geometry, n: usize) -> ModeSpec {
    g.mode(n)
}

#[test]
fn reference_values_at_mode_zero() {
    let g = circle();
    let m0 = mode(&g, 0);
    let mi = ntd_interior(&m0, &g, -1.0, 0).unwrap().value();
    let me = ntd_exterior(&m0, &g, -1.0, 0).unwrap().value();
    assert_relative_eq!(
        mi,
        1.2660658777520082 / 0.5651591039924851,
        max_relative = 1e-13
    );
    assert_relative_eq!(
        me,
        0.42102443824070834 / 0.6019072301972346,
        max_relative = 1e-13
    );
    let mt = m_tilde(&m0, &g, -1.0, 0, MTildeRoute::HarmonicSum)
        .unwrap()
        .value();
    assert_relative_eq!(mt, 0.5330446749562686, max_relative = 1e-13);
    assert_relative_eq!(mt, 1.0 / (1.0 / mi + 1.0 / me), max_relative = 1e-14);
    let mh = m_hat(&m0, &g, -1.0, 0).unwrap().value();
    assert_relative_eq!(mh, mi + me, max_relative = 1e-15);
    assert!((mh - 2.93968).abs() < 1e-5);
}

#[test]
fn m_tilde_jet_matches_high_precision_reference() {
    let g = circle();
    let jet = m_tilde(&mode(&g, 0), &g, -1.0, 3, MTildeRoute::HarmonicSum).unwrap();
    let reference = [
        0.5330446749562686,
        0.2620542057249419,
        0.17924493387532123,
        0.13482454429563218,
    ];
    for (k, r) in reference.iter().enumerate() {
        assert_relative_eq!(jet.coeff(k), *r, max_relative = 1e-11);
    }
}

#[test]
fn large_index_jets_match_high_precision_reference() {
    // M̃ jets at λ₀ = −1, R = 1 from 60-digit arithmetic. Coefficient 3 is
    // only trusted at moderate n.
    let g = circle();
    let eval = NtdEvaluator::new(&g, -1.0, 3, 1000).unwrap();
    let cases: [(usize, [f64; 4], usize, f64); 3] = [
        (
            100,
            [
                0.0049997499937553141,
                2.4998748843589278e-7,
                1.875468569235204e-11,
                1.5641414037202043e-15,
            ],
            3,
            1e-2,
        ),
        (
            300,
            [
                0.0016666574073816897,
                9.2592078136430367e-9,
                7.716263708250692e-14,
                7.145323737022529e-19,
            ],
            2,
            1e-4,
        ),
        (
            1000,
            [
                0.0004999997499999375,
                2.4999987499884375e-10,
                1.8750046874819528e-16,
                1.5625164063279291e-22,
            ],
            2,
            1e-4,
        ),
    ];
    for (n, reference, top, tol_top) in cases {
        let jet = eval.mode_value(n).unwrap().m_tilde;
        assert_relative_eq!(jet.coeff(0), reference[0], max_relative = 1e-13);
        assert_relative_eq!(jet.coeff(1), reference[1], max_relative = 1e-9);
        for (k, &r) in reference.iter().enumerate().take(top + 1).skip(2) {
            assert_relative_eq!(jet.coeff(k), r, max_relative = tol_top);
        }
    }
}

#[test]
fn routes_agree() {
    for dim in [2, 3] {
        for radius in [1.0, 0.6, 1.8] {
            let g = Geometry::new(dim, radius).unwrap();
            for n in 0..=50 {
                let a = m_tilde(&mode(&g, n), &g, -1.3, 0, MTildeRoute::HarmonicSum).unwrap();
                let b = m_tilde(&mode(&g, n), &g, -1.3, 0, MTildeRoute::ClosedForm).unwrap();
                assert_relative_eq!(a.value(), b.value(), max_relative = 1e-10);
            }
            for n in 0..=8 {
                let a = m_tilde(&mode(&g, n), &g, -1.3, 3, MTildeRoute::HarmonicSum).unwrap();
                let b = m_tilde(&mode(&g, n), &g, -1.3, 3, MTildeRoute::ClosedForm).unwrap();
                for k in 0..=3 {
                    assert!(
                        (a.coeff(k) - b.coeff(k)).abs() <= 1e-10 * a.scaled_norm(),
                        "n={n} k={k}"
                    );
                }
            }
        }
    }
}

#[test]
fn positivity_and_monotonicity() {
    for dim in [2, 3] {
        let g = Geometry::new(dim, 1.0).unwrap();
        for lambda in [-0.1, -1.0, -10.0] {
            let eval = NtdEvaluator::new(&g, lambda, 1, 100).unwrap();
            for n in 0..=100 {
                let v = eval.mode_value(n).unwrap();
                for jet in [v.m_minus, v.m_plus, v.m_tilde, v.m_hat] {
                    assert!(jet.value() > 0.0, "d={dim} n={n} λ={lambda}");
                    assert!(jet.coeff(1) >= 0.0, "d={dim} n={n} λ={lambda}");
                }
                assert!(v.m_hat.value() >= v.m_tilde.value());
            }
        }
    }
}

#[test]
fn harmonic_identities_in_the_jet_ring() {
    for dim in [2, 3] {
        let g = Geometry::new(dim, 1.4).unwrap();
        let eval = NtdEvaluator::new(&g, -2.2, 4, 200).unwrap();
        for n in [0, 1, 2, 10, 200] {
            let v = eval.mode_value(n).unwrap();
            let lhs = v.m_tilde.recip().unwrap();
            let rhs = v.m_plus.recip().unwrap() + v.m_minus.recip().unwrap();
            for k in 0..=4 {
                assert!((lhs.coeff(k) - rhs.coeff(k)).abs() <= 1e-10 * lhs.scaled_norm());
            }
            assert_eq!(v.m_hat, v.m_plus + v.m_minus);
        }
    }
}

#[test]
fn vanish_as_lambda_goes_to_minus_infinity() {
    let g = circle();
    let m0 = mode(&g, 0);
    let mut last_i = f64::INFINITY;
    let mut last_e = f64::INFINITY;
    for j in 0..=4 {
        let lambda = -(10f64.powi(j));
        let i = ntd_interior(&m0, &g, lambda, 0).unwrap().value();
        let e = ntd_exterior(&m0, &g, lambda, 0).unwrap().value();
        assert!(i < last_i && e < last_e);
        last_i = i;
        last_e = e;
    }
    assert!(last_i < 0.011 && last_e < 0.011);
}

#[test]
fn jets_match_finite_differences() {
    for dim in [2, 3] {
        let g = Geometry::new(dim, 1.2).unwrap();
        for n in [0, 1, 4, 20] {
            let m = mode(&g, n);
            let f = |l: f64| {
                m_tilde(&m, &g, l, 0, MTildeRoute::HarmonicSum)
                    .unwrap()
                    .value()
            };
            let lambda0 = -1.5;
            let jet = m_tilde(&m, &g, lambda0, 3, MTildeRoute::HarmonicSum).unwrap();
            let h = 1e-2;
            let fp = |s: f64| f(lambda0 + s * h);
            let d1 = (fp(1.0) - fp(-1.0)) / (2.0 * h);
            let d1 = d1 - (fp(2.0) - 2.0 * fp(1.0) + 2.0 * fp(-1.0) - fp(-2.0)) / (2.0 * h) / 6.0;
            let d2 = (-fp(2.0) + 16.0 * fp(1.0) - 30.0 * fp(0.0) + 16.0 * fp(-1.0) - fp(-2.0))
                / (12.0 * h * h)
                / 2.0;
            let d3 =
                (fp(2.0) - 2.0 * fp(1.0) + 2.0 * fp(-1.0) - fp(-2.0)) / (2.0 * h * h * h) / 6.0;
            assert_relative_eq!(jet.coeff(1), d1, max_relative = 1e-6);
            assert_relative_eq!(jet.coeff(2), d2, max_relative = 1e-6);
            if n <= 4 {
                assert_relative_eq!(jet.coeff(3), d3, max_relative = 1e-3);
            }
        }
    }
}

#[test]
fn large_index_asymptotics() {
    let g = circle();
    let eval = NtdEvaluator::new(&g, -1.0, 0, 5000).unwrap();
    for n in 50..=5000 {
        let v = eval.mode_value(n).unwrap();
        assert!((n as f64 * v.m_tilde.value() - 0.5).abs() < 0.01);
    }
    // C/n bound with a stable constant.
    let c: Vec<f64> = [50, 500, 5000]
        .iter()
        .map(|&n| n as f64 * eval.mode_value(n).unwrap().m_tilde.value())
        .collect();
    assert!(c.iter().all(|&ci| ci <= 0.5 + 1e-12));
}

#[test]
fn decay_exponents_on_the_circle() {
    let g = circle();
    let expected = [(0, -1.0, 0.05), (1, -3.0, 0.1), (2, -5.0, 0.2)];
    for (k, p, tol) in expected {
        let fit = schatten_decay_probe(
            DecayTarget::MTilde,
            k,
            &g,
            -1.0,
            (100, 1000),
            DecayAbscissa::ModeIndex,
        )
        .unwrap();
        assert!((fit.exponent - p).abs() < tol, "k={k}: {}", fit.exponent);
    }
    let fit = schatten_decay_probe(
        DecayTarget::MHat,
        0,
        &g,
        -1.0,
        (100, 1000),
        DecayAbscissa::ModeIndex,
    )
    .unwrap();
    assert!((fit.exponent + 1.0).abs() < 0.05);
}

#[test]
fn decay_against_singular_value_rank_on_the_sphere() {
    let g = Geometry::sphere(1.0).unwrap();
    let by_rank = schatten_decay_probe(
        DecayTarget::MHat,
        0,
        &g,
        -1.0,
        (10, 60),
        DecayAbscissa::SingularValueRank,
    )
    .unwrap();
    assert!(
        (by_rank.exponent + 0.5).abs() < 0.05,
        "{}",
        by_rank.exponent
    );
    let by_index = schatten_decay_probe(
        DecayTarget::MHat,
        0,
        &g,
        -1.0,
        (10, 60),
        DecayAbscissa::ModeIndex,
    )
    .unwrap();
    assert!(
        (by_index.exponent + 1.0).abs() < 0.05,
        "{}",
        by_index.exponent
    );
}

#[test]
fn decay_probe_rejects_bad_ranges() {
    let g = circle();
    for range in [(5, 100), (100, 100), (100, 50)] {
        assert!(schatten_decay_probe(
            DecayTarget::MTilde,
            0,
            &g,
            -1.0,
            range,
            DecayAbscissa::ModeIndex
        )
        .is_err());
    }
    assert!(schatten_decay_probe(
        DecayTarget::MTilde,
        0,
        &g,
        -1.0,
        (10, 13),
        DecayAbscissa::ModeIndex
    )
    .is_err());
}

#[test]
fn domain_errors() {
    let g = circle();
    assert!(ntd_interior(&mode(&g, 0), &g, 0.5, 1).is_err());
    assert!(ntd_interior(&mode(&g, 0), &g, 0.0, 1).is_err());
}
