use approx::assert_relative_eq;
use singtrace_core::{Coupling, EnginePlan, Error, FormulaId, Geometry, ModeCap, SpectralGuard};
use singtrace_engine::ntd::{m_tilde, MTildeRoute};
use singtrace_engine::trace::{
    deltaprime_split_identity, per_mode_term, sweep, tail_estimate, trace_formula, ModeTerm,
};

fn circle() -> Geometry {
    Geometry::circle(1.0).unwrap()
}

#[test]
fn zero_coupling_gives_exact_zeros() {
    for dim in [2, 3] {
        let g = Geometry::new(dim, 1.0).unwrap();
        for n in 0..5 {
            let t = per_mode_term(
                FormulaId::DeltaVsFree,
                &g.mode(n),
                &g,
                Some(&Coupling::delta(0.0).unwrap()),
                1,
                -1.0,
            )
            .unwrap();
            assert_eq!(t, 0.0);
            let t = per_mode_term(
                FormulaId::DeltaPrimeVsNeumann,
                &g.mode(n),
                &g,
                Some(&Coupling::delta_prime(0.0).unwrap()),
                1,
                -1.0,
            )
            .unwrap();
            assert_eq!(t, 0.0);
        }
        let r = trace_formula(
            FormulaId::DeltaVsFree,
            &g,
            Some(&Coupling::delta(0.0).unwrap()),
            &EnginePlan::new(1, -2.0),
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
        assert_eq!(r.tail_bound, 0.0);
        assert_eq!(r.modes_used, singtrace_engine::trace::MIN_MODES);
    }
}

#[test]
fn deltaprime_at_zero_strength_is_neumann() {
    let g = circle();
    let w0 = Coupling::delta_prime(0.0).unwrap();
    for m in 1..=3 {
        for n in 0..20 {
            let a = per_mode_term(
                FormulaId::DeltaPrimeVsFree,
                &g.mode(n),
                &g,
                Some(&w0),
                m,
                -1.3,
            )
            .unwrap();
            let b = per_mode_term(FormulaId::NeumannVsFree, &g.mode(n), &g, None, m, -1.3).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn mode_zero_term_matches_finite_differences() {
    let g = circle();
    let f = |l: f64| {
        m_tilde(&g.mode(0), &g, l, 0, MTildeRoute::HarmonicSum)
            .unwrap()
            .value()
    };
    let h = 1e-4;
    let derivative = (f(-2.0 + h) - f(-2.0 - h)) / (2.0 * h);
    let expected = 0.8 * derivative / (1.0 - 0.8 * f(-2.0));
    let t = per_mode_term(
        FormulaId::DeltaVsFree,
        &g.mode(0),
        &g,
        Some(&Coupling::delta(0.8).unwrap()),
        1,
        -2.0,
    )
    .unwrap();
    assert_relative_eq!(t, expected, max_relative = 1e-7);
}

#[test]
fn attractive_delta_terms_are_positive_for_odd_powers() {
    let g = circle();
    let c = Coupling::delta(0.8).unwrap();
    for m in [1, 3] {
        for n in 0..200 {
            let t =
                per_mode_term(FormulaId::DeltaVsFree, &g.mode(n), &g, Some(&c), m, -2.0).unwrap();
            assert!(t > 0.0, "m={m} n={n}");
        }
    }
}

#[test]
fn split_identity_per_mode_and_summed() {
    for (dim, m) in [(2, 1), (2, 2), (2, 3), (3, 2), (3, 3)] {
        let g = Geometry::new(dim, 1.0).unwrap();
        for omega in [0.5, -0.5, 2.0] {
            for lambda in [-1.0, -4.0] {
                let plan = EnginePlan::new(m, lambda).with_guard(SpectralGuard::ResolventSet);
                let r =
                    deltaprime_split_identity(&g, &Coupling::delta_prime(omega).unwrap(), &plan)
                        .unwrap();
                assert!(
                    r.summed_rel_gap <= 1e-10,
                    "{dim} {m} {omega} {lambda}: {r:?}"
                );
                assert!(
                    r.max_mode_rel_gap <= 1e-10,
                    "{dim} {m} {omega} {lambda}: {r:?}"
                );
            }
        }
    }
}

#[test]
fn refuses_above_the_spectrum() {
    let g = circle();
    let err = trace_formula(
        FormulaId::DeltaVsFree,
        &g,
        Some(&Coupling::delta(2.0).unwrap()),
        &EnginePlan::new(1, -1.0),
    )
    .unwrap_err();
    assert!(
        matches!(err, Error::AboveSpectrum { mode: 0, .. }),
        "{err:?}"
    );
    let ok = trace_formula(
        FormulaId::DeltaVsFree,
        &g,
        Some(&Coupling::delta(2.0).unwrap()),
        &EnginePlan::new(1, -1.0).with_guard(SpectralGuard::ResolventSet),
    );
    assert!(ok.is_ok());
}

#[test]
fn plan_and_coupling_errors() {
    let s = Geometry::sphere(1.0).unwrap();
    let w = Coupling::delta_prime(0.5).unwrap();
    assert!(matches!(
        trace_formula(
            FormulaId::DeltaPrimeVsFree,
            &s,
            Some(&w),
            &EnginePlan::new(1, -1.0)
        ),
        Err(Error::Plan(_))
    ));
    let g = circle();
    assert!(matches!(
        trace_formula(
            FormulaId::DeltaVsFree,
            &g,
            Some(&w),
            &EnginePlan::new(1, -1.0)
        ),
        Err(Error::Usage(_))
    ));
    assert!(matches!(
        trace_formula(FormulaId::DeltaVsFree, &g, None, &EnginePlan::new(1, -1.0)),
        Err(Error::Usage(_))
    ));
}

#[test]
fn value_is_compensated_sum_of_retained_terms() {
    let g = circle();
    let r = trace_formula(
        FormulaId::DeltaVsFree,
        &g,
        Some(&Coupling::delta(0.8).unwrap()),
        &EnginePlan::new(2, -1.0),
    )
    .unwrap();
    let terms = r.per_mode.as_ref().unwrap();
    assert_eq!(terms.len(), r.modes_used);
    let s = singtrace_core::compensated_sum(terms.iter().map(ModeTerm::weighted));
    assert_eq!(s, r.value);
    assert!(r.converged);
    assert!(r.tail_bound <= r.value.abs() * 1e-6 + 1e-12);
}

#[test]
fn doubling_the_cap_stays_within_the_tail_bound() {
    let g = circle();
    let cases = [
        (
            FormulaId::DeltaVsFree,
            Some(Coupling::delta(0.8).unwrap()),
            1,
            -2.0,
        ),
        (
            FormulaId::DeltaVsFree,
            Some(Coupling::delta(-0.5).unwrap()),
            2,
            -1.0,
        ),
        (
            FormulaId::DeltaPrimeVsNeumann,
            Some(Coupling::delta_prime(-0.7).unwrap()),
            1,
            -1.0,
        ),
        (
            FormulaId::DeltaPrimeVsNeumann,
            Some(Coupling::delta_prime(0.5).unwrap()),
            2,
            -4.0,
        ),
    ];
    for (which, c, m, lambda) in cases {
        let plan = EnginePlan::new(m, lambda);
        let r = trace_formula(which, &g, c.as_ref(), &plan).unwrap();
        assert!(r.converged);
        let wider = plan.with_mode_cap(ModeCap::Exact(2 * r.modes_used));
        let w = trace_formula(which, &g, c.as_ref(), &wider).unwrap();
        assert!(
            (w.value - r.value).abs() <= r.tail_bound,
            "{which}: {} vs {} (tail {})",
            w.value,
            r.value,
            r.tail_bound
        );
    }
}

#[test]
fn slowly_decaying_sums_report_non_convergence() {
    let g = circle();
    let r = trace_formula(
        FormulaId::NeumannVsFree,
        &g,
        None,
        &EnginePlan::new(1, -1.0).with_mode_cap(ModeCap::Fixed(500)),
    )
    .unwrap();
    assert!(!r.converged);
    assert_eq!(r.modes_used, 501);
    assert!(r.tail_bound > 0.0);
}

#[test]
fn sweep_decays_and_keeps_errors_in_slot() {
    let g = circle();
    let c = Coupling::delta(0.8).unwrap();
    let grid: Vec<f64> = (0..=6).map(|j| -(2f64.powi(j))).collect();
    let out = sweep(
        FormulaId::DeltaVsFree,
        &g,
        Some(&c),
        &EnginePlan::new(1, -1.0),
        &grid,
    );
    let values: Vec<f64> = out.iter().map(|r| r.as_ref().unwrap().value).collect();
    assert!(values.windows(2).all(|w| w[1].abs() < w[0].abs()));
    assert!(sweep(
        FormulaId::DeltaVsFree,
        &g,
        Some(&c),
        &EnginePlan::new(1, -1.0),
        &[]
    )
    .is_empty());
    let mixed = sweep(
        FormulaId::DeltaVsFree,
        &g,
        Some(&Coupling::delta(2.0).unwrap()),
        &EnginePlan::new(1, -1.0),
        &[-4.0, -1.0, 0.5],
    );
    assert!(mixed[0].is_ok());
    assert!(matches!(mixed[1], Err(Error::AboveSpectrum { .. })));
    assert!(matches!(mixed[2], Err(Error::Domain(_))));
}

#[test]
fn tail_estimate_recovers_a_power_law() {
    let terms: Vec<ModeTerm> = (1..=40)
        .map(|n| ModeTerm {
            index: n,
            weight: 2,
            term: 1.5 / (n as f64).powi(3),
        })
        .collect();
    let (bound, ok) = tail_estimate(&terms);
    assert!(ok);
    assert_relative_eq!(bound, 3.0 / (2.0 * 40.0 * 40.0), max_relative = 1e-10);
    let slow: Vec<ModeTerm> = (1..=40)
        .map(|n| ModeTerm {
            index: n,
            weight: 1,
            term: 1.0 / n as f64,
        })
        .collect();
    assert!(!tail_estimate(&slow).1);
}
