// Reference values are quoted at full printed precision.
#![allow(clippy::excessive_precision, clippy::approx_constant)]

use approx::assert_relative_eq;
use singtrace_core::Jet;
use singtrace_engine::specfun::{
    bessel_pair, bessel_pair_jet, sph_bessel_pair, sph_bessel_pair_jet, BesselKind, RatioTable,
};

#[path = "data/bessel_reference.rs"]
mod reference;

fn tol_for(n: usize) -> f64 {
    if n <= 100 {
        1e-12
    } else {
        1e-10
    }
}

#[test]
fn cylindrical_matches_high_precision_reference() {
    for &(n, x, ln_i, ln_k) in reference::CYLINDRICAL {
        let p = bessel_pair(n, x).unwrap();
        let tol = tol_for(n);
        assert!(
            (p.ln_i_scaled() - ln_i).abs() <= tol,
            "I n={n} x={x}: {} vs {ln_i}",
            p.ln_i_scaled()
        );
        assert!(
            (p.ln_k_scaled() - ln_k).abs() <= tol,
            "K n={n} x={x}: {} vs {ln_k}",
            p.ln_k_scaled()
        );
    }
}

#[test]
fn spherical_matches_high_precision_reference() {
    for &(l, x, ln_i, ln_k) in reference::SPHERICAL {
        let p = sph_bessel_pair(l, x).unwrap();
        let tol = tol_for(l);
        assert!(
            (p.ln_i_scaled() - ln_i).abs() <= tol,
            "i l={l} x={x}: {} vs {ln_i}",
            p.ln_i_scaled()
        );
        assert!(
            (p.ln_k_scaled() - ln_k).abs() <= tol,
            "k l={l} x={x}: {} vs {ln_k}",
            p.ln_k_scaled()
        );
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

/// Power series of Iₙ, fine for moderate arguments.
fn i_series(n: usize, x: f64) -> f64 {
    let mut term = (0.5 * x).powi(n as i32) / factorial(n);
    let mut sum = term;
    for k in 1..200 {
        term *= 0.25 * x * x / (k as f64 * (k + n) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Kₙ(x) = ∫₀^∞ exp(−x·cosh t)·cosh(n·t) dt by the trapezoid rule, which
/// converges geometrically for this analytic, rapidly decaying integrand.
fn k_quadrature_scaled(n: usize, x: f64) -> f64 {
    let h: f64 = 0.01;
    let mut sum = 0.5;
    let mut t: f64 = h;
    loop {
        let term = (-x * (t.cosh() - 1.0) + n as f64 * t).exp()
            * 0.5
            * (1.0 + (-2.0 * n as f64 * t).exp());
        sum += term;
        if term < 1e-20 * sum {
            break;
        }
        t += h;
    }
    sum * h
}

#[test]
fn recurrences_agree_with_direct_evaluation() {
    for n in 0..=10 {
        for &x in &[0.1, 1.0, 10.0] {
            let p = bessel_pair(n, x).unwrap();
            assert_eq!(p.log_shift, 0.0);
            let i_direct = i_series(n, x) * (-x).exp();
            assert_relative_eq!(p.i_scaled, i_direct, max_relative = 1e-10);
            assert_relative_eq!(p.k_scaled, k_quadrature_scaled(n, x), max_relative = 1e-10);
        }
    }
}

#[test]
fn derivative_fields_satisfy_three_term_relations() {
    for n in 1..=30 {
        for &x in &[0.3, 2.5, 40.0] {
            let lo = bessel_pair(n - 1, x).unwrap();
            let mid = bessel_pair(n, x).unwrap();
            let hi = bessel_pair(n + 1, x).unwrap();
            assert_relative_eq!(
                mid.di_scaled,
                0.5 * (lo.i_scaled + hi.i_scaled),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                mid.dk_scaled,
                -0.5 * (lo.k_scaled + hi.k_scaled),
                max_relative = 1e-12
            );
        }
    }
    let p0 = bessel_pair(0, 1.7).unwrap();
    let p1 = bessel_pair(1, 1.7).unwrap();
    assert_relative_eq!(p0.di_scaled, p1.i_scaled, max_relative = 1e-13);
    assert_relative_eq!(p0.dk_scaled, -p1.k_scaled, max_relative = 1e-13);
}

#[test]
fn wronskians_hold_across_the_range() {
    for kind in [BesselKind::Cylindrical, BesselKind::Spherical] {
        for &x in &[1e-6, 1e-3, 0.05, 0.7, 1.0, 3.0, 30.0, 500.0, 2e4] {
            let table = RatioTable::new(kind, 2000, x).unwrap();
            for n in [0, 1, 2, 3, 7, 20, 100, 500, 2000] {
                let p = table.pair(n);
                let tol = if n <= 100 { 1e-12 } else { 1e-10 };
                assert_relative_eq!(p.wronskian(), p.expected_wronskian(), max_relative = tol);
            }
        }
    }
}

#[test]
fn spherical_wronskian_scales_like_inverse_square() {
    let p = sph_bessel_pair(3, 0.7).unwrap();
    let q = sph_bessel_pair(0, 0.7).unwrap();
    assert_relative_eq!(p.wronskian(), q.wronskian(), max_relative = 1e-13);
    assert_relative_eq!(p.wronskian() * 0.49, 1.0, max_relative = 1e-13);
}

#[test]
fn product_tends_to_one_over_two_n() {
    let table = RatioTable::new(BesselKind::Cylindrical, 5000, 1.0).unwrap();
    for n in 50..=5000 {
        let p = table.pair(n);
        assert!((n as f64 * p.product() - 0.5).abs() < 0.01, "n = {n}");
    }
    // Scaling cancels exactly in the product.
    for n in 0..=50 {
        let p = bessel_pair(n, 1.0).unwrap();
        let ln_prod = p.ln_i_scaled() + p.ln_k_scaled();
        assert_relative_eq!(p.product().ln(), ln_prod, epsilon = 1e-12);
    }
}

#[test]
fn large_orders_stay_finite() {
    let p = bessel_pair(10_000, 1.0).unwrap();
    assert!(p.i_scaled.is_finite() && p.k_scaled.is_finite() && p.log_shift != 0.0);
    assert_relative_eq!(p.wronskian(), 1.0, max_relative = 1e-10);
    assert!((10_000.0 * p.product() - 0.5).abs() < 1e-6);
}

#[test]
fn jets_reduce_to_pairs_at_order_zero() {
    let x = Jet::constant(1.3, -1.69, 0).unwrap();
    let j = bessel_pair_jet(2, &x).unwrap();
    let p = bessel_pair(2, 1.3).unwrap();
    assert_eq!(j.i.value(), p.i_scaled);
    assert_eq!(j.k.value(), p.k_scaled);
    assert_eq!(j.di.value(), p.di_scaled);
    assert_eq!(j.dk.value(), p.dk_scaled);
}

#[test]
fn jet_slope_matches_finite_difference() {
    let f = |lambda: f64| bessel_pair(0, (-lambda).sqrt()).unwrap().i_scaled;
    let kappa = Jet::kappa(-1.0, 3).unwrap();
    let j = bessel_pair_jet(0, &kappa).unwrap();
    let h = 1e-5;
    let fd = (f(-1.0 + h) - f(-1.0 - h)) / (2.0 * h);
    assert_relative_eq!(j.i.coeff(1), fd, max_relative = 1e-6);
    let fd2 = (f(-1.0 + 1e-3) - 2.0 * f(-1.0) + f(-1.0 - 1e-3)) / 1e-6 / 2.0;
    assert_relative_eq!(j.i.coeff(2), fd2, max_relative = 1e-5);
}

#[test]
fn wronskian_holds_in_the_jet_ring() {
    for radius in [1.0, 0.4, 2.5] {
        let kappa = Jet::kappa(-1.7, 5).unwrap();
        let x = kappa.scale(radius);
        for n in 0..=6 {
            let j = bessel_pair_jet(n, &x).unwrap();
            let w = j.di * j.k - j.i * j.dk;
            let expected = x.recip().unwrap();
            for k in 0..=5 {
                assert!((w.coeff(k) - expected.coeff(k)).abs() <= 1e-10 * expected.scaled_norm());
            }
            let js = sph_bessel_pair_jet(n, &x).unwrap();
            let ws = js.di * js.k - js.i * js.dk;
            let expected = (x * x).recip().unwrap();
            for k in 0..=5 {
                assert!((ws.coeff(k) - expected.coeff(k)).abs() <= 1e-10 * expected.scaled_norm());
            }
        }
    }
}
