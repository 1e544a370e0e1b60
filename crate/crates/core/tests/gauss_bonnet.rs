use std::f64::consts::PI;

use qgeo::conformal::paneitz_sign;
use qgeo::field::Expr;
use qgeo::gauss_bonnet::*;

#[test]
fn gauss_legendre_rules() {
    // exact for degree 2m−1
    let r = Rule1D::GaussLegendre { a: 0.0, b: 2.0, m: 5 };
    let s: f64 = r.nodes().iter().map(|(x, w)| w * x.powi(9)).sum();
    assert!((s - 2f64.powi(10) / 10.0).abs() < 1e-11);
    let s: f64 = Rule1D::GaussLegendre { a: 0.0, b: PI, m: 16 }.nodes().iter().map(|(x, w)| w * x.sin()).sum();
    assert!((s - 2.0).abs() < 1e-14);
}

#[test]
fn areas_match_closed_forms() {
    for name in CLOSED {
        let ex = closed_example(name).unwrap();
        let a = integrate_scalar(&ex, &Expr::c(1.0)).unwrap();
        assert!((a - ex.area).abs() < 1e-9 * ex.area, "{name}: {a} vs {}", ex.area);
    }
    assert!((closed_example("clifford-torus").unwrap().area - 2.0 * PI * PI).abs() < 1e-14);
    assert!((closed_example("s2xs2-in-s5").unwrap().area - 4.0 * PI * PI).abs() < 1e-12);
    assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
    assert!((sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
}

#[test]
fn chern_gauss_bonnet() {
    for name in CLOSED {
        let ex = closed_example(name).unwrap();
        let r = chern_gb(&ex).unwrap();
        assert!(r.residual < 1e-8 * (1.0 + r.rhs.abs()), "{name}: {r:?}");
    }
}

#[test]
fn closed_minimal_formula() {
    for name in CLOSED.iter().filter(|n| **n != "round-s2") {
        let ex = closed_example(name).unwrap();
        let r = closed_gb(&ex).unwrap();
        assert!(r.residual < 1e-4 * (1.0 + r.lhs.abs()), "{r:?}");
        assert!(r.max_h < 1e-8, "{r:?}");
    }
    assert!(closed_gb(&closed_example("round-s2").unwrap()).is_err());
}

#[test]
fn factorization() {
    let sigma = paneitz_sign().unwrap();
    for name in ["equatorial-s2-in-s3", "clifford-torus", "equatorial-s4-in-s5", "s2xs2-in-s5"] {
        let ex = closed_example(name).unwrap();
        let r = factorization_check(&ex, 2, sigma).unwrap();
        assert!(r.q_residual < 1e-6, "{r:?}");
        assert!(r.operator_residual < 1e-5, "{r:?}");
    }
    for n in 3..=6 {
        let ex = equatorial_sphere(2, n).unwrap();
        let r = factorization_check(&ex, 1, sigma).unwrap();
        assert!(r.q_residual < 1e-6 && r.operator_residual < 1e-5, "n={n}: {r:?}");
    }
}

#[test]
fn pfaffian_coefficient() {
    for (k, n) in [(2, 3), (2, 5), (4, 5), (4, 7)] {
        let r = c_nk_check(k, n).unwrap();
        assert!((r.recovered - r.expected).abs() < 1e-6, "{r:?}");
    }
    assert_eq!(c_nk(2), 1.0);
    assert_eq!(c_nk(4), 2.0);
}

#[test]
fn divergences_integrate_to_zero() {
    for name in ["equatorial-s4-in-s5", "s2xs2-in-s5", "t4-in-s7"] {
        let ex = closed_example(name).unwrap();
        let r = divergence_integrals(&ex, None, &homogeneous()).unwrap();
        assert!(r.q_divergence.abs() < 1e-5 && r.k1.abs() < 1e-5 && r.k2.abs() < 1e-5, "{r:?}");
    }
    // after a conformal change the integrands are no longer zero pointwise
    let ex = closed_example("s2xs2-in-s5").unwrap();
    let ups = sphere_factor(5, &[0, 1, 2], 3);
    let sampling = Sampling::Symmetric { active: vec![0, 1], checks: 2 };
    let r = divergence_integrals(&ex, Some(&ups), &sampling).unwrap();
    assert!(r.q_divergence.abs() < 1e-5 && r.k1.abs() < 1e-5 && r.k2.abs() < 1e-5, "{r:?}");
}

#[test]
fn total_q_is_conformally_invariant() {
    let ex = closed_example("s2xs2-in-s5").unwrap();
    for seed in [3, 8] {
        let ups = sphere_factor(5, &[0, 1, 2], seed);
        let sampling = Sampling::Symmetric { active: vec![0, 1], checks: 2 };
        let r = total_q(&ex, &ups, &sampling).unwrap();
        assert!((r.rescaled - r.original).abs() < 1e-4 * (1.0 + r.original.abs()), "{r:?}");
    }
}

#[test]
fn quadrature_converges() {
    for name in ["round-s2", "clifford-torus", "equatorial-s4-in-s5", "s2xs2-in-s5"] {
        let d = quadrature_convergence(&closed_example(name).unwrap()).unwrap();
        assert!(d < 1e-8, "{name}: {d:e}");
    }
}

#[test]
fn pfaffian_integral_survives_conformal_change() {
    let ex = closed_example("s2xs2-in-s5").unwrap();
    let ups = sphere_factor(5, &[0, 1, 2], 5);
    let sampling = Sampling::Symmetric { active: vec![0, 1], checks: 2 };
    let r = integrate(&ex, Some(&ups), &sampling, |p| Ok(vec![p.ev.pfbar()?.value()])).unwrap();
    let want = 4.0 * PI * PI * 4.0;
    assert!((r.values[0] - want).abs() < 1e-6 * want, "{} vs {want}", r.values[0]);
    // the area itself does change
    assert!((r.area - ex.area).abs() > 1e-2);
}
