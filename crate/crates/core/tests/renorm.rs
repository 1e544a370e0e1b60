use std::f64::consts::PI;

use proptest::prelude::*;
use qgeo::renorm::*;

// closed forms of the hemisphere area integral, with a = ε/R
fn exact_area(k: usize, a: f64) -> f64 {
    match k {
        2 => 2.0 * PI * (1.0 / a - 1.0),
        4 => 2.0 * PI * PI * (a.powi(-3) / 3.0 - 1.0 / a + 2.0 / 3.0),
        _ => unreachable!(),
    }
}

#[test]
fn truncated_area_matches_closed_form() {
    let m = HyperbolicModel::new(2, 3, 1.0).unwrap();
    assert!((truncated_area(&m, 0.5).unwrap() - 2.0 * PI).abs() < 1e-10);
    for (k, n, r) in [(2, 3, 1.0), (2, 5, 2.0), (4, 5, 1.0), (4, 6, 0.5)] {
        let m = HyperbolicModel::new(k, n, r).unwrap();
        for eps in [1e-3 * r, 0.03 * r, 0.9 * r] {
            let a = truncated_area(&m, eps).unwrap();
            let want = exact_area(k, eps / r);
            assert!((a - want).abs() < 1e-9 * want.max(1.0), "k={k} r={r} ε={eps}: {a} vs {want}");
        }
    }
}

#[test]
fn truncated_area_edge_cases() {
    let m = HyperbolicModel::new(2, 3, 1.0).unwrap();
    assert!(truncated_area(&m, 1.0 - 1e-9).unwrap() < 1e-6);
    assert!(truncated_area(&m, 1.0).is_err());
    assert!(truncated_area(&m, 2.0).is_err());
    assert!(truncated_area(&m, 0.0).is_err());
    assert!(HyperbolicModel::new(3, 5, 1.0).is_err());
    assert!(HyperbolicModel::new(4, 4, 1.0).is_err());
}

#[test]
fn k4_self_convergence() {
    let m = HyperbolicModel::new(4, 5, 1.0).unwrap();
    for eps in [1e-3, 1e-2] {
        let a = truncated_area(&m, eps).unwrap();
        let b = truncated_area(&m.refined(), eps).unwrap();
        assert!((a - b).abs() < 1e-7 * b, "ε={eps}: {a} vs {b}");
    }
}

#[test]
fn renormalized_areas() {
    let f2 = fit_renormalized_area(&HyperbolicModel::new(2, 3, 1.0).unwrap()).unwrap();
    assert_eq!(f2.powers, vec![-1, 0]);
    assert!((f2.renormalized_area + 2.0 * PI).abs() < 1e-6, "{f2:?}");
    assert!((f2.coefficient(-1).unwrap() - 2.0 * PI).abs() < 1e-8, "{f2:?}");
    assert!(f2.relative_residual < 1e-8 && f2.warning.is_none());

    let f4 = fit_renormalized_area(&HyperbolicModel::new(4, 5, 1.0).unwrap()).unwrap();
    assert_eq!(f4.powers, vec![-3, -1, 0]);
    assert!((f4.renormalized_area - 4.0 * PI * PI / 3.0).abs() < 1e-5, "{f4:?}");
    assert!(f4.relative_residual < 1e-8 && f4.warning.is_none());
    assert!((c_k(2) + 2.0 * PI).abs() < 1e-15);
    assert!((c_k(4) - 4.0 * PI * PI / 3.0).abs() < 1e-14);
}

#[test]
fn radius_independence_and_fit_stability() {
    for k in [2, 4] {
        let a1 = fit_renormalized_area(&HyperbolicModel::new(k, k + 1, 1.0).unwrap()).unwrap().renormalized_area;
        let a2 = fit_renormalized_area(&HyperbolicModel::new(k, k + 1, 2.0).unwrap()).unwrap().renormalized_area;
        assert!((a1 - a2).abs() < 1e-6, "k={k}: {a1} vs {a2}");
        let m = HyperbolicModel::new(k, k + 1, 1.0).unwrap();
        let half = fit_range(&m, 1e-3, 5e-2, 12).unwrap().renormalized_area;
        assert!((a1 - half).abs() < 1e-6, "k={k}: {a1} vs {half}");
    }
}

#[test]
fn ill_conditioned_fit_is_flagged() {
    // two nearly coincident heights cannot separate ε^{-3} from ε^{-1}
    let samples: Vec<(f64, f64)> =
        [1e-2, 1e-2 * (1.0 + 1e-9), 1e-2 * (1.0 + 2e-9)].iter().map(|&e| (e, exact_area(4, e))).collect();
    let f = fit_expansion(4, 1.0, samples, &basis_powers(4)).unwrap();
    assert!(f.warning.is_some() && f.condition > COND_WARN, "{f:?}");
    assert!(fit_expansion(4, 1.0, vec![(0.1, 1.0)], &basis_powers(4)).is_err());
}

#[test]
fn renormalized_gauss_bonnet() {
    for (k, n, tol) in [(2, 3, 1e-6), (2, 4, 1e-6), (4, 5, 1e-5), (4, 6, 1e-5)] {
        let r = renorm_gb_check(&HyperbolicModel::new(k, n, 1.0).unwrap(), 5).unwrap();
        assert!(r.residual < tol, "{r:?}");
        assert!(r.max_h < 1e-9 && r.max_lt < 1e-9 && r.max_weyl < 1e-9, "{r:?}");
        assert!(r.max_integrand < 1e-8, "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn area_depends_on_eps_over_r(r in 0.2f64..5.0, a in 0.002f64..0.9) {
        let m = HyperbolicModel::new(2, 3, r).unwrap();
        let v = truncated_area(&m, a * r).unwrap();
        prop_assert!((v - exact_area(2, a)).abs() < 1e-9 * exact_area(2, a).max(1.0));
    }

    #[test]
    fn fit_recovers_planted_coefficients(c in prop::collection::vec(-5.0f64..5.0, 3)) {
        let p = basis_powers(4);
        let samples = geometric_eps(1e-3, 1e-1, 12)
            .into_iter()
            .map(|e| (e, c[0] * e.powi(p[0]) + c[1] * e.powi(p[1]) + c[2]))
            .collect();
        let f = fit_expansion(4, 1.0, samples, &p).unwrap();
        prop_assert!((f.renormalized_area - c[2]).abs() < 1e-6);
    }
}
