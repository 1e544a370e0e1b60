use qgeo::extrinsic::ExtrinsicPack;
use qgeo::invariants::{lookup, weight_in, Evaluator, InvOptions, InvariantId, REGISTRY};
use qgeo::scene::{self, Scene};
use qgeo::submanifold::{FrameOptions, Submanifold};
use qgeo::GeoError;

use InvariantId::*;

fn build(s: &Scene) -> (Submanifold<f64>, ExtrinsicPack<f64>) {
    let sub = Submanifold::new(&s.metric, &s.patch, &FrameOptions::default()).unwrap();
    let ext = ExtrinsicPack::new(&sub).unwrap();
    (sub, ext)
}

fn with<R>(s: &Scene, f: impl FnOnce(&Evaluator<f64>) -> R) -> R {
    let (sub, ext) = build(s);
    let ev = Evaluator::new(&sub, &ext, InvOptions::default());
    f(&ev)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn assert_pair(ev: &Evaluator<f64>, a: InvariantId, b: InvariantId, tol: f64, tag: &str) {
    let (x, y) = (ev.evaluate(a).unwrap(), ev.evaluate(b).unwrap());
    assert!(close(x, y, tol), "{tag}: {a:?} = {x:e} vs {b:?} = {y:e}");
}

const PAIRS: &[(InvariantId, InvariantId)] = &[
    (K1, K1Expanded),
    (K2, K2Expanded),
    (I, IParts),
    (J, JParts),
    (Q4, Q4Cgk),
    (Q, Q4),
    (N1, N1K4),
    (N2, N2K4),
    (Wm, WmHypersurface),
    (J1, J1Hypersurface),
    (J2, J2Hypersurface),
];

fn check_routes(s: &Scene, tol: f64) {
    with(s, |ev| {
        let (k, n) = (ev.sub.k, ev.sub.n);
        let ok = |id: InvariantId| qgeo::invariants::spec(id).is_valid(k, n, &ev.opts);
        let mut checked = 0;
        for &(a, b) in PAIRS {
            if ok(a) && ok(b) {
                assert_pair(ev, a, b, tol, &s.name);
                checked += 1;
            }
        }
        if ok(I) && ok(J) {
            let sum = 2.0 * ev.evaluate(I).unwrap() + ev.evaluate(J).unwrap();
            assert!(close(ev.evaluate(TwoIPlusJ).unwrap(), sum, tol), "{}: 2I+J", s.name);
        }
        assert!(checked >= 2, "{}: nothing compared", s.name);
    });
}

#[test]
fn routes_agree_on_random_scenes() {
    for (k, n) in [(2, 4), (3, 5), (4, 5), (4, 6), (4, 7), (5, 6), (5, 7), (7, 8)] {
        for seed in [2, 11] {
            check_routes(&scene::random_graph(k, n, seed), 1e-9);
        }
    }
}

#[test]
fn routes_agree_on_catalog_scenes() {
    for name in scene::CATALOG {
        let s = scene::catalog(name, 4).unwrap();
        if s.patch.k() >= 2 {
            check_routes(&s, 1e-9);
        }
    }
}

#[test]
fn hypersurface_vanishing() {
    for (k, seed) in [(4, 2), (4, 8), (5, 3), (7, 5)] {
        with(&scene::random_graph(k, k + 1, seed), |ev| {
            assert!(ev.evaluate(K2).unwrap().abs() < 1e-10);
            assert!(ev.evaluate(J).unwrap().abs() < 1e-7);
            if k != 3 && k != 6 {
                assert!(ev.evaluate(N2).unwrap().abs() < 1e-7);
            }
        });
    }
    // and the same quantities are genuinely nonzero in higher codimension
    with(&scene::random_graph(4, 6, 2), |ev| {
        assert!(ev.evaluate(K2).unwrap().abs() > 1e-6);
        assert!(ev.evaluate(J).unwrap().abs() > 1e-6);
    });
}

#[test]
fn totally_geodesic_flat_vanishes() {
    let s = scene::catalog("flat-plane", 0).unwrap();
    with(&s, |ev| {
        for v in ev.all().unwrap() {
            assert!(v.value.abs() < 1e-14, "{} = {}", v.name, v.value);
        }
    });
}

#[test]
fn equatorial_s4_in_s5() {
    let s = scene::catalog("equatorial-s4-in-s5", 0).unwrap();
    with(&s, |ev| {
        // minimal in an Einstein space with λ = 1: Q = 3! λ²
        assert!(close(ev.evaluate(Q).unwrap(), 6.0, 1e-12));
        assert!(close(ev.evaluate(Q4).unwrap(), 6.0, 1e-12));
        assert!(ev.evaluate(WQ).unwrap().abs() < 1e-12);
        // round S⁴: P̄ = ½h, J̄ = 2, Pf̄ = −1 + 4 = 3
        assert!(close(ev.evaluate(Pfbar).unwrap(), 3.0, 1e-12));
    });
}

#[test]
fn s2xs2_in_s5() {
    let s = scene::catalog("s2xs2-in-s5", 0).unwrap();
    with(&s, |ev| {
        assert!(close(ev.evaluate(Q).unwrap(), 6.0, 1e-10));
        // By hand: each factor has curvature 2, so Ric̄ = 2h, J̄ = 4/3, P̄ = h/3,
        // |Rm̄|² = 32, |W̄|² = 32 − (8|P̄|² + 4J̄²) = 64/3 and
        // Pf̄ = 8/3 − 4/9 + 16/9 = 4. Then 𝓦_Q = 6 − 2·4 since the divergence
        // term vanishes on a homogeneous example.
        assert!(close(ev.evaluate(Pfbar).unwrap(), 4.0, 1e-10));
        assert!(close(ev.evaluate(WQ).unwrap(), -2.0, 1e-10));
        assert!(ev.q_divergence().unwrap().value().abs() < 1e-10);
    });
}

#[test]
fn two_dimensional_q() {
    for (name, want) in [("equatorial-s2-in-s3", 1.0), ("clifford-torus", 1.0)] {
        let s = scene::catalog(name, 0).unwrap();
        with(&s, |ev| {
            assert!(close(ev.evaluate(Q).unwrap(), want, 1e-12), "{name}");
            let q = ev.evaluate(Pfbar).unwrap() + ev.evaluate(WQ).unwrap();
            assert!(close(ev.evaluate(Q).unwrap(), q, 1e-14));
        });
    }
    with(&scene::catalog("clifford-torus", 0).unwrap(), |ev| {
        assert!(ev.evaluate(Pfbar).unwrap().abs() < 1e-12);
        assert!(close(ev.evaluate(WQ).unwrap(), 1.0, 1e-12));
    });
}

#[test]
fn minimal_in_einstein_specialization() {
    // minimal in an Einstein space with constant G: 𝓘 = 2λ(k−1)(k−3)G
    for (name, g_hand) in [("s2xs2-in-s5", 2.0 / 3.0), ("t4-in-s7", 2.0), ("equatorial-s4-in-s7", 0.0)] {
        let s = scene::catalog(name, 0).unwrap();
        let lambda = s.metric.einstein_lambda().unwrap();
        with(&s, |ev| {
            let g = ev.ext.g().unwrap().value();
            assert!(close(g, g_hand, 1e-12), "{name}: G = {g}");
            let want = 2.0 * lambda * 3.0 * 1.0 * g;
            assert!(close(ev.evaluate(I).unwrap(), want, 1e-10), "{name}");
            // round ambient: W vanishes, so −Δ̄W + 2λ(k−3)W = 0
            assert!(ev.evaluate(J).unwrap().abs() < 1e-10);
        });
    }
}

#[test]
fn curves() {
    for n in [3, 5, 6] {
        for seed in [1, 7] {
            with(&scene::random_graph(1, n, seed), |ev| {
                let e = ev.ext;
                let d2 = e.d_sq(ev.sub).value();
                let b = e.mb_tr.value();
                let nf = n as f64;
                assert!(ev.evaluate(K1).unwrap().abs() < 1e-12);
                assert!(ev.evaluate(K2).unwrap().abs() < 1e-12);
                if n != 4 {
                    let i = -10.0 * d2 + 10.0 / (nf - 4.0) * b;
                    assert!(close(ev.evaluate(I).unwrap(), i, 1e-10));
                    assert!(close(ev.evaluate(J).unwrap(), -20.0 / (nf - 4.0) * b, 1e-10));
                }
                assert!(d2 > 1e-6);
            });
        }
    }
}

#[test]
fn appendix_metric_closed_forms() {
    for n in [5, 6, 7] {
        let (u, w, s_, t) = (0.7, -0.4, 0.3, 0.9);
        let sc = scene::appendix(n, s_, t, u, w);
        with(&sc, |ev| {
            let nf = n as f64;
            // L̊ = 0 at the point, so both invariants reduce to their divergence terms
            let k1 = w * w + (u + w) * (u + w) - u * u / (nf - 2.0);
            let k2 = -(nf - 5.0) / (nf - 2.0) * u * u;
            assert!(close(ev.evaluate(K1).unwrap(), k1, 1e-12), "n={n}");
            assert!(close(ev.evaluate(K2).unwrap(), k2, 1e-12), "n={n}");

            let c = -(nf - 4.0) / (nf - 2.0);
            let wtt = &ev.ext.wtt;
            // off-diagonal partial traces: c Σ_{γ∉{α,β}} ∂²_{αβ} f_γ
            assert!(close(wtt.get(&[1, 2]).value(), c * t, 1e-12));
            for (a, b) in [(0, 1), (0, 3), (2, 3)] {
                assert!(wtt.get(&[a, b]).value().abs() < 1e-12);
            }
            let wtr = -2.0 * (nf - 4.0) * (nf - 5.0) / ((nf - 1.0) * (nf - 2.0)) * 2.0 * s_;
            assert!(close(ev.ext.wtr.value(), wtr, 1e-12));
        });
    }
}

#[test]
fn domain_errors() {
    let s = scene::random_graph(3, 4, 1);
    let (sub, ext) = build(&s);
    let ev = Evaluator::new(&sub, &ext, InvOptions::default());
    assert!(matches!(ev.evaluate(I), Err(GeoError::Domain(_))));
    assert!(matches!(ev.evaluate(J), Err(GeoError::Domain(_))));
    assert!(matches!(ev.evaluate(Q4), Err(GeoError::Domain(_))));
    assert!(ev.evaluate(TwoIPlusJ).is_ok());
    let ev = Evaluator::new(&sub, &ext, InvOptions { ell3m4: true });
    let (i, j) = (ev.evaluate(I).unwrap(), ev.evaluate(J).unwrap());
    assert!(close(2.0 * i + j, ev.evaluate(TwoIPlusJ).unwrap(), 1e-10));

    let s = scene::random_graph(6, 7, 1);
    with(&s, |ev| {
        assert!(matches!(ev.evaluate(Wm), Err(GeoError::Domain(_))));
        assert!(matches!(ev.evaluate(WmHypersurface), Err(GeoError::Domain(_))));
        assert!(ev.evaluate(I).is_ok());
    });
    with(&scene::random_graph(4, 6, 1), |ev| {
        assert!(matches!(ev.evaluate(J1Hypersurface), Err(GeoError::Domain(_))));
    });
}

#[test]
fn registry_is_consistent() {
    for s in REGISTRY {
        assert_eq!(lookup(s.name).unwrap().id, s.id);
    }
    assert_eq!(weight_in(Q, 2), -2);
    assert_eq!(weight_in(Q, 4), -4);
    assert_eq!(weight_in(K1, 2), -4);
    let names: std::collections::HashSet<_> = REGISTRY.iter().map(|s| s.name).collect();
    assert_eq!(names.len(), REGISTRY.len());
}
