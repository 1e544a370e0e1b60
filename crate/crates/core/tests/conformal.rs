use qgeo::conformal::*;
use qgeo::extrinsic::ExtrinsicPack;
use qgeo::field::Expr;
use qgeo::invariants::{Evaluator, InvOptions, InvariantId, REGISTRY};
use qgeo::scene::{self, Scene};
use qgeo::submanifold::{FrameOptions, Submanifold};

const TENSORS: &[Quantity] = &[
    Quantity::Weyl,
    Quantity::Schouten,
    Quantity::Cotton,
    Quantity::Bach,
    Quantity::SecondFundamentalForm,
    Quantity::TraceFreeSff,
    Quantity::MeanCurvature,
    Quantity::ModSchouten,
    Quantity::ModCotton,
    Quantity::ModCottonTrace,
    Quantity::ModBach,
    Quantity::D,
    Quantity::Fialkow,
    Quantity::G,
    Quantity::TraceFreeSffSq,
    Quantity::NormalCurvature,
];

fn random_ups(s: &Scene, seed: u64) -> ConformalFactor {
    ConformalFactor::random(s.patch.n(), 4, seed)
}

#[test]
fn tensor_linearizations_three_routes() {
    for (k, n, seed) in [(2, 4, 3), (3, 5, 1), (4, 6, 5)] {
        let s = scene::random_graph(k, n, seed);
        let ups = random_ups(&s, seed + 100);
        for q in TENSORS {
            if k < 3 && matches!(q, Quantity::Fialkow | Quantity::G) {
                continue;
            }
            let r = linearize(&s, &ups, q, true).unwrap();
            assert!(r.residual < 1e-6, "k={k} n={n} {}: {:e}", r.name, r.residual);
        }
    }
}

#[test]
fn invariant_linearizations_vanish() {
    for (k, n, seed) in [(2, 4, 3), (3, 5, 1), (4, 5, 2), (4, 6, 5), (5, 7, 4)] {
        let s = scene::random_graph(k, n, seed);
        let ups = random_ups(&s, seed + 7);
        for sp in REGISTRY {
            if !sp.is_valid(k, n, &InvOptions::default()) {
                continue;
            }
            let q = Quantity::Invariant(sp.id);
            let r = linearize(&s, &ups, &q, false).unwrap();
            if is_pointwise_invariant(sp.id) {
                assert!(r.max_abs() < 1e-8 * (1.0 + r.scale), "k={k} n={n} {}", r.name);
            }
        }
    }
}

const FINITE_T: [f64; 2] = [0.1, -0.07];

#[test]
fn finite_t_invariance() {
    for (k, n, seed) in [(2, 4, 3), (4, 5, 2), (4, 6, 5), (5, 7, 4)] {
        let s = scene::random_graph(k, n, seed);
        let ups = random_ups(&s, seed + 11);
        for sp in REGISTRY {
            if !sp.is_valid(k, n, &InvOptions::default()) || !is_pointwise_invariant(sp.id) {
                continue;
            }
            for t in FINITE_T {
                let r = invariance_residual(&s, &ups, &Quantity::Invariant(sp.id), t).unwrap();
                assert!(r < 1e-6, "k={k} n={n} {} t={t}: {r:e}", sp.name);
            }
        }
        for q in [Quantity::TraceFreeSff, Quantity::NormalCurvature, Quantity::Weyl, Quantity::TraceFreeSffSq] {
            for t in FINITE_T {
                let r = invariance_residual(&s, &ups, &q, t).unwrap();
                assert!(r < 1e-6, "k={k} n={n} {} t={t}: {r:e}", q.name());
            }
        }
    }
}

#[test]
fn finite_t_detects_non_invariants() {
    let s = scene::random_graph(4, 6, 5);
    let ups = random_ups(&s, 16);
    for q in [Quantity::Schouten, Quantity::MeanCurvature, Quantity::Invariant(InvariantId::Pfbar)] {
        let r = invariance_residual(&s, &ups, &q, 0.1).unwrap();
        assert!(r > 1e-6, "{}: {r:e}", q.name());
    }
}

#[test]
fn homogeneity_of_scalars() {
    for (k, n, seed) in [(2, 4, 3), (4, 6, 5), (5, 7, 4)] {
        let s = scene::random_graph(k, n, seed);
        for sp in REGISTRY {
            if !sp.is_valid(k, n, &InvOptions::default()) {
                continue;
            }
            for c in [2.0, 1.0 / 3.0] {
                let r = homogeneity_residual(&s, &Quantity::Invariant(sp.id), c).unwrap();
                assert!(r < 1e-9, "k={k} n={n} {} c={c}: {r:e}", sp.name);
            }
        }
    }
    // Q(4g) = Q(g)/16 on the round four-sphere
    let s = scene::catalog("equatorial-s4-in-s5", 0).unwrap();
    let q = |t: f64| {
        let sub = rescaled::<f64>(&s, &ConformalFactor::constant(2f64.ln()), t).unwrap();
        let ext = ExtrinsicPack::new(&sub).unwrap();
        Evaluator::new(&sub, &ext, InvOptions::default()).evaluate(InvariantId::Q).unwrap()
    };
    assert!((q(1.0) - q(0.0) / 16.0).abs() < 1e-12);
}

#[test]
fn operator_linearizations() {
    for (k, n, seed) in [(2, 4, 3), (3, 5, 1), (4, 6, 5)] {
        let s = scene::random_graph(k, n, seed);
        let ups = random_ups(&s, seed + 3);
        let u = Expr::add(vec![Expr::c(0.4), Expr::mul(vec![Expr::var(0), Expr::var(k - 1)]), Expr::var(1)]);
        for w in [0.0, -1.0, 1.5] {
            let (num, ana) = laplacian_linearization(&s, &ups, &u, w).unwrap();
            assert!((num - ana).abs() < 1e-9 * (1.0 + ana.abs()), "Δ̄• k={k} w={w}: {num} vs {ana}");
            let tau: Vec<Expr> =
                (0..k).map(|i| Expr::mul(vec![Expr::c(0.3 + i as f64), Expr::var(i), Expr::var(0)])).collect();
            let tau: Vec<Expr> = tau.into_iter().map(|e| Expr::add(vec![e, Expr::c(0.2)])).collect();
            let (num, ana) = divergence_linearization(&s, &ups, &tau, w).unwrap();
            assert!((num - ana).abs() < 1e-9 * (1.0 + ana.abs()), "∇̄• k={k} w={w}: {num} vs {ana}");
        }
    }
}

#[test]
fn tangential_dependence() {
    let tangential =
        [Quantity::ModSchouten, Quantity::ModCotton, Quantity::ModCottonTrace, Quantity::ModBach, Quantity::D];
    // flat totally geodesic: W = 0 and L̊ = 0, so only 𝓟• = −∇̄∇̄Υ survives
    let s = scene::catalog("flat-plane", 0).unwrap();
    let ups = random_ups(&s, 1);
    for q in &tangential {
        let r = linearize(&s, &ups, q, true).unwrap();
        assert!(r.residual < 1e-9, "{}: {:e}", r.name, r.residual);
        if *q != Quantity::ModSchouten {
            assert!(r.max_abs() < 1e-12, "{}", r.name);
        } else {
            assert!(r.max_abs() > 1e-3);
        }
    }
    // Υ vanishing on the submanifold with purely normal gradient: the
    // tangential derivatives vanish, so do the linearizations
    let s = scene::random_graph(4, 6, 5);
    let ups = ConformalFactor::vanishing_on_graph(&s.patch, 0, 9).unwrap();
    for q in &tangential {
        let r = linearize(&s, &ups, q, true).unwrap();
        assert!(r.max_abs() < 1e-10, "{}: {:e}", r.name, r.max_abs());
    }
    // but H• = −Υ_{α'} does not
    let r = linearize(&s, &ups, &Quantity::MeanCurvature, false).unwrap();
    assert!(r.max_abs() > 1e-3);
}

#[test]
fn strata_vanish_on_transversally_flat_factors() {
    let s = scene::random_graph(4, 6, 5);
    for j in 0..=4 {
        let ups = ConformalFactor::vanishing_on_graph(&s.patch, j, 40 + j as u64).unwrap();
        for &st in STRATA.iter().filter(|st| st.stratum() <= j) {
            let (_, d) = linearize_dual(&s, &ups, &Quantity::Stratum(st)).unwrap();
            assert!(d[0].abs() < 1e-7, "j={j} {}: {:e}", st.name(), d[0]);
        }
    }
}

#[test]
fn strata_are_sharp() {
    // a factor whose transverse (j−1)-jet vanishes but whose j-jet does not
    // moves some element of stratum j
    let s = scene::random_graph(4, 6, 5);
    for j in 1..=4 {
        let ups = ConformalFactor::vanishing_on_graph(&s.patch, j - 1, 70 + j as u64).unwrap();
        let moved = STRATA
            .iter()
            .filter(|st| st.stratum() == j)
            .map(|&st| linearize_dual(&s, &ups, &Quantity::Stratum(st)).unwrap().1[0].abs())
            .fold(0.0f64, f64::max);
        assert!(moved > 1e-5, "stratum {j}: {moved:e}");
    }
}

#[test]
fn step5_table() {
    for (n, seed) in [(5, 2), (6, 5), (7, 3)] {
        let s = scene::random_graph(4, n, seed);
        let ups = random_ups(&s, seed + 21);
        for &t in STEP5 {
            let r = linearize(&s, &ups, &Quantity::Step5(t), false).unwrap();
            assert!(r.residual < 1e-6, "n={n} {t:?}: {:e}", r.residual);
            assert!(r.analytic.is_some());
        }
    }
}

#[test]
fn paneitz_sign_and_operator() {
    assert_eq!(paneitz_sign().unwrap(), 1.0);
    let sigma = paneitz_sign().unwrap();
    let one = |s: &Scene| {
        let sub = Submanifold::<f64>::new(&s.metric, &s.patch, &FrameOptions::default()).unwrap();
        let ext = ExtrinsicPack::new(&sub).unwrap();
        let ev = Evaluator::new(&sub, &ext, InvOptions::default());
        ev.paneitz_apply(&qgeo::Jet::cst(1.0), sigma).unwrap()
    };
    for s in [scene::random_graph(4, 6, 3), scene::random_graph(2, 4, 3)] {
        assert!(one(&s).abs() < 1e-12);
    }
    // S²×S² ⊂ S⁵: P₄ = Δ̄² − 2Δ̄ acting on φ = x₀x₂ + x₁
    let s = scene::catalog("s2xs2-in-s5", 0).unwrap();
    let sub = Submanifold::<f64>::new(&s.metric, &s.patch, &FrameOptions::default()).unwrap();
    let ext = ExtrinsicPack::new(&sub).unwrap();
    let ev = Evaluator::new(&sub, &ext, InvOptions::default());
    let phi = Expr::add(vec![Expr::mul(vec![Expr::var(0), Expr::var(2)]), Expr::var(1)]);
    let phi = phi.eval_jets(&qgeo::field::coordinate_jets::<f64>(&s.patch.base, 5));
    let p = qgeo::tensor::LabeledTensor::scalar(phi.clone());
    let lap = sub.laplacian(&p);
    let want = sub.laplacian(&lap).value().value() - 2.0 * lap.value().value();
    let got = ev.paneitz_apply(&phi, sigma).unwrap();
    assert!((got - want).abs() < 1e-6 * (1.0 + want.abs()), "{got} vs {want}");
}

#[test]
fn q_transformation_law() {
    let scenes = [
        scene::catalog("equatorial-s2-in-s3", 0).unwrap(),
        scene::catalog("clifford-torus", 0).unwrap(),
        scene::random_graph(2, 4, 3),
        scene::catalog("equatorial-s4-in-s5", 0).unwrap(),
        scene::catalog("s2xs2-in-s5", 0).unwrap(),
        scene::random_graph(4, 6, 5),
    ];
    for s in &scenes {
        for seed in [1, 2] {
            let ups = random_ups(s, seed);
            for r in q_transformation(s, &ups, &FINITE_T).unwrap() {
                assert!(r.residual < 1e-5, "{} seed {seed} t={}: {:e}", s.name, r.t, r.residual);
            }
        }
    }
    // k=2 flat plane: e^{2Υ}Q̂ = −Δ̄Υ
    let s = scene::catalog("flat-plane", 0).unwrap();
    let ups = random_ups(&s, 5);
    let (q, pu) = q_and_paneitz(&s, &ups).unwrap();
    assert!(q.abs() < 1e-14);
    let sub = rescaled::<f64>(&s, &ups, 1.0).unwrap();
    let ext = ExtrinsicPack::new(&sub).unwrap();
    let qh = Evaluator::new(&sub, &ext, InvOptions::default()).evaluate(InvariantId::Q).unwrap();
    let up = ups.expr.eval(&s.patch.point().unwrap());
    assert!(((2.0 * up).exp() * qh - pu).abs() < 1e-10);
}

#[test]
fn independence_witness() {
    let samples = [[1.0, 1.0, 1.0, 1.0], [0.3, -0.8, 0.5, 1.2], [-0.6, 0.4, 0.9, -0.2]];
    for n in [5, 6, 7] {
        let w = linear_independence_witness(n, &samples).unwrap();
        assert!(w.tensor_gram > 1e-12, "n={n}: {w:?}");
        assert!(w.divergence_gram > 1e-12, "n={n}: {w:?}");
    }
    let zero = linear_independence_witness(6, &[[0.0; 4]]).unwrap();
    assert!(zero.divergence_gram.abs() < 1e-20);
}
