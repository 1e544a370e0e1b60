//! Verification batteries. Each acceptance criterion is a function returning
//! check records; the named suites group criteria with a few extra checks.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ambient::curvature_pack;
use crate::conformal::{
    invariance_residual, is_pointwise_invariant, linear_independence_witness, linearize, linearize_dual, paneitz_sign,
    q_transformation, ConformalFactor, Quantity, STRATA,
};
use crate::error::{GeoError, Result};
use crate::extrinsic::ExtrinsicPack;
use crate::gauss_bonnet::{
    c_nk_check, chern_gb, closed_example, closed_gb, equatorial_sphere, factorization_check, CLOSED,
};
use crate::identities::{
    ambient_identities, divergence_identities, gauss_codazzi_ricci, max_residual, nabla_routes,
    normal_curvature_commutator, simons, space_form_residual, weyl_traces,
};
use crate::invariants::{spec, Evaluator, InvOptions, InvariantId};
use crate::metric::MetricField;
use crate::random::{random_point, random_polynomial_metric, rng};
use crate::renorm::{fit_renormalized_area, renorm_gb_check, HyperbolicModel};
use crate::report::Check;
use crate::scene::{self, Scene};
use crate::submanifold::{FrameOptions, Submanifold};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ambient,
    Submanifold,
    Invariants,
    Conformal,
    GaussBonnet,
    RenormArea,
    All,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Ambient,
        Suite::Submanifold,
        Suite::Invariants,
        Suite::Conformal,
        Suite::GaussBonnet,
        Suite::RenormArea,
        Suite::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ambient => "ambient",
            Suite::Submanifold => "submanifold",
            Suite::Invariants => "invariants",
            Suite::Conformal => "conformal",
            Suite::GaussBonnet => "gauss-bonnet",
            Suite::RenormArea => "renorm-area",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| GeoError::Usage(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Degree of the random polynomial conformal factors.
    pub upsilon_degree: u32,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 7, upsilon_degree: 4 }
    }
}

/// Pinned thresholds of the acceptance criteria.
pub mod tol {
    pub const FACTORIZATION: f64 = 1e-6;
    pub const FACTORIZATION_OPERATOR: f64 = 1e-5;
    pub const CONSTANT: f64 = 1e-6;
    pub const GB_K2: f64 = 1e-5;
    pub const GB_K4: f64 = 1e-4;
    pub const RENORM: f64 = 1e-5;
    pub const RADIUS: f64 = 1e-6;
    pub const INTEGRAND: f64 = 1e-8;
    pub const IDENTITY: f64 = 1e-6;
    pub const FINITE_T: f64 = 1e-5;
    pub const LINEARIZATION: f64 = 1e-6;
    pub const Q_LAW: f64 = 1e-5;
    pub const ROUNDOFF: f64 = 1e-12;
    pub const STRATA: f64 = 1e-7;
    pub const GRAM: f64 = 1e-12;
    pub const ROUTES: f64 = 1e-5;
}

/// Runtime ceilings (seconds) of the timed criteria.
pub fn runtime_limit(criterion: usize) -> Option<f64> {
    match criterion {
        1 => Some(10.0),
        3 => Some(60.0),
        5 => Some(300.0),
        _ => None,
    }
}

pub const CRITERIA: [&str; 9] = [
    "Q factorization on minimal submanifolds of spheres",
    "Pfaffian coefficient recovery",
    "closed minimal Gauss-Bonnet",
    "renormalized area of totally geodesic hemispheres",
    "structure and divergence identities",
    "conformal invariance",
    "Q transformation law",
    "variational strata and linear independence",
    "route agreement",
];

fn guard(suite: &str, name: &str, topic: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::error(suite, name, topic, e))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn sub_seed(seed: u64, i: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(i)
}

fn with_eval<R>(s: &Scene, f: impl FnOnce(&Evaluator<f64>) -> Result<R>) -> Result<R> {
    let sub = Submanifold::<f64>::new(&s.metric, &s.patch, &FrameOptions::default())?;
    let ext = ExtrinsicPack::new(&sub)?;
    f(&Evaluator::new(&sub, &ext, InvOptions::default()))
}

pub fn criterion(i: usize, opts: &SuiteOptions) -> Result<Vec<Check>> {
    Ok(match i {
        1 => factorization(opts),
        2 => constants(opts),
        3 => closed_gauss_bonnet(opts),
        4 => renormalized_area(opts),
        5 => identities(opts),
        6 => conformal_invariance(opts),
        7 => q_law(opts),
        8 => strata(opts),
        9 => routes(opts),
        _ => return Err(GeoError::Usage(format!("no criterion {i}"))),
    })
}

fn factorization(_: &SuiteOptions) -> Vec<Check> {
    const S: &str = "invariants";
    let mut out = Vec::new();
    let sigma = match paneitz_sign() {
        Ok(s) => s,
        Err(e) => return vec![Check::error(S, "paneitz calibration", "Q factorization", e)],
    };
    let examples: Vec<(String, Result<_>)> = vec![
        ("equatorial-s2-in-s3".into(), closed_example("equatorial-s2-in-s3")),
        ("equatorial-s2-in-s5".into(), equatorial_sphere(2, 5)),
        ("equatorial-s4-in-s5".into(), closed_example("equatorial-s4-in-s5")),
        ("equatorial-s4-in-s7".into(), closed_example("equatorial-s4-in-s7")),
        ("clifford-torus".into(), closed_example("clifford-torus")),
        ("s2xs2-in-s5".into(), closed_example("s2xs2-in-s5")),
    ];
    for (name, ex) in examples {
        let r = ex.and_then(|ex| factorization_check(&ex, 2, sigma));
        match r {
            Ok(r) => {
                out.push(Check::below(
                    S,
                    format!("Q = (k-1)! lambda^(k/2) on {name}"),
                    "Q factorization",
                    r.q_residual,
                    tol::FACTORIZATION,
                ));
                out.push(Check::below(
                    S,
                    format!("P_k = product of shifted Laplacians on {name}"),
                    "Q factorization",
                    r.operator_residual,
                    tol::FACTORIZATION_OPERATOR,
                ));
            }
            Err(e) => out.push(Check::error(S, format!("factorization on {name}"), "Q factorization", e)),
        }
    }
    out
}

fn constants(_: &SuiteOptions) -> Vec<Check> {
    const S: &str = "gauss-bonnet";
    [(2, 3, 1.0), (2, 5, 1.0), (4, 5, 2.0), (4, 7, 2.0)]
        .into_iter()
        .map(|(k, n, want)| {
            let name = format!("Pfaffian coefficient k={k} n={n}");
            guard(S, &name, "Q decomposition constant", || {
                let r = c_nk_check(k, n)?;
                Ok(Check::below(S, &name, "Q decomposition constant", (r.recovered - want).abs(), tol::CONSTANT)
                    .with_values(vec![r.recovered, r.expected]))
            })
        })
        .collect()
}

fn closed_gauss_bonnet(_: &SuiteOptions) -> Vec<Check> {
    const S: &str = "gauss-bonnet";
    let mut out = Vec::new();
    for (name, tolerance, lambda_area) in
        [("clifford-torus", tol::GB_K2, 2.0 * PI * PI), ("s2xs2-in-s5", tol::GB_K4, 4.0 * PI * PI)]
    {
        let topic = "closed minimal Gauss-Bonnet";
        match closed_example(name).and_then(|ex| closed_gb(&ex)) {
            Ok(r) => {
                let mut values = vec![r.lhs, r.rhs];
                values.extend(r.rhs_explicit);
                out.push(
                    Check::below(S, format!("formula on {name}"), topic, r.residual, tolerance).with_values(values),
                );
                out.push(Check::below(
                    S,
                    format!("lambda^(k/2) area on {name}"),
                    topic,
                    (r.lhs - lambda_area).abs(),
                    tolerance,
                ));
                out.push(Check::below(S, format!("minimality of {name}"), topic, r.max_h, tol::INTEGRAND));
            }
            Err(e) => out.push(Check::error(S, format!("formula on {name}"), topic, e)),
        }
    }
    out
}

fn renormalized_area(_: &SuiteOptions) -> Vec<Check> {
    const S: &str = "renorm-area";
    let topic = "renormalized area";
    let mut out = Vec::new();
    for k in [2, 4] {
        let name = format!("A = c_k chi for the k={k} hemisphere");
        let r = HyperbolicModel::new(k, k + 1, 1.0).and_then(|m| renorm_gb_check(&m, 5));
        match r {
            Ok(r) => {
                out.push(
                    Check::below(S, &name, topic, r.residual, tol::RENORM)
                        .with_values(vec![r.fit.renormalized_area, r.expected]),
                );
                let pointwise = r.max_h.max(r.max_lt).max(r.max_weyl).max(r.max_integrand);
                out.push(Check::below(S, format!("vanishing integrand, k={k}"), topic, pointwise, tol::INTEGRAND));
                if let Some(w) = r.fit.warning {
                    out.push(Check::error(S, format!("fit conditioning, k={k}"), topic, w));
                }
            }
            Err(e) => out.push(Check::error(S, &name, topic, e)),
        }
        let name = format!("radius independence, k={k}");
        out.push(guard(S, &name, topic, || {
            let a1 = fit_renormalized_area(&HyperbolicModel::new(k, k + 1, 1.0)?)?.renormalized_area;
            let a2 = fit_renormalized_area(&HyperbolicModel::new(k, k + 1, 2.0)?)?.renormalized_area;
            Ok(Check::below(S, &name, topic, (a1 - a2).abs(), tol::RADIUS).with_values(vec![a1, a2]))
        }));
    }
    out
}

fn identity_checks(s: &Scene, label: &str) -> Result<Vec<(String, f64)>> {
    let sub = Submanifold::<f64>::new(&s.metric, &s.patch, &FrameOptions::default())?;
    let ext = ExtrinsicPack::new(&sub)?;
    let mut out = vec![
        ("Gauss-Codazzi-Ricci".to_string(), max_residual(&gauss_codazzi_ricci(&sub, &ext)?)),
        ("divergence identities".to_string(), max_residual(&divergence_identities(&sub, &ext)?)),
        ("Weyl partial traces".to_string(), max_residual(&weyl_traces(&sub, &ext))),
        ("tangential derivative routes".to_string(), max_residual(&nabla_routes(&sub))),
        ("normal curvature commutator".to_string(), normal_curvature_commutator(&sub).value),
        ("ambient Bianchi and trace identities".to_string(), {
            max_residual(&ambient_identities(&s.metric, &s.patch.point()?)?)
        }),
    ];
    if sub.k >= 3 {
        out.push(("Simons".to_string(), simons(&sub, &ext)?.value));
    }
    for o in &mut out {
        o.0 = format!("{} on {label}", o.0);
    }
    Ok(out)
}

fn identities(opts: &SuiteOptions) -> Vec<Check> {
    const S: &str = "submanifold";
    let topic = "structure identities";
    let mut classes: Vec<(usize, usize, u64)> = Vec::new();
    for k in [2, 4] {
        for n in [5, 6, 7] {
            classes.push((k, n, 10));
        }
    }
    for (k, n) in [(2, 3), (3, 4), (5, 6)] {
        classes.push((k, n, 3));
    }
    let mut out = Vec::new();
    for (k, n, count) in classes {
        let mut worst: Vec<(String, f64)> = Vec::new();
        let label = format!("random k={k} n={n} ({count} scenes)");
        let mut failed = None;
        for i in 0..count {
            let s = scene::random_graph(k, n, sub_seed(opts.seed, 100 * n as u64 + 10 * k as u64 + i));
            match identity_checks(&s, &label) {
                Ok(v) => {
                    if worst.is_empty() {
                        worst = v;
                    } else {
                        for (w, x) in worst.iter_mut().zip(v) {
                            w.1 = w.1.max(x.1);
                        }
                    }
                }
                Err(e) => failed = Some(e),
            }
        }
        if let Some(e) = failed {
            out.push(Check::error(S, label, topic, e));
        }
        out.extend(worst.into_iter().map(|(name, r)| Check::below(S, name, topic, r, tol::IDENTITY)));
    }
    out
}

const FINITE_T_IDS: [InvariantId; 11] = [
    InvariantId::K1,
    InvariantId::K2,
    InvariantId::I,
    InvariantId::J,
    InvariantId::TwoIPlusJ,
    InvariantId::WQ,
    InvariantId::Wm,
    InvariantId::J1,
    InvariantId::J2,
    InvariantId::N1,
    InvariantId::N2,
];

pub const LINEARIZED_TENSORS: [Quantity; 16] = [
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

fn conformal_invariance(opts: &SuiteOptions) -> Vec<Check> {
    const S: &str = "conformal";
    let mut out = Vec::new();
    let topic = "finite conformal invariance";
    for (i, (k, n)) in [(2, 4), (4, 5), (4, 6), (5, 7)].into_iter().enumerate() {
        let seed = sub_seed(opts.seed, 300 + i as u64);
        let s = scene::random_graph(k, n, seed);
        let ups = ConformalFactor::random(n, opts.upsilon_degree, seed + 1);
        let name = format!("t = +-0.1 on random k={k} n={n}");
        out.push(guard(S, &name, topic, || {
            let mut worst = 0.0f64;
            let mut names = Vec::new();
            for id in FINITE_T_IDS {
                let sp = spec(id);
                if !sp.is_valid(k, n, &InvOptions::default()) {
                    continue;
                }
                debug_assert!(is_pointwise_invariant(id));
                names.push(sp.name);
                for t in [0.1, -0.1] {
                    worst = worst.max(invariance_residual(&s, &ups, &Quantity::Invariant(id), t)?);
                }
            }
            Ok(Check::below(S, &name, topic, worst, tol::FINITE_T).with_note(names.join(",")))
        }));
    }
    let topic = "conformal linearization";
    for (i, (k, n)) in [(2, 4), (3, 5), (4, 6)].into_iter().enumerate() {
        let seed = sub_seed(opts.seed, 400 + i as u64);
        let s = scene::random_graph(k, n, seed);
        let ups = ConformalFactor::random(n, opts.upsilon_degree, seed + 1);
        for q in &LINEARIZED_TENSORS {
            if k < 3 && matches!(q, Quantity::Fialkow | Quantity::G) {
                continue;
            }
            let name = format!("{} on random k={k} n={n}", q.name());
            out.push(guard(S, &name, topic, || {
                let r = linearize(&s, &ups, q, true)?;
                Ok(Check::below(S, &name, topic, r.residual, tol::LINEARIZATION))
            }));
        }
    }
    out
}

fn q_law(opts: &SuiteOptions) -> Vec<Check> {
    const S: &str = "conformal";
    let topic = "Q transformation law";
    let mut out = Vec::new();
    let sigma = match paneitz_sign() {
        Ok(s) => {
            out.push(Check::below(S, "Paneitz self-calibration", topic, 0.0, 1.0).with_values(vec![s]));
            s
        }
        Err(e) => return vec![Check::error(S, "Paneitz self-calibration", topic, e)],
    };
    let sd = |i| sub_seed(opts.seed, 500 + i);
    let scenes: Vec<Result<Scene>> = vec![
        scene::catalog("equatorial-s2-in-s3", 0),
        scene::catalog("clifford-torus", 0),
        Ok(scene::random_graph(2, 3, sd(0))),
        Ok(scene::random_graph(2, 4, sd(1))),
        Ok(scene::random_graph(2, 6, sd(2))),
        scene::catalog("equatorial-s4-in-s5", 0),
        scene::catalog("s2xs2-in-s5", 0),
        Ok(scene::random_graph(4, 5, sd(3))),
        Ok(scene::random_graph(4, 6, sd(4))),
        Ok(scene::random_graph(4, 7, sd(5))),
    ];
    for (i, s) in scenes.into_iter().enumerate() {
        let s = match s {
            Ok(s) => s,
            Err(e) => {
                out.push(Check::error(S, format!("scene {i}"), topic, e));
                continue;
            }
        };
        let label = format!("{} (k={})", s.name, s.patch.k());
        for j in 0..3u64 {
            let name = format!("law on {label}, factor {j}");
            out.push(guard(S, &name, topic, || {
                let ups = ConformalFactor::random(s.patch.n(), opts.upsilon_degree, sd(100 + 10 * i as u64 + j));
                let r = q_transformation(&s, &ups, &[0.1, -0.1])?;
                let worst = r.iter().map(|x| x.residual).fold(0.0, f64::max);
                Ok(Check::below(S, &name, topic, worst, tol::Q_LAW))
            }));
        }
        let name = format!("P_k(1) = 0 on {label}");
        out.push(guard(S, &name, topic, || {
            let p1 = with_eval(&s, |ev| ev.paneitz_apply(&crate::Jet::cst(1.0), sigma))?;
            Ok(Check::below(S, &name, topic, p1.abs(), tol::ROUNDOFF))
        }));
    }
    out
}

/// Parameter sample `(s, t, u, w)` of the diagonal-exponential family.
pub fn appendix_sample(seed: u64) -> Vec<[f64; 4]> {
    let mut r = rng(seed);
    let mut v = vec![[1.0, 1.0, 1.0, 1.0]];
    for _ in 0..3 {
        v.push([0; 4].map(|_| r.gen_range(-1.0..1.0)));
    }
    v
}

fn strata(opts: &SuiteOptions) -> Vec<Check> {
    const S: &str = "conformal";
    let topic = "variational strata";
    let mut out = Vec::new();
    let s = scene::random_graph(4, 6, sub_seed(opts.seed, 600));
    for j in 0..=4usize {
        let name = format!("strata <= {j} under vanishing transverse {j}-jet");
        out.push(guard(S, &name, topic, || {
            let ups = ConformalFactor::vanishing_on_graph(&s.patch, j, sub_seed(opts.seed, 610 + j as u64))?;
            let mut worst = 0.0f64;
            for &st in STRATA.iter().filter(|st| st.stratum() <= j) {
                let (_, d) = linearize_dual(&s, &ups, &Quantity::Stratum(st))?;
                worst = worst.max(d[0].abs());
            }
            Ok(Check::below(S, &name, topic, worst, tol::STRATA))
        }));
    }
    let topic = "linear independence";
    let sample = appendix_sample(sub_seed(opts.seed, 620));
    for n in [5, 6, 7] {
        match linear_independence_witness(n, &sample) {
            Ok(w) => {
                out.push(Check::above(S, format!("tensor Gram determinant n={n}"), topic, w.tensor_gram, tol::GRAM));
                out.push(Check::above(
                    S,
                    format!("divergence Gram determinant n={n}"),
                    topic,
                    w.divergence_gram,
                    tol::GRAM,
                ));
            }
            Err(e) => out.push(Check::error(S, format!("Gram determinants n={n}"), topic, e)),
        }
    }
    out
}

pub const ROUTE_PAIRS: &[(InvariantId, InvariantId)] = &[
    (InvariantId::K1, InvariantId::K1Expanded),
    (InvariantId::K2, InvariantId::K2Expanded),
    (InvariantId::I, InvariantId::IParts),
    (InvariantId::J, InvariantId::JParts),
    (InvariantId::Q4, InvariantId::Q4Cgk),
    (InvariantId::Q, InvariantId::Q4),
    (InvariantId::N1, InvariantId::N1K4),
    (InvariantId::N2, InvariantId::N2K4),
    (InvariantId::Wm, InvariantId::WmHypersurface),
    (InvariantId::J1, InvariantId::J1Hypersurface),
    (InvariantId::J2, InvariantId::J2Hypersurface),
];

/// Largest disagreement among the available routes at the scene's base point,
/// and the number of comparisons made.
pub fn route_residual(s: &Scene) -> Result<(f64, usize)> {
    with_eval(s, |ev| {
        let (k, n) = (ev.sub.k, ev.sub.n);
        let ok = |id: InvariantId| spec(id).is_valid(k, n, &ev.opts);
        let mut worst = 0.0f64;
        let mut count = 0;
        for &(a, b) in ROUTE_PAIRS {
            if ok(a) && ok(b) {
                worst = worst.max(rel(ev.evaluate(a)?, ev.evaluate(b)?));
                count += 1;
            }
        }
        if ok(InvariantId::I) && ok(InvariantId::J) {
            let sum = 2.0 * ev.evaluate(InvariantId::I)? + ev.evaluate(InvariantId::J)?;
            worst = worst.max(rel(ev.evaluate(InvariantId::TwoIPlusJ)?, sum));
            count += 1;
        }
        Ok((worst, count))
    })
}

fn routes(opts: &SuiteOptions) -> Vec<Check> {
    const S: &str = "invariants";
    let topic = "route agreement";
    let mut out = Vec::new();
    for name in scene::CATALOG {
        let check = format!("routes on {name}");
        out.push(guard(S, &check, topic, || {
            let s = scene::catalog(name, opts.seed)?;
            if s.patch.k() < 2 {
                return Ok(Check::below(S, &check, topic, 0.0, tol::ROUTES).with_note("curve: no multi-route scalars"));
            }
            let (r, count) = route_residual(&s)?;
            Ok(Check::below(S, &check, topic, r, tol::ROUTES).with_values(vec![count as f64]))
        }));
    }
    // specialized displays on the diagonal-exponential family
    let mut r = rng(sub_seed(opts.seed, 900));
    for n in [5, 6, 7] {
        let p: [f64; 4] = [0; 4].map(|_| r.gen_range(-1.0..1.0));
        let (s_, t, u, w) = (p[0], p[1], p[2], p[3]);
        let check = format!("diagonal-exponential displays n={n}");
        out.push(guard(S, &check, topic, || {
            let sc = scene::appendix(n, s_, t, u, w);
            with_eval(&sc, |ev| {
                let nf = n as f64;
                let k1 = w * w + (u + w) * (u + w) - u * u / (nf - 2.0);
                let k2 = -(nf - 5.0) / (nf - 2.0) * u * u;
                let c = -(nf - 4.0) / (nf - 2.0);
                let wtr = -2.0 * (nf - 4.0) * (nf - 5.0) / ((nf - 1.0) * (nf - 2.0)) * 2.0 * s_;
                let worst = [
                    rel(ev.evaluate(InvariantId::K1)?, k1),
                    rel(ev.evaluate(InvariantId::K2)?, k2),
                    rel(ev.ext.wtt.get(&[1, 2]).value(), c * t),
                    rel(ev.ext.wtr.value(), wtr),
                ]
                .into_iter()
                .fold(0.0, f64::max);
                Ok(Check::below(S, &check, topic, worst, tol::ROUTES))
            })
        }));
    }
    out
}

fn ambient_suite(opts: &SuiteOptions) -> Vec<Check> {
    const S: &str = "ambient";
    let mut out = Vec::new();
    let topic = "curvature identities";
    for (i, n) in [3, 4, 5, 6, 7, 8, 4, 5, 6, 7].into_iter().enumerate() {
        let seed = sub_seed(opts.seed, 700 + i as u64);
        let name = format!("random polynomial metric n={n} #{i}");
        out.push(guard(S, &name, topic, || {
            let g = random_polynomial_metric(n, seed);
            let p = random_point(&mut rng(seed), n, 0.5);
            Ok(Check::below(S, &name, topic, max_residual(&ambient_identities(&g, &p)?), tol::IDENTITY))
        }));
    }
    let topic = "space forms";
    let forms = [
        (MetricField::RoundSphere { n: 4 }, vec![0.3, -0.2, 0.1, 0.25], 1.0),
        (MetricField::RoundSphere { n: 6 }, vec![0.1, 0.0, -0.4, 0.2, 0.3, 0.1], 1.0),
        (MetricField::HyperbolicHalfSpace { n: 5 }, vec![0.1, 0.2, -0.3, 0.4, 1.5], -1.0),
        (MetricField::Flat { n: 5 }, vec![0.5; 5], 0.0),
    ];
    for (g, p, lambda) in forms {
        let name = format!("constant curvature {lambda} in dimension {}", g.dim());
        out.push(guard(S, &name, topic, || {
            let pk = curvature_pack::<f64>(&g, &p, 4)?;
            Ok(Check::below(S, &name, topic, space_form_residual(&pk, lambda), tol::IDENTITY))
        }));
    }
    out
}

fn catalog_values(_: &SuiteOptions) -> Vec<Check> {
    const S: &str = "invariants";
    let topic = "catalog values";
    let mut out = Vec::new();
    let expect = [
        ("clifford-torus", InvariantId::Q, 1.0),
        ("equatorial-s2-in-s3", InvariantId::Q, 1.0),
        ("equatorial-s4-in-s5", InvariantId::Q, 6.0),
        ("equatorial-s4-in-s5", InvariantId::WQ, 0.0),
        ("s2xs2-in-s5", InvariantId::Pfbar, 4.0),
        ("s2xs2-in-s5", InvariantId::WQ, -2.0),
    ];
    for (scene_name, id, want) in expect {
        let name = format!("{} on {scene_name}", spec(id).name);
        out.push(guard(S, &name, topic, || {
            let v = with_eval(&scene::catalog(scene_name, 0)?, |ev| ev.evaluate(id))?;
            Ok(Check::below(S, &name, topic, (v - want).abs(), 1e-10).with_values(vec![v, want]))
        }));
    }
    let name = "every invariant vanishes on flat-plane";
    out.push(guard(S, name, topic, || {
        let vals = with_eval(&scene::catalog("flat-plane", 0)?, |ev| ev.all())?;
        Ok(Check::below(S, name, topic, vals.iter().map(|v| v.value.abs()).fold(0.0, f64::max), 1e-14))
    }));
    out
}

fn chern(_: &SuiteOptions) -> Vec<Check> {
    const S: &str = "gauss-bonnet";
    let topic = "Chern-Gauss-Bonnet";
    CLOSED
        .iter()
        .map(|name| {
            let check = format!("integral of Pfbar on {name}");
            guard(S, &check, topic, || {
                let r = chern_gb(&closed_example(name)?)?;
                Ok(Check::below(S, &check, topic, r.residual / (1.0 + r.rhs.abs()), 1e-8)
                    .with_values(vec![r.lhs, r.rhs]))
            })
        })
        .collect()
}

/// Run a named suite.
pub fn run(suite: Suite, opts: &SuiteOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let parts: &[fn(&SuiteOptions) -> Vec<Check>] = match suite {
        Suite::Ambient => &[ambient_suite],
        Suite::Submanifold => &[identities],
        Suite::Invariants => &[factorization, routes, catalog_values],
        Suite::Conformal => &[conformal_invariance, q_law, strata],
        Suite::GaussBonnet => &[constants, closed_gauss_bonnet, chern],
        Suite::RenormArea => &[renormalized_area],
        Suite::All => {
            for s in &Suite::ALL[..6] {
                out.extend(run(*s, opts));
            }
            return out;
        }
    };
    for f in parts {
        out.extend(f(opts));
    }
    out
}
