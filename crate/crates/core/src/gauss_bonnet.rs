//! Quadrature over closed parameterized submanifolds and the integral
//! identities: Chern–Gauss–Bonnet, the closed minimal-in-Einstein formula,
//! the factorization of `P_k` and `Q`, the Pfaffian coefficient `c_{n,k}`,
//! vanishing of divergence integrals and conformal invariance of total `Q`.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::conformal::{random_factor_poly, rescaled_jets, ConformalFactor};
use crate::error::{GeoError, Result};
use crate::extrinsic::ExtrinsicPack;
use crate::field::{coordinate_jets, Expr};
use crate::immersion::ImmersionMap;
use crate::invariants::{Evaluator, InvOptions, InvariantId};
use crate::metric::MetricField;
use crate::scene::{self, Scene};
use crate::submanifold::{FrameOptions, Submanifold, IMMERSION_ORDER};
use crate::tensor::LabeledTensor;

/// One-dimensional rule on `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Rule1D {
    GaussLegendre {
        a: f64,
        b: f64,
        m: usize,
    },
    /// Periodic trapezoid rule (nodes offset by half a step).
    Trapezoid {
        a: f64,
        b: f64,
        m: usize,
    },
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Golub–Welsch).
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let jac = nalgebra::DMatrix::from_fn(m, m, |i, j| {
        if i + 1 == j || j + 1 == i {
            let b = i.max(j) as f64;
            b / (4.0 * b * b - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(jac);
    let mut out: Vec<(f64, f64)> =
        (0..m).map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2))).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

impl Rule1D {
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        match *self {
            Rule1D::GaussLegendre { a, b, m } => {
                let (c, r) = ((a + b) / 2.0, (b - a) / 2.0);
                gauss_legendre(m).into_iter().map(|(x, w)| (c + r * x, r * w)).collect()
            }
            Rule1D::Trapezoid { a, b, m } => {
                let h = (b - a) / m as f64;
                (0..m).map(|i| (a + (i as f64 + 0.5) * h, h)).collect()
            }
        }
    }

    pub fn doubled(&self) -> Self {
        match *self {
            Rule1D::GaussLegendre { a, b, m } => Rule1D::GaussLegendre { a, b, m: 2 * m },
            Rule1D::Trapezoid { a, b, m } => Rule1D::Trapezoid { a, b, m: 2 * m },
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Rule1D::GaussLegendre { m, .. } | Rule1D::Trapezoid { m, .. } => m,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Tensor-product rule over the parameter box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub rules: Vec<Rule1D>,
}

impl QuadratureGrid {
    pub fn doubled(&self) -> Self {
        QuadratureGrid { rules: self.rules.iter().map(Rule1D::doubled).collect() }
    }

    pub fn len(&self) -> usize {
        self.rules.iter().map(Rule1D::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A node in the middle half of every rule, away from the coordinate
    /// singularities of polar charts; `p` selects among them.
    pub fn interior_node(&self, p: usize) -> (Vec<usize>, Vec<f64>) {
        let idx: Vec<usize> = self
            .rules
            .iter()
            .enumerate()
            .map(|(d, r)| {
                let m = r.len();
                m / 4 + (p * (2 * d + 1)) % (m / 2).max(1)
            })
            .collect();
        let y = idx.iter().zip(&self.rules).map(|(&i, r)| r.nodes()[i].0).collect();
        (idx, y)
    }

    /// Node multi-indices, coordinates and weights.
    pub(crate) fn nodes(&self) -> Vec<(Vec<usize>, Vec<f64>, f64)> {
        let per: Vec<Vec<(f64, f64)>> = self.rules.iter().map(Rule1D::nodes).collect();
        let dims: Vec<usize> = per.iter().map(Vec::len).collect();
        let mut out = Vec::with_capacity(self.len());
        crate::tensor::for_each_index(&dims, |idx| {
            let y = idx.iter().enumerate().map(|(d, &i)| per[d][i].0).collect();
            let w = idx.iter().enumerate().map(|(d, &i)| per[d][i].1).product();
            out.push((idx.to_vec(), y, w));
        });
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedExample {
    pub name: String,
    pub scene: Scene,
    pub grid: QuadratureGrid,
    /// Closed-form area.
    pub area: f64,
    pub euler: i32,
    /// `Ric = λ(n−1)g`.
    pub lambda: Option<f64>,
    pub minimal: bool,
    pub totally_geodesic: bool,
}

impl ClosedExample {
    pub fn k(&self) -> usize {
        self.scene.patch.k()
    }

    pub fn n(&self) -> usize {
        self.scene.patch.n()
    }
}

pub(crate) fn double_factorial(k: usize) -> f64 {
    (1..=k).rev().step_by(2).map(|i| i as f64).product()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `Vol(S^k) = 2(2π)^{k/2}/(k−1)!!` for even `k`.
pub fn sphere_volume(k: usize) -> f64 {
    assert!(k % 2 == 0, "closed form used for even k only");
    2.0 * (2.0 * PI).powi(k as i32 / 2) / double_factorial(k - 1)
}

/// Coefficient `(k−1)!/(k−1)!!` of the Pfaffian in the decomposition of `Q`.
pub fn c_nk(k: usize) -> f64 {
    factorial(k - 1) / double_factorial(k - 1)
}

fn polar_rules(d: usize, m_theta: usize, m_phi: usize) -> Vec<Rule1D> {
    let mut r = vec![Rule1D::GaussLegendre { a: 0.0, b: PI, m: m_theta }; d - 1];
    r.push(Rule1D::Trapezoid { a: 0.0, b: 2.0 * PI, m: m_phi });
    r
}

/// Equatorial `S^k ⊂ S^n` in polar angles, through the stereographic chart.
pub fn equatorial_sphere(k: usize, n: usize) -> Result<ClosedExample> {
    if k % 2 != 0 || k >= n {
        return Err(GeoError::Usage(format!("equatorial sphere needs even k < n, got k={k}, n={n}")));
    }
    let mut big = scene::sphere_embedding(k, 0);
    big.resize(n + 1, Expr::c(0.0));
    let map = ImmersionMap::Map { k, n, x: scene::stereographic(big) };
    let base = vec![1.0; k];
    let sc = Scene {
        name: format!("equatorial-s{k}-in-s{n}"),
        metric: MetricField::RoundSphere { n },
        patch: crate::immersion::ImmersedPatch::new(map, base),
        domain: None,
    };
    Ok(ClosedExample {
        name: sc.name.clone(),
        scene: sc,
        grid: QuadratureGrid { rules: polar_rules(k, 12, 8) },
        area: sphere_volume(k),
        euler: 2,
        lambda: Some(1.0),
        minimal: true,
        totally_geodesic: true,
    })
}

pub const CLOSED: &[&str] = &[
    "round-s2",
    "equatorial-s2-in-s3",
    "clifford-torus",
    "equatorial-s4-in-s5",
    "equatorial-s4-in-s7",
    "s2xs2-in-s5",
    "t4-in-s7",
];

pub fn closed_example(name: &str) -> Result<ClosedExample> {
    let from_catalog = |rules: Vec<Rule1D>, area: f64, euler: i32| -> Result<ClosedExample> {
        let sc = scene::catalog(name, 0)?;
        Ok(ClosedExample {
            name: name.to_string(),
            lambda: sc.metric.einstein_lambda(),
            scene: sc,
            grid: QuadratureGrid { rules },
            area,
            euler,
            minimal: true,
            totally_geodesic: false,
        })
    };
    let trap = |m| Rule1D::Trapezoid { a: 0.0, b: 2.0 * PI, m };
    let gl = |m| Rule1D::GaussLegendre { a: 0.0, b: PI, m };
    match name {
        "round-s2" => {
            let sc = Scene { name: name.into(), ..scene::round_sphere_in_flat(2, 3, 1.0) };
            Ok(ClosedExample {
                name: name.into(),
                scene: sc,
                grid: QuadratureGrid { rules: polar_rules(2, 16, 8) },
                area: sphere_volume(2),
                euler: 2,
                lambda: Some(0.0),
                minimal: false,
                totally_geodesic: false,
            })
        }
        "equatorial-s2-in-s3" => equatorial_sphere(2, 3),
        "equatorial-s4-in-s5" => equatorial_sphere(4, 5),
        "equatorial-s4-in-s7" => equatorial_sphere(4, 7),
        // radii 1/√2: area (2π/√2)²
        "clifford-torus" => from_catalog(vec![trap(8); 2], 2.0 * PI * PI, 0),
        // radii 1/√2: area (½·4π)²
        "s2xs2-in-s5" => from_catalog(vec![gl(12), trap(16), gl(12), trap(16)], (0.5 * sphere_volume(2)).powi(2), 4),
        // radii ½: area π⁴
        "t4-in-s7" => from_catalog(vec![trap(6); 4], PI.powi(4), 0),
        _ => Err(GeoError::Config(format!("unknown closed example {name:?}"))),
    }
}

/// Inverse stereographic coordinate `X_i(x)` of the unit sphere `S^n ⊂ ℝ^{n+1}`
/// matching the chart of `MetricField::RoundSphere`.
pub fn sphere_coordinate(n: usize, i: usize) -> Expr {
    let r2 = Expr::add((0..n).map(|j| Expr::mul(vec![Expr::var(j), Expr::var(j)])).collect());
    let den = Expr::add(vec![Expr::c(1.0), r2.clone()]);
    if i == n {
        Expr::div(Expr::sub(Expr::c(1.0), r2), den)
    } else {
        Expr::div(Expr::mul(vec![Expr::c(2.0), Expr::var(i)]), den)
    }
}

/// Random polynomial of degree ≤ 3 in the sphere coordinates `X_i`, `i ∈ coords`
/// (coefficients in `[−0.3, 0.3]`). It is invariant under every rotation of
/// the complementary coordinates.
pub fn sphere_factor(n: usize, coords: &[usize], seed: u64) -> ConformalFactor {
    let p = random_factor_poly(coords.len(), 3, seed);
    let args: Vec<Expr> = coords.iter().map(|&i| sphere_coordinate(n, i)).collect();
    let terms = p
        .terms
        .iter()
        .map(|(mono, c)| {
            let mut f = vec![Expr::c(*c)];
            for (v, &e) in mono.iter().enumerate() {
                f.extend(std::iter::repeat_n(args[v].clone(), e as usize));
            }
            Expr::mul(f)
        })
        .collect();
    ConformalFactor::new(Expr::add(terms))
}

/// `√det h` at chart point `y` from first jets only.
pub(crate) fn area_element(sc: &Scene, y: &[f64]) -> Result<f64> {
    let patch = sc.patch.at(y.to_vec());
    let x = patch.jets::<f64>(1)?;
    let p: Vec<f64> = x.iter().map(|j| j.value()).collect();
    let g = sc.metric.jets::<f64>(&p, 0)?;
    let (k, n) = (patch.k(), patch.n());
    let h = nalgebra::DMatrix::from_fn(k, k, |a, b| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += g.get(&[i, j]).value() * x[i].d_value(a) * x[j].d_value(b);
            }
        }
        s
    });
    let det = h.determinant();
    if !(det > 0.0) {
        return Err(GeoError::Numeric(format!("degenerate area element at {y:?}")));
    }
    Ok(det.sqrt())
}

/// Pointwise evaluation context handed to integrands.
pub struct Point<'a> {
    pub ev: &'a Evaluator<'a, f64>,
    pub y: &'a [f64],
}

/// How the integrand is sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Sampling {
    /// Evaluate at every node.
    Full,
    /// The integrand depends only on the listed parameter directions (by a
    /// symmetry of the example); it is evaluated on the sub-grid they span,
    /// the area element still on the full grid. The claim is checked at
    /// `checks` extra nodes.
    Symmetric { active: Vec<usize>, checks: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integrals {
    /// `∫ e^{kΥ} darea_h` (the rescaled area when a factor is given).
    pub area: f64,
    pub values: Vec<f64>,
    pub nodes: usize,
    pub evaluations: usize,
}

const SYMMETRY_TOL: f64 = 1e-8;

/// `∫_Y f darea` for several integrands at once, on the metric `e^{2Υ}g` when
/// `ups` is given (`darea_ĥ = e^{kΥ}darea_h`).
pub fn integrate<F>(ex: &ClosedExample, ups: Option<&ConformalFactor>, sampling: &Sampling, f: F) -> Result<Integrals>
where
    F: Fn(&Point) -> Result<Vec<f64>>,
{
    let sc = &ex.scene;
    let k = ex.k() as f64;
    let eval_at = |y: &[f64]| -> Result<Vec<f64>> {
        let patch = sc.patch.at(y.to_vec());
        let sub = match ups {
            None => Submanifold::<f64>::new(&sc.metric, &patch, &FrameOptions::default())?,
            Some(u) => {
                let gx = rescaled_jets(&sc.metric, &patch, u, 1.0)?;
                Submanifold::from_metric_jets(&gx, &patch, &FrameOptions::default())?
            }
        };
        let ext = ExtrinsicPack::new(&sub)?;
        let ev = Evaluator::new(&sub, &ext, InvOptions::default());
        let v = f(&Point { ev: &ev, y })?;
        if !v.iter().all(|x| x.is_finite()) {
            return Err(GeoError::Numeric(format!("non-finite integrand at {y:?}")));
        }
        Ok(v)
    };
    let nodes = ex.grid.nodes();
    // symmetric directions are sampled at the middle node, away from the
    // coordinate singularities of polar charts
    let rep: Vec<f64> = ex
        .grid
        .rules
        .iter()
        .map(|r| {
            let n = r.nodes();
            n[n.len() / 2].0
        })
        .collect();
    let mut cache: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    let key = |idx: &[usize]| -> Vec<usize> {
        match sampling {
            Sampling::Full => idx.to_vec(),
            Sampling::Symmetric { active, .. } => active.iter().map(|&d| idx[d]).collect(),
        }
    };
    let project = |y: &[f64]| -> Vec<f64> {
        match sampling {
            Sampling::Full => y.to_vec(),
            Sampling::Symmetric { active, .. } => {
                let mut z = rep.clone();
                for &d in active {
                    z[d] = y[d];
                }
                z
            }
        }
    };
    let mut area = 0.0;
    let mut values: Vec<f64> = Vec::new();
    for (idx, y, w) in &nodes {
        let mut dw = w * area_element(sc, y)?;
        if let Some(u) = ups {
            let p = sc.patch.at(y.clone()).point()?;
            dw *= (k * u.expr.eval(&p)).exp();
        }
        let kk = key(idx);
        if !cache.contains_key(&kk) {
            cache.insert(kk.clone(), eval_at(&project(y))?);
        }
        let v = &cache[&kk];
        if values.is_empty() {
            values = vec![0.0; v.len()];
        }
        for (acc, x) in values.iter_mut().zip(v) {
            *acc += dw * x;
        }
        area += dw;
    }
    let mut evaluations = cache.len();
    if let Sampling::Symmetric { checks, .. } = sampling {
        for c in 0..*checks {
            let (idx, y) = ex.grid.interior_node(c + 1);
            let full = eval_at(&y)?;
            let cached = &cache[&key(&idx)];
            evaluations += 1;
            for (a, b) in full.iter().zip(cached) {
                if (a - b).abs() > SYMMETRY_TOL * (1.0 + a.abs().max(b.abs())) {
                    return Err(GeoError::Numeric(format!(
                        "{}: integrand not invariant along the declared symmetric directions at {y:?} ({a} vs {b})",
                        ex.name
                    )));
                }
            }
        }
    }
    Ok(Integrals { area, values, nodes: nodes.len(), evaluations })
}

/// Homogeneous examples: the integrands are constant, so one evaluation
/// plus two checks suffices.
pub fn homogeneous() -> Sampling {
    Sampling::Symmetric { active: vec![], checks: 2 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbCheck {
    pub example: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl GbCheck {
    fn new(example: &str, lhs: f64, rhs: f64) -> Self {
        GbCheck { example: example.to_string(), lhs, rhs, residual: (lhs - rhs).abs() }
    }
}

/// `∫Pf̄ darea` against `(2π)^{k/2}χ`.
pub fn chern_gb(ex: &ClosedExample) -> Result<GbCheck> {
    let k = ex.k();
    if k != 2 && k != 4 {
        return Err(GeoError::Usage(format!("Chern–Gauss–Bonnet check needs k ∈ {{2,4}}, got {k}")));
    }
    let r = integrate(ex, None, &homogeneous(), |p| Ok(vec![p.ev.pfbar()?.value()]))?;
    Ok(GbCheck::new(&ex.name, r.values[0], (2.0 * PI).powi(k as i32 / 2) * ex.euler as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedGb {
    pub example: String,
    pub lambda: f64,
    pub area: f64,
    /// `λ^{k/2}A`.
    pub lhs: f64,
    /// `(2π)^{k/2}χ/(k−1)!! + ∫𝓦_Q/(k−1)!`.
    pub rhs: f64,
    /// For `k = 4`: `4π²χ/3 − ⅙∫(¼|W̄|² − 𝓘 − 2|𝖥|² + 2𝖦²)`.
    pub rhs_explicit: Option<f64>,
    pub residual: f64,
    pub max_h: f64,
}

/// Both sides of the closed Gauss–Bonnet formula for minimal submanifolds of
/// Einstein manifolds.
pub fn closed_gb(ex: &ClosedExample) -> Result<ClosedGb> {
    let k = ex.k();
    let lambda = match (ex.minimal, ex.lambda) {
        (true, Some(l)) if k == 2 || k == 4 => l,
        _ => {
            return Err(GeoError::Usage(format!(
                "{}: closed formula needs a minimal k ∈ {{2,4}} example in an Einstein space",
                ex.name
            )))
        }
    };
    let r = integrate(ex, None, &homogeneous(), |p| {
        let ev = p.ev;
        let hn = ev.ext.hsq.value().sqrt();
        let mut v = vec![ev.w_q()?.value(), hn];
        if k == 4 {
            let wb = ev.sub.intr()?.w();
            let f = ev.ext.f()?;
            let g = ev.g().value();
            let explicit =
                0.25 * ev.sub.inner(wb, wb).value() - ev.i()?.value() - 2.0 * ev.sub.inner(f, f).value() + 2.0 * g * g;
            v.push(explicit);
        }
        Ok(v)
    })?;
    let chi = ex.euler as f64;
    let lhs = lambda.powi(k as i32 / 2) * r.area;
    let rhs = (2.0 * PI).powi(k as i32 / 2) * chi / double_factorial(k - 1) + r.values[0] / factorial(k - 1);
    let rhs_explicit = (k == 4).then(|| 4.0 * PI * PI / 3.0 * chi - r.values[2] / 6.0);
    let mut residual = (lhs - rhs).abs();
    if let Some(e) = rhs_explicit {
        residual = residual.max((lhs - e).abs());
    }
    // the mean-curvature integrand is |H|·density, so its integral bounds max |H|·A
    Ok(ClosedGb {
        example: ex.name.clone(),
        lambda,
        area: r.area,
        lhs,
        rhs,
        rhs_explicit,
        residual,
        max_h: r.values[1] / r.area,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationCheck {
    pub example: String,
    /// `max |Q − λ^{k/2}(k−1)!|` over the sample points.
    pub q_residual: f64,
    /// `max |P_kφ − Π(−Δ̄ + c_j)φ| / (1 + |Π…|)` over points and test functions.
    pub operator_residual: f64,
}

/// Test functions in the chart variables around `y0`: a constant, linear and
/// quadratic monomials, and a Gaussian bump.
pub fn test_functions(k: usize, y0: &[f64]) -> Vec<Expr> {
    let d = |i: usize| Expr::sub(Expr::var(i), Expr::c(y0[i]));
    let mut out = vec![Expr::c(1.0)];
    for i in 0..k {
        out.push(d(i));
        out.push(Expr::mul(vec![d(i), d((i + 1) % k)]));
    }
    let r2 = Expr::add((0..k).map(|i| Expr::mul(vec![d(i), d(i)])).collect());
    out.push(Expr::exp(Expr::mul(vec![Expr::c(-1.5), r2])));
    out
}

/// `Q = λ^{k/2}(k−1)!` and `P_k = Π_{j=1}^{k/2}(−Δ̄ + λ(k/2+j−1)(k/2−j))` at
/// `points` nodes of the example.
pub fn factorization_check(ex: &ClosedExample, points: usize, sigma: f64) -> Result<FactorizationCheck> {
    let k = ex.k();
    let lambda = match (ex.minimal, ex.lambda) {
        (true, Some(l)) if k == 2 || k == 4 => l,
        _ => {
            return Err(GeoError::Usage(format!(
                "{}: factorization needs a minimal k ∈ {{2,4}} example in an Einstein space",
                ex.name
            )))
        }
    };
    let q_exact = lambda.powi(k as i32 / 2) * factorial(k - 1);
    let sc = &ex.scene;
    let (mut qr, mut opr) = (0.0f64, 0.0f64);
    for p in 0..points {
        let (_, y) = ex.grid.interior_node(p);
        let patch = sc.patch.at(y.clone());
        let sub = Submanifold::<f64>::new(&sc.metric, &patch, &FrameOptions::default())?;
        let ext = ExtrinsicPack::new(&sub)?;
        let ev = Evaluator::new(&sub, &ext, InvOptions::default());
        qr = qr.max((ev.evaluate(InvariantId::Q)? - q_exact).abs());
        let cj = coordinate_jets::<f64>(&y, IMMERSION_ORDER);
        for phi in test_functions(k, &y) {
            let pj = phi.eval_jets(&cj);
            let got = ev.paneitz_apply(&pj, sigma)?;
            let mut u = LabeledTensor::scalar(pj);
            for j in 1..=k / 2 {
                let c = lambda * ((k / 2 + j - 1) * (k / 2 - j)) as f64;
                let lap = sub.laplacian(&u);
                u = lap.scaled(-1.0).add(&u.scaled(c));
            }
            let want = u.value().value();
            opr = opr.max((got - want).abs() / (1.0 + want.abs()));
        }
    }
    Ok(FactorizationCheck { example: ex.name.clone(), q_residual: qr, operator_residual: opr })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnkCheck {
    pub k: usize,
    pub n: usize,
    pub recovered: f64,
    pub expected: f64,
}

/// Solve `∫Q = c∫Pf̄ + ∫𝓦_Q` on the equatorial `S^k ⊂ S^n` for `c`.
pub fn c_nk_check(k: usize, n: usize) -> Result<CnkCheck> {
    let ex = equatorial_sphere(k, n)?;
    let r = integrate(&ex, None, &homogeneous(), |p| {
        let ev = p.ev;
        Ok(vec![ev.evaluate(InvariantId::Q)?, ev.pfbar()?.value(), ev.w_q()?.value()])
    })?;
    let [q, pf, wq] = [r.values[0], r.values[1], r.values[2]];
    Ok(CnkCheck { k, n, recovered: (q - wq) / pf, expected: c_nk(k) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceIntegrals {
    pub example: String,
    /// `∫` of the divergence term in the `k = 4` decomposition of `Q`.
    pub q_divergence: f64,
    pub k1: f64,
    pub k2: f64,
    pub area: f64,
}

/// Integrals of the divergence terms over a closed `k = 4` example, on the
/// metric `e^{2Υ}g` when a factor is given.
pub fn divergence_integrals(
    ex: &ClosedExample,
    ups: Option<&ConformalFactor>,
    sampling: &Sampling,
) -> Result<DivergenceIntegrals> {
    if ex.k() != 4 {
        return Err(GeoError::Usage("divergence integrals are checked for k = 4".into()));
    }
    let r = integrate(ex, ups, sampling, |p| {
        let ev = p.ev;
        Ok(vec![ev.q_divergence()?.value(), ev.k1()?.value(), ev.k2()?.value()])
    })?;
    Ok(DivergenceIntegrals {
        example: ex.name.clone(),
        q_divergence: r.values[0],
        k1: r.values[1],
        k2: r.values[2],
        area: r.area,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TotalQ {
    pub example: String,
    pub original: f64,
    pub rescaled: f64,
    pub evaluations: usize,
}

/// `∫Q^ĥ darea_ĥ` against `∫Q^h darea_h`.
pub fn total_q(ex: &ClosedExample, ups: &ConformalFactor, sampling: &Sampling) -> Result<TotalQ> {
    let q = |p: &Point| Ok(vec![p.ev.evaluate(InvariantId::Q)?]);
    let a = integrate(ex, None, &homogeneous(), q)?;
    let b = integrate(ex, Some(ups), sampling, q)?;
    Ok(TotalQ { example: ex.name.clone(), original: a.values[0], rescaled: b.values[0], evaluations: b.evaluations })
}

/// Largest change of `(∫1, ∫Pf̄, ∫𝓦_Q)` when every rule is doubled.
pub fn quadrature_convergence(ex: &ClosedExample) -> Result<f64> {
    let f = |p: &Point| Ok(vec![1.0, p.ev.pfbar()?.value(), p.ev.w_q()?.value()]);
    let a = integrate(ex, None, &homogeneous(), f)?;
    let fine = ClosedExample { grid: ex.grid.doubled(), ..ex.clone() };
    let b = integrate(&fine, None, &homogeneous(), f)?;
    Ok(a.values.iter().zip(&b.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}

/// `∫ f darea` for an ambient scalar `f(x)` (no curvature needed).
pub fn integrate_scalar(ex: &ClosedExample, f: &Expr) -> Result<f64> {
    let mut s = 0.0;
    for (_, y, w) in ex.grid.nodes() {
        let p = ex.scene.patch.at(y.clone()).point()?;
        s += w * area_element(&ex.scene, &y)? * f.eval(&p);
    }
    Ok(s)
}
