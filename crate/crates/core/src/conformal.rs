//! Conformal linearization `(•)` and the checks built on it: tensor weights,
//! invariance, homogeneity, the `Q`-curvature transformation law and the
//! transverse-jet strata of weight −4 scalars on four-dimensional submanifolds.
//!
//! Linearizations are computed twice: exactly, by running the whole pipeline
//! over dual numbers with `t = ε`, and by central differences in `t`.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ambient::JT;
use crate::error::{GeoError, Result};
use crate::extrinsic::{ExtrinsicPack, N, T};
use crate::field::{coordinate_jets, Expr, Poly};
use crate::immersion::{ImmersedPatch, ImmersionMap};
use crate::invariants::{spec, weight_in, Evaluator, InvOptions, InvariantId};
use crate::jet::Jet;
use crate::metric::{rescale, MetricField};
use crate::random::rng;
use crate::scalar::{Dual, Real};
use crate::scene::Scene;
use crate::submanifold::{aslot, trace_normal, trace_tangent, FrameOptions, Submanifold, METRIC_ORDER};
use crate::tensor::{einsum, Kind, LabeledTensor, Slot};

/// Step for the central-difference route.
pub const FD_STEP: f64 = 1e-4;

/// Ambient conformal factor `Υ(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalFactor {
    pub expr: Expr,
    /// Order to which `Υ` vanishes transversally along the submanifold, when
    /// known by construction (`Some(j)`: the transverse `j`-jet vanishes).
    #[serde(default)]
    pub vanishing_order: Option<usize>,
}

impl ConformalFactor {
    pub fn new(expr: Expr) -> Self {
        ConformalFactor { expr, vanishing_order: None }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Expr::c(c))
    }

    /// Random polynomial of degree ≤ `degree` with coefficients in `[−0.3, 0.3]`.
    pub fn random(n: usize, degree: u32, seed: u64) -> Self {
        Self::new(Expr::poly(random_factor_poly(n, degree, seed)))
    }

    /// `Υ = ρ^{j+1}(1 + q)` with `ρ = x_k − u_0(x_0, …, x_{k−1})` vanishing on a
    /// graph, so the transverse `j`-jet of `Υ` vanishes along the submanifold.
    pub fn vanishing_on_graph(patch: &ImmersedPatch, j: usize, seed: u64) -> Result<Self> {
        let (k, n, u0) = match &patch.map {
            ImmersionMap::Graph { k, n, u } => (*k, *n, u[0].clone()),
            ImmersionMap::Map { .. } => {
                return Err(GeoError::Usage("transversally vanishing factors need a graph immersion".into()))
            }
        };
        let rho = Expr::sub(Expr::var(k), u0);
        let q = Self::random(n, 2, seed).expr;
        let pow = Expr::mul(vec![rho; j + 1]);
        Ok(ConformalFactor { expr: Expr::mul(vec![pow, Expr::add(vec![Expr::c(1.0), q])]), vanishing_order: Some(j) })
    }

    pub fn jets<S: Real>(&self, x0: &[f64], order: usize) -> Jet<S> {
        self.expr.eval_jets(&coordinate_jets::<S>(x0, order))
    }
}

/// One constant and three random monomials per degree `1..=degree`, with
/// coefficients in `[−0.3, 0.3]`.
pub fn random_factor_poly(n: usize, degree: u32, seed: u64) -> Poly {
    let mut r = rng(seed ^ 0x5eed_u64.wrapping_mul(31));
    let mut p = Poly::zero(n);
    for d in 0..=degree {
        let terms = if d == 0 { 1 } else { 3 };
        for _ in 0..terms {
            let vars: Vec<usize> = (0..d).map(|_| r.gen_range(0..n)).collect();
            p = p.plus(Poly::monomial(n, r.gen_range(-0.3..=0.3), &vars));
        }
    }
    p
}

/// Metric jets of `e^{2tΥ}g` at the patch point.
pub fn rescaled_jets<S: Real>(
    metric: &MetricField,
    patch: &ImmersedPatch,
    ups: &ConformalFactor,
    t: S,
) -> Result<JT<S>> {
    let x0 = patch.point()?;
    let g = metric.jets::<S>(&x0, METRIC_ORDER)?;
    Ok(rescale(&g, &ups.jets::<S>(&x0, METRIC_ORDER), t))
}

/// Submanifold data for `e^{2tΥ}g`.
pub fn rescaled<S: Real>(scene: &Scene, ups: &ConformalFactor, t: S) -> Result<Submanifold<S>> {
    let gx = rescaled_jets(&scene.metric, &scene.patch, ups, t)?;
    Submanifold::from_metric_jets(&gx, &scene.patch, &FrameOptions::default())
}

/// Weight −4 scalars whose conformal linearization sees only the transverse
/// `j`-jet of `Υ` (`j` is [`StratumScalar::stratum`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StratumScalar {
    FPbar,
    WD,
    LtSqJbar,
    Lt2Pbar,
    JbarSq,
    PbarSq,
    GJbar,
    DSq,
    HLapH,
    HDivD,
    HDivW,
    H4,
    H2LtSq,
    HLLH,
    H2Jbar,
    GH2,
    HTrL3,
    HLF,
    HLPbar,
    HHW,
    HLW,
    HC,
    GPtr,
    PW,
    H2Ptr,
    LtSqPtr,
    HHP,
    LLP,
    JbarPtr,
    PtrSq,
    PnnSq,
    HDnJ,
    LapJ,
}

pub const STRATA: &[StratumScalar] = {
    use StratumScalar::*;
    &[
        FPbar, WD, LtSqJbar, Lt2Pbar, JbarSq, PbarSq, GJbar, DSq, HLapH, HDivD, HDivW, H4, H2LtSq, HLLH, H2Jbar, GH2,
        HTrL3, HLF, HLPbar, HHW, HLW, HC, GPtr, PW, H2Ptr, LtSqPtr, HHP, LLP, JbarPtr, PtrSq, PnnSq, HDnJ, LapJ,
    ]
};

impl StratumScalar {
    pub fn stratum(self) -> usize {
        use StratumScalar::*;
        match self {
            FPbar | WD | LtSqJbar | Lt2Pbar | JbarSq | PbarSq | GJbar | DSq => 0,
            HLapH | HDivD | HDivW | H4 | H2LtSq | HLLH | H2Jbar | GH2 | HTrL3 | HLF | HLPbar | HHW | HLW | HC => 1,
            GPtr | PW | H2Ptr | LtSqPtr | HHP | LLP | JbarPtr | PtrSq | PnnSq => 2,
            HDnJ => 3,
            LapJ => 4,
        }
    }

    pub fn name(self) -> String {
        format!("{self:?}")
    }
}

/// Terms whose conformal linearizations on four-dimensional submanifolds
/// have closed forms in `Υ` (all of weight −4).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step5Term {
    /// `Δ̄J̄`
    LapJbar,
    /// `∇̄^α∇̄^β𝖥_{αβ}`
    DivDivF,
    /// `∇̄^α(L̊_{αβα'}𝖣^{βα'})`
    DivLD,
    /// `Δ̄|L̊|²`
    LapLtSq,
    /// `Δ̄𝖦`
    LapG,
    /// `∇̄^α(L̊^{βγα'}W_{βαγα'})`
    DivLW,
    /// `∇̄^α(L̊_{αβα'}W^{βγα'}{}_γ)`
    DivLWtr,
}

pub const STEP5: &[Step5Term] = {
    use Step5Term::*;
    &[LapJbar, DivDivF, DivLD, LapLtSq, LapG, DivLW, DivLWtr]
};

/// Anything the linearization machinery can evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    Weyl,
    Schouten,
    Cotton,
    Bach,
    SecondFundamentalForm,
    TraceFreeSff,
    MeanCurvature,
    ModSchouten,
    ModCotton,
    ModCottonTrace,
    ModBach,
    D,
    Fialkow,
    G,
    TraceFreeSffSq,
    NormalCurvature,
    Invariant(InvariantId),
    Stratum(StratumScalar),
    Step5(Step5Term),
}

impl Quantity {
    pub fn name(&self) -> String {
        match self {
            Quantity::Invariant(id) => spec(*id).name.to_string(),
            Quantity::Stratum(s) => s.name(),
            Quantity::Step5(s) => format!("{s:?}"),
            q => format!("{q:?}"),
        }
    }

    /// Homogeneity `h` with all indices lowered: `T^{c²g} = c^h T^g`.
    pub fn homogeneity(&self, k: usize) -> i32 {
        use Quantity::*;
        match self {
            Weyl | SecondFundamentalForm | TraceFreeSff | NormalCurvature => 2,
            Schouten | Cotton | MeanCurvature | ModSchouten | ModCotton | D | Fialkow => 0,
            Bach | ModCottonTrace | ModBach | G | TraceFreeSffSq => -2,
            Invariant(id) => weight_in(*id, k),
            Stratum(_) | Step5(_) => -4,
        }
    }

    pub fn eval<S: Real>(&self, sub: &Submanifold<S>, ext: &ExtrinsicPack<S>) -> Result<JT<S>> {
        use Quantity::*;
        let sc = |j: Jet<S>| LabeledTensor::scalar(j);
        let ev = Evaluator::new(sub, ext, InvOptions::default());
        Ok(match self {
            Weyl => ext.w_ad.clone(),
            Schouten => ext.p_ad.clone(),
            Cotton => ext.c_ad.clone(),
            Bach => ext.b_ad.clone(),
            SecondFundamentalForm => sub.l.clone(),
            TraceFreeSff => ext.lt.clone(),
            MeanCurvature => ext.hv.clone(),
            ModSchouten => ext.mp.clone(),
            ModCotton => ext.mc.clone(),
            ModCottonTrace => ext.mc_a.clone(),
            ModBach => ext.mb.clone(),
            D => ext.d.clone(),
            Fialkow => ext.f()?.clone(),
            G => sc(ext.g()?.clone()),
            TraceFreeSffSq => sc(ext.lt_sq.clone()),
            NormalCurvature => sub.normal_curvature(),
            Invariant(id) => {
                let s = spec(*id);
                if !s.is_valid(sub.k, sub.n, &ev.opts) {
                    return Err(GeoError::Domain(format!("{} not defined for k={}, n={}", s.name, sub.k, sub.n)));
                }
                sc(Jet::constant(ev.evaluate(*id)?))
            }
            Stratum(s) => sc(stratum_value(&ev, *s)?),
            Step5(s) => sc(step5_value(&ev, *s)?),
        })
    }
}

fn stratum_value<S: Real>(ev: &Evaluator<S>, s: StratumScalar) -> Result<Jet<S>> {
    use StratumScalar::*;
    let (sub, e) = (ev.sub, ev.ext);
    if sub.k != 4 {
        return Err(GeoError::Domain("the transverse-jet strata are stated for k = 4".into()));
    }
    let dot = |a: &JT<S>, b: &JT<S>| sub.inner(a, b);
    let pnn = || sub.block(&e.p_ad, &[N, N]);
    let ptr = || trace_normal(&pnn(), 0, 1).value().clone();
    let wnn = || trace_tangent(&ev.w(&[N, T, N, T]), 1, 3, &sub.hinv);
    let hvec = |t: &JT<S>| einsum("p,p->", &[&e.hv, t]).value().clone();
    Ok(match s {
        FPbar => dot(e.f()?, ev.pbar()?),
        WD => ev.d_w(),
        LtSqJbar => &e.lt_sq * &ev.jbar()?,
        Lt2Pbar => dot(&e.lt2, ev.pbar()?),
        JbarSq => {
            let j = ev.jbar()?;
            &j * &j
        }
        PbarSq => dot(ev.pbar()?, ev.pbar()?),
        GJbar => &ev.g() * &ev.jbar()?,
        DSq => ev.d_sq(),
        HLapH => dot(&e.hv, &sub.laplacian(&e.hv)),
        HDivD => hvec(&sub.div(&e.d, 0)),
        HDivW => hvec(&sub.div(&e.wtn, 0)),
        H4 => &e.hsq * &e.hsq,
        H2LtSq => &e.hsq * &e.lt_sq,
        HLLH => einsum("p,abp,abq,q->", &[&e.hv, ev.ltu(), &e.lt, &e.hv]).value().clone(),
        H2Jbar => &e.hsq * &ev.jbar()?,
        GH2 => &ev.g() * &e.hsq,
        HTrL3 => ev.h_tr_l3(),
        HLF => ev.hl_dot(e.f()?),
        HLPbar => ev.hl_dot(ev.pbar()?),
        HHW => einsum("p,q,pq->", &[&e.hv, &e.hv, &wnn()]).value().clone(),
        HLW => einsum("p,abq,apbq->", &[&e.hv, ev.ltu(), &ev.w(&[T, N, T, N])]).value().clone(),
        HC => hvec(&sub.block(&e.mc_a, &[N])),
        GPtr => &ev.g() * &ptr(),
        PW => einsum("pq,pq->", &[&pnn(), &wnn()]).value().clone(),
        H2Ptr => &e.hsq * &ptr(),
        LtSqPtr => &e.lt_sq * &ptr(),
        HHP => einsum("p,q,pq->", &[&e.hv, &e.hv, &pnn()]).value().clone(),
        LLP => einsum("pq,pq->", &[&ev.lmat(), &pnn()]).value().clone(),
        JbarPtr => &ev.jbar()? * &ptr(),
        PtrSq => {
            let p = ptr();
            &p * &p
        }
        PnnSq => dot(&pnn(), &pnn()),
        HDnJ => {
            let dj = sub.block(&sub.project(sub.amb.dj()), &[N]);
            hvec(&dj)
        }
        LapJ => sub.compose(&sub.amb.conn.trace2(sub.amb.ddj())),
    })
}

fn step5_value<S: Real>(ev: &Evaluator<S>, s: Step5Term) -> Result<Jet<S>> {
    use Step5Term::*;
    let (sub, e) = (ev.sub, ev.ext);
    if sub.k != 4 {
        return Err(GeoError::Domain("the linearization table is stated for k = 4".into()));
    }
    Ok(match s {
        LapJbar => ev.lap(&ev.jbar()?),
        DivDivF => {
            let dd = sub.nabla_bar(&sub.nabla_bar(e.f()?));
            let t = trace_tangent(&dd, 0, 2, &sub.hinv);
            trace_tangent(&t, 0, 1, &sub.hinv).value().clone()
        }
        DivLD => ev.div_dl().clone(),
        LapLtSq => ev.lap(&e.lt_sq),
        LapG => ev.lap(&ev.g()),
        DivLW => ev.div1(&einsum("bcp,bacp->a", &[ev.ltu(), &ev.w(&[T, T, T, N])])),
        DivLWtr => ev.div1(&einsum("abp,bp->a", &[ev.lt_u1(), &e.wtn])),
    })
}

/// Number of normal-frame indices in each component of an adapted tensor.
fn normal_count(slots: &[Slot], idx: &[usize], k: usize) -> i32 {
    slots.iter().zip(idx).filter(|(s, &i)| s.kind == Kind::Normal || (s.kind == Kind::Ambient && i >= k)).count() as i32
}

fn values<S: Real>(t: &JT<S>) -> Vec<S> {
    t.data().iter().map(|j| j.value()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    NilpotentParameter,
    CentralDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizationReport {
    pub name: String,
    /// Closed form, when one is known.
    pub analytic: Option<Vec<f64>>,
    pub dual: Vec<f64>,
    pub central: Option<Vec<f64>>,
    /// Largest discrepancy among the available routes.
    pub residual: f64,
    /// Largest component of the value at `t = 0`.
    pub scale: f64,
}

impl LinearizationReport {
    pub fn max_abs(&self) -> f64 {
        self.dual.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    let top = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / (1.0 + top)
}

/// `T• = ∂_t|₀ e^{−t(h − r_N)Υ(p)} T(e^{2tΥ}g)` componentwise in the adapted
/// frame, `r_N` being the number of normal-frame indices of the component.
/// This equals the frame components of `∂_t|₀ e^{−thΥ}T(e^{2tΥ}g)`.
fn correct<F: Fn(usize) -> f64>(t0: &JT<f64>, deriv: F, h: i32, ups_p: f64, k: usize) -> Vec<f64> {
    let slots = t0.slots().to_vec();
    let dims = t0.dims();
    let mut out = Vec::with_capacity(t0.data().len());
    let mut i = 0;
    crate::tensor::for_each_index(&dims, |idx| {
        let r = normal_count(&slots, idx, k);
        out.push(deriv(i) - (h - r) as f64 * ups_p * t0.data()[i].value());
        i += 1;
    });
    out
}

fn eval_at<S: Real>(scene: &Scene, ups: &ConformalFactor, q: &Quantity, t: S) -> Result<(JT<S>, usize)> {
    let sub = rescaled(scene, ups, t)?;
    let ext = ExtrinsicPack::new(&sub)?;
    Ok((q.eval(&sub, &ext)?, sub.k))
}

fn ups_at_point(scene: &Scene, ups: &ConformalFactor) -> Result<f64> {
    Ok(ups.expr.eval(&scene.patch.point()?))
}

/// Exact linearization over dual numbers, with the frame correction applied.
pub fn linearize_dual(scene: &Scene, ups: &ConformalFactor, q: &Quantity) -> Result<(JT<f64>, Vec<f64>)> {
    let (td, k) = eval_at::<Dual<f64>>(scene, ups, q, Dual::epsilon())?;
    let t0 = td.map(|j| j.map(|d| d.re));
    let eps: Vec<f64> = values(&td).iter().map(|d| d.eps).collect();
    let h = q.homogeneity(k);
    let up = ups_at_point(scene, ups)?;
    let out = correct(&t0, |i| eps[i], h, up, k);
    Ok((t0, out))
}

/// Central-difference linearization with step [`FD_STEP`].
pub fn linearize_fd(scene: &Scene, ups: &ConformalFactor, q: &Quantity) -> Result<Vec<f64>> {
    let (t0, k) = eval_at::<f64>(scene, ups, q, 0.0)?;
    let (tp, _) = eval_at::<f64>(scene, ups, q, FD_STEP)?;
    let (tm, _) = eval_at::<f64>(scene, ups, q, -FD_STEP)?;
    let (vp, vm) = (values(&tp), values(&tm));
    let h = q.homogeneity(k);
    let up = ups_at_point(scene, ups)?;
    Ok(correct(&t0, |i| (vp[i] - vm[i]) / (2.0 * FD_STEP), h, up, k))
}

/// Both routes plus the closed form where one is known.
pub fn linearize(scene: &Scene, ups: &ConformalFactor, q: &Quantity, with_fd: bool) -> Result<LinearizationReport> {
    let (t0, dual) = linearize_dual(scene, ups, q)?;
    let central = if with_fd { Some(linearize_fd(scene, ups, q)?) } else { None };
    let analytic = analytic_linearization(scene, ups, q)?.map(|t| values(&t));
    let mut residual = 0.0f64;
    if let Some(c) = &central {
        residual = residual.max(max_diff(&dual, c));
    }
    if let Some(a) = &analytic {
        residual = residual.max(max_diff(&dual, a));
    }
    Ok(LinearizationReport { name: q.name(), analytic, dual, central, residual, scale: t0.max_abs() })
}

/// `Υ` data on the unrescaled submanifold.
pub struct UpsilonData {
    /// `Υ ∘ x` as a jet in the chart variables.
    pub on_y: Jet<f64>,
    /// Adapted ambient gradient `Υ_a` (jets in the chart variables).
    pub grad: JT<f64>,
    /// Adapted ambient Hessian `Υ_{ab} = ∇_a∇_bΥ`.
    pub hess: JT<f64>,
    /// `∇̄_αΥ` and `∇̄^αΥ`.
    pub dbar: JT<f64>,
    pub dbar_up: JT<f64>,
}

impl UpsilonData {
    pub fn new(sub: &Submanifold<f64>, ups: &ConformalFactor) -> Self {
        let n = sub.n;
        let ux = ups.jets::<f64>(&sub.x0, METRIC_ORDER);
        let gx = LabeledTensor::from_fn(vec![aslot(n)], |i| ux.d(i[0]));
        let hx = sub.amb.conn.cov_deriv(&gx);
        let on_y = sub.compose(&ux);
        let dbar = sub.nabla_bar(&LabeledTensor::scalar(on_y.clone()));
        let dbar_up = sub.up(&dbar, &[0]);
        UpsilonData { on_y, grad: sub.project(&gx), hess: sub.project(&hx), dbar, dbar_up }
    }
}

/// Closed-form linearizations from the transformation rules of the ambient
/// curvature, the second fundamental form, and the modified tensors.
pub fn analytic_linearization(scene: &Scene, ups: &ConformalFactor, q: &Quantity) -> Result<Option<JT<f64>>> {
    use Quantity::*;
    let sub = Submanifold::<f64>::new(&scene.metric, &scene.patch, &FrameOptions::default())?;
    let ext = ExtrinsicPack::new(&sub)?;
    let ud = UpsilonData::new(&sub, ups);
    let (k, n) = (sub.k, sub.n);
    let nf = n as f64;
    let gu = sub.up(&ud.grad, &[0]);
    // Υ^α W_{…α}: raise only the tangential part of the gradient
    let gt_up = sub.up(&sub.block(&ud.grad, &[T]), &[0]);
    let gn = sub.block(&ud.grad, &[N]);
    let r = match q {
        Weyl | TraceFreeSff | NormalCurvature => Some(q.eval(&sub, &ext)?.scaled(0.0)),
        Schouten => Some(ud.hess.scaled(-1.0)),
        Cotton => Some(einsum("d,abcd->abc", &[&gu, &ext.w_ad]).scaled(-1.0)),
        Bach => {
            let c = einsum("c,cab->ab", &[&gu, &ext.c_ad]);
            Some(c.add(&einsum("ba->ab", &[&c])).scaled(nf - 4.0))
        }
        SecondFundamentalForm => Some(einsum("p,ab->abp", &[&gn, &sub.h]).scaled(-1.0)),
        MeanCurvature => Some(gn.scaled(-1.0)),
        ModSchouten => Some(sub.nabla_bar(&ud.dbar).scaled(-1.0)),
        ModCotton => {
            let w = sub.block(&ext.w_ad, &[Kind::Ambient, Kind::Ambient, Kind::Ambient, T]);
            Some(einsum("d,abcd->abc", &[&gt_up, &w]).scaled(-1.0))
        }
        ModCottonTrace => {
            // −Υ^γ W_{βa}{}^β{}_γ
            let w = sub.block(&ext.w_ad, &[T, Kind::Ambient, T, T]);
            let wtr = trace_tangent(&w, 0, 2, &sub.hinv);
            Some(einsum("c,ac->a", &[&gt_up, &wtr]).scaled(-1.0))
        }
        ModBach => {
            let c = sub.block(&ext.mc, &[T, T, T]);
            let s = einsum("c,cab->ab", &[&gt_up, &c]);
            Some(s.add(&einsum("ba->ab", &[&s])).scaled(nf - 4.0))
        }
        D => Some(einsum("b,bap->ap", &[&gt_up, &ext.lt]).scaled(-1.0)),
        Invariant(_) => Some(LabeledTensor::scalar(Jet::cst(0.0))),
        Step5(s) if k == 4 => Some(LabeledTensor::scalar(step5_analytic(&sub, &ext, &ud, *s)?)),
        Stratum(s) if ups.vanishing_order.is_some_and(|j| j >= s.stratum()) => {
            Some(LabeledTensor::scalar(Jet::cst(0.0)))
        }
        _ => None,
    };
    Ok(r)
}

fn step5_analytic(
    sub: &Submanifold<f64>,
    ext: &ExtrinsicPack<f64>,
    ud: &UpsilonData,
    s: Step5Term,
) -> Result<Jet<f64>> {
    use Step5Term::*;
    let ev = Evaluator::new(sub, ext, InvOptions::default());
    let div = |t: &JT<f64>| ev.div1(t);
    let du = &ud.dbar;
    let duu = &ud.dbar_up;
    Ok(match s {
        LapJbar => {
            let bi = ev.lap(&ev.lap(&ud.on_y));
            &bi.scale_f(-1.0) - &div(&du.times(&ev.jbar()?)).scale_f(2.0)
        }
        DivDivF => {
            let f = ext.f()?;
            div(&einsum("ab,b->a", &[f, duu]).scaled(2.0).sub(&du.times(&ev.g())))
        }
        DivLD => div(&einsum("ab,b->a", &[&ext.lt2, duu])).scale_f(-1.0),
        LapLtSq => div(&du.times(&ext.lt_sq)).scale_f(-2.0),
        LapG => div(&du.times(&ev.g())).scale_f(-2.0),
        DivLW | DivLWtr => Jet::cst(0.0),
    })
}

/// `Δ̄•u = ∂_t|₀ e^{−t(w−2)Υ}Δ̄^{t}(e^{twΥ}u)` for a density `u` of weight `w`
/// given as an expression in the chart variables, against
/// `(k + 2w − 2)Υ^αu_α + w(Δ̄Υ)u`.
pub fn laplacian_linearization(scene: &Scene, ups: &ConformalFactor, u: &Expr, w: f64) -> Result<(f64, f64)> {
    let base = &scene.patch.base;
    let sub = rescaled::<Dual<f64>>(scene, ups, Dual::epsilon())?;
    let t = Dual::epsilon();
    let uy: Jet<Dual<f64>> = u.eval_jets(&coordinate_jets(base, METRIC_ORDER));
    let upsy = sub.compose(&ups.jets::<Dual<f64>>(&sub.x0, METRIC_ORDER));
    let weighted = &upsy.scale(t * Dual::from_f64(w)).exp() * &uy;
    let lap = sub.laplacian(&LabeledTensor::scalar(weighted)).value().value();
    let up = upsy.value().re;
    let numeric = lap.eps - (w - 2.0) * up * lap.re;

    let sub0 = Submanifold::<f64>::new(&scene.metric, &scene.patch, &FrameOptions::default())?;
    let ud = UpsilonData::new(&sub0, ups);
    let u0: Jet<f64> = u.eval_jets(&coordinate_jets(base, METRIC_ORDER));
    let du = sub0.nabla_bar(&LabeledTensor::scalar(u0.clone()));
    let k = sub0.k as f64;
    let grad_term = einsum("a,a->", &[&ud.dbar_up, &du]).value().value();
    let lap_u = sub0.laplacian(&LabeledTensor::scalar(ud.on_y.clone())).value().value();
    let analytic = (k + 2.0 * w - 2.0) * grad_term + w * lap_u * u0.value();
    Ok((numeric, analytic))
}

/// `(∇̄^α)•τ_α` for a tangential 1-form density of weight `w` (components
/// given as expressions in the chart variables), against `(k+w−2)Υ^ατ_α`.
pub fn divergence_linearization(scene: &Scene, ups: &ConformalFactor, tau: &[Expr], w: f64) -> Result<(f64, f64)> {
    let base = &scene.patch.base;
    let sub = rescaled::<Dual<f64>>(scene, ups, Dual::epsilon())?;
    let k = sub.k;
    if tau.len() != k {
        return Err(GeoError::Usage(format!("1-form needs {k} components")));
    }
    let t = Dual::epsilon();
    let cj = coordinate_jets::<Dual<f64>>(base, METRIC_ORDER);
    let upsy = sub.compose(&ups.jets::<Dual<f64>>(&sub.x0, METRIC_ORDER));
    let fac = upsy.scale(t * Dual::from_f64(w)).exp();
    let tj = LabeledTensor::from_fn(vec![crate::submanifold::tslot(k)], |i| &fac * &tau[i[0]].eval_jets(&cj));
    let d = sub.div(&tj, 0).value().value();
    let numeric = d.eps - (w - 2.0) * upsy.value().re * d.re;

    let sub0 = Submanifold::<f64>::new(&scene.metric, &scene.patch, &FrameOptions::default())?;
    let ud = UpsilonData::new(&sub0, ups);
    let c0 = coordinate_jets::<f64>(base, METRIC_ORDER);
    let t0 = LabeledTensor::from_fn(vec![crate::submanifold::tslot(k)], |i| tau[i[0]].eval_jets(&c0));
    let analytic = (k as f64 + w - 2.0) * einsum("a,a->", &[&ud.dbar_up, &t0]).value().value();
    Ok((numeric, analytic))
}

/// Finite-`t` invariance residual `max |e^{−t(h−r_N)Υ}T̂ − T| / (1 + max|T|)`.
pub fn invariance_residual(scene: &Scene, ups: &ConformalFactor, q: &Quantity, t: f64) -> Result<f64> {
    let (t0, k) = eval_at::<f64>(scene, ups, q, 0.0)?;
    let (tt, _) = eval_at::<f64>(scene, ups, q, t)?;
    let up = ups_at_point(scene, ups)?;
    let h = q.homogeneity(k);
    let slots = t0.slots().to_vec();
    let mut worst = 0.0f64;
    let mut i = 0;
    let (d0, dt) = (values(&t0), values(&tt));
    crate::tensor::for_each_index(&t0.dims(), |idx| {
        let r = normal_count(&slots, idx, k);
        let back = (-t * (h - r) as f64 * up).exp() * dt[i];
        worst = worst.max((back - d0[i]).abs());
        i += 1;
    });
    Ok(worst / (1.0 + t0.max_abs()))
}

/// `|Q(c²g) − c^w Q(g)| / (1 + |Q(g)|)` for a scalar of homogeneity `w`.
pub fn homogeneity_residual(scene: &Scene, q: &Quantity, c: f64) -> Result<f64> {
    let ups = ConformalFactor::constant(c.ln());
    let (t0, k) = eval_at::<f64>(scene, &ups, q, 0.0)?;
    let (t1, _) = eval_at::<f64>(scene, &ups, q, 1.0)?;
    if t0.rank() != 0 {
        return Err(GeoError::Usage("homogeneity is checked on scalars".into()));
    }
    let (a, b) = (t0.value().value(), t1.value().value());
    let w = q.homogeneity(k);
    Ok((b - c.powi(w) * a).abs() / (1.0 + a.abs()))
}

static PANEITZ_SIGN: OnceLock<std::result::Result<f64, String>> = OnceLock::new();

/// Sign `σ` of the lower-order term of the intrinsic four-dimensional Paneitz
/// operator `Δ̄² + σ∇̄^α((4P̄_{αβ} − 2J̄h_{αβ})∇̄^β)`, fixed once by requiring
/// `∂_t|₀(e^{4tΥ}Q̄₄(e^{2tΥ}h)) = P̄₄Υ` on a random four-dimensional metric.
pub fn paneitz_sign() -> Result<f64> {
    PANEITZ_SIGN.get_or_init(|| calibrate_paneitz().map_err(|e| e.to_string())).clone().map_err(GeoError::Numeric)
}

fn calibrate_paneitz() -> Result<f64> {
    let scene = crate::scene::random_graph(4, 5, 20240);
    let ups = ConformalFactor::random(5, 4, 77);
    let q = intrinsic_q_linearization(&scene, &ups)?;
    let sub = Submanifold::<f64>::new(&scene.metric, &scene.patch, &FrameOptions::default())?;
    let ext = ExtrinsicPack::new(&sub)?;
    let ev = Evaluator::new(&sub, &ext, InvOptions::default());
    let ud = UpsilonData::new(&sub, &ups);
    let plus = ev.intrinsic_paneitz_apply(&ud.on_y, 1.0)?;
    let minus = ev.intrinsic_paneitz_apply(&ud.on_y, -1.0)?;
    let tol = 1e-8 * (1.0 + q.abs());
    match ((plus - q).abs() < tol, (minus - q).abs() < tol) {
        (true, false) => Ok(1.0),
        (false, true) => Ok(-1.0),
        _ => Err(GeoError::Numeric(format!(
            "intrinsic Paneitz calibration failed: law {q:e}, σ=+1 {plus:e}, σ=−1 {minus:e}"
        ))),
    }
}

/// `∂_t|₀ e^{4tΥ(p)} Q̄₄(e^{2tΥ}h)` (requires `k = 4`).
pub fn intrinsic_q_linearization(scene: &Scene, ups: &ConformalFactor) -> Result<f64> {
    let sub = rescaled::<Dual<f64>>(scene, ups, Dual::epsilon())?;
    if sub.k != 4 {
        return Err(GeoError::Usage("intrinsic Q̄₄ transformation law needs k = 4".into()));
    }
    let ext = ExtrinsicPack::new(&sub)?;
    let q = Evaluator::new(&sub, &ext, InvOptions::default()).qbar4()?.value();
    let up = ups_at_point(scene, ups)?;
    Ok(q.eps + 4.0 * up * q.re)
}

/// Critical `Q` and `P_kΥ` on the unrescaled metric.
pub fn q_and_paneitz(scene: &Scene, ups: &ConformalFactor) -> Result<(f64, f64)> {
    let sub = Submanifold::<f64>::new(&scene.metric, &scene.patch, &FrameOptions::default())?;
    let ext = ExtrinsicPack::new(&sub)?;
    let ev = Evaluator::new(&sub, &ext, InvOptions::default());
    let ud = UpsilonData::new(&sub, ups);
    let sigma = paneitz_sign()?;
    Ok((ev.evaluate(InvariantId::Q)?, ev.paneitz_apply(&ud.on_y, sigma)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QLawReport {
    pub t: f64,
    /// `e^{ktΥ}Q̂ − Q − tP_kΥ`, relative to `1 + |Q| + |tP_kΥ|`.
    pub residual: f64,
}

/// Residuals of `e^{kΥ}Q^{ĥ} = Q^h + P_kΥ` for `Υ ↦ tΥ`, plus the
/// linearized law (`t = 0`, dual route).
pub fn q_transformation(scene: &Scene, ups: &ConformalFactor, ts: &[f64]) -> Result<Vec<QLawReport>> {
    let (q0, pu) = q_and_paneitz(scene, ups)?;
    let k = scene.patch.k() as f64;
    let up = ups_at_point(scene, ups)?;
    let mut out = Vec::new();
    for &t in ts {
        let sub = rescaled::<f64>(scene, ups, t)?;
        let ext = ExtrinsicPack::new(&sub)?;
        let qt = Evaluator::new(&sub, &ext, InvOptions::default()).evaluate(InvariantId::Q)?;
        let lhs = (k * t * up).exp() * qt;
        let residual = (lhs - q0 - t * pu).abs() / (1.0 + q0.abs() + (t * pu).abs());
        out.push(QLawReport { t, residual });
    }
    let (_, lin) = linearize_dual(scene, ups, &Quantity::Invariant(InvariantId::Q))?;
    // the dual route returns ∂_t(e^{ktΥ}Q̂) with the weight −k correction
    out.push(QLawReport { t: 0.0, residual: (lin[0] - pu).abs() / (1.0 + q0.abs() + pu.abs()) });
    Ok(out)
}

/// Flattened tensors, one row per tensor, concatenated over samples.
fn gram_det(rows: &[Vec<f64>]) -> f64 {
    let m = rows.len();
    let unit: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let nrm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm > 0.0 {
                r.iter().map(|x| x / nrm).collect()
            } else {
                r.clone()
            }
        })
        .collect();
    let g = nalgebra::DMatrix::from_fn(m, m, |i, j| unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum());
    g.determinant()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceWitness {
    pub n: usize,
    pub tensor_names: Vec<String>,
    pub tensor_gram: f64,
    pub divergence_names: Vec<String>,
    pub divergence_gram: f64,
}

/// Gram determinants of `{𝖥, L̊², |L̊|²h, 𝖦h}` (without `𝖦h` when `n = 5`) and
/// of the divergences `∇̄^α(L̊^{βγα'}W_{αβγα'})`, `∇̄^α(L̊_α{}^{βα'}W_{βγα'}{}^γ)`
/// (only the first when `n = 5`), sampled over diagonal-exponential metrics
/// with parameters `samples` and, for the tensors, the cylinder `ℝ × S³`.
pub fn linear_independence_witness(n: usize, samples: &[[f64; 4]]) -> Result<IndependenceWitness> {
    if n < 5 {
        return Err(GeoError::Usage("the independence witness needs n ≥ 5".into()));
    }
    let full = n >= 6;
    let mut scenes: Vec<Scene> = samples.iter().map(|p| crate::scene::appendix(n, p[0], p[1], p[2], p[3])).collect();
    let n_app = scenes.len();
    scenes.push(crate::scene::cylinder(n));
    let nt = if full { 4 } else { 3 };
    let nd = if full { 2 } else { 1 };
    let mut trows = vec![Vec::new(); nt];
    let mut drows = vec![Vec::new(); nd];
    for (i, s) in scenes.iter().enumerate() {
        let sub = Submanifold::<f64>::new(&s.metric, &s.patch, &FrameOptions::default())?;
        let ext = ExtrinsicPack::new(&sub)?;
        let ev = Evaluator::new(&sub, &ext, InvOptions::default());
        let g = ev.g();
        let ts = [ext.f()?.clone(), ext.lt2.clone(), sub.h.times(&ext.lt_sq), sub.h.times(&g)];
        for (row, t) in trows.iter_mut().zip(&ts) {
            row.extend(values(t));
        }
        if i < n_app {
            let w1 = ev.div1(&einsum("bcp,abcp->a", &[ev.ltu(), &ev.w(&[T, T, T, N])]));
            let w2 = ev.div1(&einsum("abp,bp->a", &[ev.lt_u1(), &ext.wtn]));
            for (row, v) in drows.iter_mut().zip([w1, w2]) {
                row.push(v.value());
            }
        }
    }
    let tn = ["F", "Lt2", "|Lt|^2 h", "G h"];
    let dn = ["div(Lt W_TTTN)", "div(Lt W_TTN tr)"];
    Ok(IndependenceWitness {
        n,
        tensor_names: tn[..nt].iter().map(|s| s.to_string()).collect(),
        tensor_gram: gram_det(&trows),
        divergence_names: dn[..nd].iter().map(|s| s.to_string()).collect(),
        divergence_gram: gram_det(&drows),
    })
}

/// Registered invariants that are pointwise conformally invariant (the
/// Q-curvature family and the intrinsic Pfaffian transform with a linear
/// operator in `Υ` instead).
pub fn is_pointwise_invariant(id: InvariantId) -> bool {
    use InvariantId::*;
    !matches!(id, Qbar4 | Qdagger | Q4 | Q4Cgk | Pfbar | Q)
}
