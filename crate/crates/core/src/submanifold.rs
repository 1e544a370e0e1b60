//! Tangent/normal splitting, fundamental forms and intrinsic geometry of an
//! immersed patch, all as jets in the chart variables `y`.
//!
//! Tangent slots use the coordinate frame `e_α = ∂x/∂y^α`; normal slots use a
//! `g`-orthonormal frame. Tensors are stored with all indices down. "Adapted"
//! tensors carry `n`-dimensional slots whose first `k` entries are tangent and
//! whose remaining entries are normal.

use crate::ambient::{invert_sym, Connection, CurvaturePack, JT};
use crate::config;
use crate::error::{GeoError, Result};
use crate::immersion::ImmersedPatch;
use crate::jet::{Composer, Jet};
use crate::metric::MetricField;
use crate::scalar::Real;
use crate::tensor::{for_each_index, Kind, LabeledTensor, Slot};

/// Jet order of the immersion map; the ambient metric is taken one lower.
pub const IMMERSION_ORDER: usize = 5;
pub const METRIC_ORDER: usize = IMMERSION_ORDER - 1;

#[derive(Clone, Debug, Default)]
pub struct FrameOptions {
    /// Rotate the seed basis `∂_a` used for the normal Gram–Schmidt.
    pub seed_rotation: Option<Vec<Vec<f64>>>,
}

pub fn tslot(k: usize) -> Slot {
    Slot::down(Kind::Tangent, k)
}

pub fn nslot(m: usize) -> Slot {
    Slot::down(Kind::Normal, m)
}

pub fn aslot(n: usize) -> Slot {
    Slot::down(Kind::Ambient, n)
}

#[derive(Clone, Debug)]
pub struct Submanifold<S: Real> {
    pub k: usize,
    pub n: usize,
    /// Ambient base point `x(y0)`.
    pub x0: Vec<f64>,
    /// Ambient curvature at `x0` (jets in `x`).
    pub amb: CurvaturePack<S>,
    comp: Composer<S>,
    /// `x^a(y)`.
    pub x: Vec<Jet<S>>,
    /// `g_ab(x(y))`.
    pub g: JT<S>,
    /// `Γ^c_{ab}(x(y))`.
    pub gamma: JT<S>,
    /// Adapted frame: `frame[A][a]`, tangent vectors first.
    pub frame: Vec<Vec<Jet<S>>>,
    pub h: JT<S>,
    pub hinv: JT<S>,
    /// Induced Levi-Civita connection.
    pub iconn: Connection<S>,
    /// Intrinsic curvature (`k ≥ 2`).
    pub intr: Option<CurvaturePack<S>>,
    /// `L_{αβα'}`.
    pub l: JT<S>,
    /// Normal connection `ω_{γα'β'} = g(∇_{e_γ} n_{α'}, n_{β'})`.
    pub omega: JT<S>,
    /// Seed vectors chosen for the normal frame, in order.
    pub normal_seeds: Vec<usize>,
}

fn dot<S: Real>(g: &JT<S>, u: &[Jet<S>], v: &[Jet<S>]) -> Jet<S> {
    let n = u.len();
    let mut s = Jet::cst(0.0);
    for a in 0..n {
        let mut ga = Jet::cst(0.0);
        for b in 0..n {
            ga.add_mul(g.get(&[a, b]), &v[b]);
        }
        s.add_mul(&u[a], &ga);
    }
    s
}

impl<S: Real> Submanifold<S> {
    /// Build from a metric field.
    pub fn new(metric: &MetricField, patch: &ImmersedPatch, opts: &FrameOptions) -> Result<Self> {
        let x0 = patch.point()?;
        let gx = metric.jets::<S>(&x0, METRIC_ORDER)?;
        Self::from_metric_jets(&gx, patch, opts)
    }

    /// Build from metric jets at `x(base)`.
    pub fn from_metric_jets(gx: &JT<S>, patch: &ImmersedPatch, opts: &FrameOptions) -> Result<Self> {
        config::check_order(IMMERSION_ORDER)?;
        let (k, n) = (patch.k(), patch.n());
        if n < 3 {
            return Err(GeoError::Usage("ambient dimension must be ≥ 3".into()));
        }
        if gx.dims() != vec![n, n] {
            return Err(GeoError::Usage("metric and immersion dimensions differ".into()));
        }
        let x = patch.jets::<S>(IMMERSION_ORDER)?;
        let x0: Vec<f64> = x.iter().map(|j| j.value().re()).collect();
        let amb = CurvaturePack::from_metric_jets(gx)?;
        let disp: Vec<Jet<S>> = x.iter().map(|j| j.add_scalar(-j.value())).collect();
        let comp = Composer::new(&disp, METRIC_ORDER);
        let g = gx.map(|j| comp.compose(j));
        let gamma = amb.conn.christoffel.map(|j| comp.compose(j));

        let e: Vec<Vec<Jet<S>>> = (0..k).map(|al| x.iter().map(|xa| xa.d(al)).collect()).collect();
        let h = LabeledTensor::from_fn(vec![tslot(k); 2], |i| dot(&g, &e[i[0]], &e[i[1]]));
        let hv = h.map(|j| j.value().re());
        let hdet = nalgebra::DMatrix::from_fn(k, k, |a, b| *hv.get(&[a, b]));
        if hdet.clone().cholesky().is_none() || hdet.determinant().abs() < 1e-12 * hv.max_abs().powi(k as i32) {
            return Err(GeoError::Geometry(format!("immersion differential is rank-deficient at {:?}", patch.base)));
        }
        let hinv = invert_sym(&h)?;

        // Π^N applied to the seed vectors.
        let seeds: Vec<Vec<f64>> = match &opts.seed_rotation {
            Some(r) => {
                if r.len() != n || r.iter().any(|row| row.len() != n) {
                    return Err(GeoError::Usage("seed rotation must be n×n".into()));
                }
                r.clone()
            }
            None => (0..n).map(|a| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect()).collect(),
        };
        let project_normal = |v: &[Jet<S>]| -> Vec<Jet<S>> {
            let ge: Vec<Jet<S>> = e.iter().map(|ea| dot(&g, ea, v)).collect();
            let mut out = v.to_vec();
            for al in 0..k {
                let mut coef = Jet::cst(0.0);
                for be in 0..k {
                    coef.add_mul(hinv.get(&[al, be]), &ge[be]);
                }
                for c in 0..n {
                    let t = &coef * &e[al][c];
                    out[c] -= &t;
                }
            }
            out
        };
        let projected: Vec<Vec<Jet<S>>> =
            seeds.iter().map(|s| project_normal(&s.iter().map(|&c| Jet::cst(c)).collect::<Vec<_>>())).collect();
        let norms: Vec<f64> = projected.iter().map(|v| dot(&g, v, v).value().re().max(0.0).sqrt()).collect();
        let top = norms.iter().cloned().fold(0.0, f64::max);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (na, nb) = (norms[a], norms[b]);
            if (na - nb).abs() <= 1e-12 * top {
                a.cmp(&b)
            } else {
                nb.partial_cmp(&na).unwrap()
            }
        });
        let mut normals: Vec<Vec<Jet<S>>> = Vec::new();
        let mut normal_seeds = Vec::new();
        for &a in &order {
            if normals.len() == n - k {
                break;
            }
            let mut v = projected[a].clone();
            for u in &normals {
                let c = dot(&g, &v, u);
                for (vc, uc) in v.iter_mut().zip(u) {
                    let t = &c * uc;
                    *vc -= &t;
                }
            }
            let nn = dot(&g, &v, &v);
            if nn.value().re().sqrt() <= 1e-6 * top.max(1e-300) {
                continue;
            }
            let inv = nn.sqrt().recip();
            normals.push(v.iter().map(|c| c * &inv).collect());
            normal_seeds.push(a);
        }
        if normals.len() != n - k {
            return Err(GeoError::Geometry("could not complete the normal frame".into()));
        }

        let mut frame = e.clone();
        frame.extend(normals.iter().cloned());

        // ∇_{e_α} V for a vector field V(y) along the patch.
        let cov = |al: usize, v: &[Jet<S>]| -> Vec<Jet<S>> {
            (0..n)
                .map(|c| {
                    let mut s = v[c].d(al);
                    for a in 0..n {
                        for b in 0..n {
                            let t = &e[al][a] * &v[b];
                            s.add_mul(gamma.get(&[c, a, b]), &t);
                        }
                    }
                    s
                })
                .collect()
        };
        let m = n - k;
        let mut l = LabeledTensor::zeros(vec![tslot(k), tslot(k), nslot(m)]);
        for al in 0..k {
            for be in al..k {
                let acc = cov(al, &e[be]);
                for ap in 0..m {
                    let v = dot(&g, &acc, &normals[ap]);
                    l.set(&[al, be, ap], v.clone());
                    l.set(&[be, al, ap], v);
                }
            }
        }
        let mut omega = LabeledTensor::zeros(vec![tslot(k), nslot(m), nslot(m)]);
        for ga in 0..k {
            for ap in 0..m {
                let acc = cov(ga, &normals[ap]);
                for bp in 0..m {
                    omega.set(&[ga, ap, bp], dot(&g, &acc, &normals[bp]));
                }
            }
        }

        let iconn = Connection::new(&h)?;
        let intr = if k >= 2 { Some(CurvaturePack::from_metric_jets(&h)?) } else { None };
        Ok(Submanifold { k, n, x0, amb, comp, x, g, gamma, frame, h, hinv, iconn, intr, l, omega, normal_seeds })
    }

    pub fn m(&self) -> usize {
        self.n - self.k
    }

    pub fn intr(&self) -> Result<&CurvaturePack<S>> {
        self.intr.as_ref().ok_or_else(|| GeoError::Usage("intrinsic curvature needs k ≥ 2".into()))
    }

    /// Compose an ambient scalar jet (in `x`) into the chart variables.
    pub fn compose(&self, f: &Jet<S>) -> Jet<S> {
        self.comp.compose(f)
    }

    /// Components of an all-lower ambient tensor (jets in `x`) in the adapted
    /// frame, as jets in `y`.
    pub fn project(&self, t: &JT<S>) -> JT<S> {
        let n = self.n;
        let mut out = t.map(|j| self.comp.compose(j));
        let emat = LabeledTensor::from_fn(vec![aslot(n); 2], |i| self.frame[i[0]][i[1]].clone());
        for s in 0..t.rank() {
            out = out.apply_matrix(s, &emat, aslot(n));
        }
        out
    }

    /// Extract a tangent/normal block of an adapted tensor.
    pub fn block(&self, t: &JT<S>, kinds: &[Kind]) -> JT<S> {
        assert_eq!(kinds.len(), t.rank());
        let (k, m) = (self.k, self.m());
        let slots: Vec<Slot> = kinds
            .iter()
            .map(|kd| match kd {
                Kind::Tangent => tslot(k),
                Kind::Normal => nslot(m),
                Kind::Ambient => aslot(self.n),
            })
            .collect();
        let mut src = vec![0usize; kinds.len()];
        LabeledTensor::from_fn(slots, |idx| {
            for (s, kd) in kinds.iter().enumerate() {
                src[s] = if *kd == Kind::Normal { idx[s] + k } else { idx[s] };
            }
            t.get(&src).clone()
        })
    }

    /// Inverse of the adapted block metric `diag(h, I)`.
    pub fn adapted_inverse(&self) -> JT<S> {
        let k = self.k;
        LabeledTensor::from_fn(vec![aslot(self.n); 2], |i| {
            if i[0] < k && i[1] < k {
                self.hinv.get(&[i[0], i[1]]).clone()
            } else if i[0] == i[1] {
                Jet::cst(1.0)
            } else {
                Jet::cst(0.0)
            }
        })
    }

    /// Adapted block metric `diag(h, I)`.
    pub fn adapted_metric(&self) -> JT<S> {
        let k = self.k;
        LabeledTensor::from_fn(vec![aslot(self.n); 2], |i| {
            if i[0] < k && i[1] < k {
                self.h.get(&[i[0], i[1]]).clone()
            } else if i[0] == i[1] {
                Jet::cst(1.0)
            } else {
                Jet::cst(0.0)
            }
        })
    }

    /// Raise the given slots: tangent and adapted slots with the inverse
    /// metric, normal slots are unchanged (orthonormal frame).
    pub fn up(&self, t: &JT<S>, slots: &[usize]) -> JT<S> {
        let ainv = self.adapted_inverse();
        let mut out = t.clone();
        for &s in slots {
            let sl = out.slots()[s];
            let up = Slot::up(sl.kind, sl.dim);
            out = match sl.kind {
                Kind::Tangent => out.apply_matrix(s, &self.hinv, up),
                Kind::Ambient => out.apply_matrix(s, &ainv, up),
                Kind::Normal => {
                    let mut sl2 = out.slots().to_vec();
                    sl2[s] = up;
                    out.relabel(sl2)
                }
            };
        }
        out
    }

    /// Full contraction `⟨a, b⟩` of two tensors with identical lower slots.
    pub fn inner(&self, a: &JT<S>, b: &JT<S>) -> Jet<S> {
        assert_eq!(a.dims(), b.dims());
        let all: Vec<usize> = (0..a.rank()).collect();
        let au = self.up(a, &all);
        let mut s = Jet::cst(0.0);
        for (x, y) in au.data().iter().zip(b.data()) {
            s.add_mul(x, y);
        }
        s
    }

    /// Tangential covariant derivative (frame route): the new tangent index
    /// comes first.
    pub fn nabla_bar(&self, t: &JT<S>) -> JT<S> {
        let k = self.k;
        let r = t.rank();
        let mut slots = vec![tslot(k)];
        slots.extend_from_slice(t.slots());
        let gam = &self.iconn.christoffel;
        let mut src = vec![0usize; r];
        LabeledTensor::from_fn(slots, |idx| {
            let ga = idx[0];
            let rest = &idx[1..];
            let mut v = t.get(rest).d(ga);
            for s in 0..r {
                src.copy_from_slice(rest);
                let sl = t.slots()[s];
                for b in 0..sl.dim {
                    src[s] = b;
                    let coef = match sl.kind {
                        Kind::Tangent => gam.get(&[b, ga, rest[s]]),
                        Kind::Normal => self.omega.get(&[ga, rest[s], b]),
                        Kind::Ambient => panic!("nabla_bar on an ambient slot"),
                    };
                    let p = coef * t.get(&src);
                    v -= &p;
                }
            }
            v
        })
    }

    /// Tangential divergence on slot `s` (a tangent slot) of `∇̄T`: `∇̄^β T_{..β..}`.
    pub fn div(&self, t: &JT<S>, s: usize) -> JT<S> {
        let dt = self.nabla_bar(t);
        trace_tangent(&dt, 0, s + 1, &self.hinv)
    }

    /// `Δ̄T = ∇̄^γ∇̄_γ T`.
    pub fn laplacian(&self, t: &JT<S>) -> JT<S> {
        let ddt = self.nabla_bar(&self.nabla_bar(t));
        trace_tangent(&ddt, 0, 1, &self.hinv)
    }

    /// `L_γ{}^δ{}_{α'} = L_{γβα'} h^{βδ}` as `[γ, α', δ]`.
    fn l_mixed(&self) -> JT<S> {
        let (k, m) = (self.k, self.m());
        LabeledTensor::from_fn(vec![tslot(k), nslot(m), Slot::up(Kind::Tangent, k)], |i| {
            let mut s = Jet::cst(0.0);
            for b in 0..k {
                s.add_mul(self.l.get(&[i[0], b, i[1]]), self.hinv.get(&[b, i[2]]));
            }
            s
        })
    }

    /// `∇̄` of a tangent/normal block of an ambient tensor, by projecting the
    /// ambient covariant derivative `dt` (derivative index first, jets in `x`)
    /// and adding second-fundamental-form terms.
    pub fn nabla_bar_projected(&self, t: &JT<S>, dt: &JT<S>, kinds: &[Kind]) -> JT<S> {
        let k = self.k;
        let ta = self.project(t);
        let dta = self.project(dt);
        let mut dkinds = vec![Kind::Tangent];
        dkinds.extend_from_slice(kinds);
        let base = self.block(&dta, &dkinds);
        let lm = self.l_mixed();
        let r = kinds.len();
        let mut src = vec![0usize; r];
        LabeledTensor::from_fn(base.slots().to_vec(), |idx| {
            let ga = idx[0];
            let rest = &idx[1..];
            let mut v = base.get(idx).clone();
            for s in 0..r {
                for (c, kd) in kinds.iter().enumerate() {
                    src[c] = if *kd == Kind::Normal { rest[c] + k } else { rest[c] };
                }
                match kinds[s] {
                    Kind::Tangent => {
                        for bp in 0..self.m() {
                            src[s] = k + bp;
                            v.add_mul(self.l.get(&[ga, rest[s], bp]), ta.get(&src));
                        }
                    }
                    Kind::Normal => {
                        for de in 0..k {
                            src[s] = de;
                            let p = lm.get(&[ga, rest[s], de]) * ta.get(&src);
                            v -= &p;
                        }
                    }
                    Kind::Ambient => panic!("blocks must be tangent or normal"),
                }
            }
            v
        })
    }

    /// Curvature of the normal connection, `R̄_{αβα'β'}`.
    pub fn normal_curvature(&self) -> JT<S> {
        let (k, m) = (self.k, self.m());
        let w = &self.omega;
        LabeledTensor::from_fn(vec![tslot(k), tslot(k), nslot(m), nslot(m)], |i| {
            let (a, b, ap, bp) = (i[0], i[1], i[2], i[3]);
            let mut v = w.get(&[a, ap, bp]).d(b) - w.get(&[b, ap, bp]).d(a);
            for cp in 0..m {
                v.add_mul(w.get(&[a, ap, cp]), w.get(&[b, cp, bp]));
                let t = w.get(&[b, ap, cp]) * w.get(&[a, cp, bp]);
                v -= &t;
            }
            v
        })
    }

    /// `Π^T{}^a{}_b` and `Π^N{}^a{}_b` at the base point.
    pub fn projectors(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let (k, n) = (self.k, self.n);
        let gv = |a: usize, b: usize| self.g.get(&[a, b]).value().re();
        let hi = |a: usize, b: usize| self.hinv.get(&[a, b]).value().re();
        let e = |a: usize, c: usize| self.frame[a][c].value().re();
        let mut pt = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                for a in 0..k {
                    for b in 0..k {
                        for c in 0..n {
                            pt[i][j] += e(a, i) * hi(a, b) * e(b, c) * gv(c, j);
                        }
                    }
                }
            }
        }
        let pn = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - pt[i][j]).collect()).collect();
        (pt, pn)
    }
}

/// Trace two tangent slots with `h^{-1}`.
pub fn trace_tangent<S: Real>(t: &JT<S>, a: usize, b: usize, hinv: &JT<S>) -> JT<S> {
    let r = t.rank();
    let free: Vec<usize> = (0..r).filter(|&i| i != a && i != b).collect();
    let slots: Vec<Slot> = free.iter().map(|&i| t.slots()[i]).collect();
    let k = t.slots()[a].dim;
    let mut src = vec![0usize; r];
    LabeledTensor::from_fn(slots, |idx| {
        for (c, &f) in free.iter().enumerate() {
            src[f] = idx[c];
        }
        let mut s = Jet::cst(0.0);
        for x in 0..k {
            for y in 0..k {
                src[a] = x;
                src[b] = y;
                s.add_mul(hinv.get(&[x, y]), t.get(&src));
            }
        }
        s
    })
}

/// Trace two normal slots (orthonormal frame).
pub fn trace_normal<S: Real>(t: &JT<S>, a: usize, b: usize) -> JT<S> {
    let r = t.rank();
    let free: Vec<usize> = (0..r).filter(|&i| i != a && i != b).collect();
    let slots: Vec<Slot> = free.iter().map(|&i| t.slots()[i]).collect();
    let m = t.slots()[a].dim;
    let mut src = vec![0usize; r];
    LabeledTensor::from_fn(slots, |idx| {
        for (c, &f) in free.iter().enumerate() {
            src[f] = idx[c];
        }
        let mut s = Jet::cst(0.0);
        for x in 0..m {
            src[a] = x;
            src[b] = x;
            s += t.get(&src);
        }
        s
    })
}

/// Residual of `lhs − rhs`, relative to `1 + max |component|` of both sides.
pub fn rel_residual<S: Real>(lhs: &JT<S>, rhs: &JT<S>) -> f64 {
    let lv = lhs.map(|j| j.value().re());
    let rv = rhs.map(|j| j.value().re());
    let diff = lv.sub(&rv).max_abs();
    diff / (1.0 + lv.max_abs().max(rv.max_abs()))
}

/// Value of a rank-0 jet tensor.
pub fn scalar_value<S: Real>(t: &JT<S>) -> S {
    t.value().value()
}

/// Iterate over every index tuple of a tensor.
pub fn indices(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_index(dims, |i| out.push(i.to_vec()));
    out
}
