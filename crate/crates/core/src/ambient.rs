//! Ambient curvature from metric jets.
//!
//! Conventions: `R_{abcd}` is positive on round spheres
//! (`R_{abcd} = g_{ac}g_{bd} − g_{ad}g_{bc}`), `R_{ab} = R_{acb}{}^c`,
//! `𝖩 = R/(2(n−1))`, `𝖯 = (Ric − 𝖩g)/(n−2)`, `C_{abc} = ∇_a𝖯_{bc} − ∇_b𝖯_{ac}`,
//! `B_{ab} = ∇^cC_{cab} + W_{acbd}𝖯^{cd}`. Covariant derivatives put the new
//! index first.

use crate::error::{GeoError, Result};
use crate::jet::Jet;
use crate::metric::{sym_slots, MetricField};
use crate::scalar::Real;
use crate::tensor::{for_each_index, Kind, LabeledTensor, Slot};

pub type JT<S> = LabeledTensor<Jet<S>>;

fn down(kind: Kind, n: usize, r: usize) -> Vec<Slot> {
    vec![Slot::down(kind, n); r]
}

/// Inverse of a symmetric positive definite jet matrix (Gauss–Jordan).
pub fn invert_sym<S: Real>(m: &JT<S>) -> Result<JT<S>> {
    let n = m.dims()[0];
    let mut a: Vec<Vec<Jet<S>>> = (0..n).map(|i| (0..n).map(|j| m.get(&[i, j]).clone()).collect()).collect();
    let mut inv: Vec<Vec<Jet<S>>> =
        (0..n).map(|i| (0..n).map(|j| Jet::cst(if i == j { 1.0 } else { 0.0 })).collect()).collect();
    let scale = (0..n).map(|i| a[i][i].value().re().abs()).fold(0.0, f64::max);
    for col in 0..n {
        let piv = a[col][col].value().re();
        if piv.abs() <= 1e-14 * scale.max(1e-300) || !piv.is_finite() {
            return Err(GeoError::Numeric("singular metric".into()));
        }
        let r = a[col][col].recip();
        for j in 0..n {
            a[col][j] = &a[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[i][j] -= &t;
                let t = &f * &inv[col][j];
                inv[i][j] -= &t;
            }
        }
    }
    let slots: Vec<Slot> = m.slots().iter().map(|s| Slot::up(s.kind, s.dim)).collect();
    Ok(LabeledTensor::from_fn(slots, |i| inv[i[0]][i[1]].clone()))
}

/// Metric, inverse and Christoffel symbols.
#[derive(Clone, Debug)]
pub struct Connection<S: Real> {
    pub n: usize,
    pub kind: Kind,
    pub g: JT<S>,
    pub ginv: JT<S>,
    /// `Γ^c_{ab}` stored as `[c, a, b]`.
    pub christoffel: JT<S>,
    /// `Γ_{c,ab} = g_{cd}Γ^d_{ab}`.
    pub christoffel_low: JT<S>,
    /// `∂_c g_{ab}` stored as `[c, a, b]`.
    pub dg: JT<S>,
}

impl<S: Real> Connection<S> {
    pub fn new(g: &JT<S>) -> Result<Self> {
        let n = g.dims()[0];
        let kind = g.slots()[0].kind;
        if g.get(&[0, 0]).order().unwrap_or(usize::MAX) < 1 {
            return Err(GeoError::Config("metric jets need order ≥ 1 for a connection".into()));
        }
        let ginv = invert_sym(g)?;
        let dg = LabeledTensor::from_fn(down(kind, n, 3), |i| g.get(&[i[1], i[2]]).d(i[0]));
        let low = LabeledTensor::from_fn(down(kind, n, 3), |i| {
            let (c, a, b) = (i[0], i[1], i[2]);
            let mut s = dg.get(&[a, b, c]).clone();
            s += dg.get(&[b, a, c]);
            s -= dg.get(&[c, a, b]);
            s.scale_f(0.5)
        });
        let mut slots = down(kind, n, 3);
        slots[0] = Slot::up(kind, n);
        let christoffel = LabeledTensor::from_fn(slots, |i| {
            let mut s = Jet::cst(0.0);
            for d in 0..n {
                s.add_mul(ginv.get(&[i[0], d]), low.get(&[d, i[1], i[2]]));
            }
            s
        });
        Ok(Connection { n, kind, g: g.clone(), ginv, christoffel, christoffel_low: low, dg })
    }

    /// `∇T` of an all-lower tensor; the derivative index comes first.
    pub fn cov_deriv(&self, t: &JT<S>) -> JT<S> {
        let n = self.n;
        let r = t.rank();
        let mut slots = vec![Slot::down(self.kind, n)];
        slots.extend_from_slice(t.slots());
        let mut src = vec![0usize; r];
        LabeledTensor::from_fn(slots, |idx| {
            let e = idx[0];
            let rest = &idx[1..];
            let mut v = t.get(rest).d(e);
            for s in 0..r {
                src.copy_from_slice(rest);
                for f in 0..n {
                    src[s] = f;
                    let prod = self.christoffel.get(&[f, e, rest[s]]) * t.get(&src);
                    v -= &prod;
                }
            }
            v
        })
    }

    /// Raise every index of a rank-2 lower tensor.
    pub fn raise2(&self, t: &JT<S>) -> JT<S> {
        let n = self.n;
        LabeledTensor::from_fn(vec![Slot::up(self.kind, n); 2], |i| {
            let mut s = Jet::cst(0.0);
            for a in 0..n {
                for b in 0..n {
                    let gb = self.ginv.get(&[i[1], b]);
                    let p = self.ginv.get(&[i[0], a]) * gb;
                    s.add_mul(&p, t.get(&[a, b]));
                }
            }
            s
        })
    }

    /// `g^{ab} T_{ab}`.
    pub fn trace2(&self, t: &JT<S>) -> Jet<S> {
        let mut s = Jet::cst(0.0);
        for a in 0..self.n {
            for b in 0..self.n {
                s.add_mul(self.ginv.get(&[a, b]), t.get(&[a, b]));
            }
        }
        s
    }
}

/// Every ambient curvature object at a point, as jets.
///
/// Fields beyond what the metric order supports are `None`.
#[derive(Clone, Debug)]
pub struct CurvaturePack<S: Real> {
    pub conn: Connection<S>,
    /// `R_{abcd}`.
    pub rm: JT<S>,
    pub ric: JT<S>,
    pub scal: Jet<S>,
    /// `𝖩` (needs `n ≥ 2`).
    pub jtrace: Jet<S>,
    /// `𝖯_{ab}` (needs `n ≥ 3`).
    pub schouten: Option<JT<S>>,
    pub weyl: Option<JT<S>>,
    /// `∇_e𝖯_{ab}`.
    pub d_schouten: Option<JT<S>>,
    pub cotton: Option<JT<S>>,
    /// `∇_dC_{abc}`.
    pub d_cotton: Option<JT<S>>,
    pub bach: Option<JT<S>>,
    /// `∇_eW_{abcd}`.
    pub d_weyl: Option<JT<S>>,
    /// `∇_e∇_f𝖯_{ab}`.
    pub dd_schouten: Option<JT<S>>,
    /// `∇_a𝖩`, `∇_a∇_b𝖩`.
    pub d_j: Option<JT<S>>,
    pub dd_j: Option<JT<S>>,
}

fn jet_order<S: Real>(t: &JT<S>) -> usize {
    t.data().iter().filter_map(|j| j.order()).min().unwrap_or(usize::MAX)
}

impl<S: Real> CurvaturePack<S> {
    /// Build from metric jets; needs order ≥ 2 (Bach needs 4).
    pub fn from_metric_jets(g: &JT<S>) -> Result<Self> {
        let n = g.dims()[0];
        if n < 2 {
            return Err(GeoError::Usage("curvature needs dimension ≥ 2".into()));
        }
        let conn = Connection::new(g)?;
        if jet_order(g) < 2 {
            return Err(GeoError::Config("metric jets need order ≥ 2 for curvature".into()));
        }
        let kind = conn.kind;
        let (gam, low, dg) = (&conn.christoffel, &conn.christoffel_low, &conn.dg);
        let ddg = |c: usize, d: usize, a: usize, b: usize| dg.get(&[c, a, b]).d(d);
        let mut rm = LabeledTensor::zeros(down(kind, n, 4));
        // Fill a<b, c<d, (a,b) ≤ (c,d) and extend by the pair symmetries.
        for a in 0..n {
            for b in a + 1..n {
                for c in 0..n {
                    for d in c + 1..n {
                        if (a, b) > (c, d) {
                            continue;
                        }
                        let mut v = ddg(a, d, b, c);
                        v += &ddg(b, c, a, d);
                        v -= &ddg(a, c, b, d);
                        v -= &ddg(b, d, a, c);
                        let mut v = v.scale_f(0.5);
                        for e in 0..n {
                            v.add_mul(gam.get(&[e, b, c]), low.get(&[e, a, d]));
                            let t = gam.get(&[e, b, d]) * low.get(&[e, a, c]);
                            v -= &t;
                        }
                        let m = -&v;
                        rm.set(&[a, b, c, d], v.clone());
                        rm.set(&[b, a, c, d], m.clone());
                        rm.set(&[a, b, d, c], m.clone());
                        rm.set(&[b, a, d, c], v.clone());
                        rm.set(&[c, d, a, b], v.clone());
                        rm.set(&[d, c, a, b], m.clone());
                        rm.set(&[c, d, b, a], m);
                        rm.set(&[d, c, b, a], v);
                    }
                }
            }
        }
        let ric = LabeledTensor::from_fn(down(kind, n, 2), |i| {
            let mut s = Jet::cst(0.0);
            for c in 0..n {
                for d in 0..n {
                    s.add_mul(conn.ginv.get(&[c, d]), rm.get(&[i[0], c, i[1], d]));
                }
            }
            s
        });
        let scal = conn.trace2(&ric);
        let jtrace = scal.scale_f(1.0 / (2.0 * (n as f64 - 1.0)));
        let mut pack = CurvaturePack {
            conn,
            rm,
            ric,
            scal,
            jtrace,
            schouten: None,
            weyl: None,
            d_schouten: None,
            cotton: None,
            d_cotton: None,
            bach: None,
            d_weyl: None,
            dd_schouten: None,
            d_j: None,
            dd_j: None,
        };
        if n >= 3 {
            pack.complete_conformal()?;
        }
        Ok(pack)
    }

    fn complete_conformal(&mut self) -> Result<()> {
        let n = self.conn.n;
        let kind = self.conn.kind;
        let g = &self.conn.g;
        let p = LabeledTensor::from_fn(down(kind, n, 2), |i| {
            let gj = g.get(&[i[0], i[1]]) * &self.jtrace;
            (self.ric.get(i) - &gj).scale_f(1.0 / (n as f64 - 2.0))
        });
        let w = LabeledTensor::from_fn(down(kind, n, 4), |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let mut v = self.rm.get(i).clone();
            let t1 = p.get(&[a, c]) * g.get(&[b, d]);
            let t2 = p.get(&[b, d]) * g.get(&[a, c]);
            let t3 = p.get(&[a, d]) * g.get(&[b, c]);
            let t4 = p.get(&[b, c]) * g.get(&[a, d]);
            v -= &t1;
            v -= &t2;
            v += &t3;
            v += &t4;
            v
        });
        let order = jet_order(&w);
        if order >= 1 {
            let dp = self.conn.cov_deriv(&p);
            let c =
                LabeledTensor::from_fn(down(kind, n, 3), |i| dp.get(&[i[0], i[1], i[2]]) - dp.get(&[i[1], i[0], i[2]]));
            self.d_weyl = Some(self.conn.cov_deriv(&w));
            let dj = LabeledTensor::from_fn(down(kind, n, 1), |i| self.jtrace.d(i[0]));
            if order >= 2 {
                let dc = self.conn.cov_deriv(&c);
                let pup = self.conn.raise2(&p);
                let bach = LabeledTensor::from_fn(down(kind, n, 2), |i| {
                    let (a, b) = (i[0], i[1]);
                    let mut s = Jet::cst(0.0);
                    for c_ in 0..n {
                        for d in 0..n {
                            s.add_mul(self.conn.ginv.get(&[c_, d]), dc.get(&[d, c_, a, b]));
                            s.add_mul(w.get(&[a, c_, b, d]), pup.get(&[c_, d]));
                        }
                    }
                    s
                });
                self.dd_schouten = Some(self.conn.cov_deriv(&dp));
                self.dd_j = Some(self.conn.cov_deriv(&dj));
                self.d_cotton = Some(dc);
                self.bach = Some(bach);
            }
            self.d_j = Some(dj);
            self.d_schouten = Some(dp);
            self.cotton = Some(c);
        }
        self.schouten = Some(p);
        self.weyl = Some(w);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.conn.n
    }

    pub fn p(&self) -> &JT<S> {
        self.schouten.as_ref().expect("Schouten tensor needs dimension ≥ 3")
    }

    pub fn w(&self) -> &JT<S> {
        self.weyl.as_ref().expect("Weyl tensor needs dimension ≥ 3")
    }

    fn need<'a>(&self, t: &'a Option<JT<S>>, what: &str) -> &'a JT<S> {
        t.as_ref().unwrap_or_else(|| panic!("{what} needs more metric jet order"))
    }

    pub fn dp(&self) -> &JT<S> {
        self.need(&self.d_schouten, "∇𝖯")
    }
    pub fn c(&self) -> &JT<S> {
        self.need(&self.cotton, "Cotton")
    }
    pub fn dc(&self) -> &JT<S> {
        self.need(&self.d_cotton, "∇C")
    }
    pub fn b(&self) -> &JT<S> {
        self.need(&self.bach, "Bach")
    }
    pub fn dw(&self) -> &JT<S> {
        self.need(&self.d_weyl, "∇W")
    }
    pub fn ddp(&self) -> &JT<S> {
        self.need(&self.dd_schouten, "∇∇𝖯")
    }
    pub fn dj(&self) -> &JT<S> {
        self.need(&self.d_j, "∇𝖩")
    }
    pub fn ddj(&self) -> &JT<S> {
        self.need(&self.dd_j, "∇∇𝖩")
    }

    /// `M_{ef} = (∇_e∇_f W)_{abcd} T^{ac} T^{bd}` at the base point, for a
    /// symmetric contravariant `T` given by values.
    pub fn weyl_hessian_contracted(&self, t: &[Vec<S>]) -> Vec<Vec<S>> {
        let n = self.n();
        let dw = self.dw();
        let gam = |g: usize, e: usize, a: usize| self.conn.christoffel.get(&[g, e, a]).value();
        let dwv = |i: &[usize]| dw.get(i).value();
        // Y_e^{g x} = Γ^g_{e a} T^{a x}
        let mut y = vec![vec![vec![S::zero(); n]; n]; n];
        for e in 0..n {
            for g in 0..n {
                for x in 0..n {
                    let mut s = S::zero();
                    for a in 0..n {
                        s += gam(g, e, a) * t[a][x];
                    }
                    y[e][g][x] = s;
                }
            }
        }
        // X_g = (∇W)_{gabcd} T^{ac} T^{bd}
        let contract_tt = |f: &dyn Fn(usize, usize, usize, usize) -> S| {
            let mut s = S::zero();
            for_each_index(&[n, n, n, n], |i| {
                let tt = t[i[0]][i[2]] * t[i[1]][i[3]];
                s += f(i[0], i[1], i[2], i[3]) * tt;
            });
            s
        };
        let xg: Vec<S> = (0..n).map(|g| contract_tt(&|a, b, c, d| dwv(&[g, a, b, c, d]))).collect();
        let mut m = vec![vec![S::zero(); n]; n];
        for e in 0..n {
            for f in 0..n {
                let mut v = contract_tt(&|a, b, c, d| dw.get(&[f, a, b, c, d]).d_value(e));
                for g in 0..n {
                    v -= gam(g, e, f) * xg[g];
                }
                // One slot replaced by g, its partner contracted through Y.
                let mut corr = S::zero();
                for_each_index(&[n, n, n, n], |i| {
                    let (g, x, u, v2) = (i[0], i[1], i[2], i[3]);
                    let w = y[e][g][x] * t[u][v2];
                    // slot a = g, c = x, (b,d) = (u,v2)
                    corr += w * dwv(&[f, g, u, x, v2]);
                    // slot c = g, a = x
                    corr += w * dwv(&[f, x, u, g, v2]);
                    // slot b = g, d = x, (a,c) = (u,v2)
                    corr += w * dwv(&[f, u, g, v2, x]);
                    // slot d = g, b = x
                    corr += w * dwv(&[f, u, x, v2, g]);
                });
                m[e][f] = v - corr;
            }
        }
        m
    }
}

/// Curvature pack of a metric field at a point with metric jets of the given
/// order (4 covers Bach, ∇C, ∇∇𝖯).
pub fn curvature_pack<S: Real>(g: &MetricField, p: &[f64], order: usize) -> Result<CurvaturePack<S>> {
    if g.dim() < 3 {
        return Err(GeoError::Usage("Schouten tensor is undefined for n < 3".into()));
    }
    let gj = g.jets::<S>(p, order)?;
    CurvaturePack::from_metric_jets(&gj)
}

/// Christoffel symbols `Γ^c_{ab}` at a point.
pub fn christoffel<S: Real>(g: &MetricField, p: &[f64]) -> Result<JT<S>> {
    let gj = g.jets::<S>(p, 1)?;
    Ok(Connection::new(&gj)?.christoffel)
}

/// Covariant derivative of a tensor field given by an evaluator producing its
/// all-lower component jets at a point.
pub fn ambient_cov_deriv<S: Real>(
    g: &MetricField,
    p: &[f64],
    order: usize,
    field: impl Fn(&[Jet<S>]) -> JT<S>,
) -> Result<JT<S>> {
    let gj = g.jets::<S>(p, order)?;
    let conn = Connection::new(&gj)?;
    let x = crate::field::coordinate_jets::<S>(p, order);
    let t = field(&x);
    if t.data().iter().any(|j| j.order() == Some(0)) {
        return Err(GeoError::Config("field jets need one spare order for ∇".into()));
    }
    Ok(conn.cov_deriv(&t))
}

/// Identity matrix slots helper for callers building metrics by hand.
pub fn metric_slots(n: usize) -> Vec<Slot> {
    sym_slots(n)
}
