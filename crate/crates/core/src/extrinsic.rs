//! Natural tensors of a submanifold built from the second fundamental form
//! and the projected ambient conformal curvature.

use crate::ambient::JT;
use crate::error::{GeoError, Result};
use crate::jet::Jet;
use crate::scalar::Real;
use crate::submanifold::{nslot, trace_normal, trace_tangent, tslot, Submanifold};
use crate::tensor::{Kind, LabeledTensor};

pub const T: Kind = Kind::Tangent;
pub const N: Kind = Kind::Normal;

#[derive(Clone, Debug)]
pub struct ExtrinsicPack<S: Real> {
    pub k: usize,
    pub n: usize,
    /// `H_{α'} = (1/k) h^{αβ} L_{αβα'}`.
    pub hv: JT<S>,
    pub hsq: Jet<S>,
    /// Trace-free second fundamental form.
    pub lt: JT<S>,
    /// `L̊²_{αβ} = L̊^γ{}_{αα'} L̊_{γβ}{}^{α'}`.
    pub lt2: JT<S>,
    pub lt_sq: Jet<S>,
    /// Adapted-frame components of `W`, `P`, `C`, `B`.
    pub w_ad: JT<S>,
    pub p_ad: JT<S>,
    pub c_ad: JT<S>,
    pub b_ad: JT<S>,
    /// `W_{αγβ}{}^γ` and `W_{αβ}{}^{αβ}`.
    pub wtt: JT<S>,
    pub wtr: Jet<S>,
    /// `W_{αβα'}{}^β`.
    pub wtn: JT<S>,
    /// `D_{αα'} = P_{αα'} − ∇̄_α H_{α'}`.
    pub d: JT<S>,
    /// `G` (`k ≥ 2`) and `F` (`k ≥ 3`).
    pub g_tr: Option<Jet<S>>,
    pub f: Option<JT<S>>,
    /// Modified Schouten tensor `𝓟_{αβ}`.
    pub mp: JT<S>,
    pub mp_tr: Jet<S>,
    /// Modified Cotton tensor (adapted) and its trace `𝓒_a = 𝓒_{βa}{}^β`.
    pub mc: JT<S>,
    pub mc_a: JT<S>,
    /// Modified Bach tensor `𝓑_{αβ}`.
    pub mb: JT<S>,
    pub mb_tr: Jet<S>,
}

fn tr<S: Real>(sub: &Submanifold<S>, t: &JT<S>) -> Jet<S> {
    trace_tangent(t, 0, 1, &sub.hinv).value().clone()
}

impl<S: Real> ExtrinsicPack<S> {
    pub fn new(sub: &Submanifold<S>) -> Result<Self> {
        let (k, n, m) = (sub.k, sub.n, sub.m());
        let kf = k as f64;
        let nf = n as f64;
        let l = &sub.l;
        let hinv = &sub.hinv;
        let hv = trace_tangent(l, 0, 1, hinv).scaled(1.0 / kf);
        let mut hsq = Jet::cst(0.0);
        for a in 0..m {
            hsq.add_mul(hv.get(&[a]), hv.get(&[a]));
        }
        let lt = LabeledTensor::from_fn(vec![tslot(k), tslot(k), nslot(m)], |i| {
            l.get(i) - &(sub.h.get(&[i[0], i[1]]) * hv.get(&[i[2]]))
        });
        let ltu = sub.up(&lt, &[0]);
        let lt2 = LabeledTensor::from_fn(vec![tslot(k), tslot(k)], |i| {
            let mut s = Jet::cst(0.0);
            for g in 0..k {
                for ap in 0..m {
                    s.add_mul(ltu.get(&[g, i[0], ap]), lt.get(&[g, i[1], ap]));
                }
            }
            s
        });
        let lt_sq = tr(sub, &lt2);

        let amb = &sub.amb;
        let w_ad = sub.project(amb.w());
        let p_ad = sub.project(amb.p());
        let c_ad = sub.project(amb.c());
        let b_ad = sub.project(amb.b());
        let wtttt = sub.block(&w_ad, &[T, T, T, T]);
        let wtt = trace_tangent(&wtttt, 1, 3, hinv);
        let wtr = tr(sub, &wtt);
        let wtn = trace_tangent(&sub.block(&w_ad, &[T, T, N, T]), 1, 3, hinv);

        let dh = sub.nabla_bar(&hv);
        let d = sub.block(&p_ad, &[T, N]).sub(&dh);

        let g_tr = if k >= 2 { Some((&lt_sq - &wtr).scale_f(1.0 / (2.0 * (kf - 1.0)))) } else { None };
        let f = match (&g_tr, k >= 3) {
            (Some(g), true) => {
                let gh = sub.h.times(g);
                Some(lt2.sub(&wtt).sub(&gh).scaled(1.0 / (kf - 2.0)))
            }
            _ => None,
        };

        let ptt = sub.block(&p_ad, &[T, T]);
        let mp = LabeledTensor::from_fn(vec![tslot(k), tslot(k)], |i| {
            let mut s = ptt.get(i).clone();
            for ap in 0..m {
                s.add_mul(hv.get(&[ap]), lt.get(&[i[0], i[1], ap]));
            }
            s.add_mul(&hsq.scale_f(0.5), sub.h.get(i));
            s
        });
        let mp_tr = tr(sub, &mp);

        let mc = LabeledTensor::from_fn(c_ad.slots().to_vec(), |i| {
            let mut s = c_ad.get(i).clone();
            for ap in 0..m {
                let t = hv.get(&[ap]) * w_ad.get(&[i[0], i[1], i[2], k + ap]);
                s -= &t;
            }
            s
        });
        let mc_a = LabeledTensor::from_fn(vec![c_ad.slots()[0]], |i| {
            let mut s = Jet::cst(0.0);
            for b in 0..k {
                for g in 0..k {
                    s.add_mul(hinv.get(&[b, g]), mc.get(&[b, i[0], g]));
                }
            }
            s
        });
        let btt = sub.block(&b_ad, &[T, T]);
        let mb = LabeledTensor::from_fn(vec![tslot(k), tslot(k)], |i| {
            let (a, b) = (i[0], i[1]);
            let mut s = btt.get(i).clone();
            for ap in 0..m {
                let csym = (c_ad.get(&[k + ap, a, b]) + c_ad.get(&[k + ap, b, a])).scale_f(nf - 4.0);
                s.add_mul(hv.get(&[ap]), &csym);
                for bp in 0..m {
                    let hh = (hv.get(&[ap]) * hv.get(&[bp])).scale_f(nf - 4.0);
                    s.add_mul(&hh, w_ad.get(&[a, k + ap, b, k + bp]));
                }
            }
            s
        });
        let mb_tr = tr(sub, &mb);
        Ok(ExtrinsicPack {
            k,
            n,
            hv,
            hsq,
            lt,
            lt2,
            lt_sq,
            w_ad,
            p_ad,
            c_ad,
            b_ad,
            wtt,
            wtr,
            wtn,
            d,
            g_tr,
            f,
            mp,
            mp_tr,
            mc,
            mc_a,
            mb,
            mb_tr,
        })
    }

    pub fn g(&self) -> Result<&Jet<S>> {
        self.g_tr.as_ref().ok_or_else(|| GeoError::Domain("G needs k ≥ 2".into()))
    }

    pub fn f(&self) -> Result<&JT<S>> {
        self.f.as_ref().ok_or_else(|| GeoError::Domain("F needs k ≥ 3".into()))
    }

    /// Tangential block `𝓒_α` of `𝓒_a`.
    pub fn mc_t(&self) -> JT<S> {
        let k = self.k;
        LabeledTensor::from_fn(vec![tslot(k)], |i| self.mc_a.get(i).clone())
    }

    /// `|D|² = D^{αα'} D_{αα'}`.
    pub fn d_sq(&self, sub: &Submanifold<S>) -> Jet<S> {
        sub.inner(&self.d, &self.d)
    }

    /// `D^{βα'} L̊_{αβα'}` as a tangent 1-form.
    pub fn d_lt(&self, sub: &Submanifold<S>) -> JT<S> {
        let du = sub.up(&self.d, &[0]);
        let (k, m) = (self.k, sub.m());
        LabeledTensor::from_fn(vec![tslot(k)], |i| {
            let mut s = Jet::cst(0.0);
            for b in 0..k {
                for ap in 0..m {
                    s.add_mul(du.get(&[b, ap]), self.lt.get(&[i[0], b, ap]));
                }
            }
            s
        })
    }

    /// Adapted block of `W`.
    pub fn w(&self, sub: &Submanifold<S>, kinds: &[Kind]) -> JT<S> {
        sub.block(&self.w_ad, kinds)
    }

    /// `Σ_{α'} T_{..α'..α'..}` shortcut.
    pub fn ntrace(t: &JT<S>, a: usize, b: usize) -> JT<S> {
        trace_normal(t, a, b)
    }
}
