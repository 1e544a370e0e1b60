//! Residuals of the structure equations and tangential divergence identities
//! satisfied by every immersion. Each residual is `max |lhs − rhs|` at the
//! base point relative to `1 + max(|lhs|, |rhs|)`.

use serde::{Deserialize, Serialize};

use crate::ambient::{curvature_pack, CurvaturePack, JT};
use crate::error::{GeoError, Result};
use crate::extrinsic::{ExtrinsicPack, N, T};
use crate::jet::Jet;
use crate::metric::MetricField;
use crate::scalar::Real;
use crate::submanifold::{nslot, rel_residual, trace_tangent, Submanifold};
use crate::tensor::{einsum, for_each_index, permutations, Kind, LabeledTensor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

fn res<S: Real>(name: &str, lhs: &JT<S>, rhs: &JT<S>) -> Residual {
    Residual { name: name.to_string(), value: rel_residual(lhs, rhs) }
}

fn sc<S: Real>(j: Jet<S>) -> JT<S> {
    LabeledTensor::scalar(j)
}

pub fn max_residual(rs: &[Residual]) -> f64 {
    rs.iter().map(|r| r.value).fold(0.0, f64::max)
}

/// Gauss, Codazzi and Ricci equations in conformally adapted form.
/// Equations involving `F` or intrinsic Weyl/Schouten need `k ≥ 3`.
pub fn gauss_codazzi_ricci<S: Real>(sub: &Submanifold<S>, ext: &ExtrinsicPack<S>) -> Result<Vec<Residual>> {
    let (k, m) = (sub.k, sub.m());
    if k < 2 {
        return Err(GeoError::Domain("structure equations need k ≥ 2".into()));
    }
    let kf = k as f64;
    let lt = &ext.lt;
    let h = &sub.h;
    let ltu0 = sub.up(lt, &[0]);
    let intr = sub.intr()?;
    let mut out = Vec::new();

    if k >= 3 {
        let f = ext.f()?;
        let lhs = ext.w(sub, &[T, T, T, T]);
        let quad = einsum("acp,bdp->abcd", &[lt, lt]).sub(&einsum("adp,bcp->abcd", &[lt, lt]));
        let fh = |s1: &str| einsum(s1, &[f, h]);
        let fterm = fh("ac,db->abcd").sub(&fh("ad,cb->abcd")).sub(&fh("bc,da->abcd")).add(&fh("bd,ca->abcd"));
        let rhs = intr.w().sub(&quad).sub(&fterm);
        out.push(res("gcW", &lhs, &rhs));

        let lhs = sub.block(&ext.p_ad, &[T, T]);
        let hl = einsum("p,abp->ab", &[&ext.hv, lt]);
        let rhs = intr.p().sub(&hl).sub(&h.times(&ext.hsq.scale_f(0.5))).add(f);
        out.push(res("gcP", &lhs, &rhs));
    }

    let lhs = sc(sub.compose(&sub.amb.jtrace));
    let mut pnn = Jet::cst(0.0);
    for p in 0..m {
        pnn += ext.p_ad.get(&[k + p, k + p]);
    }
    let rhs = sc(&(&intr.jtrace + &pnn) - &ext.hsq.scale_f(kf / 2.0)).add(&sc(ext.g()?.clone()));
    out.push(res("gcJ", &lhs, &rhs));

    let dlt = sub.nabla_bar(lt);
    let lhs = ext.w(sub, &[T, T, N, T]);
    let rhs = einsum("abcp->abpc", &[&dlt])
        .sub(&einsum("bacp->abpc", &[&dlt]))
        .add(&einsum("ca,bp->abpc", &[h, &ext.d]))
        .sub(&einsum("cb,ap->abpc", &[h, &ext.d]));
    out.push(res("gcdL", &lhs, &rhs));

    let lhs = ext.d.scaled(kf - 1.0);
    let rhs = trace_tangent(&dlt, 0, 1, &sub.hinv).scaled(-1.0).sub(&ext.wtn);
    out.push(res("gcD", &lhs, &rhs));

    let lhs = ext.w(sub, &[T, T, N, N]);
    let rhs =
        sub.normal_curvature().sub(&einsum("cap,cbq->abpq", &[&ltu0, lt])).add(&einsum("caq,cbp->abpq", &[&ltu0, lt]));
    out.push(res("gcnc", &lhs, &rhs));
    Ok(out)
}

/// Divergences of `𝓟`, `L̊²` and the tangential Weyl trace.
pub fn divergence_identities<S: Real>(sub: &Submanifold<S>, ext: &ExtrinsicPack<S>) -> Result<Vec<Residual>> {
    let k = sub.k;
    if k < 2 {
        return Err(GeoError::Domain("divergence identities need k ≥ 2".into()));
    }
    let kf = k as f64;
    let lt = &ext.lt;
    let du = sub.up(&ext.d, &[0]);
    let ltu01 = sub.up(lt, &[0, 1]);
    let wtttn = ext.w(sub, &[T, T, T, N]);
    let mc = ext.mc_t();
    let grad = |j: &Jet<S>| sub.nabla_bar(&sc(j.clone()));
    let mut out = Vec::new();

    let lhs = sub.div(&ext.mp, 1);
    let rhs = grad(&ext.mp_tr).add(&mc).sub(&einsum("bp,bap->a", &[&du, lt]));
    out.push(res("div-mP", &lhs, &rhs));

    let lw = einsum("bcp,bacp->a", &[&ltu01, &wtttn]);
    let lhs = sub.div(&ext.lt2, 1);
    let rhs = grad(&ext.lt_sq)
        .scaled(0.5)
        .sub(&einsum("bp,abp->a", &[&du, lt]).scaled(kf - 2.0))
        .sub(&einsum("bp,abp->a", &[&sub.up(&ext.wtn, &[0]), lt]))
        .sub(&lw);
    out.push(res("div-tfss2", &lhs, &rhs));

    let lhs = sub.div(&ext.wtt, 1);
    let rhs = grad(&ext.wtr)
        .scaled(0.5)
        .sub(&mc.scaled(kf - 2.0))
        .sub(&lw)
        .sub(&einsum("abp,bp->a", &[&sub.up(lt, &[1]), &ext.wtn]));
    out.push(res("div-W", &lhs, &rhs));
    Ok(out)
}

/// `⟨L̊, Δ̄L̊⟩` against its expression through `D`, `W`, `F` and cubic terms.
pub fn simons<S: Real>(sub: &Submanifold<S>, ext: &ExtrinsicPack<S>) -> Result<Residual> {
    let k = sub.k;
    if k < 3 {
        return Err(GeoError::Domain("Simons identity needs k ≥ 3".into()));
    }
    let kf = k as f64;
    let lt = &ext.lt;
    let intr = sub.intr()?;
    let lhs = sc(sub.inner(lt, &sub.laplacian(lt)));

    let ltu = sub.up(lt, &[0, 1]);
    let dw = sub.up(&sub.nabla_bar(&ext.w(sub, &[T, T, N, T])), &[0]);
    let wt = sub.up(&ext.w(sub, &[T, T, T, T]), &[1, 3]);
    let wn = sub.up(&ext.w(sub, &[T, T, N, N]), &[1]);
    let f = sub.up(ext.f()?, &[1]);
    let pbar = sub.up(intr.p(), &[1]);
    let s = sub
        .nabla_bar(&ext.d)
        .scaled(-kf)
        .sub(&sub.nabla_bar(&ext.wtn))
        .add(&einsum("ccapb->abp", &[&dw]))
        .add(&lt.times(&intr.jtrace))
        .add(&einsum("ac,cbp->abp", &[&pbar, lt]).scaled(kf))
        .sub(&einsum("acbd,cdp->abp", &[&wt, lt]))
        .sub(&einsum("acpq,cbq->abp", &[&wn, lt]))
        .add(&einsum("ac,cbp->abp", &[&f, lt]).scaled(2.0))
        .sub(&einsum("abq,cdq,cdp->abp", &[lt, &ltu, lt]))
        .sub(&einsum("adp,cdq,cbq->abp", &[lt, &ltu, lt]))
        .add(&einsum("cdp,adq,bcq->abp", &[&ltu, lt, lt]).scaled(2.0));
    let rhs = sc(sub.inner(lt, &s));
    Ok(res("simons", &lhs, &rhs))
}

/// Partial traces of the projected Weyl tensor:
/// `W_{αβ}{}^{αβ} = −W_{αα'}{}^{αα'} = W_{α'β'}{}^{α'β'}`.
pub fn weyl_traces<S: Real>(sub: &Submanifold<S>, ext: &ExtrinsicPack<S>) -> Vec<Residual> {
    let (k, m) = (sub.k, sub.m());
    let mut tn = Jet::cst(0.0);
    let mut nn = Jet::cst(0.0);
    for p in 0..m {
        for a in 0..k {
            for b in 0..k {
                tn.add_mul(sub.hinv.get(&[a, b]), ext.w_ad.get(&[a, k + p, b, k + p]));
            }
        }
        for q in 0..m {
            nn += ext.w_ad.get(&[k + p, k + q, k + p, k + q]);
        }
    }
    let tt = sc(ext.wtr.clone());
    vec![res("weyl-tt-tn", &tt, &sc(-tn)), res("weyl-tt-nn", &tt, &sc(nn))]
}

/// Normal curvature from `ω` against the commutator `[∇̄_α, ∇̄_β]` on a
/// normal 1-form.
pub fn normal_curvature_commutator<S: Real>(sub: &Submanifold<S>) -> Residual {
    let (k, m, n) = (sub.k, sub.m(), sub.n);
    let tau = LabeledTensor::from_fn(vec![nslot(m)], |i| {
        let mut s = Jet::cst(0.0);
        for a in 0..n {
            let w = &sub.x[a] * &sub.x[a];
            s.add_mul(&sub.frame[k + i[0]][a], &w.add_scalar(S::from_f64(1.0 + a as f64)));
        }
        s
    });
    let dd = sub.nabla_bar(&sub.nabla_bar(&tau));
    let lhs = dd.sub(&einsum("bap->abp", &[&dd]));
    let rhs = einsum("abpq,q->abp", &[&sub.normal_curvature(), &tau]);
    res("normal-curvature", &lhs, &rhs)
}

/// `∇̄` of tangent/normal blocks of `W`, `P`, `C` by the frame route and by the
/// projected ambient derivative route.
pub fn nabla_routes<S: Real>(sub: &Submanifold<S>) -> Vec<Residual> {
    let amb = &sub.amb;
    let cases: Vec<(&str, &JT<S>, &JT<S>, Vec<Kind>)> = vec![
        ("W-TTTN", amb.w(), amb.dw(), vec![T, T, T, N]),
        ("W-TNTN", amb.w(), amb.dw(), vec![T, N, T, N]),
        ("W-TTNN", amb.w(), amb.dw(), vec![T, T, N, N]),
        ("P-TN", amb.p(), amb.dp(), vec![T, N]),
        ("P-NN", amb.p(), amb.dp(), vec![N, N]),
        ("C-NTT", amb.c(), amb.dc(), vec![N, T, T]),
        ("C-TTN", amb.c(), amb.dc(), vec![T, T, N]),
    ];
    cases
        .into_iter()
        .map(|(name, t, dt, kinds)| {
            let r1 = sub.nabla_bar(&sub.block(&sub.project(t), &kinds));
            let r2 = sub.nabla_bar_projected(t, dt, &kinds);
            res(&format!("nabla-{name}"), &r1, &r2)
        })
        .collect()
}

fn vals(t: &JT<f64>) -> LabeledTensor<f64> {
    t.map(|j| j.value())
}

/// Every structural identity of the ambient curvature pack, as residuals
/// relative to the size of the curvature.
pub fn ambient_identities(g: &MetricField, p: &[f64]) -> Result<Vec<Residual>> {
    let n = g.dim();
    let pk = curvature_pack::<f64>(g, p, 4)?;
    let gi = vals(&pk.conn.ginv);
    let gl = vals(&pk.conn.g);
    let rm = vals(&pk.rm);
    let w = vals(pk.w());
    let c = vals(pk.c());
    let b = vals(pk.b());
    let dw = vals(pk.dw());
    let drm = vals(&pk.conn.cov_deriv(&pk.rm));
    let scale = rm.max_abs() + dw.max_abs() + c.max_abs() + vals(pk.dc()).max_abs();
    let mut out = Vec::new();
    let mut worst = |name: &str, f: &dyn Fn(&[usize]) -> f64, rank: usize| {
        let mut m: f64 = 0.0;
        for_each_index(&vec![n; rank], |i| m = m.max(f(i).abs()));
        out.push(Residual { name: name.to_string(), value: m / (1.0 + scale) });
    };
    worst(
        "riemann symmetries",
        &|i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let r = rm.get(i);
            (r + rm.get(&[b, a, c, d])).abs() + (r + rm.get(&[a, b, d, c])).abs() + (r - rm.get(&[c, d, a, b])).abs()
        },
        4,
    );
    worst(
        "first bianchi",
        &|i| rm.get(&[i[0], i[1], i[2], i[3]]) + rm.get(&[i[1], i[2], i[0], i[3]]) + rm.get(&[i[2], i[0], i[1], i[3]]),
        4,
    );
    worst(
        "second bianchi",
        &|i| {
            let (e, a, b, c, d) = (i[0], i[1], i[2], i[3], i[4]);
            drm.get(&[e, a, b, c, d]) + drm.get(&[a, b, e, c, d]) + drm.get(&[b, e, a, c, d])
        },
        5,
    );
    worst(
        "weyl trace-free",
        &|i| {
            (0..n)
                .flat_map(|c| (0..n).map(move |d| (c, d)))
                .map(|(c, d)| gi.get(&[c, d]) * w.get(&[i[0], c, i[1], d]))
                .sum()
        },
        2,
    );
    worst(
        "cotton trace-free",
        &|i| {
            (0..n).flat_map(|c| (0..n).map(move |d| (c, d))).map(|(x, y)| gi.get(&[x, y]) * c.get(&[x, i[0], y])).sum()
        },
        1,
    );
    worst(
        "cotton cyclic",
        &|i| c.get(&[i[0], i[1], i[2]]) + c.get(&[i[1], i[2], i[0]]) + c.get(&[i[2], i[0], i[1]]),
        3,
    );
    worst("bach symmetric", &|i| b.get(&[i[0], i[1]]) - b.get(&[i[1], i[0]]), 2);
    worst(
        "bach trace-free",
        &|_| (0..n).flat_map(|c| (0..n).map(move |d| (c, d))).map(|(x, y)| gi.get(&[x, y]) * b.get(&[x, y])).sum(),
        0,
    );
    // ∇^e W_{abec} = (n−3) C_{abc}
    worst(
        "divergence of weyl",
        &|i| {
            let (a, b, cc) = (i[0], i[1], i[2]);
            let mut s = 0.0;
            for e in 0..n {
                for f in 0..n {
                    s += gi.get(&[e, f]) * dw.get(&[f, a, b, e, cc]);
                }
            }
            s - (n as f64 - 3.0) * c.get(&[a, b, cc])
        },
        3,
    );
    // ∇_{[a}W_{bc]de} = −C_{[ab|d}g_{|c]e} + C_{[ab|e}g_{|c]d}, brute-force permutation sums.
    let perms = permutations(3);
    worst(
        "weyl bianchi",
        &|i| {
            let (d, e) = (i[3], i[4]);
            let abc = [i[0], i[1], i[2]];
            let mut lhs = 0.0;
            let mut rhs = 0.0;
            for (pm, sgn) in &perms {
                let (a, b, cc) = (abc[pm[0]], abc[pm[1]], abc[pm[2]]);
                let s = *sgn as f64 / 6.0;
                lhs += s * dw.get(&[a, b, cc, d, e]);
                rhs += s * (-c.get(&[a, b, d]) * gl.get(&[cc, e]) + c.get(&[a, b, e]) * gl.get(&[cc, d]));
            }
            lhs - rhs
        },
        5,
    );
    Ok(out)
}

/// `max |Rm − λ(g∧g)/2|`, `|P − λg/2|`, `|W|`, `|C|`, `|B|` relative to `|g|`.
pub fn space_form_residual(pk: &CurvaturePack<f64>, lambda: f64) -> f64 {
    let n = pk.n();
    let g = vals(&pk.conn.g);
    let scale = g.max_abs();
    let mut worst = (pk.scal.value() - lambda * (n * (n - 1)) as f64).abs() / (1.0 + scale);
    worst = worst.max(vals(pk.p()).sub(&g.scaled(0.5 * lambda)).max_abs() / (1.0 + scale));
    let rm = vals(&pk.rm);
    let mut r: f64 = 0.0;
    for_each_index(&[n; 4], |i| {
        let exact =
            lambda * (g.get(&[i[0], i[2]]) * g.get(&[i[1], i[3]]) - g.get(&[i[0], i[3]]) * g.get(&[i[1], i[2]]));
        r = r.max((rm.get(i) - exact).abs());
    });
    worst = worst.max(r / (1.0 + scale * scale));
    for t in [pk.w(), pk.c(), pk.b()] {
        worst = worst.max(vals(t).max_abs() / (1.0 + scale));
    }
    worst
}
