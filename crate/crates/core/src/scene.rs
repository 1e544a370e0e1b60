//! Named example scenes: an ambient metric plus an immersed patch.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::field::{Expr, Poly};
use crate::immersion::{ImmersedPatch, ImmersionMap};
use crate::metric::MetricField;
use crate::random::{random_point, random_poly, random_polynomial_metric, rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub name: String,
    pub metric: MetricField,
    pub patch: ImmersedPatch,
    /// Parameter box covering the whole submanifold, for quadrature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<(f64, f64)>>,
}

pub const CATALOG: &[&str] = &[
    "flat-plane",
    "circle",
    "clifford-torus",
    "equatorial-s2-in-s3",
    "equatorial-s4-in-s5",
    "equatorial-s4-in-s7",
    "s2xs2-in-s5",
    "t4-in-s7",
    "cylinder",
    "cylinder-n7",
    "appendix-n5",
    "appendix-n6",
    "random-k4-n6",
];

fn v(i: usize) -> Expr {
    Expr::var(i)
}

fn scaled(c: f64, e: Expr) -> Expr {
    Expr::mul(vec![Expr::c(c), e])
}

/// Unit sphere `S^d ⊂ ℝ^{d+1}` in polar angles `y[off..off+d]`.
pub fn sphere_embedding(d: usize, off: usize) -> Vec<Expr> {
    let mut out = Vec::new();
    let mut prefix: Vec<Expr> = Vec::new();
    for i in 0..d {
        let mut c = prefix.clone();
        c.push(Expr::cos(v(off + i)));
        out.push(Expr::mul(c));
        prefix.push(Expr::sin(v(off + i)));
    }
    out.push(Expr::mul(prefix));
    out
}

/// Stereographic chart of the unit sphere matching `MetricField::RoundSphere`:
/// `x = X' / (1 + X_{n+1})`.
pub fn stereographic(big_x: Vec<Expr>) -> Vec<Expr> {
    let n = big_x.len() - 1;
    let den = Expr::add(vec![Expr::c(1.0), big_x[n].clone()]);
    big_x[..n].iter().map(|e| Expr::div(e.clone(), den.clone())).collect()
}

fn graph_zero(k: usize, n: usize) -> ImmersionMap {
    ImmersionMap::Graph { k, n, u: vec![Expr::c(0.0); n - k] }
}

fn scene(name: &str, metric: MetricField, map: ImmersionMap, base: Vec<f64>, domain: Option<Vec<(f64, f64)>>) -> Scene {
    Scene { name: name.to_string(), metric, patch: ImmersedPatch::new(map, base), domain }
}

/// Equatorial `S^k ⊂ S^n` as a coordinate plane in the stereographic chart.
pub fn equatorial(k: usize, n: usize) -> Scene {
    let base = (0..k).map(|i| 0.2 - 0.07 * i as f64).collect();
    scene(&format!("equatorial-s{k}-in-s{n}"), MetricField::RoundSphere { n }, graph_zero(k, n), base, None)
}

/// Round `S^k` of radius `r` in flat `ℝ^n` (polar chart).
pub fn round_sphere_in_flat(k: usize, n: usize, r: f64) -> Scene {
    let mut x: Vec<Expr> = sphere_embedding(k, 0).into_iter().map(|e| scaled(r, e)).collect();
    x.resize(n, Expr::c(0.0));
    let base = (0..k).map(|i| 1.1 - 0.13 * i as f64).collect();
    let mut dom = vec![(0.0, std::f64::consts::PI); k];
    dom[k - 1] = (0.0, 2.0 * std::f64::consts::PI);
    scene(&format!("sphere-s{k}-in-r{n}"), MetricField::Flat { n }, ImmersionMap::Map { k, n, x }, base, Some(dom))
}

/// `ℝ × S^3 × {0} ⊂ ℝ^n`.
pub fn cylinder(n: usize) -> Scene {
    let mut x = vec![v(0)];
    x.extend(sphere_embedding(3, 1));
    x.resize(n, Expr::c(0.0));
    let name = if n == 5 { "cylinder".to_string() } else { format!("cylinder-n{n}") };
    scene(&name, MetricField::Flat { n }, ImmersionMap::Map { k: 4, n, x }, vec![0.3, 1.0, 0.8, 0.5], None)
}

/// Diagonal metric `Σ e^{2f_a}(dx^a)²` along `{(x, 0)} ⊂ ℝ^n` with
/// `f_0 = s y₁² + t y₁y₂ + u y₀y₄`, `f_1 = v y₀y₄`, `f_2 = −(u+v) y₀y₄`.
pub fn appendix(n: usize, s: f64, t: f64, u: f64, w: f64) -> Scene {
    let f = vec![
        Poly::monomial(n, s, &[1, 1]).plus(Poly::monomial(n, t, &[1, 2])).plus(Poly::monomial(n, u, &[0, 4])),
        Poly::monomial(n, w, &[0, 4]),
        Poly::monomial(n, -(u + w), &[0, 4]),
    ];
    let mut f = f;
    f.resize(n, Poly::zero(n));
    scene(&format!("appendix-n{n}"), MetricField::DiagonalExp { f }, graph_zero(4, n), vec![0.0; 4], None)
}

/// Random graph `x = (y, u(y))` over a random polynomial metric.
pub fn random_graph(k: usize, n: usize, seed: u64) -> Scene {
    let metric = random_polynomial_metric(n, seed);
    let mut r = rng(seed.wrapping_mul(7919).wrapping_add(17));
    let u = (0..n - k)
        .map(|_| {
            let lin = random_poly(&mut r, k, 1..=1, 2, 0.3);
            Expr::poly(lin.plus(random_poly(&mut r, k, 2..=3, 4, 0.4)))
        })
        .collect();
    let base = random_point(&mut r, k, 0.3);
    scene(&format!("random-k{k}-n{n}"), metric, ImmersionMap::Graph { k, n, u }, base, None)
}

fn parse_kn(rest: &str) -> Option<(usize, usize)> {
    let rest = rest.strip_prefix('k')?;
    let (k, n) = rest.split_once("-n")?;
    Some((k.parse().ok()?, n.parse().ok()?))
}

pub fn catalog(name: &str, seed: u64) -> Result<Scene> {
    let pi = std::f64::consts::PI;
    let s = match name {
        "flat-plane" => scene(name, MetricField::Flat { n: 6 }, graph_zero(4, 6), vec![0.1, -0.2, 0.3, 0.05], None),
        "circle" => {
            let x = vec![scaled(2.0, Expr::cos(v(0))), scaled(2.0, Expr::sin(v(0))), Expr::c(0.0)];
            scene(
                name,
                MetricField::Flat { n: 3 },
                ImmersionMap::Map { k: 1, n: 3, x },
                vec![0.4],
                Some(vec![(0.0, 2.0 * pi)]),
            )
        }
        "clifford-torus" => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let big = vec![
                scaled(r, Expr::cos(v(0))),
                scaled(r, Expr::sin(v(0))),
                scaled(r, Expr::cos(v(1))),
                scaled(r, Expr::sin(v(1))),
            ];
            let map = ImmersionMap::Map { k: 2, n: 3, x: stereographic(big) };
            scene(name, MetricField::RoundSphere { n: 3 }, map, vec![0.7, 0.3], Some(vec![(0.0, 2.0 * pi); 2]))
        }
        "equatorial-s2-in-s3" => equatorial(2, 3),
        "equatorial-s4-in-s5" => equatorial(4, 5),
        "equatorial-s4-in-s7" => equatorial(4, 7),
        "s2xs2-in-s5" => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let mut big: Vec<Expr> = sphere_embedding(2, 0).into_iter().map(|e| scaled(r, e)).collect();
            big.extend(sphere_embedding(2, 2).into_iter().map(|e| scaled(r, e)));
            let map = ImmersionMap::Map { k: 4, n: 5, x: stereographic(big) };
            let dom = vec![(0.0, pi), (0.0, 2.0 * pi), (0.0, pi), (0.0, 2.0 * pi)];
            scene(name, MetricField::RoundSphere { n: 5 }, map, vec![1.0, 0.4, 1.3, 2.0], Some(dom))
        }
        "t4-in-s7" => {
            let big: Vec<Expr> =
                (0..4).flat_map(|i| [scaled(0.5, Expr::cos(v(i))), scaled(0.5, Expr::sin(v(i)))]).collect();
            let map = ImmersionMap::Map { k: 4, n: 7, x: stereographic(big) };
            scene(
                name,
                MetricField::RoundSphere { n: 7 },
                map,
                vec![0.3, 1.1, 2.0, 0.6],
                Some(vec![(0.0, 2.0 * pi); 4]),
            )
        }
        "cylinder" => cylinder(5),
        "cylinder-n7" => cylinder(7),
        "appendix-n5" | "appendix-n6" => {
            let n = if name.ends_with('5') { 5 } else { 6 };
            let mut r = rng(seed);
            let p: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
            appendix(n, p[0], p[1], p[2], p[3])
        }
        _ => match name.strip_prefix("random-").and_then(parse_kn) {
            Some((k, n)) if k >= 1 && k < n && n <= 8 => random_graph(k, n, seed),
            _ => return Err(GeoError::Config(format!("unknown scene {name:?}"))),
        },
    };
    Ok(s)
}
