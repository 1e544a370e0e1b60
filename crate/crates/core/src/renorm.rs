//! Renormalized area of totally geodesic hemispheres in the upper half-space
//! model of hyperbolic space.
//!
//! The truncated area `Area{z > ε}` is integrated numerically from the induced
//! metric, then the constant term of its expansion in `ε` is read off by a
//! least-squares fit.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::extrinsic::ExtrinsicPack;
use crate::field::Expr;
use crate::gauss_bonnet::{area_element, double_factorial, QuadratureGrid, Rule1D};
use crate::immersion::{ImmersedPatch, ImmersionMap};
use crate::invariants::{Evaluator, InvOptions};
use crate::metric::MetricField;
use crate::scene::{self, Scene};
use crate::submanifold::{FrameOptions, Submanifold};

/// Condition number above which a fit is flagged.
pub const COND_WARN: f64 = 1e12;

/// Hemisphere `{|x'|² + z² = R²}` of dimension `k` in `ℍⁿ`, `z = x^{n−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicModel {
    pub k: usize,
    pub n: usize,
    pub radius: f64,
    /// Gauss–Legendre nodes along the height variable.
    pub m_height: usize,
    /// Gauss–Legendre nodes per polar angle of the boundary sphere.
    pub m_angle: usize,
}

impl HyperbolicModel {
    pub fn new(k: usize, n: usize, radius: f64) -> Result<Self> {
        let m = HyperbolicModel { k, n, radius, m_height: 48, m_angle: 12 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k != 2 && self.k != 4 {
            return Err(GeoError::Usage(format!("hemisphere model needs k ∈ {{2,4}}, got {}", self.k)));
        }
        if self.n <= self.k {
            return Err(GeoError::Usage(format!("need n > k, got k={}, n={}", self.k, self.n)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(GeoError::Usage(format!("radius must be positive, got {}", self.radius)));
        }
        Ok(())
    }

    /// Twice the quadrature nodes in every direction.
    pub fn refined(&self) -> Self {
        HyperbolicModel { m_height: 2 * self.m_height, m_angle: 2 * self.m_angle, ..self.clone() }
    }

    /// Chart `y = (t, θ…)` with `z = R e^{−t}` and `x' = R√(1 − e^{−2t}) ω(θ)`.
    ///
    /// In `t` the area density is `(1 − e^{−2t})^{(k−2)/2} e^{(k−1)t}` times the
    /// density of the boundary sphere, smooth up to `t = 0`, so Gauss–Legendre
    /// converges geometrically even for small `ε`.
    pub fn scene(&self) -> Scene {
        let (k, n, r) = (self.k, self.n, self.radius);
        let t = Expr::var(0);
        let z = Expr::mul(vec![Expr::c(r), Expr::exp(Expr::mul(vec![Expr::c(-1.0), t.clone()]))]);
        let rho = Expr::mul(vec![
            Expr::c(r),
            Expr::sqrt(Expr::sub(Expr::c(1.0), Expr::exp(Expr::mul(vec![Expr::c(-2.0), t])))),
        ]);
        let mut x: Vec<Expr> =
            scene::sphere_embedding(k - 1, 1).into_iter().map(|w| Expr::mul(vec![rho.clone(), w])).collect();
        x.resize(n - 1, Expr::c(0.0));
        x.push(z);
        let mut base = vec![0.7];
        base.extend(std::iter::repeat(1.0).take(k - 1));
        Scene {
            name: format!("hemisphere-k{k}-in-h{n}"),
            metric: MetricField::HyperbolicHalfSpace { n },
            patch: ImmersedPatch::new(ImmersionMap::Map { k, n, x }, base),
            domain: None,
        }
    }

    fn grid(&self, t_max: f64) -> QuadratureGrid {
        let mut rules = vec![Rule1D::GaussLegendre { a: 0.0, b: t_max, m: self.m_height }];
        for _ in 0..self.k - 2 {
            rules.push(Rule1D::GaussLegendre { a: 0.0, b: PI, m: self.m_angle });
        }
        // the integrand does not depend on the last angle
        rules.push(Rule1D::Trapezoid { a: 0.0, b: 2.0 * PI, m: 4 });
        QuadratureGrid { rules }
    }
}

/// `c_k = (−2π)^{k/2}/(k−1)!!`.
pub fn c_k(k: usize) -> f64 {
    (-2.0 * PI).powi(k as i32 / 2) / double_factorial(k - 1)
}

/// Hyperbolic area of the part of the hemisphere above height `ε`.
pub fn truncated_area(model: &HyperbolicModel, eps: f64) -> Result<f64> {
    model.validate()?;
    if !(eps > 0.0) {
        return Err(GeoError::Usage(format!("truncation height must be positive, got {eps}")));
    }
    if eps >= model.radius {
        return Err(GeoError::Usage(format!("empty region: ε = {eps} ≥ R = {}", model.radius)));
    }
    let sc = model.scene();
    let mut area = 0.0;
    for (_, y, w) in model.grid((model.radius / eps).ln()).nodes() {
        area += w * area_element(&sc, &y)?;
    }
    Ok(area)
}

/// `lo·(hi/lo)^{i/(count−1)}`.
pub fn geometric_eps(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1).max(1) as f64)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationFit {
    pub k: usize,
    pub radius: f64,
    pub samples: Vec<(f64, f64)>,
    /// Exponents of the basis `ε^{1−k}, ε^{3−k}, …, ε^{−1}, 1`.
    pub powers: Vec<i32>,
    pub coefficients: Vec<f64>,
    /// Constant term.
    pub renormalized_area: f64,
    /// `‖Ac − b‖/‖b‖`.
    pub relative_residual: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
    pub warning: Option<String>,
}

impl TruncationFit {
    pub fn coefficient(&self, power: i32) -> Option<f64> {
        self.powers.iter().position(|&p| p == power).map(|i| self.coefficients[i])
    }
}

pub fn basis_powers(k: usize) -> Vec<i32> {
    let mut p: Vec<i32> = (0..k / 2).map(|j| 1 - k as i32 + 2 * j as i32).collect();
    p.push(0);
    p
}

/// Least-squares fit of `samples` against `ε^{p}` for `p` in `powers`.
pub fn fit_expansion(k: usize, radius: f64, samples: Vec<(f64, f64)>, powers: &[i32]) -> Result<TruncationFit> {
    let (rows, cols) = (samples.len(), powers.len());
    if rows < cols {
        return Err(GeoError::Usage(format!("{rows} samples cannot determine {cols} coefficients")));
    }
    let a = DMatrix::from_fn(rows, cols, |i, j| samples[i].0.powi(powers[j]));
    let b = DVector::from_iterator(rows, samples.iter().map(|s| s.1));
    let scale: Vec<f64> = (0..cols).map(|j| a.column(j).amax()).collect();
    let mut scaled = a.clone();
    for (j, s) in scale.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }
    let svd = scaled.svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    let c = svd.solve(&b, 0.0).map_err(|e| GeoError::Numeric(format!("least squares failed: {e}")))?;
    let coefficients: Vec<f64> = c.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let fitted = &a * DVector::from_column_slice(&coefficients);
    let relative_residual = (fitted - &b).norm() / b.norm();
    let warning = (condition > COND_WARN || !condition.is_finite())
        .then(|| format!("ill-conditioned truncation fit: condition number {condition:.3e}"));
    let renormalized_area = powers.iter().position(|&p| p == 0).map(|i| coefficients[i]).unwrap_or(0.0);
    Ok(TruncationFit {
        k,
        radius,
        samples,
        powers: powers.to_vec(),
        coefficients,
        renormalized_area,
        relative_residual,
        condition,
        warning,
    })
}

/// Fit over `count` geometric samples in `[lo, hi]`.
pub fn fit_range(model: &HyperbolicModel, lo: f64, hi: f64, count: usize) -> Result<TruncationFit> {
    let samples = geometric_eps(lo, hi, count)
        .into_iter()
        .map(|e| truncated_area(model, e).map(|a| (e, a)))
        .collect::<Result<Vec<_>>>()?;
    fit_expansion(model.k, model.radius, samples, &basis_powers(model.k))
}

/// Default fit: 12 samples in `[10⁻³R, 10⁻¹R]`.
pub fn fit_renormalized_area(model: &HyperbolicModel) -> Result<TruncationFit> {
    fit_range(model, 1e-3 * model.radius, 1e-1 * model.radius, 12)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormGb {
    pub model: HyperbolicModel,
    pub fit: TruncationFit,
    pub euler: i32,
    /// `c_k χ`.
    pub expected: f64,
    pub residual: f64,
    /// Maxima over the interior sample points.
    pub max_h: f64,
    pub max_lt: f64,
    pub max_weyl: f64,
    /// `𝓦_Q`, and for `k = 4` also `¼|W̄|² − 𝓘 − 2|𝖥|² + 2𝖦²`.
    pub max_integrand: f64,
    pub points: usize,
}

/// Interior sample points of the chart, away from the top of the hemisphere
/// and the polar axes.
pub fn interior_points(model: &HyperbolicModel, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let s = i as f64 / count.max(1) as f64;
            let mut y = vec![0.3 + 2.5 * s];
            for d in 1..model.k {
                y.push(0.4 + 2.0 * ((s + 0.37 * d as f64) % 1.0));
            }
            y
        })
        .collect()
}

/// Renormalized area against `c_k χ(B^k)` with the pointwise integrand checks.
pub fn renorm_gb_check(model: &HyperbolicModel, points: usize) -> Result<RenormGb> {
    let fit = fit_renormalized_area(model)?;
    let sc = model.scene();
    let (mut max_h, mut max_lt, mut max_weyl, mut max_integrand) = (0f64, 0f64, 0f64, 0f64);
    for y in interior_points(model, points) {
        let sub = Submanifold::<f64>::new(&sc.metric, &sc.patch.at(y), &FrameOptions::default())?;
        let ext = ExtrinsicPack::new(&sub)?;
        let ev = Evaluator::new(&sub, &ext, InvOptions::default());
        max_h = max_h.max(ext.hsq.value().abs().sqrt());
        max_lt = max_lt.max(ext.lt.max_abs());
        max_weyl = max_weyl.max(ext.w_ad.max_abs());
        max_integrand = max_integrand.max(ev.w_q()?.value().abs());
        if model.k == 4 {
            let wb = sub.intr()?.w();
            let f = ext.f()?;
            let g = ev.g().value();
            let explicit =
                0.25 * sub.inner(wb, wb).value() - ev.i()?.value() - 2.0 * sub.inner(f, f).value() + 2.0 * g * g;
            max_integrand = max_integrand.max(explicit.abs());
        }
    }
    let euler = 1;
    let expected = c_k(model.k) * euler as f64;
    Ok(RenormGb {
        model: model.clone(),
        residual: (fit.renormalized_area - expected).abs(),
        fit,
        euler,
        expected,
        max_h,
        max_lt,
        max_weyl,
        max_integrand,
        points,
    })
}
