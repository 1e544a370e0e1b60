//! Ambient metrics on a coordinate chart.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config;
use crate::error::{GeoError, Result};
use crate::field::{coordinate_jets, Expr, Poly};
use crate::jet::Jet;
use crate::scalar::Real;
use crate::tensor::{Kind, LabeledTensor, Slot};

/// Symmetric metric `g_ab(x)` on an `n`-dimensional chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MetricField {
    /// Euclidean `δ`.
    Flat { n: usize },
    /// Unit round sphere in the stereographic chart, `4(1+|x|²)^{-2} δ`.
    RoundSphere { n: usize },
    /// Hyperbolic space in the upper half-space chart, `z^{-2} δ` with `z = x^{n-1}`.
    HyperbolicHalfSpace { n: usize },
    /// `Σ e^{2 f_a} (dx^a)²`.
    DiagonalExp { f: Vec<Poly> },
    /// `δ + Q` with `Q` given by its upper triangle, row by row.
    Polynomial { n: usize, q: Vec<Poly> },
    /// Arbitrary expressions for the upper triangle, row by row.
    General { n: usize, entries: Vec<Expr> },
    /// `e^{2tΥ} · base`.
    Conformal { base: Box<MetricField>, upsilon: Expr, t: f64 },
}

pub(crate) fn upper_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * n - a * (a + 1) / 2 + b
}

pub(crate) fn sym_slots(n: usize) -> Vec<Slot> {
    vec![Slot::down(Kind::Ambient, n); 2]
}

impl MetricField {
    pub fn dim(&self) -> usize {
        match self {
            MetricField::Flat { n }
            | MetricField::RoundSphere { n }
            | MetricField::HyperbolicHalfSpace { n }
            | MetricField::Polynomial { n, .. }
            | MetricField::General { n, .. } => *n,
            MetricField::DiagonalExp { f } => f.len(),
            MetricField::Conformal { base, .. } => base.dim(),
        }
    }

    /// Einstein constant `λ` with `Ric = λ(n−1)g`, when known in closed form.
    pub fn einstein_lambda(&self) -> Option<f64> {
        match self {
            MetricField::Flat { .. } => Some(0.0),
            MetricField::RoundSphere { .. } => Some(1.0),
            MetricField::HyperbolicHalfSpace { .. } => Some(-1.0),
            _ => None,
        }
    }

    /// Validate static shape data.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if !(2..=8).contains(&n) {
            return Err(GeoError::Config(format!("ambient dimension {n} outside 2..=8")));
        }
        match self {
            MetricField::DiagonalExp { f } => {
                if f.iter().any(|p| p.nvars != n) {
                    return Err(GeoError::Config("diagonal-exponential polynomials must use n variables".into()));
                }
            }
            MetricField::Polynomial { q, .. } => {
                if q.len() != n * (n + 1) / 2 || q.iter().any(|p| p.nvars != n) {
                    return Err(GeoError::Config("polynomial metric needs n(n+1)/2 entries in n variables".into()));
                }
            }
            MetricField::General { entries, .. } => {
                if entries.len() != n * (n + 1) / 2 || entries.iter().any(|e| e.arity() > n) {
                    return Err(GeoError::Config("general metric needs n(n+1)/2 entries in n variables".into()));
                }
            }
            MetricField::Conformal { base, upsilon, .. } => {
                base.validate()?;
                if upsilon.arity() > n {
                    return Err(GeoError::Config("conformal factor uses too many variables".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Component jets `g_ab` at `p`.
    pub fn jets<S: Real>(&self, p: &[f64], order: usize) -> Result<LabeledTensor<Jet<S>>> {
        config::check_order(order)?;
        let n = self.dim();
        if p.len() != n {
            return Err(GeoError::Usage(format!("point has {} coordinates, metric dimension {n}", p.len())));
        }
        let x = coordinate_jets::<S>(p, order);
        let g = self.eval_jets(&x);
        if !g.data().iter().all(|j| j.is_finite()) {
            return Err(GeoError::Numeric(format!("non-finite metric at {p:?}")));
        }
        check_positive(&g)?;
        Ok(g)
    }

    fn eval_jets<S: Real>(&self, x: &[Jet<S>]) -> LabeledTensor<Jet<S>> {
        let n = self.dim();
        let conformal = |factor: Jet<S>| {
            LabeledTensor::from_fn(sym_slots(n), |i| if i[0] == i[1] { factor.clone() } else { Jet::cst(0.0) })
        };
        match self {
            MetricField::Flat { .. } => conformal(Jet::cst(1.0)),
            MetricField::RoundSphere { .. } => {
                let mut r2 = Jet::cst(1.0);
                for xi in x {
                    r2.add_mul(xi, xi);
                }
                conformal(r2.powf(-2.0).scale_f(4.0))
            }
            MetricField::HyperbolicHalfSpace { .. } => conformal(x[n - 1].powf(-2.0)),
            MetricField::DiagonalExp { f } => {
                let e: Vec<Jet<S>> = f.iter().map(|p| p.eval_jets(x).scale_f(2.0).exp()).collect();
                LabeledTensor::from_fn(sym_slots(n), |i| if i[0] == i[1] { e[i[0]].clone() } else { Jet::cst(0.0) })
            }
            MetricField::Polynomial { q, .. } => {
                let v: Vec<Jet<S>> = q.iter().map(|p| p.eval_jets(x)).collect();
                LabeledTensor::from_fn(sym_slots(n), |i| {
                    let base = if i[0] == i[1] { 1.0 } else { 0.0 };
                    v[upper_index(n, i[0], i[1])].add_scalar(S::from_f64(base))
                })
            }
            MetricField::General { entries, .. } => {
                let v: Vec<Jet<S>> = entries.iter().map(|e| e.eval_jets(x)).collect();
                LabeledTensor::from_fn(sym_slots(n), |i| v[upper_index(n, i[0], i[1])].clone())
            }
            MetricField::Conformal { base, upsilon, t } => {
                let f = upsilon.eval_jets(x).scale_f(2.0 * t).exp();
                base.eval_jets(x).times(&f)
            }
        }
    }
}

/// Cholesky check of the value matrix.
pub fn check_positive<S: Real>(g: &LabeledTensor<Jet<S>>) -> Result<()> {
    let n = g.dims()[0];
    let m = DMatrix::from_fn(n, n, |a, b| g.get(&[a, b]).value().re());
    if m.cholesky().is_none() {
        return Err(GeoError::Numeric("metric is not positive definite".into()));
    }
    Ok(())
}

/// Multiply metric jets by `e^{2tΥ}` with a scalar `t` of any type (a dual `t`
/// gives the exact first-order variation).
pub fn rescale<S: Real>(g: &LabeledTensor<Jet<S>>, upsilon: &Jet<S>, t: S) -> LabeledTensor<Jet<S>> {
    let f = upsilon.scale(t + t).exp();
    g.times(&f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_index_layout() {
        assert_eq!(upper_index(3, 0, 0), 0);
        assert_eq!(upper_index(3, 0, 2), 2);
        assert_eq!(upper_index(3, 1, 1), 3);
        assert_eq!(upper_index(3, 2, 1), 4);
        assert_eq!(upper_index(3, 2, 2), 5);
    }

    #[test]
    fn sphere_chart_value_at_origin() {
        let g = MetricField::RoundSphere { n: 4 }.jets::<f64>(&[0.0; 4], 2).unwrap();
        assert_eq!(g.get(&[1, 1]).value(), 4.0);
        assert_eq!(g.get(&[1, 1]).partial(&[0, 1, 0, 0]), 0.0);
    }

    #[test]
    fn non_positive_metric_is_rejected() {
        let mut q = vec![Poly::zero(2); 3];
        q[0] = Poly::constant(2, -2.0);
        let m = MetricField::Polynomial { n: 2, q };
        assert!(matches!(m.jets::<f64>(&[0.0, 0.0], 1), Err(GeoError::Numeric(_))));
    }
}
