//! Submanifold charts `y ↦ x(y)`.

use serde::{Deserialize, Serialize};

use crate::config;
use crate::error::{GeoError, Result};
use crate::field::{coordinate_jets, Expr};
use crate::jet::Jet;
use crate::scalar::Real;

/// The chart map of a `k`-dimensional submanifold of an `n`-dimensional chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ImmersionMap {
    /// `x = (y, u(y))`.
    Graph { k: usize, n: usize, u: Vec<Expr> },
    /// `x^a = x_a(y)`.
    Map { k: usize, n: usize, x: Vec<Expr> },
}

/// Affine reparameterization `y = A z + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImmersedPatch {
    pub map: ImmersionMap,
    /// Evaluation point in the chart coordinates (`z` when reparameterized).
    pub base: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<Affine>,
}

impl ImmersionMap {
    pub fn k(&self) -> usize {
        match self {
            ImmersionMap::Graph { k, .. } | ImmersionMap::Map { k, .. } => *k,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ImmersionMap::Graph { n, .. } | ImmersionMap::Map { n, .. } => *n,
        }
    }

    fn eval_jets<S: Real>(&self, y: &[Jet<S>]) -> Vec<Jet<S>> {
        match self {
            ImmersionMap::Graph { u, .. } => {
                let mut x: Vec<Jet<S>> = y.to_vec();
                x.extend(u.iter().map(|e| e.eval_jets(y)));
                x
            }
            ImmersionMap::Map { x, .. } => x.iter().map(|e| e.eval_jets(y)).collect(),
        }
    }
}

impl ImmersedPatch {
    pub fn new(map: ImmersionMap, base: Vec<f64>) -> Self {
        ImmersedPatch { map, base, affine: None }
    }

    pub fn k(&self) -> usize {
        self.map.k()
    }

    pub fn n(&self) -> usize {
        self.map.n()
    }

    pub fn at(&self, base: Vec<f64>) -> Self {
        ImmersedPatch { base, ..self.clone() }
    }

    pub fn with_affine(&self, a: Vec<Vec<f64>>, c: Vec<f64>) -> Self {
        ImmersedPatch { affine: Some(Affine { a, c }), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let (k, n) = (self.k(), self.n());
        if k == 0 || k >= n {
            return Err(GeoError::Config(format!("need 1 ≤ k < n, got k={k}, n={n}")));
        }
        if self.base.len() != k {
            return Err(GeoError::Config(format!("base point has {} coordinates, k = {k}", self.base.len())));
        }
        let count = match &self.map {
            ImmersionMap::Graph { u, .. } => u.len() + k,
            ImmersionMap::Map { x, .. } => x.len(),
        };
        if count != n {
            return Err(GeoError::Config(format!("immersion has {count} components, n = {n}")));
        }
        let arity = match &self.map {
            ImmersionMap::Graph { u, .. } => u.iter().map(Expr::arity).max().unwrap_or(0),
            ImmersionMap::Map { x, .. } => x.iter().map(Expr::arity).max().unwrap_or(0),
        };
        if arity > k {
            return Err(GeoError::Config(format!("immersion uses {arity} parameters, k = {k}")));
        }
        if let Some(af) = &self.affine {
            if af.a.len() != k || af.a.iter().any(|r| r.len() != k) || af.c.len() != k {
                return Err(GeoError::Config("affine reparameterization must be k×k".into()));
            }
        }
        Ok(())
    }

    /// Jets of `x^a` in the chart variables at the base point.
    pub fn jets<S: Real>(&self, order: usize) -> Result<Vec<Jet<S>>> {
        config::check_order(order)?;
        self.validate()?;
        let z = coordinate_jets::<S>(&self.base, order);
        let y = match &self.affine {
            None => z,
            Some(af) => (0..self.k())
                .map(|i| {
                    let mut s = Jet::cst(af.c[i]);
                    for (j, zj) in z.iter().enumerate() {
                        s.add_scaled(zj, S::from_f64(af.a[i][j]));
                    }
                    s
                })
                .collect(),
        };
        let x = self.map.eval_jets(&y);
        if !x.iter().all(|j| j.is_finite()) {
            return Err(GeoError::Numeric(format!("non-finite immersion at {:?}", self.base)));
        }
        Ok(x)
    }

    /// Ambient point `x(base)`.
    pub fn point(&self) -> Result<Vec<f64>> {
        Ok(self.jets::<f64>(0)?.iter().map(|j| j.value()).collect())
    }
}
