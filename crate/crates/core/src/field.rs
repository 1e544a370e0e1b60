//! Evaluable scalar fields: sparse polynomials and small expression trees.

use serde::{Deserialize, Serialize};

use crate::config;
use crate::error::{GeoError, Result};
use crate::jet::Jet;
use crate::scalar::Real;

/// Sparse polynomial `Σ c·x^e` in `nvars` variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub nvars: usize,
    /// `(exponents, coefficient)` pairs.
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Poly {
        Poly { nvars, terms: vec![(vec![0; nvars], c)] }
    }

    /// The monomial `c·x_i·x_j…` given as a list of variable indices.
    pub fn monomial(nvars: usize, c: f64, vars: &[usize]) -> Poly {
        let mut e = vec![0u32; nvars];
        for &v in vars {
            e[v] += 1;
        }
        Poly { nvars, terms: vec![(e, c)] }
    }

    pub fn plus(mut self, o: Poly) -> Poly {
        assert_eq!(self.nvars, o.nvars);
        self.terms.extend(o.terms);
        self
    }

    pub fn scaled(mut self, s: f64) -> Poly {
        for t in &mut self.terms {
            t.1 *= s;
        }
        self
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(e, _)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>()).sum()
    }

    /// Evaluate on jets (one per variable).
    pub fn eval_jets<S: Real>(&self, x: &[Jet<S>]) -> Jet<S> {
        assert_eq!(x.len(), self.nvars);
        let maxe = self.terms.iter().flat_map(|(e, _)| e.iter().copied()).max().unwrap_or(0) as usize;
        let pows: Vec<Vec<Jet<S>>> = x
            .iter()
            .map(|xi| {
                let mut p = vec![Jet::cst(1.0)];
                for k in 1..=maxe {
                    let nxt = &p[k - 1] * xi;
                    p.push(nxt);
                }
                p
            })
            .collect();
        let mut acc = Jet::cst(0.0);
        for (e, c) in &self.terms {
            let mut m = Jet::cst(*c);
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = &m * &pows[v][k as usize];
                }
            }
            acc += &m;
        }
        acc
    }
}

/// Expression tree over the chart coordinates `x[0..]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Expr {
    Const { value: f64 },
    Var { index: usize },
    Poly { poly: Poly },
    Add { args: Vec<Expr> },
    Mul { args: Vec<Expr> },
    Neg { arg: Box<Expr> },
    Div { num: Box<Expr>, den: Box<Expr> },
    Pow { base: Box<Expr>, exponent: f64 },
    Exp { arg: Box<Expr> },
    Ln { arg: Box<Expr> },
    Sqrt { arg: Box<Expr> },
    Sin { arg: Box<Expr> },
    Cos { arg: Box<Expr> },
}

impl Expr {
    pub fn c(value: f64) -> Expr {
        Expr::Const { value }
    }
    pub fn var(index: usize) -> Expr {
        Expr::Var { index }
    }
    pub fn add(args: Vec<Expr>) -> Expr {
        Expr::Add { args }
    }
    pub fn mul(args: Vec<Expr>) -> Expr {
        Expr::Mul { args }
    }
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Add { args: vec![a, Expr::Neg { arg: Box::new(b) }] }
    }
    pub fn div(num: Expr, den: Expr) -> Expr {
        Expr::Div { num: Box::new(num), den: Box::new(den) }
    }
    pub fn pow(base: Expr, exponent: f64) -> Expr {
        Expr::Pow { base: Box::new(base), exponent }
    }
    pub fn exp(arg: Expr) -> Expr {
        Expr::Exp { arg: Box::new(arg) }
    }
    pub fn ln(arg: Expr) -> Expr {
        Expr::Ln { arg: Box::new(arg) }
    }
    pub fn sqrt(arg: Expr) -> Expr {
        Expr::Sqrt { arg: Box::new(arg) }
    }
    pub fn sin(arg: Expr) -> Expr {
        Expr::Sin { arg: Box::new(arg) }
    }
    pub fn cos(arg: Expr) -> Expr {
        Expr::Cos { arg: Box::new(arg) }
    }
    pub fn poly(poly: Poly) -> Expr {
        Expr::Poly { poly }
    }

    /// Largest variable index referenced plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const { .. } => 0,
            Expr::Var { index } => index + 1,
            Expr::Poly { poly } => poly.nvars,
            Expr::Add { args } | Expr::Mul { args } => args.iter().map(Expr::arity).max().unwrap_or(0),
            Expr::Div { num, den } => num.arity().max(den.arity()),
            Expr::Neg { arg }
            | Expr::Exp { arg }
            | Expr::Ln { arg }
            | Expr::Sqrt { arg }
            | Expr::Sin { arg }
            | Expr::Cos { arg } => arg.arity(),
            Expr::Pow { base, .. } => base.arity(),
        }
    }

    /// Evaluate on jets of the coordinates.
    pub fn eval_jets<S: Real>(&self, x: &[Jet<S>]) -> Jet<S> {
        match self {
            Expr::Const { value } => Jet::cst(*value),
            Expr::Var { index } => x[*index].clone(),
            Expr::Poly { poly } => poly.eval_jets(&x[..poly.nvars]),
            Expr::Add { args } => {
                let mut acc = Jet::cst(0.0);
                for a in args {
                    acc += &a.eval_jets(x);
                }
                acc
            }
            Expr::Mul { args } => {
                let mut acc = Jet::cst(1.0);
                for a in args {
                    acc = &acc * &a.eval_jets(x);
                }
                acc
            }
            Expr::Neg { arg } => -arg.eval_jets(x),
            Expr::Div { num, den } => &num.eval_jets(x) * &den.eval_jets(x).recip(),
            Expr::Pow { base, exponent } => {
                let b = base.eval_jets(x);
                if *exponent >= 0.0 && exponent.fract() == 0.0 {
                    b.powi(*exponent as u32)
                } else {
                    b.powf(*exponent)
                }
            }
            Expr::Exp { arg } => arg.eval_jets(x).exp(),
            Expr::Ln { arg } => arg.eval_jets(x).ln(),
            Expr::Sqrt { arg } => arg.eval_jets(x).sqrt(),
            Expr::Sin { arg } => arg.eval_jets(x).sin(),
            Expr::Cos { arg } => arg.eval_jets(x).cos(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let xs: Vec<Jet<f64>> = x.iter().map(|&v| Jet::constant(v)).collect();
        self.eval_jets(&xs).value()
    }
}

/// Coordinate jets `x_i = p_i + δx_i` at `point`.
pub fn coordinate_jets<S: Real>(point: &[f64], order: usize) -> Vec<Jet<S>> {
    let n = point.len();
    (0..n).map(|i| Jet::var(n, order, i, S::from_f64(point[i]))).collect()
}

/// Jet of `expr` at `point` to the given order.
pub fn jet_eval(expr: &Expr, point: &[f64], order: usize) -> Result<Jet<f64>> {
    config::check_order(order)?;
    if expr.arity() > point.len() {
        return Err(GeoError::Usage(format!(
            "expression uses {} variables but the point has {}",
            expr.arity(),
            point.len()
        )));
    }
    let j = expr.eval_jets(&coordinate_jets::<f64>(point, order));
    if !j.is_finite() {
        return Err(GeoError::Numeric(format!("non-finite jet at {point:?}")));
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_monomial() {
        let e = Expr::poly(Poly::monomial(2, 1.0, &[0, 1]));
        let j = jet_eval(&e, &[0.0, 0.0], 2).unwrap();
        assert_eq!(j.partial(&[1, 1]), 1.0);
        assert_eq!(j.partial(&[2, 0]), 0.0);
        assert_eq!(j.partial(&[1, 0]), 0.0);
    }

    #[test]
    fn appendix_f1_second_partials() {
        let (s, t) = (0.7, -1.3);
        let f1 = Poly::monomial(3, s, &[1, 1]).plus(Poly::monomial(3, t, &[1, 2]));
        let j = jet_eval(&Expr::poly(f1), &[0.0; 3], 2).unwrap();
        assert!((j.partial(&[0, 2, 0]) - 2.0 * s).abs() < 1e-15);
        assert!((j.partial(&[0, 1, 1]) - t).abs() < 1e-15);
    }

    #[test]
    fn budget_exceeded_is_config_error() {
        let e = Expr::var(0);
        assert!(matches!(jet_eval(&e, &[0.0], 40), Err(GeoError::Config(_))));
    }

    #[test]
    fn non_finite_is_numeric_error() {
        let e = Expr::ln(Expr::var(0));
        assert!(matches!(jet_eval(&e, &[0.0], 1), Err(GeoError::Numeric(_))));
    }
}
