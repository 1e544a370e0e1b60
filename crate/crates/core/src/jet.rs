//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients `∂^m f(p) / m!` of a function of
//! `nvars` variables for every multi-index `m` of total degree `≤ order`, in a
//! graded order so that a lower-order truncation is a prefix of the vector.
//! Products truncate at the smaller order of the operands, derivatives lower the
//! order by one, so the order of every intermediate records exactly how many
//! derivatives of it are still known.
//!
//! Jets with `nvars == 0` are exact constants and combine with jets of any
//! shape.

use std::collections::HashMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use num_traits::{One, Zero};

use crate::config;
use crate::scalar::Real;

/// Largest number of jet variables (ambient dimension ≤ 8 plus one spare).
pub const MAX_VARS: usize = 9;

const EXACT: u8 = u8::MAX;

/// Monomial bookkeeping shared by all jets with the same number of variables.
pub(crate) struct Table {
    cap: usize,
    monos: Vec<Vec<u8>>,
    /// `count[d]` = number of monomials of degree `≤ d`.
    count: Vec<usize>,
    mul_i: Vec<u32>,
    mul_j: Vec<u32>,
    mul_r: Vec<u32>,
    /// `mul_end[d]` = number of product triples whose result has degree `≤ d`.
    mul_end: Vec<usize>,
    /// `up[v][i]` = index of `monos[i] + e_v`, or `u32::MAX` beyond the cap.
    up: Vec<Vec<u32>>,
    index: HashMap<Vec<u8>, usize>,
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of monomials of degree `≤ order` in `nvars` variables.
pub fn monomial_count(nvars: usize, order: usize) -> usize {
    binom(nvars + order, order)
}

impl Table {
    fn build(nvars: usize, cap: usize) -> Table {
        let mut monos: Vec<Vec<u8>> = Vec::new();
        let mut count = Vec::with_capacity(cap + 1);
        for d in 0..=cap {
            let mut deg_d = Vec::new();
            fill_degree(nvars, d, &mut vec![0u8; nvars], 0, &mut deg_d);
            monos.extend(deg_d);
            count.push(monos.len());
        }
        let index: HashMap<Vec<u8>, usize> = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let deg = |m: &[u8]| m.iter().map(|&e| e as usize).sum::<usize>();

        let mut triples: Vec<(usize, u32, u32, u32)> = Vec::new();
        let mut sum = vec![0u8; nvars];
        for (i, a) in monos.iter().enumerate() {
            let da = deg(a);
            for (j, b) in monos[..count[cap - da]].iter().enumerate() {
                for v in 0..nvars {
                    sum[v] = a[v] + b[v];
                }
                let r = index[&sum];
                triples.push((da + deg(b), i as u32, j as u32, r as u32));
            }
        }
        triples.sort_by_key(|t| (t.0, t.3, t.1));
        let mut mul_end = vec![0usize; cap + 1];
        for t in &triples {
            for e in mul_end.iter_mut().skip(t.0) {
                *e += 1;
            }
        }
        let up = (0..nvars)
            .map(|v| {
                monos
                    .iter()
                    .map(|m| {
                        let mut m2 = m.clone();
                        m2[v] += 1;
                        index.get(&m2).map(|&i| i as u32).unwrap_or(u32::MAX)
                    })
                    .collect()
            })
            .collect();
        Table {
            cap,
            monos,
            count,
            mul_i: triples.iter().map(|t| t.1).collect(),
            mul_j: triples.iter().map(|t| t.2).collect(),
            mul_r: triples.iter().map(|t| t.3).collect(),
            mul_end,
            up,
            index,
        }
    }

    pub(crate) fn count(&self, order: usize) -> usize {
        self.count[order]
    }
}

fn fill_degree(nvars: usize, left: usize, cur: &mut Vec<u8>, pos: usize, out: &mut Vec<Vec<u8>>) {
    if pos + 1 == nvars {
        cur[pos] = left as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e as u8;
        fill_degree(nvars, left - e, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

pub(crate) fn table(nvars: usize) -> &'static Table {
    static TABLES: [OnceLock<Table>; MAX_VARS + 1] = [const { OnceLock::new() }; MAX_VARS + 1];
    assert!((1..=MAX_VARS).contains(&nvars), "jet with {nvars} variables (max {MAX_VARS})");
    TABLES[nvars].get_or_init(|| Table::build(nvars, config::table_capacity()))
}

/// Truncated Taylor expansion in `nvars` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S> {
    nvars: u8,
    order: u8,
    c: Vec<S>,
}

impl<S: Real> Jet<S> {
    /// Exact constant, compatible with jets of any shape.
    pub fn constant(v: S) -> Self {
        Jet { nvars: 0, order: EXACT, c: vec![v] }
    }

    pub fn cst(v: f64) -> Self {
        Self::constant(S::from_f64(v))
    }

    /// Zero jet with a definite shape.
    pub fn zeros(nvars: usize, order: usize) -> Self {
        let t = table(nvars);
        assert!(order <= t.cap, "jet order {order} beyond table capacity {}", t.cap);
        Jet { nvars: nvars as u8, order: order as u8, c: vec![S::zero(); t.count(order)] }
    }

    /// The coordinate function `value + (x_i − p_i)`.
    pub fn var(nvars: usize, order: usize, i: usize, value: S) -> Self {
        let mut j = Self::zeros(nvars, order);
        j.c[0] = value;
        if order >= 1 {
            j.c[1 + i] = S::one();
        }
        j
    }

    /// Build from Taylor coefficients laid out in the graded order.
    pub fn from_coeffs(nvars: usize, order: usize, c: Vec<S>) -> Self {
        assert_eq!(c.len(), table(nvars).count(order));
        Jet { nvars: nvars as u8, order: order as u8, c }
    }

    pub fn is_constant(&self) -> bool {
        self.nvars == 0
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    /// Truncation order; `None` for exact constants.
    pub fn order(&self) -> Option<usize> {
        (self.order != EXACT).then_some(self.order as usize)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.c
    }

    pub fn value(&self) -> S {
        self.c[0]
    }

    /// Taylor coefficient of the monomial `m` (zero if beyond the stored order).
    pub fn coeff(&self, m: &[u8]) -> S {
        if self.is_constant() {
            return if m.iter().all(|&e| e == 0) { self.c[0] } else { S::zero() };
        }
        let t = table(self.nvars());
        match t.index.get(m) {
            Some(&i) if i < self.c.len() => self.c[i],
            _ => S::zero(),
        }
    }

    /// Partial derivative `∂^m f(p)`.
    pub fn partial(&self, m: &[u8]) -> S {
        let fact: f64 = m.iter().map(|&e| (1..=e as u64).product::<u64>() as f64).product();
        self.coeff(m) * S::from_f64(fact)
    }

    pub fn map<T: Real>(&self, f: impl Fn(S) -> T) -> Jet<T> {
        Jet { nvars: self.nvars, order: self.order, c: self.c.iter().map(|&x| f(x)).collect() }
    }

    /// Truncate to at most `order`.
    pub fn truncate(&self, order: usize) -> Self {
        if self.is_constant() || order >= self.order as usize {
            return self.clone();
        }
        let n = table(self.nvars()).count(order);
        Jet { nvars: self.nvars, order: order as u8, c: self.c[..n].to_vec() }
    }

    /// Partial derivative with respect to variable `v`; lowers the order by one.
    pub fn d(&self, v: usize) -> Self {
        if self.is_constant() {
            return Self::constant(S::zero());
        }
        assert!(self.order > 0, "jet depth exhausted: derivative of an order-0 jet");
        let t = table(self.nvars());
        let o = self.order as usize - 1;
        let n = t.count(o);
        let up = &t.up[v];
        let c = (0..n)
            .map(|i| {
                let k = t.monos[i][v] as f64 + 1.0;
                self.c[up[i] as usize] * S::from_f64(k)
            })
            .collect();
        Jet { nvars: self.nvars, order: o as u8, c }
    }

    /// `∂_v f(p)` without building the derivative jet.
    pub fn d_value(&self, v: usize) -> S {
        if self.is_constant() {
            return S::zero();
        }
        assert!(self.order > 0, "jet depth exhausted: derivative of an order-0 jet");
        self.c[1 + v]
    }

    pub fn scale(&self, s: S) -> Self {
        Jet { nvars: self.nvars, order: self.order, c: self.c.iter().map(|&x| x * s).collect() }
    }

    pub fn scale_f(&self, s: f64) -> Self {
        self.scale(S::from_f64(s))
    }

    pub fn add_scalar(&self, s: S) -> Self {
        let mut r = self.clone();
        r.c[0] += s;
        r
    }

    fn common_shape(&self, o: &Self) -> (usize, u8) {
        match (self.nvars, o.nvars) {
            (0, n) | (n, 0) => (n as usize, self.order.min(o.order)),
            (a, b) => {
                assert_eq!(a, b, "jets over different variable sets");
                (a as usize, self.order.min(o.order))
            }
        }
    }

    /// `self += a·b` without an intermediate allocation.
    pub fn add_mul(&mut self, a: &Self, b: &Self) {
        if a.is_constant() {
            self.add_scaled(b, a.c[0]);
            return;
        }
        if b.is_constant() {
            self.add_scaled(a, b.c[0]);
            return;
        }
        let (nv, ord) = a.common_shape(b);
        let (nv, ord) = self.common_shape(&Jet { nvars: nv as u8, order: ord, c: Vec::new() });
        self.reshape(nv, ord);
        let t = table(nv);
        let end = t.mul_end[ord as usize];
        let (ca, cb, cr) = (&a.c, &b.c, &mut self.c);
        for q in 0..end {
            let r = t.mul_r[q] as usize;
            cr[r] += ca[t.mul_i[q] as usize] * cb[t.mul_j[q] as usize];
        }
    }

    /// `self += s·a`.
    pub fn add_scaled(&mut self, a: &Self, s: S) {
        let (nv, ord) = self.common_shape(a);
        if nv == 0 {
            self.c[0] += a.c[0] * s;
            return;
        }
        self.reshape(nv, ord);
        let n = self.c.len().min(a.c.len());
        for i in 0..n {
            self.c[i] += a.c[i] * s;
        }
    }

    fn reshape(&mut self, nv: usize, ord: u8) {
        if self.nvars == 0 {
            let v = self.c[0];
            *self = Jet::zeros(nv, ord as usize);
            self.c[0] = v;
        } else if ord < self.order {
            let n = table(nv).count(ord as usize);
            self.c.truncate(n);
            self.order = ord;
        }
    }

    /// Compose with a scalar function given its Taylor coefficients
    /// `f^{(m)}(u0)/m!` at the constant term `u0`.
    pub fn series(&self, taylor: &[S]) -> Self {
        if self.is_constant() {
            return Self::constant(taylor[0]);
        }
        let o = self.order as usize;
        assert!(taylor.len() > o);
        let mut delta = self.clone();
        delta.c[0] = S::zero();
        let mut out = Jet::zeros(self.nvars(), o);
        out.c[0] = taylor[0];
        let mut pw = delta.clone();
        for m in 1..=o {
            out.add_scaled(&pw, taylor[m]);
            if m < o {
                pw = &pw * &delta;
            }
        }
        out
    }

    fn steps(&self) -> usize {
        if self.is_constant() {
            0
        } else {
            self.order as usize
        }
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let mut tc = vec![e; self.steps() + 1];
        let mut f = 1.0;
        for (m, c) in tc.iter_mut().enumerate().skip(1) {
            f *= m as f64;
            *c = e / S::from_f64(f);
        }
        self.series(&tc)
    }

    pub fn ln(&self) -> Self {
        let u = self.value();
        let mut tc = vec![u.ln()];
        let inv = u.recip();
        let mut p = inv;
        for m in 1..=self.steps() {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            tc.push(p * S::from_f64(sign / m as f64));
            p *= inv;
        }
        self.series(&tc)
    }

    /// `self^p` for real `p` (constant term must be positive unless `p` is a
    /// non-negative integer).
    pub fn powf(&self, p: f64) -> Self {
        let u = self.value();
        let mut tc = Vec::new();
        let mut binom = 1.0;
        for m in 0..=self.steps() {
            tc.push(u.powf(p - m as f64) * S::from_f64(binom));
            binom *= (p - m as f64) / (m as f64 + 1.0);
        }
        self.series(&tc)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Self {
        self.powf(-1.0)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cyc = [s, c, -s, -c];
        self.series(&trig_taylor(&cyc, self.steps()))
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cyc = [c, -s, -c, s];
        self.series(&trig_taylor(&cyc, self.steps()))
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }
}

fn trig_taylor<S: Real>(cyc: &[S; 4], o: usize) -> Vec<S> {
    let mut f = 1.0;
    (0..=o)
        .map(|m| {
            if m > 0 {
                f *= m as f64;
            }
            cyc[m % 4] / S::from_f64(f)
        })
        .collect()
}

impl<S: Real> Jet<S> {
    /// `ln`-free integer power by repeated multiplication (valid for any sign).
    pub fn powi(&self, e: u32) -> Self {
        let mut r = Jet::constant(S::one());
        for _ in 0..e {
            r = &r * self;
        }
        r
    }
}

impl<'a, S: Real> Add<&'a Jet<S>> for &'a Jet<S> {
    type Output = Jet<S>;
    fn add(self, o: &Jet<S>) -> Jet<S> {
        let mut r = self.clone();
        r.add_scaled(o, S::one());
        r
    }
}

impl<'a, S: Real> Sub<&'a Jet<S>> for &'a Jet<S> {
    type Output = Jet<S>;
    fn sub(self, o: &Jet<S>) -> Jet<S> {
        let mut r = self.clone();
        r.add_scaled(o, -S::one());
        r
    }
}

impl<'a, S: Real> Mul<&'a Jet<S>> for &'a Jet<S> {
    type Output = Jet<S>;
    fn mul(self, o: &Jet<S>) -> Jet<S> {
        if self.is_constant() {
            return o.scale(self.c[0]);
        }
        if o.is_constant() {
            return self.scale(o.c[0]);
        }
        let (nv, ord) = self.common_shape(o);
        let mut r = Jet::zeros(nv, ord as usize);
        r.add_mul(self, o);
        r
    }
}

impl<'a, S: Real> Neg for &'a Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        self.scale(-S::one())
    }
}

impl<S: Real> Add for Jet<S> {
    type Output = Jet<S>;
    fn add(mut self, o: Jet<S>) -> Jet<S> {
        if self.is_constant() && !o.is_constant() {
            return &o + &self;
        }
        self.add_scaled(&o, S::one());
        self
    }
}

impl<S: Real> Sub for Jet<S> {
    type Output = Jet<S>;
    fn sub(mut self, o: Jet<S>) -> Jet<S> {
        self.add_scaled(&o, -S::one());
        self
    }
}

impl<S: Real> Mul for Jet<S> {
    type Output = Jet<S>;
    fn mul(self, o: Jet<S>) -> Jet<S> {
        &self * &o
    }
}

impl<S: Real> Neg for Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        self.scale(-S::one())
    }
}

impl<S: Real> AddAssign<&Jet<S>> for Jet<S> {
    fn add_assign(&mut self, o: &Jet<S>) {
        self.add_scaled(o, S::one());
    }
}

impl<S: Real> SubAssign<&Jet<S>> for Jet<S> {
    fn sub_assign(&mut self, o: &Jet<S>) {
        self.add_scaled(o, -S::one());
    }
}

impl<S: Real> Zero for Jet<S> {
    fn zero() -> Self {
        Jet::constant(S::zero())
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
}

impl<S: Real> One for Jet<S> {
    fn one() -> Self {
        Jet::constant(S::one())
    }
}

/// Substitutes a jet in `n` variables into a map `x(y)` given as jets in `k`
/// variables.
///
/// Built once per evaluation point; every ambient tensor component is then a
/// linear combination of the cached monomial powers of the displacement.
#[derive(Clone, Debug)]
pub struct Composer<S> {
    inner_vars: usize,
    outer_vars: usize,
    order: usize,
    powers: Vec<Jet<S>>,
}

impl<S: Real> Composer<S> {
    /// `disp[a]` is `x^a(y) − x^a(y0)` (zero constant term), all in the same
    /// `k` variables. `order` caps the ambient monomial degree that will be
    /// substituted.
    pub fn new(disp: &[Jet<S>], order: usize) -> Self {
        let n = disp.len();
        let k = disp[0].nvars();
        let oy = disp.iter().filter_map(|d| d.order()).min().unwrap_or(order);
        let order = order.min(oy);
        let tn = table(n);
        let mut powers: Vec<Jet<S>> = Vec::with_capacity(tn.count(order));
        let mut one = Jet::zeros(k, order);
        one.c[0] = S::one();
        powers.push(one);
        for i in 1..tn.count(order) {
            let m = &tn.monos[i];
            let v = m.iter().position(|&e| e > 0).unwrap();
            let mut prev = m.clone();
            prev[v] -= 1;
            let p = &powers[tn.index[&prev]] * &disp[v].truncate(order);
            powers.push(p);
        }
        Composer { inner_vars: n, outer_vars: k, order, powers }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn compose(&self, f: &Jet<S>) -> Jet<S> {
        if f.is_constant() {
            return f.clone();
        }
        assert_eq!(f.nvars(), self.inner_vars);
        let o = self.order.min(f.order as usize);
        let tn = table(self.inner_vars);
        let nk = table(self.outer_vars).count(o);
        let mut out = Jet::zeros(self.outer_vars, o);
        for i in 0..tn.count(o) {
            let fc = f.c[i];
            if fc.is_zero() {
                continue;
            }
            let p = &self.powers[i].c;
            for r in 0..nk {
                out.c[r] += fc * p[r];
            }
        }
        out
    }
}

/// Multi-indices of degree `≤ order` in graded order (the coefficient layout).
pub fn monomials(nvars: usize, order: usize) -> Vec<Vec<u8>> {
    let t = table(nvars);
    t.monos[..t.count(order)].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_graded_prefix() {
        let m = monomials(3, 2);
        assert_eq!(m.len(), 10);
        assert_eq!(m[0], vec![0, 0, 0]);
        assert_eq!(m[1], vec![1, 0, 0]);
        assert_eq!(m[3], vec![0, 0, 1]);
        assert_eq!(monomial_count(4, 5), 126);
    }

    #[test]
    fn product_of_vars() {
        let x = Jet::<f64>::var(2, 2, 0, 0.0);
        let y = Jet::<f64>::var(2, 2, 1, 0.0);
        let p = &x * &y;
        assert_eq!(p.partial(&[1, 1]), 1.0);
        assert_eq!(p.partial(&[2, 0]), 0.0);
        assert_eq!(p.value(), 0.0);
    }

    #[test]
    fn exp_series_along_axis() {
        let x = Jet::<f64>::var(1, 4, 0, 0.0);
        let e = x.exp();
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (m, w) in want.iter().enumerate() {
            assert!((e.coeff(&[m as u8]) - w).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_lowers_order() {
        let x = Jet::<f64>::var(2, 3, 0, 1.5);
        let f = &(&x * &x) * &x;
        let d = f.d(0);
        assert_eq!(d.order(), Some(2));
        assert!((d.value() - 3.0 * 1.5 * 1.5).abs() < 1e-14);
        assert!((d.partial(&[1, 0]) - 6.0 * 1.5).abs() < 1e-14);
    }

    #[test]
    fn reciprocal_and_sqrt_roundtrip() {
        let x = Jet::<f64>::var(2, 4, 0, 0.3);
        let y = Jet::<f64>::var(2, 4, 1, -0.2);
        let u = &(&x * &x) + &(&y.exp() + &Jet::cst(1.0));
        let r = &u.sqrt() * &u.sqrt();
        let q = &u * &u.recip();
        for (a, b) in r.coeffs().iter().zip(u.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!((q.value() - 1.0).abs() < 1e-14);
        assert!(q.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn composition_matches_direct_substitution() {
        // f(x1, x2) = x1^2 x2 + exp(x2) around (1, 0); x(y) = (1 + y + y^2, sin y).
        let o = 4;
        let x1 = Jet::<f64>::var(2, o, 0, 1.0);
        let x2 = Jet::<f64>::var(2, o, 1, 0.0);
        let f = &(&(&x1 * &x1) * &x2) + &x2.exp();
        let y = Jet::<f64>::var(1, o, 0, 0.0);
        let d1 = &y + &(&y * &y);
        let d2 = y.sin();
        let comp = Composer::new(&[d1.clone(), d2.clone()], o);
        let g = comp.compose(&f);
        let a = d1.add_scalar(1.0);
        let direct = &(&(&a * &a) * &d2) + &d2.exp();
        for (u, v) in g.coeffs().iter().zip(direct.coeffs()) {
            assert!((u - v).abs() < 1e-13);
        }
    }
}
