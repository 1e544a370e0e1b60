//! Dense labeled tensors.
//!
//! Every slot records which bundle it lives in (ambient, tangent, normal) and
//! whether the index is up or down. Contraction checks kinds and raises or
//! lowers with the matching metric block before tracing.

use std::fmt::Debug;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::jet::Jet;
use crate::scalar::{Dual, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Kind {
    Ambient,
    Tangent,
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Variance {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Slot {
    pub kind: Kind,
    pub variance: Variance,
    pub dim: usize,
}

impl Slot {
    pub fn down(kind: Kind, dim: usize) -> Slot {
        Slot { kind, variance: Variance::Down, dim }
    }
    pub fn up(kind: Kind, dim: usize) -> Slot {
        Slot { kind, variance: Variance::Up, dim }
    }
    fn flipped(self) -> Slot {
        let variance = match self.variance {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
        };
        Slot { variance, ..self }
    }
}

/// Ring elements a tensor can hold.
pub trait Elem: Clone + Debug {
    fn zero() -> Self;
    /// `self += a·b`.
    fn add_mul(&mut self, a: &Self, b: &Self);
    /// `self += s·a`.
    fn add_scaled(&mut self, a: &Self, s: f64);
    fn mul(&self, o: &Self) -> Self;
    fn max_abs(&self) -> f64;
    fn scaled(&self, s: f64) -> Self {
        let mut r = Self::zero();
        r.add_scaled(self, s);
        r
    }
}

macro_rules! impl_elem_real {
    ($t:ty) => {
        impl Elem for $t {
            fn zero() -> Self {
                <$t as Zero>::zero()
            }
            fn add_mul(&mut self, a: &Self, b: &Self) {
                *self += *a * *b;
            }
            fn add_scaled(&mut self, a: &Self, s: f64) {
                *self += *a * <$t as Real>::from_f64(s);
            }
            fn mul(&self, o: &Self) -> Self {
                *self * *o
            }
            fn max_abs(&self) -> f64 {
                Real::max_abs(*self)
            }
        }
    };
}

impl_elem_real!(f32);
impl_elem_real!(f64);

impl<R: Real> Elem for Dual<R> {
    fn zero() -> Self {
        <Dual<R> as Zero>::zero()
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += *a * *b;
    }
    fn add_scaled(&mut self, a: &Self, s: f64) {
        *self += *a * Dual::from_f64(s);
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn max_abs(&self) -> f64 {
        Real::max_abs(*self)
    }
}

impl<S: Real> Elem for Jet<S> {
    fn zero() -> Self {
        Jet::constant(S::zero())
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        Jet::add_mul(self, a, b);
    }
    fn add_scaled(&mut self, a: &Self, s: f64) {
        Jet::add_scaled(self, a, S::from_f64(s));
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn max_abs(&self) -> f64 {
        Jet::max_abs(self)
    }
}

/// Dense multi-index array with labeled slots (row-major).
#[derive(Clone, Debug)]
pub struct LabeledTensor<T> {
    slots: Vec<Slot>,
    data: Vec<T>,
}

impl<T: Elem> LabeledTensor<T> {
    pub fn zeros(slots: Vec<Slot>) -> Self {
        let n = slots.iter().map(|s| s.dim).product();
        LabeledTensor { slots, data: vec![T::zero(); n] }
    }

    pub fn scalar(v: T) -> Self {
        LabeledTensor { slots: Vec::new(), data: vec![v] }
    }

    pub fn from_fn(slots: Vec<Slot>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let dims: Vec<usize> = slots.iter().map(|s| s.dim).collect();
        let mut data = Vec::with_capacity(dims.iter().product());
        for_each_index(&dims, |idx| data.push(f(idx)));
        LabeledTensor { slots, data }
    }

    pub fn from_data(slots: Vec<Slot>, data: Vec<T>) -> Result<Self> {
        let n: usize = slots.iter().map(|s| s.dim).product();
        if n != data.len() {
            return Err(GeoError::Usage(format!("tensor data length {} != slot product {n}", data.len())));
        }
        Ok(LabeledTensor { slots, data })
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.dim).collect()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.slots.len());
        let mut o = 0;
        for (i, s) in idx.iter().zip(&self.slots) {
            debug_assert!(*i < s.dim);
            o = o * s.dim + i;
        }
        o
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut T {
        let o = self.offset(idx);
        &mut self.data[o]
    }

    pub fn map<U: Elem>(&self, f: impl Fn(&T) -> U) -> LabeledTensor<U> {
        LabeledTensor { slots: self.slots.clone(), data: self.data.iter().map(f).collect() }
    }

    pub fn relabel(mut self, slots: Vec<Slot>) -> Self {
        assert_eq!(slots.iter().map(|s| s.dim).collect::<Vec<_>>(), self.dims());
        self.slots = slots;
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.max_abs()))
    }

    pub fn add(&self, o: &Self) -> Self {
        self.lin(o, 1.0)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.lin(o, -1.0)
    }

    /// `self + s·o`.
    pub fn lin(&self, o: &Self, s: f64) -> Self {
        assert_eq!(self.dims(), o.dims(), "shape mismatch");
        let mut r = self.clone();
        for (a, b) in r.data.iter_mut().zip(&o.data) {
            a.add_scaled(b, s);
        }
        r
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|x| x.scaled(s))
    }

    /// Multiply every entry by the scalar element `s`.
    pub fn times(&self, s: &T) -> Self {
        self.map(|x| x.mul(s))
    }

    /// Reorder slots: result slot `i` is input slot `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let slots: Vec<Slot> = perm.iter().map(|&p| self.slots[p]).collect();
        let mut src = vec![0usize; perm.len()];
        LabeledTensor::from_fn(slots, |idx| {
            for (i, &p) in perm.iter().enumerate() {
                src[p] = idx[i];
            }
            self.get(&src).clone()
        })
    }

    /// Outer product.
    pub fn outer(&self, o: &Self) -> Self {
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&o.slots);
        let mut data = Vec::with_capacity(self.data.len() * o.data.len());
        for a in &self.data {
            for b in &o.data {
                data.push(a.mul(b));
            }
        }
        LabeledTensor { slots, data }
    }

    /// Trace over `(i, j)` pairs whose variances are already opposite.
    fn trace_pairs(&self, pairs: &[(usize, usize)]) -> Self {
        let paired: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        let free: Vec<usize> = (0..self.rank()).filter(|i| !paired.contains(i)).collect();
        let out_slots: Vec<Slot> = free.iter().map(|&i| self.slots[i]).collect();
        let sum_dims: Vec<usize> = pairs.iter().map(|&(a, _)| self.slots[a].dim).collect();
        let mut full = vec![0usize; self.rank()];
        LabeledTensor::from_fn(out_slots, |idx| {
            for (k, &f) in free.iter().enumerate() {
                full[f] = idx[k];
            }
            let mut acc = T::zero();
            for_each_index(&sum_dims, |s| {
                for (p, &(a, b)) in pairs.iter().enumerate() {
                    full[a] = s[p];
                    full[b] = s[p];
                }
                acc.add_scaled(self.get(&full), 1.0);
            });
            acc
        })
    }

    /// Contract `matrix_{ij}` into slot `slot` (index `j` of the matrix meets the
    /// slot, index `i` replaces it), relabeling the slot with `new`.
    pub fn apply_matrix(&self, slot: usize, matrix: &LabeledTensor<T>, new: Slot) -> Self {
        let d = self.slots[slot].dim;
        assert_eq!(matrix.dims(), vec![new.dim, d]);
        let mut slots = self.slots.clone();
        slots[slot] = new;
        let mut src = vec![0usize; self.rank()];
        LabeledTensor::from_fn(slots, |idx| {
            src.copy_from_slice(idx);
            let mut acc = T::zero();
            for j in 0..d {
                src[slot] = j;
                acc.add_mul(matrix.get(&[idx[slot], j]), self.get(&src));
            }
            acc
        })
    }

    /// Raise a down slot with the inverse metric of its kind.
    pub fn raise(&self, slot: usize, inv_metric: &LabeledTensor<T>) -> Result<Self> {
        let s = self.slots[slot];
        if s.variance != Variance::Down {
            return Err(GeoError::Usage(format!("slot {slot} is already up")));
        }
        Ok(self.apply_matrix(slot, inv_metric, s.flipped()))
    }

    /// Lower an up slot with the metric of its kind.
    pub fn lower(&self, slot: usize, metric: &LabeledTensor<T>) -> Result<Self> {
        let s = self.slots[slot];
        if s.variance != Variance::Up {
            return Err(GeoError::Usage(format!("slot {slot} is already down")));
        }
        Ok(self.apply_matrix(slot, metric, s.flipped()))
    }

    /// Contract slot pairs. Pairs must share a kind; when both indices have the
    /// same variance the first is raised or lowered with `metrics` first.
    pub fn contract(&self, pairs: &[(usize, usize)], metrics: &MetricBlocks<T>) -> Result<Self> {
        let mut t = self.clone();
        for &(a, b) in pairs {
            let (sa, sb) = (t.slots[a], t.slots[b]);
            if sa.kind != sb.kind {
                return Err(GeoError::Usage(format!(
                    "cannot contract {:?} slot {a} with {:?} slot {b}",
                    sa.kind, sb.kind
                )));
            }
            if sa.dim != sb.dim {
                return Err(GeoError::Usage(format!("dimension mismatch in pair ({a}, {b})")));
            }
            if sa.variance == sb.variance {
                let (g, ginv) = metrics.block(sa.kind)?;
                t = match sa.variance {
                    Variance::Down => t.raise(a, ginv)?,
                    Variance::Up => t.lower(a, g)?,
                };
            }
        }
        Ok(t.trace_pairs(pairs))
    }

    /// Average over permutations of `slots` (signed for `Antisym`), normalized
    /// by `1/p!`.
    pub fn sym_antisym(&self, slots: &[usize], kind: Symmetry) -> Result<Self> {
        let first = self.slots[slots[0]];
        for &s in slots {
            let sl = self.slots[s];
            if sl.kind != first.kind || sl.variance != first.variance || sl.dim != first.dim {
                return Err(GeoError::Usage("symmetrized slots must share kind, variance and dim".into()));
            }
        }
        let perms = permutations(slots.len());
        let w = 1.0 / perms.len() as f64;
        let mut src = vec![0usize; self.rank()];
        Ok(LabeledTensor::from_fn(self.slots.clone(), |idx| {
            let mut acc = T::zero();
            for (perm, sign) in &perms {
                src.copy_from_slice(idx);
                for (i, &p) in perm.iter().enumerate() {
                    src[slots[i]] = idx[slots[p]];
                }
                let s = match kind {
                    Symmetry::Sym => w,
                    Symmetry::Antisym => w * *sign as f64,
                };
                acc.add_scaled(self.get(&src), s);
            }
            acc
        }))
    }

    /// Value of a rank-0 tensor.
    pub fn value(&self) -> &T {
        assert!(self.slots.is_empty());
        &self.data[0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    Sym,
    Antisym,
}

/// Metric and inverse metric for each slot kind.
#[derive(Clone, Debug, Default)]
pub struct MetricBlocks<T> {
    pub ambient: Option<(LabeledTensor<T>, LabeledTensor<T>)>,
    pub tangent: Option<(LabeledTensor<T>, LabeledTensor<T>)>,
    pub normal: Option<(LabeledTensor<T>, LabeledTensor<T>)>,
}

impl<T: Elem> MetricBlocks<T> {
    fn block(&self, kind: Kind) -> Result<(&LabeledTensor<T>, &LabeledTensor<T>)> {
        let b = match kind {
            Kind::Ambient => &self.ambient,
            Kind::Tangent => &self.tangent,
            Kind::Normal => &self.normal,
        };
        b.as_ref().map(|(g, gi)| (g, gi)).ok_or_else(|| GeoError::Usage(format!("no {kind:?} metric block supplied")))
    }
}

/// All permutations of `0..p` with their signs.
pub fn permutations(p: usize) -> Vec<(Vec<usize>, i32)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i32)>) {
        if cur.len() == used.len() {
            let mut sign = 1;
            for i in 0..cur.len() {
                for j in i + 1..cur.len() {
                    if cur[i] > cur[j] {
                        sign = -sign;
                    }
                }
            }
            out.push((cur.clone(), sign));
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; p], &mut out);
    out
}

/// Row-major iteration over all multi-indices of the given extents.
pub fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    if dims.iter().any(|&d| d == 0) {
        return;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        f(&idx);
        let mut k = dims.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Summation-convention contraction, e.g. `einsum("ab,bc->ac", &[&x, &y])`.
///
/// Repeated letters are summed with no metric: callers raise indices first.
/// Output slots take the labels of the first input slot carrying each letter.
pub fn einsum<T: Elem>(spec: &str, inputs: &[&LabeledTensor<T>]) -> LabeledTensor<T> {
    let (lhs, out) = spec.split_once("->").expect("einsum spec needs ->");
    let terms: Vec<Vec<char>> = lhs.split(',').map(|t| t.trim().chars().collect()).collect();
    assert_eq!(terms.len(), inputs.len(), "einsum: {spec} arity");
    let out: Vec<char> = out.trim().chars().collect();
    let mut letters: Vec<char> = out.clone();
    let mut dim_of = std::collections::HashMap::new();
    let mut slot_of = std::collections::HashMap::new();
    for (t, inp) in terms.iter().zip(inputs) {
        assert_eq!(t.len(), inp.rank(), "einsum: {spec} rank mismatch");
        for (c, s) in t.iter().zip(inp.slots()) {
            if let Some(&d) = dim_of.get(c) {
                assert_eq!(d, s.dim, "einsum: {spec} letter {c} dim mismatch");
            } else {
                dim_of.insert(*c, s.dim);
                slot_of.insert(*c, *s);
            }
            if !letters.contains(c) {
                letters.push(*c);
            }
        }
    }
    let nout = out.len();
    let sum_dims: Vec<usize> = letters[nout..].iter().map(|c| dim_of[c]).collect();
    let pos: Vec<Vec<usize>> =
        terms.iter().map(|t| t.iter().map(|c| letters.iter().position(|l| l == c).unwrap()).collect()).collect();
    let out_slots: Vec<Slot> = out.iter().map(|c| slot_of[c]).collect();
    let mut full = vec![0usize; letters.len()];
    let mut sub: Vec<Vec<usize>> = terms.iter().map(|t| vec![0; t.len()]).collect();
    LabeledTensor::from_fn(out_slots, |idx| {
        full[..nout].copy_from_slice(idx);
        let mut acc = T::zero();
        for_each_index(&sum_dims, |s| {
            full[nout..].copy_from_slice(s);
            for (k, p) in pos.iter().enumerate() {
                for (q, &l) in p.iter().enumerate() {
                    sub[k][q] = full[l];
                }
            }
            match inputs.len() {
                1 => acc.add_scaled(inputs[0].get(&sub[0]), 1.0),
                2 => acc.add_mul(inputs[0].get(&sub[0]), inputs[1].get(&sub[1])),
                _ => {
                    let mut prod = inputs[0].get(&sub[0]).mul(inputs[1].get(&sub[1]));
                    for k in 2..inputs.len() - 1 {
                        prod = prod.mul(inputs[k].get(&sub[k]));
                    }
                    let last = inputs.len() - 1;
                    acc.add_mul(&prod, inputs[last].get(&sub[last]));
                }
            }
        });
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t_slots(n: usize, r: usize) -> Vec<Slot> {
        vec![Slot::down(Kind::Tangent, n); r]
    }

    #[test]
    fn identity_trace() {
        let id = LabeledTensor::from_fn(vec![Slot::down(Kind::Tangent, 4), Slot::up(Kind::Tangent, 4)], |i| {
            if i[0] == i[1] {
                1.0
            } else {
                0.0
            }
        });
        let tr = id.contract(&[(0, 1)], &MetricBlocks::default()).unwrap();
        assert_eq!(*tr.value(), 4.0);
    }

    #[test]
    fn kind_mismatch_is_usage_error() {
        let t = LabeledTensor::<f64>::zeros(vec![Slot::down(Kind::Tangent, 2), Slot::up(Kind::Normal, 2)]);
        assert!(matches!(t.contract(&[(0, 1)], &MetricBlocks::default()), Err(GeoError::Usage(_))));
    }

    #[test]
    fn symmetrization_normalization() {
        let mut t = LabeledTensor::<f64>::zeros(t_slots(3, 3));
        t.set(&[0, 1, 2], 6.0);
        let s = t.sym_antisym(&[0, 1, 2], Symmetry::Sym).unwrap();
        for p in permutations(3) {
            let idx: Vec<usize> = p.0.clone();
            assert!((s.get(&idx) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn antisym_of_symmetric_vanishes() {
        let t = LabeledTensor::<f64>::from_fn(t_slots(3, 2), |i| (i[0] + i[1]) as f64);
        let a = t.sym_antisym(&[0, 1], Symmetry::Antisym).unwrap();
        assert_eq!(a.max_abs(), 0.0);
    }

    #[test]
    fn einsum_matrix_product() {
        let a = LabeledTensor::<f64>::from_fn(t_slots(2, 2), |i| (i[0] * 2 + i[1]) as f64);
        let b = LabeledTensor::<f64>::from_fn(t_slots(2, 2), |i| (i[0] + 3 * i[1]) as f64 + 1.0);
        let c = einsum("ab,bc->ac", &[&a, &b]);
        assert_eq!(*c.get(&[1, 1]), 2.0 * 4.0 + 3.0 * 5.0);
    }
}
