//! Scalar types the engine is generic over.
//!
//! Everything above this module is written against [`Real`]. Plain `f32`/`f64`
//! give ordinary evaluation; [`Dual`] carries a first-order nilpotent part and
//! is what the conformal linearization runs on.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{Float, One, Zero};

/// Real-like scalar: a field with the handful of elementary functions jets need.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    fn from_f64(v: f64) -> Self;
    /// Primal (real) part as `f64`.
    fn re(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    /// `self^p` for real `p`; `self` must be positive unless `p` is an integer.
    fn powf(self, p: f64) -> Self;
    fn sqrt(self) -> Self {
        self.powf(0.5)
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn is_finite(self) -> bool;
    /// Largest magnitude over all components (used for residual norms).
    fn max_abs(self) -> f64;
}

macro_rules! impl_real_float {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn re(self) -> f64 {
                self as f64
            }
            #[inline]
            fn exp(self) -> Self {
                Float::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                Float::ln(self)
            }
            #[inline]
            fn sin(self) -> Self {
                Float::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                Float::cos(self)
            }
            #[inline]
            fn powf(self, p: f64) -> Self {
                if p == p.trunc() && p.abs() < 64.0 {
                    Float::powi(self, p as i32)
                } else {
                    Float::powf(self, p as $t)
                }
            }
            #[inline]
            fn sqrt(self) -> Self {
                Float::sqrt(self)
            }
            #[inline]
            fn is_finite(self) -> bool {
                Float::is_finite(self)
            }
            #[inline]
            fn max_abs(self) -> f64 {
                Float::abs(self) as f64
            }
        }
    };
}

impl_real_float!(f32);
impl_real_float!(f64);

/// Dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual<R> {
    pub re: R,
    pub eps: R,
}

impl<R: Real> Dual<R> {
    pub fn new(re: R, eps: R) -> Self {
        Dual { re, eps }
    }

    /// The infinitesimal `ε` itself.
    pub fn epsilon() -> Self {
        Dual { re: R::zero(), eps: R::one() }
    }

    fn chain(self, f: R, df: R) -> Self {
        Dual { re: f, eps: df * self.eps }
    }
}

impl<R: Real> Zero for Dual<R> {
    fn zero() -> Self {
        Dual { re: R::zero(), eps: R::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<R: Real> One for Dual<R> {
    fn one() -> Self {
        Dual { re: R::one(), eps: R::zero() }
    }
}

impl<R: Real> Add for Dual<R> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual { re: self.re + o.re, eps: self.eps + o.eps }
    }
}

impl<R: Real> Sub for Dual<R> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual { re: self.re - o.re, eps: self.eps - o.eps }
    }
}

impl<R: Real> Mul for Dual<R> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual { re: self.re * o.re, eps: self.re * o.eps + self.eps * o.re }
    }
}

impl<R: Real> Div for Dual<R> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = R::one() / o.re;
        Dual { re: self.re * inv, eps: (self.eps * o.re - self.re * o.eps) * inv * inv }
    }
}

impl<R: Real> Neg for Dual<R> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual { re: -self.re, eps: -self.eps }
    }
}

impl<R: Real> AddAssign for Dual<R> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<R: Real> SubAssign for Dual<R> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<R: Real> MulAssign for Dual<R> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<R: Real> DivAssign for Dual<R> {
    #[inline]
    fn div_assign(&mut self, o: Self) {
        *self = *self / o;
    }
}

impl<R: Real> Real for Dual<R> {
    fn from_f64(v: f64) -> Self {
        Dual { re: R::from_f64(v), eps: R::zero() }
    }
    fn re(self) -> f64 {
        self.re.re()
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn powf(self, p: f64) -> Self {
        let f = self.re.powf(p);
        self.chain(f, R::from_f64(p) * self.re.powf(p - 1.0))
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.eps.is_finite()
    }
    fn max_abs(self) -> f64 {
        self.re.max_abs().max(self.eps.max_abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_chain_rule() {
        let x = Dual::new(0.7_f64, 1.0);
        let y = (x * x).exp().sin();
        let h = 1e-6;
        let f = |t: f64| (t * t).exp().sin();
        let fd = (f(0.7 + h) - f(0.7 - h)) / (2.0 * h);
        assert!((y.re - f(0.7)).abs() < 1e-15);
        assert!((y.eps - fd).abs() < 1e-8);
    }

    #[test]
    fn dual_powf_and_division() {
        let x = Dual::new(2.0_f64, 1.0);
        let y = x.powf(-1.5) / (x + Dual::from_f64(1.0));
        let f = |t: f64| t.powf(-1.5) / (t + 1.0);
        let h = 1e-6;
        let fd = (f(2.0 + h) - f(2.0 - h)) / (2.0 * h);
        assert!((y.eps - fd).abs() < 1e-8);
    }
}
