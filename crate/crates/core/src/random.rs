//! Deterministic random metrics and points for property tests and scenes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::Poly;
use crate::metric::MetricField;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random polynomial with monomials of total degree in `degrees`, scaled so
/// that its sup-norm on the unit box is at most `bound`.
pub fn random_poly(
    rng: &mut impl Rng,
    nvars: usize,
    degrees: std::ops::RangeInclusive<u32>,
    terms: usize,
    bound: f64,
) -> Poly {
    let mut p = Poly::zero(nvars);
    let mut total = 0.0;
    for _ in 0..terms {
        let deg = rng.gen_range(degrees.clone());
        let vars: Vec<usize> = (0..deg).map(|_| rng.gen_range(0..nvars)).collect();
        let c: f64 = rng.gen_range(-bound..=bound);
        total += c.abs();
        p = p.plus(Poly::monomial(nvars, c, &vars));
    }
    if total > bound {
        p = p.scaled(bound / total);
    }
    p
}

/// `g = δ + Q(x)` with quadratic-through-quartic entries of sup-norm `≤ 0.05`
/// on the unit box (positive definite there for `n ≤ 8`).
pub fn random_polynomial_metric(n: usize, seed: u64) -> MetricField {
    let mut r = rng(seed);
    let q = (0..n * (n + 1) / 2).map(|_| random_poly(&mut r, n, 2..=4, 4, 0.05)).collect();
    MetricField::Polynomial { n, q }
}

/// Uniform point in `[-radius, radius]^n`.
pub fn random_point(rng: &mut impl Rng, n: usize, radius: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-radius..=radius)).collect()
}

/// Random orthogonal `m×m` matrix (Gram–Schmidt on a Gaussian-like sample).
pub fn random_orthogonal(rng: &mut impl Rng, m: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < m {
        let mut v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for u in &q {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= d * ui;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_metric_is_positive_on_the_box() {
        for seed in 0..5 {
            let g = random_polynomial_metric(6, seed);
            let p = random_point(&mut rng(seed + 100), 6, 1.0);
            assert!(g.jets::<f64>(&p, 0).is_ok());
        }
    }

    #[test]
    fn orthogonal_rows() {
        let q = random_orthogonal(&mut rng(3), 4);
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = (0..4).map(|k| q[i][k] * q[j][k]).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
