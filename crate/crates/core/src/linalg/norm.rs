//! Operator norms of implicitly given maps via Lanczos on A*A.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::trial_rng;

type C = Complex64;

#[derive(Debug, Clone, Copy)]
pub struct NormOptions {
    /// Relative accuracy target for the largest singular value.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iter: 80,
            seed: 0x6e6f726d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Residual-based relative error bound on `value`.
    pub rel_error: f64,
    pub iterations: usize,
}

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value of A : C^n -> C^m, given `a` (x -> Ax) and
/// `a_adj` (y -> A*y). Lanczos with full reorthogonalization on A*A.
pub fn operator_norm<F, G>(n: usize, mut a: F, mut a_adj: G, opts: NormOptions) -> NormEstimate
where
    F: FnMut(&[C]) -> Vec<C>,
    G: FnMut(&[C]) -> Vec<C>,
{
    let mut rng = trial_rng(opts.seed, n as u64);
    let mut q: Vec<C> = (0..n)
        .map(|_| C::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let q0 = norm(&q);
    q.iter_mut().for_each(|x| *x /= q0);
    let mut basis: Vec<Vec<C>> = vec![];
    let mut alpha: Vec<f64> = vec![];
    let mut beta: Vec<f64> = vec![];
    let steps = opts.max_iter.min(n).max(1);
    let mut best = NormEstimate {
        value: 0.0,
        rel_error: f64::INFINITY,
        iterations: 0,
    };
    for k in 0..steps {
        let mut w = a_adj(&a(&q));
        let al = dot(&q, &w).re;
        basis.push(q.clone());
        alpha.push(al);
        for b in &basis {
            let c = dot(b, &w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        for b in &basis {
            let c = dot(b, &w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let bt = norm(&w);
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let se = SymmetricEigen::new(t);
        let (imax, &theta) = se
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .unwrap();
        let theta = theta.max(0.0);
        // Residual of the top Ritz pair for A*A; sigma error is half the
        // relative eigenvalue error to first order.
        let res = bt * se.eigenvectors[(m - 1, imax)].abs();
        let rel = if theta > 0.0 { 0.5 * res / theta } else { f64::INFINITY };
        best = NormEstimate {
            value: theta.sqrt(),
            rel_error: rel,
            iterations: k + 1,
        };
        if theta == 0.0 && bt == 0.0 {
            best.rel_error = 0.0;
            break;
        }
        if rel <= opts.tol || bt <= 1e-14 * theta.max(1e-300) {
            best.rel_error = rel.min(opts.tol);
            break;
        }
        beta.push(bt);
        q = w.iter().map(|x| x / bt).collect();
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    fn random(m: usize, n: usize, seed: u64) -> DMatrix<C> {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| C::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))
    }

    #[test]
    fn matches_dense_svd() {
        for (m, n, seed) in [(30, 20, 1), (20, 45, 2), (60, 60, 3)] {
            let a = random(m, n, seed);
            let exact = a.clone().svd(false, false).singular_values.max();
            let est = operator_norm(
                n,
                |x| (&a * DMatrix::from_column_slice(n, 1, x)).as_slice().to_vec(),
                |y| (a.adjoint() * DMatrix::from_column_slice(m, 1, y)).as_slice().to_vec(),
                NormOptions { tol: 1e-10, max_iter: 200, seed: 4 },
            );
            assert!((est.value - exact).abs() < 1e-8 * exact, "{} vs {exact}", est.value);
        }
    }

    #[test]
    fn zero_map() {
        let est = operator_norm(10, |x| vec![C::new(0.0, 0.0); x.len()], |y| y.to_vec(), NormOptions::default());
        assert_eq!(est.value, 0.0);
    }
}
