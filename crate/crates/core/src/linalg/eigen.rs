//! Hermitian eigenpairs: dense for small problems, shift-invert subspace
//! iteration inside an energy window otherwise.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::band::HermitianBand;
use crate::error::{Error, Result};
use crate::rng::trial_rng;

type C = Complex64;

/// Below this dimension the window solver just diagonalizes densely.
pub const DENSE_LIMIT: usize = 500;

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Columns are eigenvectors, ordered like `values`.
    pub vectors: DMatrix<C>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct WindowOptions {
    /// Residual target relative to the operator norm bound.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for WindowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 300,
            seed: 0x5eed,
        }
    }
}

/// Full eigendecomposition, eigenvalues ascending.
pub fn dense_hermitian(m: DMatrix<C>) -> (Vec<f64>, DMatrix<C>) {
    let n = m.nrows();
    let se = nalgebra::SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn residuals(h: &HermitianBand, values: &[f64], vectors: &DMatrix<C>) -> Vec<f64> {
    let n = h.dim();
    let mut hv = vec![C::new(0.0, 0.0); n];
    values
        .iter()
        .enumerate()
        .map(|(c, &e)| {
            let v = vectors.column(c);
            h.apply(v.as_slice(), &mut hv);
            hv.iter()
                .zip(v.iter())
                .map(|(a, b)| (a - b * e).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Eigenpairs with eigenvalues in `[lo, hi)`.
pub fn window(h: &HermitianBand, lo: f64, hi: f64, opts: WindowOptions) -> Result<EigenPairs> {
    assert!(hi > lo, "empty window");
    let n = h.dim();
    let norm = h.norm_bound().max(1.0);
    if n <= DENSE_LIMIT {
        let (vals, vecs) = dense_hermitian(h.to_dense());
        let keep: Vec<usize> = (0..n).filter(|&i| vals[i] >= lo && vals[i] < hi).collect();
        let values: Vec<f64> = keep.iter().map(|&i| vals[i]).collect();
        let vectors = DMatrix::from_fn(n, keep.len(), |r, c| vecs[(r, keep[c])]);
        let res = residuals(h, &values, &vectors);
        return Ok(EigenPairs {
            values,
            vectors,
            residuals: res,
            iterations: 0,
        });
    }

    let k = h.count_below(hi) - h.count_below(lo);
    if k == 0 {
        return Ok(EigenPairs {
            values: vec![],
            vectors: DMatrix::zeros(n, 0),
            residuals: vec![],
            iterations: 0,
        });
    }
    let p = (3 * k + 10).min(n);
    let half = 0.5 * (hi - lo);
    let z = C::new(0.5 * (hi + lo), half);
    let lu = h.factor_shifted(z)?;

    let mut rng = trial_rng(opts.seed, n as u64);
    let mut y = DMatrix::from_fn(n, p, |_, _| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let mut hq = DMatrix::<C>::zeros(n, p);
    let mut worst = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        for mut col in y.column_iter_mut() {
            lu.solve_in_place(col.as_mut_slice());
        }
        let q = y.clone().qr().q();
        for c in 0..p {
            h.apply(q.column(c).as_slice(), hq.column_mut(c).as_mut_slice());
        }
        let g = q.adjoint() * &hq;
        let g = (&g + g.adjoint()) * C::new(0.5, 0.0);
        let (theta, s) = dense_hermitian(g);
        let x = &q * &s;
        let hx = &hq * &s;
        // Ritz values inside the window that have not converged yet are
        // spurious; the inertia count says how many genuine ones to expect.
        let tol = opts.tol * norm;
        let mut accepted = Vec::new();
        let mut res = Vec::new();
        worst = 0.0;
        for i in (0..p).filter(|&i| theta[i] >= lo && theta[i] < hi) {
            let r = (hx.column(i) - x.column(i) * C::new(theta[i], 0.0)).norm();
            if r <= tol {
                accepted.push(i);
                res.push(r);
            } else {
                worst = f64::max(worst, r);
            }
        }
        if accepted.len() == k {
            let values = accepted.iter().map(|&i| theta[i]).collect();
            let vectors = DMatrix::from_fn(n, k, |r, c| x[(r, accepted[c])]);
            return Ok(EigenPairs {
                values,
                vectors,
                residuals: res,
                iterations: iter,
            });
        }
        y = x;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: worst,
    })
}

/// Column-wise (H - z)^{-1} applied to `b`.
pub fn solve_columns(lu: &super::band::BandLu, b: &DMatrix<C>) -> DMatrix<C> {
    let mut x = b.clone();
    for mut col in x.column_iter_mut() {
        lu.solve_in_place(col.as_mut_slice());
    }
    x
}

pub fn to_dvector(v: &[C]) -> DVector<C> {
    DVector::from_column_slice(v)
}
