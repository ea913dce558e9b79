//! Banded Hermitian storage, complex-shifted LU and inertia counts.
//!
//! Lattice Hamiltonians in row-major site order have half-bandwidth equal
//! to the row length, so dense factorizations are never needed.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Hermitian matrix with half-bandwidth `bw`, upper band stored row-wise:
/// row `i` holds columns `i..=i+bw` at offsets `0..=bw`.
#[derive(Debug, Clone)]
pub struct HermitianBand {
    n: usize,
    bw: usize,
    upper: Vec<C>,
}

impl HermitianBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            upper: vec![C::new(0.0, 0.0); n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Set the diagonal entry (real by Hermiticity).
    pub fn set_diag(&mut self, i: usize, v: f64) {
        self.upper[i * (self.bw + 1)] = C::new(v, 0.0);
    }

    /// Set `H[i][j]` for `i < j <= i + bw`; `H[j][i]` is its conjugate.
    pub fn set_upper(&mut self, i: usize, j: usize, v: C) {
        debug_assert!(j > i && j - i <= self.bw && j < self.n);
        self.upper[i * (self.bw + 1) + (j - i)] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> C {
        if i <= j {
            if j - i > self.bw {
                C::new(0.0, 0.0)
            } else {
                self.upper[i * (self.bw + 1) + (j - i)]
            }
        } else {
            self.get(j, i).conj()
        }
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.upper[i * (self.bw + 1)].re
    }

    /// y = H x.
    pub fn apply(&self, x: &[C], y: &mut [C]) {
        let (n, bw) = (self.n, self.bw);
        y.iter_mut().for_each(|v| *v = C::new(0.0, 0.0));
        for i in 0..n {
            let row = &self.upper[i * (bw + 1)..(i + 1) * (bw + 1)];
            let mut acc = row[0] * x[i];
            let xi = x[i];
            for (t, h) in row.iter().enumerate().skip(1) {
                let j = i + t;
                if j >= n {
                    break;
                }
                if h.re != 0.0 || h.im != 0.0 {
                    acc += h * x[j];
                    y[j] += h.conj() * xi;
                }
            }
            y[i] += acc;
        }
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bw);
                let hi = (i + self.bw).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).norm()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues strictly below `sigma`, by Sylvester's law of
    /// inertia applied to an LDL* factorization of H - sigma.
    pub fn count_below(&self, sigma: f64) -> usize {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut a = self.upper.clone();
        for i in 0..n {
            a[i * w].re -= sigma;
        }
        let scale = self.norm_bound().max(1.0);
        let tiny = scale * 1e-300_f64.max(f64::EPSILON * 1e-6);
        let mut negatives = 0usize;
        for k in 0..n {
            let mut d = a[k * w].re;
            if d.abs() < tiny {
                // Exact hit of an eigenvalue: treat as a positive pivot so the
                // count is of eigenvalues strictly below sigma.
                d = tiny;
            }
            if d < 0.0 {
                negatives += 1;
            }
            let kend = (k + bw).min(n - 1);
            let (head, tail) = a.split_at_mut((k + 1) * w);
            let rowk = &head[k * w..k * w + w];
            for i in k + 1..=kend {
                let aki = rowk[i - k];
                if aki.re == 0.0 && aki.im == 0.0 {
                    continue;
                }
                let l = aki.conj() / d;
                let rowi = &mut tail[(i - k - 1) * w..(i - k) * w];
                let len = kend - i + 1;
                for (dst, src) in rowi[..len].iter_mut().zip(&rowk[i - k..i - k + len]) {
                    *dst -= l * src;
                }
            }
        }
        negatives
    }

    /// LU factorization of H - z without pivoting. Requires Im z != 0 or a
    /// definite shift; the imaginary part keeps every pivot at least |Im z|
    /// in modulus.
    pub fn factor_shifted(&self, z: C) -> Result<BandLu> {
        let (n, bw) = (self.n, self.bw);
        let w = 2 * bw + 1;
        let mut a = vec![C::new(0.0, 0.0); n * w];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let hi = (i + bw).min(n - 1);
            for j in lo..=hi {
                a[i * w + (j + bw - i)] = self.get(i, j);
            }
            a[i * w + bw] -= z;
        }
        let floor = self.norm_bound().max(1.0) * f64::EPSILON * 1e-4;
        for k in 0..n {
            let piv = a[k * w + bw];
            if piv.norm() <= floor {
                return Err(Error::Singular {
                    row: k,
                    pivot: piv.norm(),
                });
            }
            let inv = piv.inv();
            let kend = (k + bw).min(n - 1);
            let (head, tail) = a.split_at_mut((k + 1) * w);
            let rowk = &head[k * w..k * w + w];
            for i in k + 1..=kend {
                let rowi = &mut tail[(i - k - 1) * w..(i - k) * w];
                let off = k + bw - i;
                let l = rowi[off] * inv;
                rowi[off] = l;
                if l.re == 0.0 && l.im == 0.0 {
                    continue;
                }
                let len = kend - k;
                let dst = &mut rowi[off + 1..off + 1 + len];
                let src = &rowk[bw + 1..bw + 1 + len];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= l * s;
                }
            }
        }
        Ok(BandLu { n, bw, a, shift: z })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<C> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

/// Packed LU factors of a banded matrix (unit lower L, upper U).
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    bw: usize,
    a: Vec<C>,
    shift: C,
}

impl BandLu {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> C {
        self.shift
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> C {
        self.a[i * (2 * self.bw + 1) + (j + self.bw - i)]
    }

    /// Overwrite `b` with (H - z)^{-1} b.
    pub fn solve_in_place(&self, b: &mut [C]) {
        let (n, bw) = (self.n, self.bw);
        let w = 2 * bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.a[i * w..(i + 1) * w];
            let mut s = b[i];
            for j in lo..i {
                s -= row[j + bw - i] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let row = &self.a[i * w..(i + 1) * w];
            let mut s = b[i];
            for j in i + 1..=hi {
                s -= row[j + bw - i] * b[j];
            }
            b[i] = s / row[bw];
        }
    }

    /// Overwrite `b` with (H - z)^{-*} b = (H - conj z)^{-1} b.
    pub fn solve_adjoint_in_place(&self, b: &mut [C]) {
        let (n, bw) = (self.n, self.bw);
        // U* is lower triangular: column-oriented forward sweep.
        for i in 0..n {
            b[i] /= self.at(i, i).conj();
            let bi = b[i];
            let hi = (i + bw).min(n - 1);
            for j in i + 1..=hi {
                b[j] -= self.at(i, j).conj() * bi;
            }
        }
        // L* is unit upper triangular: column-oriented backward sweep.
        for i in (0..n).rev() {
            let bi = b[i];
            let lo = i.saturating_sub(bw);
            for j in lo..i {
                b[j] -= self.at(i, j).conj() * bi;
            }
        }
    }
}
