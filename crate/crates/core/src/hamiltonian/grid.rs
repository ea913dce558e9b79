use serde::{Deserialize, Serialize};

use crate::cutoff::{Cutoff, Rect};
use crate::error::{invalid, Result};

/// x ∧ y = x₂y₁ - x₁y₂, the sign under which the symmetric-gauge link
/// phases and the projector kernels take the form e^{-i(B/2) x∧y}.
#[inline]
pub fn wedge(x: [f64; 2], y: [f64; 2]) -> f64 {
    x[1] * y[0] - x[0] * y[1]
}

/// Square box of side `side` around `center`, sampled at spacing `h`.
/// Unknowns live on the interior nodes; the boundary nodes carry the
/// Dirichlet condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub center: [f64; 2],
    pub side: f64,
    pub h: f64,
    intervals: usize,
}

impl Grid {
    pub fn new(center: [f64; 2], side: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && side > 0.0) {
            return Err(invalid("h", format!("spacing {h} and side {side} must be positive")));
        }
        let r = side / h;
        let n = r.round();
        if (r - n).abs() > 1e-9 * r.max(1.0) || n < 2.0 {
            return Err(invalid("h", format!("side {side} is not a multiple (>= 2) of h = {h}")));
        }
        Ok(Self {
            center,
            side,
            h,
            intervals: n as usize,
        })
    }

    /// Interval count per axis, side / h.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Interior nodes per axis.
    pub fn nx(&self) -> usize {
        self.intervals - 1
    }

    pub fn len(&self) -> usize {
        self.nx() * self.nx()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn flux(&self, b: f64) -> f64 {
        b * self.h * self.h
    }

    pub fn rect(&self) -> Rect {
        Rect::centered(self.center, self.side / 2.0)
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx(), k / self.nx())
    }

    /// Node position with 0 ≤ i, j ≤ intervals (boundary nodes included).
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let o = self.side / 2.0;
        [
            self.center[0] - o + i as f64 * self.h,
            self.center[1] - o + j as f64 * self.h,
        ]
    }

    /// Position of interior unknown `k`.
    pub fn point(&self, k: usize) -> [f64; 2] {
        let (ix, iy) = self.coords(k);
        self.node(ix + 1, iy + 1)
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    pub fn translated(&self, a: [f64; 2]) -> Self {
        Self {
            center: [self.center[0] + a[0], self.center[1] + a[1]],
            ..*self
        }
    }

    /// A same-spacing grid whose nodes lie on this grid's node lattice.
    pub fn concentric(&self, side: f64) -> Result<Self> {
        Self::new(self.center, side, self.h)
    }

    pub fn sample(&self, chi: &Cutoff) -> Vec<f64> {
        self.points().map(|x| chi.eval(x)).collect()
    }

    /// L² inner product with cell weight h².
    pub fn inner(&self, a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> num_complex::Complex64 {
        let s: num_complex::Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
        s * self.h * self.h
    }

    pub fn norm(&self, a: &[num_complex::Complex64]) -> f64 {
        self.h * a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }
}
