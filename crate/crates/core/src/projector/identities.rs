//! Self-validation of the kernel: idempotency, the Landau eigenrelation and
//! the diagonal density.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::ProjectorKernel;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityTolerances {
    /// Relative to B/2π.
    pub idempotency: f64,
    /// Relative to B sup|P|.
    pub eigenrelation: f64,
    pub diagonal: f64,
}

impl Default for IdentityTolerances {
    fn default() -> Self {
        Self {
            idempotency: 1e-6,
            eigenrelation: 1e-4,
            diagonal: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorCheck {
    pub n: u32,
    pub b: f64,
    /// Half-side of the integration box in magnetic lengths.
    pub box_lengths: f64,
    pub idempotency: f64,
    pub eigenrelation: f64,
    pub diagonal: f64,
    pub diagonal_expected: f64,
    pub pass: bool,
}

/// Probe points, in magnetic lengths, at which the identities are tested.
const PROBES: [[f64; 2]; 5] = [[0.0, 0.0], [0.5, 0.0], [0.0, -0.5], [0.3, 0.4], [-0.6, 0.2]];

/// sup |∫ P(x,z) P(z,y) dz - P(x,y)| / (B/2π) over probe pairs, with the
/// z-integral a midpoint rule on the box of half-side `box_lengths`
/// magnetic lengths at spacing `l_B / 6`.
pub fn idempotency_residual(k: &ProjectorKernel, box_lengths: f64) -> f64 {
    let lb = k.magnetic_length();
    let half = box_lengths * lb;
    let m = (2.0 * half / (lb / 6.0)).ceil() as usize;
    let step = 2.0 * half / m as f64;
    let probes: Vec<[f64; 2]> = PROBES.iter().map(|p| [p[0] * lb, p[1] * lb]).collect();
    let zs: Vec<[f64; 2]> = (0..m * m)
        .map(|q| [-half + ((q % m) as f64 + 0.5) * step, -half + ((q / m) as f64 + 0.5) * step])
        .collect();
    let scale = k.radial(0.0);
    let pairs: Vec<([f64; 2], [f64; 2])> = probes.iter().flat_map(|&x| probes.iter().map(move |&y| (x, y))).collect();
    pairs
        .par_iter()
        .map(|&(x, y)| {
            let s: C = zs.iter().map(|&z| k.eval(x, z) * k.eval(z, y)).sum::<C>() * (step * step);
            (s - k.eval(x, y)).norm() / scale
        })
        .reduce(|| 0.0, f64::max)
}

/// H_A f with f(x) = P(x, y), A = (B/2)(x₂, -x₁):
/// (p - A)² f = -Δf + 2i A·∇f + |A|² f, by fourth-order central differences.
fn landau_apply(k: &ProjectorKernel, x: [f64; 2], y: [f64; 2], step: f64) -> C {
    let f = |dx: f64, dy: f64| k.eval([x[0] + dx, x[1] + dy], y);
    let d1 = |g: &dyn Fn(f64) -> C| (g(-2.0 * step) - g(2.0 * step) + (g(step) - g(-step)) * 8.0) / (12.0 * step);
    let d2 = |g: &dyn Fn(f64) -> C| {
        (-(g(2.0 * step) + g(-2.0 * step)) + (g(step) + g(-step)) * 16.0 - g(0.0) * 30.0) / (12.0 * step * step)
    };
    let gx = |t: f64| f(t, 0.0);
    let gy = |t: f64| f(0.0, t);
    let lap = d2(&gx) + d2(&gy);
    let grad = [d1(&gx), d1(&gy)];
    let a = [0.5 * k.b * x[1], -0.5 * k.b * x[0]];
    let i = C::new(0.0, 1.0);
    -lap + i * 2.0 * (grad[0] * a[0] + grad[1] * a[1]) + f(0.0, 0.0) * (a[0] * a[0] + a[1] * a[1])
}

/// sup |H_A P(·,y) - (2n+1)B P(·,y)| / (B sup|P|) over probe points.
pub fn eigenrelation_residual(k: &ProjectorKernel) -> f64 {
    let lb = k.magnetic_length();
    let step = lb / 40.0;
    let y = [0.3 * lb, -0.2 * lb];
    let mut worst = 0.0f64;
    for gx in -8..=8 {
        for gy in -8..=8 {
            let x = [0.25 * gx as f64 * lb, 0.25 * gy as f64 * lb];
            let r = landau_apply(k, x, y, step) - k.eval(x, y) * k.energy();
            worst = worst.max(r.norm());
        }
    }
    worst / (k.b * k.radial(0.0).abs())
}

/// Default box half-side: the Laguerre factor fattens the tails of higher
/// levels.
pub fn default_box_lengths(n: u32) -> f64 {
    6.0 + 2.0 * n as f64
}

pub fn projector_identities_check(k: &ProjectorKernel, box_lengths: f64, tol: IdentityTolerances) -> ProjectorCheck {
    let idem = idempotency_residual(k, box_lengths);
    let eig = eigenrelation_residual(k);
    let diag = k.eval([0.1, -0.3], [0.1, -0.3]).re;
    let expected = k.b / (2.0 * std::f64::consts::PI);
    ProjectorCheck {
        n: k.n,
        b: k.b,
        box_lengths,
        idempotency: idem,
        eigenrelation: eig,
        diagonal: diag,
        diagonal_expected: expected,
        pass: idem < tol.idempotency && eig < tol.eigenrelation && (diag - expected).abs() <= tol.diagonal * expected,
    }
}
