//! Quadrature functionals of localized projector kernels.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::ProjectorKernel;
use crate::cutoff::{Cutoff, LocalizationPair};
use crate::error::{invalid, Result};
use crate::linalg::{operator_norm, NormOptions};


/// Largest node count for which the trace norm is taken from a dense
/// eigendecomposition.
pub const MAX_TRACE_NODES: usize = 4096;

/// Value at the requested spacing with a Richardson error estimate from one
/// step-halving: midpoint quadrature is second order, so the error of the
/// coarse value is about (4/3)|I_s - I_{s/2}|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub error: f64,
    pub spacing: f64,
    pub nodes: usize,
    /// Spacing resolves the magnetic length (≤ B^{-1/2}/4).
    pub reliable: bool,
}

impl QuadratureEstimate {
    fn zero(spacing: f64) -> Self {
        Self {
            value: 0.0,
            error: 0.0,
            spacing,
            nodes: 0,
            reliable: true,
        }
    }
}

pub fn resolves(kernel: &ProjectorKernel, spacing: f64) -> bool {
    spacing <= 0.25 * kernel.magnetic_length() * (1.0 + 1e-12)
}

/// Midpoint nodes on the support of χ: (position, χ value), and the cell
/// area.
pub fn cutoff_nodes(chi: &Cutoff, spacing: f64) -> Result<(Vec<([f64; 2], f64)>, f64)> {
    if chi.is_zero() {
        return Ok((vec![], 0.0));
    }
    let r = chi
        .support()
        .ok_or_else(|| invalid("chi", "cutoff support is unbounded"))?;
    if !(spacing > 0.0) {
        return Err(invalid("spacing", format!("{spacing} must be positive")));
    }
    let len = [r.hi[0] - r.lo[0], r.hi[1] - r.lo[1]];
    let n = len.map(|l| ((l / spacing) - 1e-9).ceil().max(1.0) as usize);
    let step = [len[0] / n[0] as f64, len[1] / n[1] as f64];
    let mut out = Vec::with_capacity(n[0] * n[1]);
    for j in 0..n[1] {
        for i in 0..n[0] {
            let x = [r.lo[0] + (i as f64 + 0.5) * step[0], r.lo[1] + (j as f64 + 0.5) * step[1]];
            let c = chi.eval(x);
            if c != 0.0 {
                out.push((x, c));
            }
        }
    }
    Ok((out, step[0] * step[1]))
}

fn hs_squared(kernel: &ProjectorKernel, pair: &LocalizationPair, spacing: f64) -> Result<(f64, usize)> {
    let (a, wa) = cutoff_nodes(&pair.chi1, spacing)?;
    let (b, wb) = cutoff_nodes(&pair.chi2, spacing)?;
    // Row sums in parallel, total in order: the result must not depend on
    // the thread count.
    let rows: Vec<f64> = a
        .par_iter()
        .map(|&(x, cx)| {
            b.iter()
                .map(|&(y, cy)| {
                    let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
                    let p = kernel.radial(r2);
                    cx * cx * cy * cy * p * p
                })
                .sum::<f64>()
        })
        .collect();
    let s: f64 = rows.iter().sum();
    Ok((s * wa * wb, a.len() + b.len()))
}

/// ‖χ₁ P_n χ₂‖_HS by double midpoint quadrature.
pub fn hs_norm_localized(kernel: &ProjectorKernel, pair: &LocalizationPair, spacing: f64) -> Result<QuadratureEstimate> {
    if pair.chi1.is_zero() || pair.chi2.is_zero() {
        return Ok(QuadratureEstimate::zero(spacing));
    }
    let (coarse, nodes) = hs_squared(kernel, pair, spacing)?;
    let (fine, _) = hs_squared(kernel, pair, spacing / 2.0)?;
    let value = coarse.sqrt();
    let err_sq = 4.0 / 3.0 * (coarse - fine).abs();
    Ok(QuadratureEstimate {
        value,
        // d sqrt(I) = dI / (2 sqrt I), with the exact bound when I ~ dI.
        error: if value > 0.0 { (err_sq / (2.0 * value)).min(err_sq.sqrt()) } else { err_sq.sqrt() },
        spacing,
        nodes,
        reliable: resolves(kernel, spacing),
    })
}

/// Largest singular value of χ₁ P_n χ₂ from the quadrature matrix.
pub fn op_norm_localized(kernel: &ProjectorKernel, pair: &LocalizationPair, spacing: f64) -> Result<QuadratureEstimate> {
    if pair.chi1.is_zero() || pair.chi2.is_zero() {
        return Ok(QuadratureEstimate::zero(spacing));
    }
    let at = |s: f64| -> Result<(f64, usize)> {
        let (a, wa) = cutoff_nodes(&pair.chi1, s)?;
        let (b, wb) = cutoff_nodes(&pair.chi2, s)?;
        let w = (wa * wb).sqrt();
        let m = DMatrix::from_fn(a.len(), b.len(), |i, j| kernel.eval(a[i].0, b[j].0) * (a[i].1 * b[j].1 * w));
        let madj = m.adjoint();
        let est = operator_norm(
            b.len(),
            |x| (&m * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec(),
            |y| (&madj * nalgebra::DVector::from_column_slice(y)).as_slice().to_vec(),
            NormOptions {
                tol: 1e-10,
                max_iter: 200,
                seed: 1,
            },
        );
        Ok((est.value, a.len() + b.len()))
    };
    let (coarse, nodes) = at(spacing)?;
    let (fine, _) = at(spacing / 2.0)?;
    Ok(QuadratureEstimate {
        value: coarse,
        error: 4.0 / 3.0 * (coarse - fine).abs(),
        spacing,
        nodes,
        reliable: resolves(kernel, spacing),
    })
}

/// ‖χ P_n χ‖₁ from the eigenvalues of the discretized kernel. The error
/// combines the Richardson estimate of the trace with the negative
/// eigenvalue mass, which vanishes for an exactly positive operator.
pub fn trace_norm_localized(kernel: &ProjectorKernel, chi: &Cutoff, spacing: f64) -> Result<QuadratureEstimate> {
    if chi.is_zero() {
        return Ok(QuadratureEstimate::zero(spacing));
    }
    let (a, w) = cutoff_nodes(chi, spacing)?;
    if a.len() > MAX_TRACE_NODES {
        return Err(invalid(
            "spacing",
            format!("{} nodes exceed the dense limit {MAX_TRACE_NODES}", a.len()),
        ));
    }
    let m = DMatrix::from_fn(a.len(), a.len(), |i, j| {
        kernel.eval(a[i].0, a[j].0) * (a[i].1 * a[j].1 * w)
    });
    let eig = m.symmetric_eigenvalues();
    let trace_norm: f64 = eig.iter().map(|l| l.abs()).sum();
    let trace: f64 = eig.iter().sum();
    let diag = |s: f64| -> Result<f64> {
        let (n, w) = cutoff_nodes(chi, s)?;
        Ok(n.iter().map(|&(_, c)| c * c).sum::<f64>() * w * kernel.radial(0.0))
    };
    let (c, f) = (diag(spacing)?, diag(spacing / 2.0)?);
    Ok(QuadratureEstimate {
        value: trace_norm,
        error: 4.0 / 3.0 * (c - f).abs() + (trace_norm - trace).abs(),
        spacing,
        nodes: a.len(),
        reliable: resolves(kernel, spacing),
    })
}
