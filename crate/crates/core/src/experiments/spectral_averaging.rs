//! Spectral averaging for H_λ = H₀ + λu with u = D²: the λ-average of
//! D E_λ(L) D has norm at most |L| ‖h‖_∞ / C₀.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Series};
use crate::error::{invalid, Result};
use crate::rng::{substream, trial_rng};
use crate::row;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralAveragingParams {
    pub dim: usize,
    pub instances: usize,
    /// Window lengths |L|; instance i uses `widths[i % widths.len()]`.
    pub widths: Vec<f64>,
    /// Ramp half-width of the smoothed indicator h of [-1, 1].
    pub ramp: f64,
    /// Gauss-Legendre nodes per smooth piece.
    pub order: usize,
    /// Quadrature error is estimated against order + 4 on every k-th instance.
    pub error_every: usize,
    pub tolerance: f64,
}

impl Default for SpectralAveragingParams {
    fn default() -> Self {
        Self {
            dim: 50,
            instances: 1000,
            widths: vec![0.05, 0.25, 1.0],
            ramp: 0.1,
            order: 5,
            error_every: 10,
            tolerance: 1e-3,
        }
    }
}

impl SpectralAveragingParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > 200 {
            return Err(invalid("dim", format!("{} not in 1..=200", self.dim)));
        }
        if self.instances == 0 || self.widths.is_empty() || self.widths.iter().any(|&w| w < 0.0) {
            return Err(invalid("widths", "need instances and non-negative widths"));
        }
        if !(self.ramp > 0.0 && self.ramp < 1.0) || self.order < 2 {
            return Err(invalid("ramp", "ramp in (0, 1) and order >= 2"));
        }
        if self.error_every == 0 {
            return Err(invalid("error_every", "must be positive"));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 + u * (6.0 * u - 15.0))
}

/// C² smoothed indicator of [-1, 1]: 1 on [-1+w, 1-w], 0 outside
/// [-1-w, 1+w], ‖h‖_∞ = 1.
pub fn smoothed_indicator(lambda: f64, w: f64) -> f64 {
    smoothstep((lambda + 1.0 + w) / (2.0 * w)) * smoothstep((1.0 + w - lambda) / (2.0 * w))
}

pub struct Instance {
    pub h0: DMatrix<f64>,
    /// Diagonal of D.
    pub d: Vec<f64>,
}

impl Instance {
    pub fn random(dim: usize, seed: u64, index: u64) -> Self {
        let mut rng = trial_rng(seed, index);
        let s = (dim as f64).sqrt();
        let mut h0 = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
        h0 = (&h0 + h0.transpose()) / (2.0 * s);
        let d = (0..dim).map(|_| rng.random_range(0.5..=1.0)).collect();
        Self { h0, d }
    }

    fn h(&self, lambda: f64) -> DMatrix<f64> {
        let mut m = self.h0.clone();
        for (i, &di) in self.d.iter().enumerate() {
            m[(i, i)] += lambda * di * di;
        }
        m
    }

    /// λ at which some eigenvalue of H_λ equals `level`: the spectrum of
    /// D^{-1}(level - H₀)D^{-1}.
    fn crossings(&self, level: f64) -> Vec<f64> {
        let n = self.d.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let v = if i == j { level - self.h0[(i, i)] } else { -self.h0[(i, j)] };
            v / (self.d[i] * self.d[j])
        });
        m.symmetric_eigenvalues().iter().copied().collect()
    }

    /// D E_λ(L) D.
    fn integrand(&self, lambda: f64, lo: f64, hi: f64) -> DMatrix<f64> {
        let n = self.d.len();
        let se = SymmetricEigen::new(self.h(lambda));
        let mut out = DMatrix::zeros(n, n);
        for (k, &e) in se.eigenvalues.iter().enumerate() {
            if e >= lo && e < hi {
                let v = se.eigenvectors.column(k);
                out += v * v.transpose();
            }
        }
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] *= self.d[i] * self.d[j];
            }
        }
        out
    }

    /// ∫ h(λ) D E_λ(L) D dλ for L = [lo, hi), piecewise Gauss-Legendre
    /// between crossings and ramp knots.
    pub fn average(&self, lo: f64, hi: f64, w: f64, nodes: &[(f64, f64)]) -> DMatrix<f64> {
        let n = self.d.len();
        let (a, b) = (-1.0 - w, 1.0 + w);
        let mut acc = DMatrix::zeros(n, n);
        if hi <= lo {
            return acc;
        }
        let (at_lo, at_hi) = (self.crossings(lo), self.crossings(hi));
        let mut cuts = vec![a, -1.0 + w, 1.0 - w, b];
        cuts.extend(at_lo.iter().chain(&at_hi).copied().filter(|&x| x > a && x < b));
        cuts.sort_by(f64::total_cmp);
        for seg in cuts.windows(2) {
            let (s, t) = (seg[0], seg[1]);
            if t - s <= 0.0 {
                continue;
            }
            let (mid, half) = (0.5 * (s + t), 0.5 * (t - s));
            // Eigenvalues increase with λ, so the number below a level at λ
            // is the number of its crossings above λ. Empty windows
            // contribute exactly zero.
            let above = |c: &[f64]| c.iter().filter(|&&x| x > mid).count();
            if above(&at_hi) == above(&at_lo) {
                continue;
            }
            for &(x, wt) in nodes {
                let l = mid + half * x;
                let hv = smoothed_indicator(l, w);
                if hv > 0.0 {
                    acc += self.integrand(l, lo, hi) * (wt * half * hv);
                }
            }
        }
        acc
    }
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().fold(0.0f64, |x, v| x.max(v.abs()))
}

pub fn spectral_averaging_experiment(p: &SpectralAveragingParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new("spectral-averaging", seed, p);
    let s = substream(seed, 0x5350_4156);
    let gl = gauss_legendre(p.order);
    let gl_fine = gauss_legendre(p.order + 4);
    let rows: Vec<(f64, f64, f64, Option<f64>)> = (0..p.instances as u64)
        .into_par_iter()
        .map(|i| {
            let inst = Instance::random(p.dim, s, i);
            let mut rng = trial_rng(s ^ 0x4c, i);
            let width = p.widths[i as usize % p.widths.len()];
            let c = rng.random_range(-2.0..2.0);
            let (lo, hi) = (c - 0.5 * width, c + 0.5 * width);
            let q = inst.average(lo, hi, p.ramp, &gl);
            // C₀ = 1 and ‖h‖_∞ = 1.
            let bound = if width > 0.0 { width } else { 1.0 };
            let err = (i as usize % p.error_every == 0)
                .then(|| spectral_norm(&(&q - inst.average(lo, hi, p.ramp, &gl_fine))) / bound);
            (width, c, spectral_norm(&q) / bound, err)
        })
        .collect();
    let mut series = Series::new("spectral_averaging", &["instance", "width", "center", "ratio", "quadrature_error"]);
    let (mut worst, mut worst_err) = (0.0f64, 0.0f64);
    for (i, &(w, c, ratio, err)) in rows.iter().enumerate() {
        series.push(row![i, w, c, ratio, err]);
        worst = worst.max(ratio);
        worst_err = worst_err.max(err.unwrap_or(0.0));
    }
    rep.fit("max_ratio", worst, None);
    rep.fit("max_quadrature_error", worst_err, None);
    rep.check(
        "spectral_averaging_bound",
        worst <= 1.0 + p.tolerance,
        worst,
        format!("max ||int h D E(L) D|| / (|L| ||h||/C0) <= 1 + {:e}", p.tolerance),
    );
    rep.series.push(series);
    Ok(rep.finish(t0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let g = gauss_legendre(6);
        let int: f64 = g.iter().map(|&(x, w)| w * x.powi(10)).sum();
        assert!((int - 2.0 / 11.0).abs() < 1e-14);
        assert!((g.iter().map(|p| p.1).sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trivial_windows_and_weights() {
        let inst = Instance::random(8, 1, 0);
        let gl = gauss_legendre(6);
        assert_eq!(spectral_norm(&inst.average(0.3, 0.3, 0.1, &gl)), 0.0);
        assert_eq!(smoothed_indicator(1.2, 0.1), 0.0);
        assert_eq!(smoothed_indicator(0.0, 0.1), 1.0);
    }

    #[test]
    fn scalar_case_is_exact() {
        // dim 1: H_λ = h0 + λ d², E_λ(L) = 1 iff h0 + λ d² ∈ L, so the
        // integral is d² |{λ : h0 + λd² ∈ L}| = |L| inside the plateau.
        let inst = Instance {
            h0: DMatrix::from_element(1, 1, 0.2),
            d: vec![0.8],
        };
        let q = inst.average(0.0, 0.3, 0.1, &gauss_legendre(8));
        assert!((q[(0, 0)] - 0.3).abs() < 1e-12, "{}", q[(0, 0)]);
    }

    #[test]
    fn small_run_within_bound() {
        let p = SpectralAveragingParams {
            dim: 12,
            instances: 20,
            ..Default::default()
        };
        let r = spectral_averaging_experiment(&p, 3).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
    }
}
