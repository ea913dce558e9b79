//! How far the spectral projector of a window inside the first band leaks
//! out of the free lowest Landau level: ‖E_Δ Q₀ E_Δ‖ and
//! Tr E_Δ / Tr(P₀ E_Δ P₀), as functions of B.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::common::{box_potential, complement, first_band, landau_box, max_singular};
use super::report::{ExperimentReport, Series};
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::HamiltonianMatrix;
use crate::potential::bump::profile;
use crate::potential::{CouplingSpec, SingleSiteBump};
use crate::rng::{stream_seed, substream};
use crate::row;
use crate::stats::{bootstrap, fit_line};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandProjectionParams {
    pub fields: Vec<f64>,
    pub m: f64,
    pub r_u: f64,
    /// Sites per side of Λ.
    pub side: u32,
    /// Potential-free collar in magnetic lengths.
    pub pad_lengths: f64,
    /// Largest flux per plaquette B h².
    pub flux: f64,
    /// Δ excludes (E₀ - c/B, E₀ + c/B).
    pub exclusion_c: f64,
    pub trials: usize,
    pub exponent_range: [f64; 2],
    pub trace_ratio_max: f64,
    pub bootstrap: usize,
}

impl Default for BandProjectionParams {
    fn default() -> Self {
        Self {
            fields: vec![10.0, 20.0, 40.0, 80.0],
            m: 8.0,
            r_u: 0.35,
            side: 1,
            pad_lengths: 5.0,
            flux: 0.2,
            exclusion_c: 1.0,
            trials: 8,
            exponent_range: [-0.7, -0.3],
            trace_ratio_max: 2.0,
            bootstrap: 200,
        }
    }
}

impl BandProjectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.fields.len() < 2 || self.fields.iter().any(|&b| !(b > 0.0)) {
            return Err(invalid("fields", "need at least two positive fields"));
        }
        if !(self.m > 0.0 && self.flux > 0.0 && self.flux <= std::f64::consts::PI) {
            return Err(invalid("flux", "need M > 0 and 0 < flux <= pi"));
        }
        if self.side == 0 || self.trials == 0 {
            return Err(invalid("trials", "side and trials must be positive"));
        }
        Ok(())
    }
}

/// Per-draw result.
#[derive(Debug, Clone, Copy)]
pub struct Leakage {
    /// Eigenvalues of H in Δ.
    pub states: usize,
    /// ‖E_Δ Q₀ E_Δ‖.
    pub norm: f64,
    /// Tr E_Δ / Tr(P₀ E_Δ P₀).
    pub trace_ratio: f64,
}

/// Leakage of the eigenvectors `u` of H with eigenvalues `values` inside
/// Δ = {c/B <= |E - e0| <= hi} out of Ran P₀ = span(v0).
pub fn leakage(v0: &DMatrix<num_complex::Complex64>, values: &[f64], u: &DMatrix<num_complex::Complex64>, e0: f64, lo: f64, hi: f64) -> Leakage {
    let keep: Vec<usize> = (0..values.len())
        .filter(|&i| {
            let d = (values[i] - e0).abs();
            d >= lo && d <= hi
        })
        .collect();
    let ud = DMatrix::from_fn(u.nrows(), keep.len(), |r, c| u[(r, keep[c])]);
    let inside = (v0.adjoint() * &ud).norm_squared();
    Leakage {
        states: keep.len(),
        norm: max_singular(&complement(v0, &ud)).powi(2),
        trace_ratio: if keep.is_empty() { f64::NAN } else { keep.len() as f64 / inside },
    }
}

pub fn band_projection_experiment(p: &BandProjectionParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new("band-projection", seed, p);
    let spec = CouplingSpec::uniform(p.m)?;
    let bump = SingleSiteBump::new(p.r_u, p.r_u / 2.0, profile(0.5))?;
    let m0 = p.m * bump.max_overlap() as f64;

    let mut raw = Series::new("draws", &["B", "draw", "states", "norm", "trace_ratio"]);
    let mut per_field: Vec<Vec<Leakage>> = vec![];
    for (bi, &b) in p.fields.iter().enumerate() {
        let grid = landau_box(b, p.side, p.pad_lengths / b.sqrt(), p.flux)?;
        let (free_vals, v0) = first_band(&HamiltonianMatrix::free(b, grid)?)?;
        let e0 = free_vals[0];
        let s = substream(seed, bi as u64);
        let draws: Vec<Leakage> = (0..p.trials as u64)
            .into_par_iter()
            .map(|t| {
                let v = box_potential(&grid, p.side, &spec, bump, stream_seed(s, t));
                let h = HamiltonianMatrix::assemble(b, &v, grid)?;
                let (vals, u) = first_band(&h)?;
                Ok(leakage(&v0, &vals, &u, e0, p.exclusion_c / b, m0 + 1.0))
            })
            .collect::<Result<_>>()?;
        for (t, d) in draws.iter().enumerate() {
            raw.push(row![b, t, d.states, d.norm, d.trace_ratio]);
        }
        per_field.push(draws);
    }
    rep.series.push(raw);

    let mean_norm = |draws: &[Leakage], idx: &[usize]| {
        let xs: Vec<f64> = idx.iter().map(|&i| draws[i]).filter(|d| d.states > 0).map(|d| d.norm).collect();
        if xs.is_empty() {
            f64::NAN
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let slope = |idx: &[usize]| {
        let ys: Vec<f64> = per_field.iter().map(|d| mean_norm(d, idx).ln()).collect();
        if ys.iter().any(|y| !y.is_finite()) {
            return f64::NAN;
        }
        let xs: Vec<f64> = p.fields.iter().map(|b| b.ln()).collect();
        fit_line(&xs, &ys).slope
    };
    let all: Vec<usize> = (0..p.trials).collect();
    let mut summary = Series::new("summary", &["B", "mean_norm", "max_trace_ratio"]);
    for (b, d) in p.fields.iter().zip(&per_field) {
        let tr = d.iter().filter(|x| x.states > 0).fold(0.0f64, |m, x| m.max(x.trace_ratio));
        summary.push(row![*b, mean_norm(d, &all), tr]);
    }
    rep.series.push(summary);
    let exponent = slope(&all);
    if !exponent.is_finite() {
        return Err(Error::Fit("no states in the window at some field".into()));
    }
    let ci = bootstrap(p.trials, p.bootstrap, substream(seed, 0xb9), |idx| slope(idx));
    rep.fit("norm_exponent", exponent, Some(ci));
    let [lo, hi] = p.exponent_range;
    rep.check(
        "band_projection_exponent",
        exponent >= lo && exponent <= hi,
        exponent,
        format!("fitted B-exponent of ||E_D Q0 E_D|| in [{lo}, {hi}]"),
    );
    let last = per_field.last().expect("at least two fields");
    let worst = last.iter().filter(|d| d.states > 0).fold(0.0f64, |m, d| m.max(d.trace_ratio));
    rep.check(
        "band_projection_trace_ratio",
        worst <= p.trace_ratio_max,
        worst,
        format!("Tr E_D / Tr(P0 E_D P0) <= {} at the largest B", p.trace_ratio_max),
    );
    Ok(rep.finish(t0))
}
