//! Integrated density of states N(E) = ⟨#{eigenvalues ≤ E}⟩ / |Λ| from
//! inertia counts, its Landau steps, and its continuity at the lowest
//! Landau energy with and without covering single-site bumps.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::common::site_box;
use super::report::{ExperimentReport, Series};
use crate::error::{invalid, Result};
use crate::hamiltonian::{Grid, HamiltonianMatrix};
use crate::potential::bump::profile;
use crate::potential::{sample_couplings, CouplingSpec, SingleSiteBump, SiteRegion};
use crate::rng::{stream_seed, substream};
use crate::row;
use crate::stats::{mean, variance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdsParams {
    pub b: f64,
    pub h: f64,
    pub side: u32,
    pub m: f64,
    /// Support radius of the standard (non-covering) bump.
    pub r_u: f64,
    /// Support radius of the covering bump (> 1/√2).
    pub covering_r_u: f64,
    pub trials: usize,
    /// Half-widths w of the windows (E₀ - w, E₀ + w), as fractions of B.
    pub window_fractions: Vec<f64>,
    pub step_tolerance: f64,
    /// Required growth of the modulus without covering.
    pub min_growth: f64,
    /// Allowed growth of the modulus with covering.
    pub max_bounded_growth: f64,
    /// Exclusion half-width c/B around each Landau energy.
    pub exclusion_c: f64,
    /// Energies of the IDS curve, as fractions of B.
    pub curve_fractions: Vec<f64>,
    /// Largest |z| between the two half-batches of the curve.
    pub batch_z: f64,
}

impl Default for IdsParams {
    fn default() -> Self {
        Self {
            b: 20.0,
            h: 0.1,
            side: 6,
            m: 4.0,
            r_u: 0.35,
            covering_r_u: 1.0,
            trials: 40,
            window_fractions: vec![0.02, 0.01, 0.005, 0.0025],
            step_tolerance: 0.2,
            min_growth: 3.0,
            max_bounded_growth: 2.0,
            exclusion_c: 4.0,
            curve_fractions: (0..=24).map(|k| 0.5 + 0.125 * k as f64).collect(),
            batch_z: 4.0,
        }
    }
}

impl IdsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.h > 0.0 && self.m > 0.0) || self.side == 0 {
            return Err(invalid("b", "B, h, M and side must be positive"));
        }
        if self.trials < 2 {
            return Err(invalid("trials", "need at least two draws"));
        }
        if self.window_fractions.len() < 2 || self.window_fractions.iter().any(|&w| !(w > 0.0)) {
            return Err(invalid("window_fractions", "need at least two positive windows"));
        }
        if self.curve_fractions.is_empty() {
            return Err(invalid("curve_fractions", "empty energy grid"));
        }
        Ok(())
    }
}

/// Lowest eigenvalue of the free lattice operator on a box of side `side`:
/// the discrete lowest Landau energy, up to exponentially small edge and
/// tunnelling corrections.
pub fn lattice_landau_energy(b: f64, h: f64, side: f64) -> Result<f64> {
    let hm = HamiltonianMatrix::free(b, Grid::new([0.0, 0.0], side, h)?)?;
    let (mut lo, mut hi) = (0.0, 2.0 * b);
    while hi - lo > 1e-12 * b {
        let mid = 0.5 * (lo + hi);
        if hm.count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// H_A + V on `grid` with couplings on every site whose bump reaches it.
fn draw(b: f64, grid: Grid, spec: &CouplingSpec, bump: SingleSiteBump, seed: u64) -> Result<HamiltonianMatrix> {
    let r = grid.rect();
    let v = sample_couplings(spec, bump, SiteRegion::covering_box(r.lo, r.hi, bump.r_u), seed);
    HamiltonianMatrix::assemble(b, &v, grid)
}

pub fn ids_experiment(p: &IdsParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new("ids", seed, p);
    let grid = site_box(p.side, p.h)?;
    let area = grid.area();
    let density = p.b / (2.0 * std::f64::consts::PI);

    // Free steps: counts below the mid-gaps 2B and 4B.
    let free = HamiltonianMatrix::free(p.b, grid)?;
    let below = [0.0, free.count_below(2.0 * p.b) as f64, free.count_below(4.0 * p.b) as f64];
    let mut steps = Series::new("free_steps", &["level", "height", "expected", "relative_error"]);
    let mut worst_step = 0.0f64;
    for n in 0..2 {
        let height = (below[n + 1] - below[n]) / area;
        let rel = (height - density).abs() / density;
        worst_step = worst_step.max(rel);
        steps.push(row![n, height, density, rel]);
    }
    rep.series.push(steps);
    rep.check(
        "free_step_heights",
        worst_step <= p.step_tolerance,
        worst_step,
        format!("|step - B/2pi| / (B/2pi) <= {}", p.step_tolerance),
    );

    let spec = CouplingSpec::uniform(p.m)?;
    let plain = SingleSiteBump::new(p.r_u, p.r_u / 2.0, profile(0.5))?;
    let covering = SingleSiteBump::covering(p.covering_r_u)?;
    rep.fit("covering_lower_bound", covering.cover_bound(), None);

    // Modulus at E₀ under window refinement.
    let e0 = lattice_landau_energy(p.b, p.h, p.side as f64)?;
    rep.fit("E0", e0, None);
    let mut ws: Vec<f64> = p.window_fractions.iter().map(|f| f * p.b).collect();
    ws.sort_by(|a, b| b.total_cmp(a));
    let mut modulus = Series::new("modulus", &["covering", "w", "modulus", "stderr"]);
    let mut growth = [0.0; 2];
    for (c, bump) in [plain, covering].into_iter().enumerate() {
        let s = substream(seed, 0x1d5 + c as u64);
        let counts: Vec<Vec<f64>> = (0..p.trials as u64)
            .into_par_iter()
            .map(|t| {
                let h = draw(p.b, grid, &spec, bump, stream_seed(s, t))?;
                Ok(ws
                    .iter()
                    .map(|&w| (h.count_below(e0 + w) - h.count_below(e0 - w)) as f64 / (2.0 * w * area))
                    .collect())
            })
            .collect::<Result<_>>()?;
        let mut first = 0.0;
        for (k, &w) in ws.iter().enumerate() {
            let xs: Vec<f64> = counts.iter().map(|r| r[k]).collect();
            let m = mean(&xs);
            if k == 0 {
                first = m;
            }
            growth[c] = m / first;
            modulus.push(row![c == 1, w, m, (variance(&xs) / xs.len() as f64).sqrt()]);
        }
    }
    rep.series.push(modulus);
    rep.fit("modulus_growth_plain", growth[0], None);
    rep.fit("modulus_growth_covering", growth[1], None);
    rep.check(
        "ids_modulus_grows_without_covering",
        growth[0] >= p.min_growth,
        growth[0],
        format!("modulus(w_min) / modulus(w_max) >= {} for r_u = {}", p.min_growth, p.r_u),
    );
    rep.check(
        "ids_modulus_bounded_with_covering",
        growth[1] <= p.max_bounded_growth,
        growth[1],
        format!("modulus(w_min) / modulus(w_max) <= {} for r_u = {}", p.max_bounded_growth, p.covering_r_u),
    );

    // IDS curve from two independent half-batches.
    let energies: Vec<f64> = p.curve_fractions.iter().map(|f| f * p.b).collect();
    let s = substream(seed, 0xc0e);
    let curves: Vec<Vec<f64>> = (0..p.trials as u64)
        .into_par_iter()
        .map(|t| {
            let h = draw(p.b, grid, &spec, plain, stream_seed(s, t))?;
            Ok(energies.iter().map(|&e| h.count_below(e) as f64 / area).collect())
        })
        .collect::<Result<_>>()?;
    let half = p.trials / 2;
    let mut curve = Series::new("curve", &["E", "N", "N_batch_a", "N_batch_b", "z"]);
    let (mut worst_z, mut monotone, mut lipschitz) = (0.0f64, true, 0.0f64);
    let mut prev: Option<(f64, f64)> = None;
    for (k, &e) in energies.iter().enumerate() {
        let col: Vec<f64> = curves.iter().map(|r| r[k]).collect();
        let (a, b) = col.split_at(half);
        let se = (variance(a) / a.len() as f64 + variance(b) / b.len() as f64).sqrt();
        let z = if se > 0.0 { (mean(a) - mean(b)) / se } else { 0.0 };
        worst_z = worst_z.max(z.abs());
        let n = mean(&col);
        if let Some((pe, pn)) = prev {
            monotone &= n >= pn;
            let near_level = (0..4).any(|l| {
                let en = (2 * l + 1) as f64 * p.b;
                let x = p.exclusion_c / p.b;
                (pe.min(e) <= en + x) && (pe.max(e) >= en - x)
            });
            if !near_level {
                lipschitz = lipschitz.max((n - pn) / (e - pe));
            }
        }
        prev = Some((e, n));
        curve.push(row![e, n, mean(a), mean(b), z]);
    }
    rep.series.push(curve);
    rep.fit("lipschitz_away_from_levels", lipschitz, None);
    rep.check("ids_monotone", monotone, 0.0, "N(E) non-decreasing");
    rep.check(
        "ids_batches_agree",
        worst_z <= p.batch_z,
        worst_z,
        format!("max |z| between half-batches <= {}", p.batch_z),
    );
    Ok(rep.finish(t0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_level_is_below_continuum_and_close() {
        let e0 = lattice_landau_energy(20.0, 0.1, 3.0).unwrap();
        assert!(e0 < 20.0 && e0 > 19.0, "{e0}");
        // Nothing lies below it.
        let hm = HamiltonianMatrix::free(20.0, Grid::new([0.0, 0.0], 3.0, 0.1).unwrap()).unwrap();
        assert_eq!(hm.count_below(e0 - 1e-6), 0);
    }

    #[test]
    fn free_levels_are_nearly_degenerate() {
        // The free lowest level carries a macroscopic cluster inside a tiny
        // window: the jump the non-covering modulus detects.
        let g = site_box(4, 0.1).unwrap();
        let hm = HamiltonianMatrix::free(20.0, g).unwrap();
        let e0 = lattice_landau_energy(20.0, 0.1, 4.0).unwrap();
        let jump = hm.count_below(e0 + 1e-3) as f64;
        // A 4 x 4 box loses a collar of edge states to the gap.
        assert!(jump > 0.3 * 20.0 / (2.0 * std::f64::consts::PI) * 16.0, "{jump}");
        let spread = (hm.count_below(e0 + 1.0) as f64 - jump) / 1.0;
        assert!(jump / 1e-3 > 1e3 * spread, "{jump} {spread}");
    }

    #[test]
    fn small_run_is_deterministic() {
        let p = IdsParams {
            side: 3,
            trials: 4,
            curve_fractions: vec![0.5, 1.5, 2.5],
            ..Default::default()
        };
        let a = ids_experiment(&p, 5).unwrap();
        let b = ids_experiment(&p, 5).unwrap();
        assert_eq!(a.series("curve").unwrap().to_csv().unwrap(), b.series("curve").unwrap().to_csv().unwrap());
        assert!(a.get_check("ids_monotone").unwrap().pass);
    }
}
