//! Initial-scale event: ‖W(χ_{ℓ,δ}) R_Λ(E + iε) χ_{ℓ/3}‖ <= e^{-γ₀ℓ} on a
//! box of side ℓ, sampled over disorder, at an energy near the band edge
//! and at the Landau energy itself.

use std::time::Instant;

use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ids::lattice_landau_energy;
use super::report::{ExperimentReport, Series};
use crate::cutoff::{Cutoff, Rect};
use crate::error::{invalid, Result};
use crate::hamiltonian::{Grid, HamiltonianMatrix};
use crate::linalg::{operator_norm, NormOptions};
use crate::potential::bump::profile;
use crate::potential::{is_occupied, sample_couplings, CouplingSpec, PotentialSample, SingleSiteBump, SiteRegion};
use crate::rng::{stream_seed, substream};
use crate::row;
use crate::stats::{wilson, Z95};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct H1Params {
    pub b: f64,
    /// Box side ℓ₀ (even).
    pub l0: u32,
    /// W(χ) lives on the strip at distance [δ, δ + ramp) from the wall.
    pub delta: f64,
    pub ramp: f64,
    pub m: f64,
    pub r_u: f64,
    pub flux: f64,
    /// Band-edge energy E₀ + 2a with a = B^{-1+σ}.
    pub sigma: f64,
    pub eps: f64,
    /// Threshold rate of the event.
    pub gamma0: f64,
    pub xi: f64,
    /// Half-width of the spectral window counted for the Wegner term.
    pub wegner_window: f64,
    pub trials: usize,
    pub min_difference: f64,
    pub norm_tolerance: f64,
}

impl Default for H1Params {
    fn default() -> Self {
        Self {
            b: 40.0,
            l0: 12,
            delta: 1.0,
            ramp: 1.0,
            m: 0.4,
            r_u: 0.35,
            flux: 0.8,
            sigma: 0.5,
            eps: 1e-3,
            gamma0: 0.1,
            xi: 4.1,
            wegner_window: 0.01,
            trials: 300,
            min_difference: 0.2,
            norm_tolerance: 1e-3,
        }
    }
}

impl H1Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) {
            return Err(invalid("b", "must be positive"));
        }
        if self.l0 < 6 || self.l0 % 6 != 0 {
            return Err(invalid("l0", "must be a positive multiple of 6"));
        }
        if !(self.delta > 0.0 && self.ramp > 0.0) || self.delta + self.ramp >= self.l0 as f64 / 3.0 {
            return Err(invalid("delta", "the W(chi) strip must stay outside the core"));
        }
        if !(self.m > 0.0) {
            return Err(invalid("m", "must be positive"));
        }
        if !(self.flux > 0.0 && self.flux <= std::f64::consts::PI) {
            return Err(invalid("flux", "must be in (0, pi]"));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(invalid("sigma", "must be in (0, 1)"));
        }
        if !(self.eps > 0.0 && self.gamma0 > 0.0) {
            return Err(invalid("eps", "eps and gamma0 must be positive"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be positive"));
        }
        Ok(())
    }

    /// a = B^{-1+σ}.
    pub fn edge_gap(&self) -> f64 {
        self.b.powf(self.sigma - 1.0)
    }

    pub fn grid(&self) -> Result<Grid> {
        let side = self.l0 as f64;
        let n = (side / (self.flux / self.b).sqrt()).ceil();
        Grid::new([0.0, 0.0], side, side / n)
    }

    /// χ_{ℓ,δ}: 1 within δ of the wall, 0 beyond δ + ramp.
    pub fn boundary_cutoff(&self) -> Cutoff {
        let inner = self.l0 as f64 / 2.0 - self.delta - self.ramp;
        Cutoff::SmoothComplement {
            rect: Rect::centered([0.0, 0.0], inner),
            ramp: self.ramp,
        }
    }

    pub fn core(&self) -> Cutoff {
        Cutoff::Indicator {
            rect: Rect::centered([0.0, 0.0], self.l0 as f64 / 6.0),
        }
    }
}

/// Per-draw outcome at one energy.
#[derive(Debug, Clone, Copy)]
pub struct Draw {
    pub norm: f64,
    pub rel_error: f64,
    /// Occupied circuit around the core, inside Λ.
    pub circuit: bool,
    /// An eigenvalue within the Wegner window of E.
    pub near_spectrum: bool,
}

/// ‖W(χ) R(E + iε) χ_core‖ by Lanczos on the core block.
pub fn h1_norm(h: &HamiltonianMatrix, e: f64, p: &H1Params) -> Result<(f64, f64)> {
    let grid = h.grid;
    let chi = grid.sample(&p.boundary_cutoff());
    let core = p.core();
    let src: Vec<usize> = (0..grid.len()).filter(|&k| core.eval(grid.point(k)) > 0.0).collect();
    let lu = h.factor(C::new(e, p.eps))?;
    let n = grid.len();
    let embed = |x: &[C]| {
        let mut full = vec![C::new(0.0, 0.0); n];
        src.iter().zip(x).for_each(|(&k, v)| full[k] = *v);
        full
    };
    let est = operator_norm(
        src.len(),
        |x| {
            let mut y = embed(x);
            lu.solve_in_place(&mut y);
            h.commutator(&chi, &y)
        },
        |y| {
            // W* = -W for real χ.
            let mut w: Vec<C> = h.commutator(&chi, y).into_iter().map(|v| -v).collect();
            lu.solve_adjoint_in_place(&mut w);
            src.iter().map(|&k| w[k]).collect()
        },
        NormOptions {
            tol: p.norm_tolerance,
            ..NormOptions::default()
        },
    );
    Ok((est.value, est.rel_error))
}

/// Couplings on the sites whose bump lies inside Λ; zero on the wall sites.
fn box_couplings(p: &H1Params, spec: &CouplingSpec, bump: SingleSiteBump, seed: u64) -> PotentialSample {
    let half = p.l0 as i64 / 2;
    let region = SiteRegion::centered(2 * half + 1);
    sample_couplings(spec, bump, region, seed).restricted(|j| j[0].abs() < half && j[1].abs() < half)
}

/// Whether the occupied bonds at energy offset `e - e0` hold a circuit in
/// the square annulus between the core and the wall. Faces of Γ sit at
/// half-integer points with even coordinate sum; the circuit exists iff no
/// chain of faces joined across unoccupied bonds links the core to the wall.
pub fn has_circuit(v: &PotentialSample, e: f64, e0: f64, p: &H1Params) -> bool {
    let half = p.l0 as f64 / 2.0;
    let core = p.l0 as f64 / 6.0;
    let inf = |x: [f64; 2]| x[0].abs().max(x[1].abs());
    let in_annulus = |x: [f64; 2]| {
        let r = inf(x);
        r > core && r < half
    };
    let blocking = |j: [i64; 2]| {
        let x = [j[0] as f64, j[1] as f64];
        let d = if (j[0] + j[1]).rem_euclid(2) == 0 { [0.5, 0.5] } else { [-0.5, 0.5] };
        in_annulus([x[0] + d[0], x[1] + d[1]])
            && in_annulus([x[0] - d[0], x[1] - d[1]])
            && is_occupied(v.coupling(j), e - e0 + p.b, p.b)
    };
    // Faces in doubled coordinates: both odd, (x + y)/2 even.
    let r = (p.l0 + 2) as i64;
    let w = (2 * r + 1) as usize;
    let idx = |f: [i64; 2]| ((f[1] + r) as usize) * w + (f[0] + r) as usize;
    let mut seen = vec![false; w * w];
    let mut stack = vec![];
    for a in (-r..=r).filter(|a| a.rem_euclid(2) == 1) {
        for b in (-r..=r).filter(|b| b.rem_euclid(2) == 1 && ((a + b) / 2).rem_euclid(2) == 0) {
            if inf([a as f64 / 2.0, b as f64 / 2.0]) < core {
                seen[idx([a, b])] = true;
                stack.push([a, b]);
            }
        }
    }
    while let Some(f) = stack.pop() {
        if inf([f[0] as f64 / 2.0, f[1] as f64 / 2.0]) >= half {
            return false;
        }
        for d in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
            let j = [(f[0] + d[0]) / 2, (f[1] + d[1]) / 2];
            let g = [f[0] + 2 * d[0], f[1] + 2 * d[1]];
            if g[0].abs() > r || g[1].abs() > r || seen[idx(g)] || blocking(j) {
                continue;
            }
            seen[idx(g)] = true;
            stack.push(g);
        }
    }
    true
}

fn run_energy(p: &H1Params, grid: Grid, e: f64, e0: f64, seed: u64) -> Result<Vec<Draw>> {
    let spec = CouplingSpec::uniform(p.m)?;
    let bump = SingleSiteBump::new(p.r_u, p.r_u / 2.0, profile(0.5))?;
    (0..p.trials as u64)
        .into_par_iter()
        .map(|t| {
            let v = box_couplings(p, &spec, bump, stream_seed(seed, t));
            let h = HamiltonianMatrix::assemble(p.b, &v, grid)?;
            let (norm, rel_error) = h1_norm(&h, e, p)?;
            let near = h.count_below(e + p.wegner_window) > h.count_below(e - p.wegner_window);
            Ok(Draw {
                norm,
                rel_error,
                circuit: has_circuit(&v, e, e0, p),
                near_spectrum: near,
            })
        })
        .collect()
}

pub fn h1_experiment(p: &H1Params, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new("h1", seed, p);
    let grid = p.grid()?;
    let e0 = lattice_landau_energy(p.b, grid.h, p.l0 as f64)?;
    let l0 = p.l0 as f64;
    let threshold = (-p.gamma0 * l0).exp();
    let required = 1.0 - l0.powf(-p.xi);
    let energies = [("band_edge", e0 + 2.0 * p.edge_gap()), ("landau", e0)];

    let mut draws = Series::new("draws", &["energy", "E", "draw", "norm", "rel_error", "event", "circuit", "near_spectrum"]);
    let mut summary = Series::new(
        "summary",
        &[
            "energy", "E", "trials", "events", "frequency", "ci_low", "ci_high", "gamma0_max", "circuits", "event_and_circuit",
            "event_without_circuit", "near_spectrum", "lower_bound",
        ],
    );
    let mut freq = vec![];
    for (i, (label, e)) in energies.iter().enumerate() {
        let res = run_energy(p, grid, *e, e0, substream(seed, i as u64))?;
        let n = res.len() as u64;
        let events = res.iter().filter(|d| d.norm <= threshold).count() as u64;
        for (t, d) in res.iter().enumerate() {
            draws.push(row![*label, *e, t, d.norm, d.rel_error, d.norm <= threshold, d.circuit, d.near_spectrum]);
        }
        // Largest γ₀ whose event frequency reaches 1 - ℓ^{-ξ}: the rate of
        // the norm at that empirical quantile.
        let mut norms: Vec<f64> = res.iter().map(|d| d.norm).collect();
        norms.sort_by(f64::total_cmp);
        let q = ((required * n as f64).ceil() as usize).clamp(1, norms.len()) - 1;
        let gamma_max = -norms[q].ln() / l0;
        let circuits = res.iter().filter(|d| d.circuit).count();
        let both = res.iter().filter(|d| d.circuit && d.norm <= threshold).count();
        let without = res.iter().filter(|d| !d.circuit && d.norm <= threshold).count();
        let near = res.iter().filter(|d| d.near_spectrum).count();
        // No circuit or an eigenvalue near E are the two failure routes.
        let lower = 1.0 - (n as f64 - circuits as f64) / n as f64 - near as f64 / n as f64;
        let f = events as f64 / n as f64;
        let ci = wilson(events, n, Z95);
        summary.push(row![*label, *e, n, events, f, ci.low, ci.high, gamma_max, circuits, both, without, near, lower]);
        freq.push(f);
    }
    rep.series.push(draws);
    rep.series.push(summary);
    rep.fit("band_edge_frequency", freq[0], None);
    rep.fit("landau_frequency", freq[1], None);
    let diff = freq[0] - freq[1];
    rep.check(
        "h1_comparative",
        diff >= p.min_difference,
        diff,
        format!("event frequency at the band edge exceeds that at E = B by >= {}", p.min_difference),
    );
    Ok(rep.finish(t0))
}
