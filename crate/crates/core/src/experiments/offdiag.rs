//! Off-diagonal block ‖P₀ V Q₀‖ of a smooth potential between the lowest
//! Landau level and its complement, as a function of B.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::common::{complement, first_band, landau_box, max_singular};
use super::report::{ExperimentReport, Series};
use crate::error::{invalid, Result};
use crate::hamiltonian::{Grid, HamiltonianMatrix};
use crate::potential::{CouplingSpec, PotentialSample, SingleSiteBump, SiteRegion};
use crate::rng::substream;
use crate::row;
use crate::stats::{bootstrap, fit_line};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OffdiagParams {
    pub fields: Vec<f64>,
    /// Support radius of the single smooth bump forming V.
    pub r_u: f64,
    pub coupling: f64,
    /// Collar between the bump support and the wall, in magnetic lengths.
    pub pad_lengths: f64,
    pub flux: f64,
    pub exponent_range: [f64; 2],
    pub bootstrap: usize,
}

impl Default for OffdiagParams {
    fn default() -> Self {
        Self {
            fields: vec![10.0, 20.0, 40.0, 80.0],
            r_u: 1.0,
            coupling: 1.0,
            pad_lengths: 5.0,
            flux: 0.2,
            exponent_range: [-0.7, -0.3],
            bootstrap: 200,
        }
    }
}

impl OffdiagParams {
    pub fn validate(&self) -> Result<()> {
        if self.fields.len() < 2 || self.fields.iter().any(|&b| !(b > 0.0)) {
            return Err(invalid("fields", "need at least two positive fields"));
        }
        if !(self.r_u > 0.0 && self.r_u < 2.0) {
            return Err(invalid("r_u", "support radius must be in (0, 2)"));
        }
        if !(self.flux > 0.0 && self.flux <= std::f64::consts::PI) {
            return Err(invalid("flux", "must be in (0, pi]"));
        }
        Ok(())
    }

    fn bump(&self) -> Result<SingleSiteBump> {
        if self.r_u < crate::potential::bump::INV_SQRT2 {
            SingleSiteBump::new(self.r_u, self.r_u / 2.0, crate::potential::bump::profile(0.5))
        } else {
            SingleSiteBump::covering(self.r_u)
        }
    }
}

/// ‖P₀ V Q₀‖ and ‖P₀ Q₀‖ for the potential sampled at the nodes.
pub fn offdiag_norms(v0: &DMatrix<Complex64>, v: &[f64]) -> (f64, f64) {
    let vv0 = DMatrix::from_fn(v0.nrows(), v0.ncols(), |r, c| v0[(r, c)] * v[r]);
    // ‖P₀VQ₀‖ = ‖Q₀VP₀‖ since V is self-adjoint.
    (max_singular(&complement(v0, &vv0)), max_singular(&complement(v0, v0)))
}

fn fixture(p: &OffdiagParams, grid: &Grid) -> Result<Vec<f64>> {
    let bump = p.bump()?;
    let spec = CouplingSpec::uniform(p.coupling.abs().max(f64::MIN_POSITIVE))?;
    let r = grid.rect();
    let mut v = PotentialSample::zero(spec, bump, SiteRegion::covering_box(r.lo, r.hi, bump.r_u));
    v.set_coupling([0, 0], p.coupling);
    Ok(grid.points().map(|x| v.eval(x)).collect())
}

pub fn offdiag_experiment(p: &OffdiagParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new("offdiag", seed, p);
    let mut series = Series::new("offdiag", &["B", "dim", "level_states", "pvq", "pq"]);
    let (mut xs, mut ys) = (vec![], vec![]);
    let mut worst_pq = 0.0f64;
    for &b in &p.fields {
        // The bump reaches r_u - 1/2 beyond the unit cell of its site.
        let pad = (p.r_u - 0.5).max(0.0) + p.pad_lengths / b.sqrt();
        let grid = landau_box(b, 1, pad, p.flux)?;
        let (_, v0) = first_band(&HamiltonianMatrix::free(b, grid)?)?;
        let (pvq, pq) = offdiag_norms(&v0, &fixture(p, &grid)?);
        worst_pq = worst_pq.max(pq);
        series.push(row![b, grid.len(), v0.ncols(), pvq, pq]);
        xs.push(b.ln());
        ys.push(pvq.ln());
    }
    rep.series.push(series);
    let f = fit_line(&xs, &ys);
    // Residual bootstrap of the log-log slope.
    let resid: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - f.intercept - f.slope * x).collect();
    let ci = bootstrap(resid.len(), p.bootstrap, substream(seed, 0x0ff), |idx| {
        let yb: Vec<f64> = xs.iter().zip(idx).map(|(x, &i)| f.intercept + f.slope * x + resid[i]).collect();
        fit_line(&xs, &yb).slope
    });
    rep.fit("pvq_exponent", f.slope, Some(ci));
    rep.fit("pvq_prefactor", f.intercept.exp(), None);
    let [lo, hi] = p.exponent_range;
    rep.check(
        "offdiag_exponent",
        f.slope >= lo && f.slope <= hi,
        f.slope,
        format!("fitted B-exponent of ||P0 V Q0|| in [{lo}, {hi}]"),
    );
    rep.check("offdiag_pq_vanishes", worst_pq <= 1e-10, worst_pq, "||P0 Q0|| <= 1e-10");
    Ok(rep.finish(t0))
}
