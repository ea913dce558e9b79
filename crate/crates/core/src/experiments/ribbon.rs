//! Occupied circuits carry ribbons on which V + B - E < -a.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Series};
use crate::error::{invalid, Result};
use crate::percolation::find_closed_circuit;
use crate::potential::{
    bonds_from_potential, build_ribbon, sample_couplings, sites_for_extent, verify_ribbon_condition, CouplingSpec,
    Mollifier, SingleSiteBump,
};
use crate::rng::{stream_seed, substream, trial_rng};
use crate::row;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RibbonParams {
    pub b: f64,
    pub m: f64,
    /// E - B drawn uniformly from this range per draw.
    pub e_minus_b: [f64; 2],
    pub ell: i64,
    pub circuits: usize,
    pub max_draws: usize,
    /// Positions sampled along each bond (times five transverse offsets).
    pub samples_per_bond: usize,
    pub r_u: f64,
    pub mollifier_eps: f64,
}

impl Default for RibbonParams {
    fn default() -> Self {
        Self {
            b: 10.0,
            m: 3.0,
            e_minus_b: [2.0, 4.0],
            ell: 2,
            circuits: 1000,
            max_draws: 10_000,
            samples_per_bond: 20,
            r_u: 0.35,
            mollifier_eps: 0.1,
        }
    }
}

impl RibbonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_minus_b[0] > 0.0 && self.e_minus_b[1] >= self.e_minus_b[0]) {
            return Err(invalid("e_minus_b", "need 0 < lo <= hi"));
        }
        if self.ell < 1 || self.circuits == 0 || self.samples_per_bond == 0 {
            return Err(invalid("circuits", "ell, circuits and samples_per_bond must be positive"));
        }
        SingleSiteBump::new(self.r_u, self.r_u / 2.0, crate::potential::bump::profile(0.5))?;
        CouplingSpec::uniform(self.m)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Draw {
    trial: u64,
    e: f64,
    bonds: usize,
    dist_inner: f64,
    dist_outer: f64,
    width: f64,
    geometry_ok: bool,
    worst: f64,
    a: f64,
    smoothing_ok: bool,
}

fn one_draw(p: &RibbonParams, seed: u64, t: u64) -> Result<Option<Draw>> {
    let spec = CouplingSpec::uniform(p.m)?;
    let bump = SingleSiteBump::new(p.r_u, p.r_u / 2.0, crate::potential::bump::profile(0.5))?;
    let mut rng = trial_rng(seed, t);
    let e = p.b + rng.random_range(p.e_minus_b[0]..=p.e_minus_b[1]);
    let extent = 3 * p.ell;
    let v = sample_couplings(&spec, bump, sites_for_extent(extent), stream_seed(seed ^ 0x7269, t));
    let cfg = bonds_from_potential(&v, e, p.b, extent)?;
    let Some(c) = find_closed_circuit(&cfg, p.ell)? else {
        return Ok(None);
    };
    let rb = build_ribbon(&c, &cfg.lattice, p.r_u)?;
    let g = rb.geometry();
    let a = 0.5 * (e - p.b);
    let n = 5 * p.samples_per_bond * c.len();
    let chk = verify_ribbon_condition(&rb, &v, e, p.b, a, n, t);
    let mol = Mollifier::new(p.mollifier_eps, 12);
    let bound = p.mollifier_eps * v.gradient_bound();
    let smoothing_ok = rb
        .sample_points(n / 4, t)
        .into_iter()
        .all(|x| (mol.smooth(|y| v.eval(y), x) - v.eval(x)).abs() < bound);
    Ok(Some(Draw {
        trial: t,
        e,
        bonds: c.len(),
        dist_inner: g.dist_inner,
        dist_outer: g.dist_outer,
        width: g.width,
        geometry_ok: g.satisfied(),
        worst: chk.worst,
        a,
        smoothing_ok,
    }))
}

pub fn ribbon_experiment(p: &RibbonParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new("ribbon", seed, p);
    let s = substream(seed, 0x7269_6262);
    let mut draws = vec![];
    let mut next = 0u64;
    while draws.len() < p.circuits && (next as usize) < p.max_draws {
        let end = (next + 512).min(p.max_draws as u64);
        let batch = (next..end)
            .into_par_iter()
            .map(|t| one_draw(p, s, t))
            .collect::<Result<Vec<_>>>()?;
        draws.extend(batch.into_iter().flatten());
        next = end;
    }
    draws.truncate(p.circuits);
    let mut series = Series::new(
        "ribbon",
        &["trial", "e", "a", "bonds", "dist_inner", "dist_outer", "width", "worst", "margin", "pass"],
    );
    for d in &draws {
        series.push(row![
            d.trial, d.e, d.a, d.bonds, d.dist_inner, d.dist_outer, d.width, d.worst, -d.a - d.worst,
            d.worst < -d.a
        ]);
    }
    let found = draws.len();
    let all_pass = draws.iter().all(|d| d.worst < -d.a);
    let worst_margin = draws.iter().map(|d| -d.a - d.worst).fold(f64::INFINITY, f64::min);
    rep.check(
        "enough_circuits",
        found >= p.circuits,
        found as f64,
        format!("at least {} circuit draws", p.circuits),
    );
    rep.check(
        "ribbon_geometry",
        draws.iter().all(|d| d.geometry_ok),
        draws.iter().map(|d| d.dist_inner.min(d.dist_outer)).fold(f64::INFINITY, f64::min),
        "box clearances >= 1/sqrt 2 + r_u and width >= 2 r_1",
    );
    rep.check("ribbon_condition", all_pass, worst_margin, "V + B - E < -a on every sampled ribbon point");
    rep.check(
        "smoothing_consistency",
        draws.iter().all(|d| d.smoothing_ok),
        p.mollifier_eps,
        "|V * phi_eps - V| < eps sup|grad V| on ribbon points",
    );

    // A circuit coupling pushed to +M must be detected.
    let counter = draws.first().map(|d| counterexample(p, s, d.trial)).transpose()?;
    if let Some(caught) = counter {
        rep.check("counterexample_detected", caught, 1.0, "+M coupling on a circuit bond fails the check");
    }
    rep.series.push(series);
    Ok(rep.finish(t0))
}

fn counterexample(p: &RibbonParams, seed: u64, t: u64) -> Result<bool> {
    let spec = CouplingSpec::uniform(p.m)?;
    let bump = SingleSiteBump::new(p.r_u, p.r_u / 2.0, crate::potential::bump::profile(0.5))?;
    let mut rng = trial_rng(seed, t);
    let e = p.b + rng.random_range(p.e_minus_b[0]..=p.e_minus_b[1]);
    let extent = 3 * p.ell;
    let mut v = sample_couplings(&spec, bump, sites_for_extent(extent), stream_seed(seed ^ 0x7269, t));
    let cfg = bonds_from_potential(&v, e, p.b, extent)?;
    let c = find_closed_circuit(&cfg, p.ell)?.expect("draw had a circuit");
    v.set_coupling(c.bonds[0], p.m);
    let rb = build_ribbon(&c, &cfg.lattice, p.r_u)?;
    let a = 0.5 * (e - p.b);
    if p.m + p.b - e < -a {
        // +M is still below the threshold: nothing to detect.
        return Ok(true);
    }
    Ok(!verify_ribbon_condition(&rb, &v, e, p.b, a, 5 * p.samples_per_bond.max(40) * c.len(), t).pass)
}
