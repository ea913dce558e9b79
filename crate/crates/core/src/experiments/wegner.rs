//! Wegner estimate: probability that the box spectrum comes within δ of E,
//! as a function of δ and of the box area.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::common::disordered_box;
use super::report::{ExperimentReport, Series};
use crate::error::{invalid, Error, Result};
use crate::potential::{CouplingSpec, SingleSiteBump};
use crate::rng::substream;
use crate::row;
use crate::stats::{bootstrap, fit_cloglog_design, wilson, Z95};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WegnerParams {
    pub b: f64,
    pub h: f64,
    /// E = B + e_offset.
    pub e_offset: f64,
    /// Coupling half-width M (uniform couplings).
    pub m: f64,
    pub r_u: f64,
    /// Potential-free collar around Λ before the Dirichlet wall.
    pub pad: f64,
    /// Box sides; areas are side².
    pub sides: Vec<u32>,
    /// δ as fractions of B.
    pub delta_fractions: Vec<f64>,
    pub trials: usize,
    pub slope_tolerance: f64,
    pub ratio_tolerance: f64,
    pub bootstrap: usize,
}

impl Default for WegnerParams {
    fn default() -> Self {
        Self {
            b: 20.0,
            h: 0.1,
            e_offset: -1.5,
            m: 8.0,
            r_u: 0.35,
            pad: 1.0,
            sides: vec![3, 6],
            delta_fractions: vec![1e-3, 2.5e-3, 5e-3, 1e-2],
            trials: 500,
            slope_tolerance: 0.2,
            ratio_tolerance: 1.0,
            bootstrap: 200,
        }
    }
}

impl WegnerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.h > 0.0 && self.m > 0.0) {
            return Err(invalid("b", "B, h and M must be positive"));
        }
        // E must avoid the Landau energies (2n+1)B.
        let e = self.b + self.e_offset;
        let n = ((e / self.b - 1.0) / 2.0).round().max(0.0);
        if (e - (2.0 * n + 1.0) * self.b).abs() < 1e-9 {
            return Err(invalid("e_offset", "E sits on a Landau energy"));
        }
        if self.sides.len() < 2 || self.sides.contains(&0) {
            return Err(invalid("sides", "need at least two positive box sides"));
        }
        if self.delta_fractions.len() < 2 || self.delta_fractions.iter().any(|&d| !(d > 0.0)) {
            return Err(invalid("delta_fractions", "need at least two positive values"));
        }
        if !(self.pad >= 0.0) || self.trials == 0 {
            return Err(invalid("trials", "must be positive"));
        }
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        self.b + self.e_offset
    }
}

/// For one box, the index of the smallest δ (ascending order) whose window
/// (E - δ, E + δ) meets the spectrum; `deltas.len()` if none does. The
/// events are nested, so the scan stops at the first empty window.
pub fn first_hit(h: &crate::hamiltonian::HamiltonianMatrix, e: f64, deltas: &[f64]) -> usize {
    let mut first = deltas.len();
    for (k, &d) in deltas.iter().enumerate().rev() {
        if h.count_below(e + d) > h.count_below(e - d) {
            first = k;
        } else {
            break;
        }
    }
    first
}

struct Fitted {
    slope: f64,
    ratio: f64,
}

/// Joint cloglog fit P = 1 - exp(-exp(α + β ln δ + κ ln(A/A₀))).
fn fit(hits: &[Vec<usize>], deltas: &[f64], areas: &[f64], idx: Option<&[usize]>) -> Option<Fitted> {
    let (mut design, mut ks, mut ns) = (vec![], vec![], vec![]);
    for (s, firsts) in hits.iter().enumerate() {
        let pick: Vec<usize> = match idx {
            Some(i) => i.iter().map(|&i| firsts[i]).collect(),
            None => firsts.clone(),
        };
        for (k, &d) in deltas.iter().enumerate() {
            design.push(vec![1.0, d.ln(), (areas[s] / areas[0]).ln()]);
            ks.push(pick.iter().filter(|&&f| f <= k).count() as u64);
            ns.push(pick.len() as u64);
        }
    }
    let c = fit_cloglog_design(&design, &ks, &ns)?;
    Some(Fitted {
        slope: c[1],
        ratio: 4f64.powf(c[2]),
    })
}

pub fn wegner_experiment(p: &WegnerParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new("wegner", seed, p);
    let spec = CouplingSpec::uniform(p.m)?;
    let bump = SingleSiteBump::new(p.r_u, p.r_u / 2.0, crate::potential::bump::profile(0.5))?;
    let e = p.energy();
    let mut deltas: Vec<f64> = p.delta_fractions.iter().map(|f| f * p.b).collect();
    deltas.sort_by(f64::total_cmp);

    let mut hits = vec![];
    let mut areas = vec![];
    for &side in &p.sides {
        let s = substream(seed, side as u64);
        let firsts: Vec<usize> = (0..p.trials as u64)
            .into_par_iter()
            .map(|t| Ok(first_hit(&disordered_box(p.b, side, p.pad, p.h, &spec, bump, crate::rng::stream_seed(s, t))?, e, &deltas)))
            .collect::<Result<_>>()?;
        hits.push(firsts);
        areas.push((side * side) as f64);
    }

    let mut series = Series::new("wegner", &["side", "area", "delta", "trials", "hits", "estimate", "ci_low", "ci_high", "bound_constant"]);
    // C_W stand-in: P dist(σ(H_A), E)² / (‖g‖∞ δ B |Λ|).
    let dist = p.e_offset.abs().min((e - 3.0 * p.b).abs());
    let g_sup = spec.density_sup();
    let mut cw = 0.0f64;
    for (s, firsts) in hits.iter().enumerate() {
        for (k, &d) in deltas.iter().enumerate() {
            let n = firsts.len() as u64;
            let kk = firsts.iter().filter(|&&f| f <= k).count() as u64;
            let ci = wilson(kk, n, Z95);
            let est = kk as f64 / n as f64;
            let c = est * dist * dist / (g_sup * d * p.b * areas[s]);
            cw = cw.max(c);
            series.push(row![p.sides[s], areas[s], d, n, kk, est, ci.low, ci.high, c]);
        }
    }
    rep.series.push(series);
    rep.fit("C_W", cw, None);

    let f = fit(&hits, &deltas, &areas, None).ok_or_else(|| Error::Fit("no events at any (δ, |Λ|)".into()))?;
    let slope_ci = bootstrap(p.trials, p.bootstrap, substream(seed, 0xb0), |idx| {
        fit(&hits, &deltas, &areas, Some(idx)).map_or(f64::NAN, |f| f.slope)
    });
    let ratio_ci = bootstrap(p.trials, p.bootstrap, substream(seed, 0xb1), |idx| {
        fit(&hits, &deltas, &areas, Some(idx)).map_or(f64::NAN, |f| f.ratio)
    });
    rep.fit("delta_slope", f.slope, Some(slope_ci));
    rep.fit("volume_ratio_4x", f.ratio, Some(ratio_ci));
    rep.check(
        "wegner_delta_slope",
        (f.slope - 1.0).abs() <= p.slope_tolerance,
        f.slope,
        format!("cloglog slope in log delta = 1 +- {}", p.slope_tolerance),
    );
    rep.check(
        "wegner_volume_ratio",
        (f.ratio - 4.0).abs() <= p.ratio_tolerance,
        f.ratio,
        format!("P(4|L|) / P(|L|) = 4 +- {}", p.ratio_tolerance),
    );
    Ok(rep.finish(t0))
}
