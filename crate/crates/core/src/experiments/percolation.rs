//! Crossing, circuit and connectivity experiments on the dual lattice.

use std::time::Instant;

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Series};
use crate::error::{invalid, Result};
use crate::percolation::{estimate_circuit_prob, estimate_crossing_prob, fit_connectivity_decay, ProbabilityEstimate};
use crate::rng::{label_hash, substream, trial_rng};
use crate::row;
use crate::stats::{self, Interval};

fn check_p(p: f64, name: &'static str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(name, format!("{p} not in [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossingParams {
    pub p: f64,
    /// Aspect ratio: rectangles are ℓ × nℓ, crossed the long way.
    pub n: i64,
    pub ells: Vec<i64>,
    pub trials: usize,
    pub min_r2: f64,
    pub critical_ell: i64,
    pub critical_trials: usize,
    pub critical_band: [f64; 2],
    pub bootstrap: usize,
}

impl Default for CrossingParams {
    fn default() -> Self {
        Self {
            p: 0.6,
            n: 1,
            ells: vec![8, 16, 32],
            trials: 2000,
            min_r2: 0.9,
            critical_ell: 24,
            critical_trials: 2000,
            critical_band: [0.35, 0.65],
            bootstrap: 200,
        }
    }
}

impl CrossingParams {
    pub fn validate(&self) -> Result<()> {
        check_p(self.p, "p")?;
        if self.n < 1 {
            return Err(invalid("n", "must be at least 1"));
        }
        if self.ells.len() < 2 || self.ells.iter().any(|&l| l < 1) {
            return Err(invalid("ells", "need at least two positive sides"));
        }
        if self.trials == 0 || self.critical_trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        Ok(())
    }
}

/// log(1 - R̂) with the continuity correction (f + 1/2)/(N + 1) on the
/// failure frequency, finite even when no trial failed.
pub fn log_failure(failures: u64, trials: u64) -> f64 {
    ((failures as f64 + 0.5) / (trials as f64 + 1.0)).ln()
}

fn crossing_row(s: &mut Series, e: &ProbabilityEstimate, n: i64, l: i64) {
    s.push(row![e.p, n, l, e.trials, e.estimate, e.ci.low, e.ci.high, e.seed]);
}

const CROSSING_COLUMNS: [&str; 8] = ["p", "n", "ell", "trials", "estimate", "ci_low", "ci_high", "seed"];

/// Parametric bootstrap of a statistic of several binomial points.
fn binomial_bootstrap<F>(points: &[(u64, u64)], resamples: usize, seed: u64, stat: F) -> Interval
where
    F: Fn(&[(u64, u64)]) -> f64,
{
    let mut vals: Vec<f64> = (0..resamples as u64)
        .filter_map(|r| {
            let mut rng = trial_rng(seed, r);
            let draw: Vec<(u64, u64)> = points
                .iter()
                .map(|&(k, n)| (Binomial::new(n, k as f64 / n as f64).unwrap().sample(&mut rng), n))
                .collect();
            let v = stat(&draw);
            v.is_finite().then_some(v)
        })
        .collect();
    vals.sort_by(f64::total_cmp);
    if vals.is_empty() {
        return Interval { low: f64::NAN, high: f64::NAN };
    }
    let q = |f: f64| vals[((f * (vals.len() - 1) as f64).round() as usize).min(vals.len() - 1)];
    Interval { low: q(0.025), high: q(0.975) }
}

pub fn crossing_experiment(params: &CrossingParams, seed: u64) -> Result<ExperimentReport> {
    params.validate()?;
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new("perc-crossing", seed, params);
    let mut series = Series::new("crossing", &CROSSING_COLUMNS);
    let mut points = vec![];
    for &l in &params.ells {
        let s = substream(seed, label_hash(&format!("crossing/{}/{}/{l}", params.p, params.n)));
        let e = estimate_crossing_prob(params.n, l, params.p, params.trials, s)?;
        crossing_row(&mut series, &e, params.n, l);
        points.push((e.trials - e.successes, e.trials));
    }
    let xs: Vec<f64> = params.ells.iter().map(|&l| l as f64).collect();
    let fit_of = |pts: &[(u64, u64)]| {
        let ys: Vec<f64> = pts.iter().map(|&(f, n)| log_failure(f, n)).collect();
        stats::fit_line(&xs, &ys)
    };
    let fit = fit_of(&points);
    let ci = binomial_bootstrap(&points, params.bootstrap, substream(seed, 0xb0), |p| fit_of(p).slope);
    rep.fit("log_failure_slope", fit.slope, Some(ci));
    rep.fit("log_failure_r2", fit.r2, None);
    let ys: Vec<f64> = points.iter().map(|&(f, n)| log_failure(f, n)).collect();
    let decreasing = ys.windows(2).all(|w| w[1] < w[0]);
    rep.check(
        "crossing_failure_exponential",
        decreasing && fit.r2 >= params.min_r2,
        fit.r2,
        format!("log(1-R) strictly decreasing in ell and linear with r2 >= {}", params.min_r2),
    );

    let s = substream(seed, label_hash(&format!("critical/{}", params.critical_ell)));
    let crit = estimate_crossing_prob(1, params.critical_ell, 0.5, params.critical_trials, s)?;
    let mut cs = Series::new("critical", &CROSSING_COLUMNS);
    crossing_row(&mut cs, &crit, 1, params.critical_ell);
    let [lo, hi] = params.critical_band;
    rep.check(
        "critical_square_crossing",
        (lo..=hi).contains(&crit.estimate),
        crit.estimate,
        format!("R_1(1/2) in [{lo}, {hi}]"),
    );
    rep.series.push(series);
    rep.series.push(cs);
    Ok(rep.finish(t0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitParams {
    pub ps: Vec<f64>,
    pub ell: i64,
    pub trials: usize,
    /// Allowed shortfall in pooled standard errors.
    pub sigmas: f64,
    pub q: f64,
    pub distances: Vec<i64>,
    pub connectivity_trials: usize,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self {
            ps: vec![0.55, 0.6, 0.7],
            ell: 16,
            trials: 2000,
            sigmas: 3.0,
            q: 0.3,
            distances: vec![4, 8, 16],
            connectivity_trials: 2000,
        }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        for &p in &self.ps {
            check_p(p, "ps")?;
        }
        check_p(self.q, "q")?;
        if self.ell < 1 {
            return Err(invalid("ell", "must be positive"));
        }
        if self.trials == 0 || self.connectivity_trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        Ok(())
    }
}

pub fn circuit_experiment(params: &CircuitParams, seed: u64) -> Result<ExperimentReport> {
    params.validate()?;
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new("perc-circuit", seed, params);
    let mut s = Series::new(
        "circuit",
        &[
            "p", "ell", "trials", "circuit", "circuit_ci_low", "circuit_ci_high", "crossing3", "bound", "pooled_se",
            "seed",
        ],
    );
    let l = params.ell;
    for &p in &params.ps {
        let sa = substream(seed, label_hash(&format!("circuit/{p}/{l}")));
        let sr = substream(seed, label_hash(&format!("crossing3/{p}/{l}")));
        let a = estimate_circuit_prob(l, p, params.trials, sa)?;
        let r = estimate_crossing_prob(3, l, p, params.trials, sr)?;
        let bound = r.estimate.powi(4);
        let se_bound = 4.0 * r.estimate.powi(3) * r.standard_error();
        let pooled = a.standard_error().hypot(se_bound);
        s.push(row![p, l, a.trials, a.estimate, a.ci.low, a.ci.high, r.estimate, bound, pooled, sa]);
        rep.check(
            &format!("circuit_bound_p{p}"),
            a.estimate >= bound - params.sigmas * pooled,
            a.estimate - bound,
            format!("A_l >= R_3l^4 - {} pooled SE", params.sigmas),
        );
    }
    rep.series.push(s);

    let sc = substream(seed, label_hash(&format!("connectivity/{}", params.q)));
    let dec = fit_connectivity_decay(params.q, &params.distances, params.connectivity_trials, sc)?;
    let mut cs = Series::new("connectivity", &["q", "distance", "connected", "pairs", "estimate", "seed"]);
    for pt in &dec.points {
        cs.push(row![dec.q, pt.distance, pt.connected, pt.pairs, pt.estimate, sc]);
    }
    rep.series.push(cs);
    rep.fit("connectivity_rate", dec.rate, Some(dec.rate_ci));
    rep.fit("connectivity_r2", dec.r2, None);
    rep.check(
        "connectivity_decays",
        dec.rate > 0.0 && dec.rate_ci.low > 0.0,
        dec.rate,
        "subcritical connectivity rate m(q) > 0 with bootstrap CI above 0",
    );
    Ok(rep.finish(t0))
}
