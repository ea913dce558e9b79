//! Monte Carlo estimators over independent trials.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::find_closed_circuit;
use super::cluster::ClusterIndex;
use super::crossing::{crossing_exists_rect, Rect};
use super::lattice::sample_bonds;
use crate::error::{invalid, Result};
use crate::rng::stream_seed;
use crate::stats::{self, Interval};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub p: f64,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci: Interval,
    pub seed: u64,
}

impl ProbabilityEstimate {
    fn from_outcomes(p: f64, seed: u64, outcomes: &[bool]) -> Self {
        let trials = outcomes.len() as u64;
        let successes = outcomes.iter().filter(|&&b| b).count() as u64;
        Self {
            p,
            trials,
            successes,
            estimate: successes as f64 / trials as f64,
            ci: stats::wilson(successes, trials, stats::Z95),
            seed,
        }
    }

    pub fn standard_error(&self) -> f64 {
        stats::binomial_se(self.estimate, self.trials)
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    Ok(())
}

/// Crossing frequency of `rect`; trial `i` samples with seed
/// `stream_seed(seed, i)`.
pub fn estimate_crossing_rect(rect: Rect, p: f64, trials: usize, seed: u64) -> Result<ProbabilityEstimate> {
    check_trials(trials)?;
    let extent = rect.required_extent().max(1);
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = sample_bonds(p, extent, stream_seed(seed, i))?;
            crossing_exists_rect(&cfg, rect)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(ProbabilityEstimate::from_outcomes(p, seed, &outcomes))
}

/// Estimate of R_{n,l}(p), the long-way crossing probability.
pub fn estimate_crossing_prob(n: i64, l: i64, p: f64, trials: usize, seed: u64) -> Result<ProbabilityEstimate> {
    if n < 1 || l < 1 {
        return Err(invalid("l", "rectangle sides must be positive"));
    }
    estimate_crossing_rect(Rect::long_way(n, l), p, trials, seed)
}

/// Estimate of A_l(p), the probability of an occupied circuit in the annulus.
pub fn estimate_circuit_prob(l: i64, p: f64, trials: usize, seed: u64) -> Result<ProbabilityEstimate> {
    check_trials(trials)?;
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = sample_bonds(p, 3 * l, stream_seed(seed, i))?;
            Ok(find_closed_circuit(&cfg, l)?.is_some())
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(ProbabilityEstimate::from_outcomes(p, seed, &outcomes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionPoint {
    pub distance: i64,
    pub connected: u64,
    pub pairs: u64,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityDecay {
    pub q: f64,
    pub trials: u64,
    pub seed: u64,
    pub points: Vec<ConnectionPoint>,
    /// Decay rate m(q); `f64::INFINITY` when nothing was ever connected.
    pub rate: f64,
    pub intercept: f64,
    pub r2: f64,
    pub rate_ci: Interval,
}

fn fit_rate(distances: &[i64], connected: &[u64], pairs: &[u64]) -> (f64, f64, f64) {
    let pts: Vec<(f64, f64)> = distances
        .iter()
        .zip(connected.iter().zip(pairs))
        .filter(|(_, (c, _))| **c > 0)
        .map(|(&d, (&c, &n))| (d as f64, -(c as f64 / n as f64).ln()))
        .collect();
    match pts.len() {
        0 => (f64::INFINITY, f64::NAN, f64::NAN),
        // P(0 <-> 0) = 1 anchors the line at the origin.
        1 => (pts[0].1 / pts[0].0, 0.0, 1.0),
        _ => {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let f = stats::fit_line(&x, &y);
            (f.slope, f.intercept, f.r2)
        }
    }
}

/// Translation-averaged two-point connectivity P(y <-> y + d e_i) inside
/// a box with a margin, and the least-squares rate of -log P against d.
pub fn fit_connectivity_decay(q: f64, distances: &[i64], trials: usize, seed: u64) -> Result<ConnectivityDecay> {
    if !(0.0..0.5).contains(&q) {
        return Err(invalid("q", format!("{q} is not subcritical (need 0 <= q < 1/2)")));
    }
    if distances.is_empty() || distances.iter().any(|&d| d < 1) {
        return Err(invalid("distances", "need at least one positive distance"));
    }
    check_trials(trials)?;
    let dmax = *distances.iter().max().unwrap();
    let margin = dmax / 2 + 2;
    let extent = (dmax + 2 * margin + 1) / 2 + 1;
    let per_trial: Vec<Vec<(u64, u64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = sample_bonds(q, extent, stream_seed(seed, i))?;
            let lat = cfg.lattice;
            let mut uf = ClusterIndex::new(lat.vertex_count());
            for (k, &o) in cfg.occupied.iter().enumerate() {
                if o {
                    let [a, b] = lat.bond_at(k).endpoints();
                    uf.union(lat.vertex_index(a), lat.vertex_index(b));
                }
            }
            let labels = uf.labels();
            let lo = -extent + margin;
            let hi = extent - margin;
            Ok(distances
                .iter()
                .map(|&d| {
                    let (mut hit, mut total) = (0u64, 0u64);
                    for y1 in lo..=hi - d {
                        for y2 in lo..=hi {
                            for (a, b) in [([y1, y2], [y1 + d, y2]), ([y2, y1], [y2, y1 + d])] {
                                total += 1;
                                if labels[lat.vertex_index(a)] == labels[lat.vertex_index(b)] {
                                    hit += 1;
                                }
                            }
                        }
                    }
                    (hit, total)
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let sum_over = |idx: &mut dyn Iterator<Item = usize>| {
        let mut c = vec![0u64; distances.len()];
        let mut n = vec![0u64; distances.len()];
        for t in idx {
            for (k, &(hit, total)) in per_trial[t].iter().enumerate() {
                c[k] += hit;
                n[k] += total;
            }
        }
        (c, n)
    };
    let (connected, pairs) = sum_over(&mut (0..trials));
    let (rate, intercept, r2) = fit_rate(distances, &connected, &pairs);
    let rate_ci = stats::bootstrap(trials, 200, seed ^ 0xb007, |idx| {
        let (c, n) = sum_over(&mut idx.iter().copied());
        fit_rate(distances, &c, &n).0
    });
    let points = distances
        .iter()
        .zip(connected.iter().zip(&pairs))
        .map(|(&d, (&c, &n))| ConnectionPoint {
            distance: d,
            connected: c,
            pairs: n,
            estimate: c as f64 / n as f64,
        })
        .collect();
    Ok(ConnectivityDecay {
        q,
        trials: trials as u64,
        seed,
        points,
        rate,
        intercept,
        r2,
        rate_ci,
    })
}
