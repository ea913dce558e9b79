//! Exponential decay of the localized resolvent ‖χ_E R(E + iε) χ_O‖ in
//! the distance between the supports, for potentials kept a distance `a`
//! below the energy (V + E₀ - E < -a on the whole grid).

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::common::max_singular;
use super::ids::lattice_landau_energy;
use super::report::{ExperimentReport, Series};
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{Grid, HamiltonianMatrix};
use crate::linalg::eigen::solve_columns;
use crate::potential::bump::profile;
use crate::potential::{CouplingSpec, Mollifier, PotentialSample, SingleSiteBump, SiteRegion};
use crate::rng::{stream_seed, substream, trial_rng};
use crate::row;
use crate::stats::{bootstrap, fit_line, mean, pearson};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayParams {
    pub fields: Vec<f64>,
    /// Gap parameters a; E = E₀ + 2a with E₀ the lattice Landau energy.
    pub gaps: Vec<f64>,
    pub m: f64,
    pub r_u: f64,
    /// Side of the (Dirichlet) box.
    pub side: f64,
    pub flux: f64,
    /// χ_O is the indicator of the square of this half side at the center.
    pub source_half: f64,
    pub shell_width: f64,
    /// Shells stay this far from the walls.
    pub wall_margin: f64,
    pub eps: f64,
    pub mollifier_radius: f64,
    pub mollifier_nodes: usize,
    pub trials: usize,
    /// Norms below this fraction of the first shell's are solver noise.
    pub noise_floor: f64,
    pub min_points: usize,
    pub shape_correlation: f64,
    pub bootstrap: usize,
}

impl Default for DecayParams {
    fn default() -> Self {
        Self {
            fields: vec![10.0, 20.0, 40.0],
            gaps: vec![0.1, 0.3, 1.0, 3.0],
            m: 4.0,
            r_u: 0.35,
            side: 8.0,
            flux: 0.2,
            source_half: 0.25,
            shell_width: 0.25,
            wall_margin: 1.0,
            eps: 1e-2,
            mollifier_radius: 0.1,
            mollifier_nodes: 6,
            trials: 2,
            noise_floor: 1e-11,
            min_points: 4,
            shape_correlation: 0.8,
            bootstrap: 200,
        }
    }
}

impl DecayParams {
    pub fn validate(&self) -> Result<()> {
        if self.fields.is_empty() || self.fields.iter().any(|&b| !(b > 0.0)) {
            return Err(invalid("fields", "need positive fields"));
        }
        // a = 0 puts E on the Landau level.
        if self.gaps.is_empty() || self.gaps.iter().any(|&a| !(a > 0.0)) {
            return Err(invalid("gaps", "every gap a must be > 0"));
        }
        if self.gaps.iter().any(|&a| 2.0 * a >= self.fields[0]) {
            return Err(invalid("gaps", "E = E0 + 2a must stay below 2B"));
        }
        if !(self.m > 0.0) {
            return Err(invalid("m", "must be positive"));
        }
        if !(self.flux > 0.0 && self.flux <= std::f64::consts::PI) {
            return Err(invalid("flux", "must be in (0, pi]"));
        }
        if !(self.eps > 0.0) {
            return Err(invalid("eps", "must be positive"));
        }
        if self.max_distance() < self.min_points as f64 * self.shell_width {
            return Err(invalid("side", "box too small for the requested shells"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be positive"));
        }
        Ok(())
    }

    fn max_distance(&self) -> f64 {
        self.side / 2.0 - self.wall_margin - self.source_half
    }

    fn grid(&self, b: f64) -> Result<Grid> {
        let n = (self.side / (self.flux / b).sqrt()).ceil();
        Grid::new([0.0, 0.0], self.side, self.side / n)
    }
}

/// Mollified potential on `grid` with every coupling in [-M, 0.9a], so
/// that V < a everywhere.
pub fn gapped_potential(p: &DecayParams, grid: &Grid, a: f64, seed: u64) -> Result<Vec<f64>> {
    let spec = CouplingSpec::uniform(p.m)?;
    let bump = SingleSiteBump::new(p.r_u, p.r_u / 2.0, profile(0.5))?;
    let r = grid.rect();
    let region = SiteRegion::covering_box(r.lo, r.hi, bump.r_u + p.mollifier_radius);
    let mut v = PotentialSample::zero(spec, bump, region);
    let mut rng = trial_rng(seed, 0);
    let sites: Vec<[i64; 2]> = region.sites().collect();
    for j in sites {
        let l = spec.sample_in(&mut rng, -p.m, 0.9 * a);
        v.set_coupling(j, l);
    }
    let moll = Mollifier::new(p.mollifier_radius, p.mollifier_nodes);
    Ok(grid.points().map(|x| moll.smooth(|y| v.eval(y), x)).collect())
}

/// Euclidean distance from x to the square of half side `s` at the origin.
fn square_distance(x: [f64; 2], s: f64) -> f64 {
    let dx = (x[0].abs() - s).max(0.0);
    let dy = (x[1].abs() - s).max(0.0);
    dx.hypot(dy)
}

/// (d, ‖χ_shell R χ_O‖) for shells [d, d + w) around the source square.
pub fn shell_norms(h: &HamiltonianMatrix, e: f64, p: &DecayParams) -> Result<Vec<(f64, f64)>> {
    let grid = h.grid;
    let src: Vec<usize> = (0..grid.len())
        .filter(|&k| {
            let x = grid.point(k);
            x[0].abs() < p.source_half && x[1].abs() < p.source_half
        })
        .collect();
    let lu = h.factor(C::new(e, p.eps))?;
    let mut rhs = DMatrix::zeros(grid.len(), src.len());
    for (c, &k) in src.iter().enumerate() {
        rhs[(k, c)] = C::new(1.0, 0.0);
    }
    let x = solve_columns(&lu, &rhs);
    let shells = (p.max_distance() / p.shell_width).floor() as usize;
    let mut out = vec![];
    for s in 1..shells {
        let d = s as f64 * p.shell_width;
        let rows: Vec<usize> = (0..grid.len())
            .filter(|&k| {
                let r = square_distance(grid.point(k), p.source_half);
                r >= d && r < d + p.shell_width
            })
            .collect();
        let block = DMatrix::from_fn(rows.len(), src.len(), |i, j| x[(rows[i], j)]);
        out.push((d, max_singular(&block)));
    }
    Ok(out)
}

/// Decay rate: minus the slope of ln(norm) against d, over the shells above
/// the noise floor. None with fewer than `min_points` usable shells.
pub fn decay_rate(norms: &[(f64, f64)], floor: f64, min_points: usize) -> Option<f64> {
    let top = norms.first()?.1;
    let usable: Vec<&(f64, f64)> = norms.iter().filter(|(_, n)| *n > floor * top && *n > 0.0).collect();
    if usable.len() < min_points {
        return None;
    }
    let xs: Vec<f64> = usable.iter().map(|t| t.0).collect();
    let ys: Vec<f64> = usable.iter().map(|t| t.1.ln()).collect();
    Some(-fit_line(&xs, &ys).slope)
}

/// Least-squares fit of γ ≈ c₁ min{√B, c₂ a B}: grid search over c₂ with
/// c₁ in closed form. Returns (c₁, c₂, predictions).
pub fn fit_shape(points: &[(f64, f64, f64)]) -> (f64, f64, Vec<f64>) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=600 {
        let c2 = 10f64.powf(-3.0 + 6.0 * i as f64 / 600.0);
        let shape: Vec<f64> = points.iter().map(|&(b, a, _)| b.sqrt().min(c2 * a * b)).collect();
        let num: f64 = shape.iter().zip(points).map(|(s, p)| s * p.2).sum();
        let den: f64 = shape.iter().map(|s| s * s).sum();
        let c1 = num / den;
        let sse: f64 = shape.iter().zip(points).map(|(s, p)| (c1 * s - p.2).powi(2)).sum();
        if sse < best.0 {
            best = (sse, c1, c2);
        }
    }
    let (_, c1, c2) = best;
    let pred = points.iter().map(|&(b, a, _)| c1 * b.sqrt().min(c2 * a * b)).collect();
    (c1, c2, pred)
}

pub fn decay_experiment(p: &DecayParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new("decay", seed, p);
    let mut shells = Series::new("shells", &["B", "a", "draw", "d", "norm"]);
    let mut rates = Series::new("rates", &["B", "a", "draw", "E", "margin", "gamma"]);
    let mut summary = Series::new("summary", &["B", "a", "gamma", "ci_low", "ci_high"]);
    // (B, a, per-draw rates)
    let mut cells: Vec<(f64, f64, Vec<f64>)> = vec![];
    for (bi, &b) in p.fields.iter().enumerate() {
        let grid = p.grid(b)?;
        let e0 = lattice_landau_energy(b, grid.h, p.side)?;
        for (ai, &a) in p.gaps.iter().enumerate() {
            let e = e0 + 2.0 * a;
            let s = substream(seed, (bi * p.gaps.len() + ai) as u64);
            let draws: Vec<(f64, Vec<(f64, f64)>)> = (0..p.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let v = gapped_potential(p, &grid, a, stream_seed(s, t))?;
                    let margin = v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)) + e0 - e;
                    let h = HamiltonianMatrix::with_values(b, grid, v)?;
                    Ok((margin, shell_norms(&h, e, p)?))
                })
                .collect::<Result<_>>()?;
            let mut gammas = vec![];
            for (t, (margin, norms)) in draws.iter().enumerate() {
                if *margin >= -a {
                    return Err(invalid("gaps", format!("potential violates V + E0 - E < -a at a = {a}")));
                }
                for &(d, n) in norms {
                    shells.push(row![b, a, t, d, n]);
                }
                let g = decay_rate(norms, p.noise_floor, p.min_points).ok_or_else(|| {
                    Error::Fit(format!("fewer than {} shells above the noise floor at B = {b}, a = {a}", p.min_points))
                })?;
                rates.push(row![b, a, t, e, *margin, g]);
                gammas.push(g);
            }
            let ci = bootstrap(gammas.len(), p.bootstrap, substream(s, 0xdeca), |idx| {
                mean(&idx.iter().map(|&i| gammas[i]).collect::<Vec<_>>())
            });
            summary.push(row![b, a, mean(&gammas), ci.low, ci.high]);
            cells.push((b, a, gammas));
        }
    }
    rep.series.push(shells);
    rep.series.push(rates);
    rep.series.push(summary);

    let points: Vec<(f64, f64, f64)> = cells.iter().map(|(b, a, g)| (*b, *a, mean(g))).collect();
    let min_gamma = points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    rep.check("decay_positive", min_gamma > 0.0, min_gamma, "fitted decay rate > 0 for every (B, a)");

    let a_min = p.gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let mut at_small: Vec<(f64, f64)> = points.iter().filter(|q| q.1 == a_min).map(|q| (q.0, q.2)).collect();
    at_small.sort_by(|x, y| x.0.total_cmp(&y.0));
    let worst_step = at_small.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::INFINITY, f64::min);
    rep.check(
        "decay_monotone_in_b",
        worst_step >= 0.0,
        worst_step,
        format!("decay rate non-decreasing in B at a = {a_min}"),
    );

    let (c1, c2, pred) = fit_shape(&points);
    let observed: Vec<f64> = points.iter().map(|q| q.2).collect();
    let r = pearson(&observed, &pred);
    rep.fit("shape_c1", c1, None);
    rep.fit("shape_c2", c2, None);
    rep.fit("shape_correlation", r, None);
    rep.check(
        "decay_shape",
        r >= p.shape_correlation,
        r,
        format!("correlation of fitted rates with c1 min(sqrt B, c2 a B) >= {}", p.shape_correlation),
    );
    Ok(rep.finish(t0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_to_square() {
        assert_eq!(square_distance([0.1, 0.2], 0.25), 0.0);
        assert!((square_distance([1.25, 0.0], 0.25) - 1.0).abs() < 1e-15);
        assert!((square_distance([-1.25, 1.25], 0.25) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rate_of_pure_exponential() {
        let norms: Vec<(f64, f64)> = (1..10).map(|k| (k as f64 * 0.25, 3.0 * (-2.0 * k as f64 * 0.25).exp())).collect();
        assert!((decay_rate(&norms, 1e-11, 4).unwrap() - 2.0).abs() < 1e-12);
        let floored: Vec<(f64, f64)> = norms.iter().map(|&(d, n)| (d, if d > 0.6 { 1e-20 } else { n })).collect();
        assert!(decay_rate(&floored, 1e-11, 4).is_none());
    }

    #[test]
    fn shape_fit_recovers_parameters() {
        let mut pts = vec![];
        for b in [10.0f64, 20.0, 40.0] {
            for a in [0.1, 0.3, 1.0, 3.0] {
                pts.push((b, a, 0.7 * b.sqrt().min(0.5 * a * b)));
            }
        }
        let (c1, c2, pred) = fit_shape(&pts);
        assert!((c1 - 0.7).abs() < 0.02 && (c2 - 0.5).abs() < 0.03, "{c1} {c2}");
        assert!(pearson(&pts.iter().map(|p| p.2).collect::<Vec<_>>(), &pred) > 0.999);
    }

    #[test]
    fn potential_respects_the_gap() {
        let p = DecayParams::default();
        let grid = p.grid(10.0).unwrap();
        let v = gapped_potential(&p, &grid, 0.3, 7).unwrap();
        let top = v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        assert!(top < 0.3 && top > 0.0);
        assert!(v.iter().any(|&x| x < -1.0));
    }

    #[test]
    fn free_resolvent_decays_in_the_gap() {
        let p = DecayParams {
            side: 6.0,
            ..DecayParams::default()
        };
        let b = 10.0;
        let grid = p.grid(b).unwrap();
        let h = HamiltonianMatrix::free(b, grid).unwrap();
        let norms = shell_norms(&h, 2.0 * b, &p).unwrap();
        let g = decay_rate(&norms, p.noise_floor, 3).unwrap();
        assert!(g > 1.0, "{g}");
        assert!(norms.windows(2).all(|w| w[1].1 < w[0].1));
    }
}
