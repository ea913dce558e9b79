//! Small statistics toolkit: binomial intervals, least squares, bootstrap.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::trial_rng;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: u64, n: u64, z: f64) -> Interval {
    if n == 0 {
        return Interval { low: 0.0, high: 1.0 };
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Interval {
        low: if k == 0 { 0.0 } else { (center - half).max(0.0) },
        high: if p == 1.0 { 1.0 } else { (center + half).min(1.0) },
    }
}

/// Plug-in binomial standard error.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n.max(1) as f64).sqrt()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares y = intercept + slope * x.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "a line needs two points");
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LineFit {
        slope,
        intercept,
        r2,
    }
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = mean(xs);
    let my = mean(ys);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Percentile bootstrap: `stat` receives resampled indices into `0..n`.
/// Resamples where `stat` returns a non-finite value are dropped.
pub fn bootstrap<F>(n: usize, resamples: usize, seed: u64, mut stat: F) -> Interval
where
    F: FnMut(&[usize]) -> f64,
{
    let mut values = Vec::with_capacity(resamples);
    let mut idx = vec![0usize; n];
    for r in 0..resamples {
        let mut rng = trial_rng(seed, r as u64);
        for slot in idx.iter_mut() {
            *slot = rng.random_range(0..n);
        }
        let v = stat(&idx);
        if v.is_finite() {
            values.push(v);
        }
    }
    percentile_interval(&mut values, 0.025, 0.975)
}

fn percentile_interval(values: &mut [f64], lo: f64, hi: f64) -> Interval {
    if values.is_empty() {
        return Interval {
            low: f64::NAN,
            high: f64::NAN,
        };
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let pick = |q: f64| {
        let pos = q * (values.len() - 1) as f64;
        let i = pos.floor() as usize;
        let j = (i + 1).min(values.len() - 1);
        let t = pos - i as f64;
        values[i] * (1.0 - t) + values[j] * t
    };
    Interval {
        low: pick(lo),
        high: pick(hi),
    }
}

/// Binomial regression with complementary log-log link:
/// P(x) = 1 - exp(-exp(alpha + beta x)). Returns (alpha, beta).
///
/// For small probabilities P ~ exp(alpha) exp(beta x), so beta is the
/// power-law exponent when x is a logarithm.
pub fn fit_cloglog(xs: &[f64], successes: &[u64], trials: &[u64]) -> Option<(f64, f64)> {
    let design: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
    fit_cloglog_design(&design, successes, trials).map(|c| (c[0], c[1]))
}

fn cloglog_loglik(design: &[Vec<f64>], coef: &[f64], successes: &[u64], trials: &[u64]) -> f64 {
    design
        .iter()
        .zip(successes.iter().zip(trials))
        .map(|(row, (&k, &n))| {
            let mu = row.iter().zip(coef).map(|(a, b)| a * b).sum::<f64>().exp();
            let p = (-(-mu).exp_m1()).clamp(1e-300, 1.0);
            // ln(1 - p) = -mu exactly.
            k as f64 * p.ln() - (n - k) as f64 * mu
        })
        .sum()
}

/// Cloglog regression on an arbitrary design matrix (one row of
/// covariates per binomial cell, including any intercept column).
/// Damped Fisher scoring; `None` without successes or on a singular
/// information matrix.
pub fn fit_cloglog_design(design: &[Vec<f64>], successes: &[u64], trials: &[u64]) -> Option<Vec<f64>> {
    let total_k: u64 = successes.iter().sum();
    let total_n: u64 = trials.iter().sum();
    if total_k == 0 || design.is_empty() {
        return None;
    }
    let d = design[0].len();
    let mut coef = vec![0.0; d];
    // Intercept-only start when the first column is constant.
    if design.iter().all(|r| r[0] == design[0][0]) && design[0][0] != 0.0 {
        let p = (total_k as f64 / total_n as f64).min(1.0 - 1e-9);
        coef[0] = (-(1.0 - p).ln()).ln() / design[0][0];
    }
    let mut ll = cloglog_loglik(design, &coef, successes, trials);
    for _ in 0..200 {
        let mut info = nalgebra::DMatrix::<f64>::zeros(d, d);
        let mut score = nalgebra::DVector::<f64>::zeros(d);
        for (row, (&k, &n)) in design.iter().zip(successes.iter().zip(trials)) {
            let eta: f64 = row.iter().zip(&coef).map(|(a, b)| a * b).sum();
            let mu = eta.exp();
            let p = (-(-mu).exp_m1()).clamp(1e-300, 1.0 - 1e-16);
            let dp = (1.0 - p) * mu;
            let nn = n as f64;
            let w = nn * dp * dp / (p * (1.0 - p));
            let s = (k as f64 - nn * p) * dp / (p * (1.0 - p));
            for i in 0..d {
                score[i] += s * row[i];
                for j in 0..d {
                    info[(i, j)] += w * row[i] * row[j];
                }
            }
        }
        let step = info.lu().solve(&score)?;
        let mut t = 1.0;
        let mut next;
        loop {
            next = coef.iter().zip(step.iter()).map(|(c, s)| c + t * s).collect::<Vec<_>>();
            let nll = cloglog_loglik(design, &next, successes, trials);
            if nll >= ll - 1e-12 * ll.abs() || t < 1e-6 {
                ll = nll;
                break;
            }
            t *= 0.5;
        }
        let change: f64 = step.iter().map(|s| (t * s).abs()).sum();
        coef = next;
        if change < 1e-12 {
            break;
        }
    }
    coef.iter().all(|c| c.is_finite()).then_some(coef)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_estimate_and_handles_extremes() {
        let ci = wilson(50, 100, Z95);
        assert!(ci.low < 0.5 && ci.high > 0.5);
        // Textbook value for 50/100.
        assert!((ci.low - 0.4038).abs() < 1e-3);
        let zero = wilson(0, 100, Z95);
        assert_eq!(zero.low, 0.0);
        assert!(zero.high > 0.0 && zero.high < 0.05);
        let one = wilson(100, 100, Z95);
        assert_eq!(one.high, 1.0);
    }

    #[test]
    fn exact_line_has_unit_r2() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let f = fit_line(&xs, &ys);
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!((f.intercept - 3.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cloglog_recovers_exact_probabilities() {
        let xs: Vec<f64> = (0..6).map(|i| -3.0 + 0.5 * i as f64).collect();
        let n = 1_000_000u64;
        let ks: Vec<u64> = xs
            .iter()
            .map(|x| {
                let p = 1.0 - (-(0.7f64.ln() + 1.3 * x).exp()).exp();
                (p * n as f64).round() as u64
            })
            .collect();
        let (a, b) = fit_cloglog(&xs, &ks, &vec![n; xs.len()]).unwrap();
        assert!((b - 1.3).abs() < 1e-3, "{b}");
        assert!((a - 0.7f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn cloglog_design_recovers_group_offset() {
        let n = 1_000_000u64;
        let (mut design, mut ks) = (vec![], vec![]);
        for g in 0..2 {
            for i in 0..5 {
                let x = -3.0 + 0.5 * i as f64;
                let eta = -0.5 + 0.9 * x + 4f64.ln() * g as f64;
                ks.push(((1.0 - (-eta.exp()).exp()) * n as f64).round() as u64);
                design.push(vec![1.0, x, g as f64]);
            }
        }
        let c = fit_cloglog_design(&design, &ks, &[n; 10]).unwrap();
        assert!((c[1] - 0.9).abs() < 1e-3 && (c[2].exp() - 4.0).abs() < 1e-2, "{c:?}");
        assert!(fit_cloglog_design(&design, &[0; 10], &[n; 10]).is_none());
    }

    #[test]
    fn bootstrap_of_mean_covers_sample_mean() {
        let data: Vec<f64> = (0..100).map(|i| (i % 10) as f64).collect();
        let ci = bootstrap(data.len(), 400, 1, |idx| {
            idx.iter().map(|&i| data[i]).sum::<f64>() / idx.len() as f64
        });
        assert!(ci.contains(4.5));
        assert!(ci.high - ci.low < 2.0);
    }
}
