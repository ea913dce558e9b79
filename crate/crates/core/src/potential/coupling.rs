use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CouplingFamily {
    Uniform,
    /// Centered Gaussian of width `sigma` conditioned on [-M, M].
    TruncatedGaussian { sigma: f64 },
}

/// Single-site coupling distribution with density g supported in [-M, M].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub m: f64,
    pub family: CouplingFamily,
}

impl CouplingSpec {
    pub fn uniform(m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(invalid("m", format!("{m} must be positive")));
        }
        Ok(Self {
            m,
            family: CouplingFamily::Uniform,
        })
    }

    pub fn truncated_gaussian(m: f64, sigma: f64) -> Result<Self> {
        Self::uniform(m)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("{sigma} must be positive")));
        }
        Ok(Self {
            m,
            family: CouplingFamily::TruncatedGaussian { sigma },
        })
    }

    fn gaussian_norm(&self, sigma: f64) -> f64 {
        sigma * (2.0 * std::f64::consts::PI).sqrt() * statrs::function::erf::erf(self.m / (sigma * std::f64::consts::SQRT_2))
    }

    /// The density g(λ).
    pub fn density(&self, lambda: f64) -> f64 {
        if lambda.abs() > self.m {
            return 0.0;
        }
        match self.family {
            CouplingFamily::Uniform => 0.5 / self.m,
            CouplingFamily::TruncatedGaussian { sigma } => {
                (-0.5 * (lambda / sigma).powi(2)).exp() / self.gaussian_norm(sigma)
            }
        }
    }

    /// ‖g‖_∞, attained at λ = 0 for both families.
    pub fn density_sup(&self) -> f64 {
        self.density(0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            CouplingFamily::Uniform => rng.random_range(-self.m..=self.m),
            CouplingFamily::TruncatedGaussian { sigma } => {
                let normal = Normal::new(0.0, sigma).expect("positive width");
                loop {
                    let x = normal.sample(rng);
                    if x.abs() <= self.m {
                        return x;
                    }
                }
            }
        }
    }

    /// Sample conditioned on λ ∈ [lo, hi] (by rejection).
    pub fn sample_in<R: Rng + ?Sized>(&self, rng: &mut R, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.max(-self.m), hi.min(self.m));
        assert!(lo < hi, "empty conditioning interval");
        match self.family {
            CouplingFamily::Uniform => rng.random_range(lo..=hi),
            CouplingFamily::TruncatedGaussian { .. } => loop {
                let x = self.sample(rng);
                if (lo..=hi).contains(&x) {
                    return x;
                }
            },
        }
    }
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// p = ∫_{-M}^{a} g(λ) dλ, clamped to [0, 1].
pub fn occupation_probability(spec: &CouplingSpec, a: f64) -> f64 {
    if a <= -spec.m {
        return 0.0;
    }
    let upper = a.min(spec.m);
    simpson(|x| spec.density(x), -spec.m, upper, 4000).clamp(0.0, 1.0)
}

/// Whether the Γ-bond with coupling `lambda` is occupied at energy `e` in
/// field `b`. For E > B this is λ < (E - B)/2; for E < B the mirrored
/// predicate λ > (E - B)/2 is used.
pub fn is_occupied(lambda: f64, e: f64, b: f64) -> bool {
    let a = 0.5 * (e - b);
    if e >= b {
        lambda < a
    } else {
        lambda > a
    }
}
