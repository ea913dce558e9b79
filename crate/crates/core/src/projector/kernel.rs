use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hamiltonian::wedge;

type C = Complex64;

/// Laguerre polynomial L_n(t) by the three-term recurrence.
pub fn laguerre(n: u32, t: f64) -> f64 {
    let (mut a, mut b) = (1.0, 1.0 - t);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let k = k as f64;
        let c = ((2.0 * k + 1.0 - t) * b - k * a) / (k + 1.0);
        a = b;
        b = c;
    }
    b
}

/// Integral kernel of the projector onto the n-th Landau level of
/// (p - A)², A = (B/2)(x₂, -x₁):
/// P_n(x, y) = (B/2π) L_n(B|x-y|²/2) e^{-B|x-y|²/4} e^{-i(B/2) x∧y}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorKernel {
    pub n: u32,
    pub b: f64,
}

impl ProjectorKernel {
    pub fn new(n: u32, b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(invalid("B", format!("{b} must be positive")));
        }
        Ok(Self { n, b })
    }

    pub fn magnetic_length(&self) -> f64 {
        self.b.powf(-0.5)
    }

    /// Landau energy (2n + 1)B.
    pub fn energy(&self) -> f64 {
        (2 * self.n + 1) as f64 * self.b
    }

    /// Gauge-invariant radial part as a function of r² = |x - y|².
    pub fn radial(&self, r2: f64) -> f64 {
        let s = self.b * r2;
        self.b / (2.0 * std::f64::consts::PI) * laguerre(self.n, 0.5 * s) * (-0.25 * s).exp()
    }

    pub fn eval(&self, x: [f64; 2], y: [f64; 2]) -> C {
        let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
        C::from_polar(1.0, -0.5 * self.b * wedge(x, y)) * self.radial(r2)
    }
}
