use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// The C² profile t -> (1 - t²)³ on [0, 1), zero beyond.
#[inline]
pub fn profile(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        s * s * s
    }
}

/// Derivative of [`profile`] in t.
#[inline]
pub fn profile_deriv(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        -6.0 * t * s * s
    }
}

/// max |profile'| = 6 s (1 - s²)² at s = 1/sqrt(5), i.e. 96/(25 sqrt 5).
pub const PROFILE_DERIV_MAX: f64 = 1.717_300_206_719_838_4;

/// Radial single-site bump u(x) = profile(|x| / r_u).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleSiteBump {
    pub r_u: f64,
    pub r_0: f64,
    pub c_0: f64,
    /// Support radius beyond 1/sqrt(2): neighbouring supports overlap and
    /// cover the plane. Outside the standard single-site assumption.
    pub covering: bool,
}

impl Default for SingleSiteBump {
    fn default() -> Self {
        Self::new(0.35, 0.175, 0.421_875).unwrap()
    }
}

impl SingleSiteBump {
    pub fn new(r_u: f64, r_0: f64, c_0: f64) -> Result<Self> {
        if !(r_u > 0.0 && r_u < INV_SQRT2) {
            return Err(invalid("r_u", format!("{r_u} not in (0, 1/sqrt 2)")));
        }
        Self::checked(r_u, r_0, c_0, false)
    }

    /// Overlapping bumps whose translates sum to at least
    /// [`SingleSiteBump::cover_bound`] everywhere.
    pub fn covering(r_u: f64) -> Result<Self> {
        if !(r_u > INV_SQRT2 && r_u < 2.0) {
            return Err(invalid("r_u", format!("covering radius {r_u} not in (1/sqrt 2, 2)")));
        }
        Self::checked(r_u, r_u / 2.0, profile(0.5), true)
    }

    fn checked(r_u: f64, r_0: f64, c_0: f64, covering: bool) -> Result<Self> {
        if !(r_0 > 0.0 && r_0 < r_u) {
            return Err(invalid("r_0", format!("{r_0} not in (0, r_u)")));
        }
        if !(c_0 > 0.0 && c_0 <= 1.0) {
            return Err(invalid("c_0", format!("{c_0} not in (0, 1]")));
        }
        // u > c_0 on the open ball of radius r_0.
        if profile(r_0 / r_u) < c_0 {
            return Err(invalid("c_0", format!("u(r_0) = {} is below {c_0}", profile(r_0 / r_u))));
        }
        Ok(Self {
            r_u,
            r_0,
            c_0,
            covering,
        })
    }

    #[inline]
    pub fn eval_radius(&self, r: f64) -> f64 {
        profile(r / self.r_u)
    }

    #[inline]
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.eval_radius((x[0] * x[0] + x[1] * x[1]).sqrt())
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if r == 0.0 || r >= self.r_u {
            return [0.0, 0.0];
        }
        let d = profile_deriv(r / self.r_u) / self.r_u;
        [d * x[0] / r, d * x[1] / r]
    }

    pub fn max_gradient(&self) -> f64 {
        PROFILE_DERIV_MAX / self.r_u
    }

    /// Largest number of open support disks centered on Z² that contain a
    /// common point.
    pub fn max_overlap(&self) -> usize {
        if 2.0 * self.r_u <= 1.0 {
            return 1;
        }
        // The count is maximized on a vertex of the circle arrangement or
        // an interior point; scan a fine grid of the fundamental cell.
        let steps = 400;
        let reach = self.r_u.ceil() as i64 + 1;
        let mut best = 1;
        for a in 0..=steps / 2 {
            for b in 0..=a {
                let x = [a as f64 / steps as f64, b as f64 / steps as f64];
                let mut count = 0;
                for i in -reach..=reach + 1 {
                    for j in -reach..=reach + 1 {
                        let d = ((x[0] - i as f64).powi(2) + (x[1] - j as f64).powi(2)).sqrt();
                        if d < self.r_u {
                            count += 1;
                        }
                    }
                }
                best = best.max(count);
            }
        }
        best
    }

    /// Lower bound of sum_i u(x - i) over the plane: every point is within
    /// 1/sqrt(2) of a site.
    pub fn cover_bound(&self) -> f64 {
        self.eval_radius(INV_SQRT2)
    }
}
