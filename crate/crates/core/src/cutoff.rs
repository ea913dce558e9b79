//! Cutoff functions χ with declared supports, shared by the kernel
//! quadratures and the lattice Hamiltonians.

use serde::{Deserialize, Serialize};

/// C² smoothstep on [0, 1].
fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 + u * (6.0 * u - 15.0))
}

fn smoothstep_deriv(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        30.0 * u * u * (1.0 - u) * (1.0 - u)
    }
}

/// Axis-aligned closed rectangle [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Self { lo, hi }
    }

    pub fn centered(c: [f64; 2], half: f64) -> Self {
        Self::new([c[0] - half, c[1] - half], [c[0] + half, c[1] + half])
    }

    pub fn area(&self) -> f64 {
        (self.hi[0] - self.lo[0]).max(0.0) * (self.hi[1] - self.lo[1]).max(0.0)
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        (0..2).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }

    pub fn grown(&self, w: f64) -> Self {
        Self::new([self.lo[0] - w, self.lo[1] - w], [self.hi[0] + w, self.hi[1] + w])
    }

    /// Euclidean distance between two rectangles (0 if they meet).
    pub fn distance(&self, o: &Rect) -> f64 {
        let gap = |i: usize| (o.lo[i] - self.hi[i]).max(self.lo[i] - o.hi[i]).max(0.0);
        gap(0).hypot(gap(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cutoff {
    Zero,
    One,
    /// Indicator of a closed rectangle.
    Indicator { rect: Rect },
    /// 1 on `rect`, decaying through a C² ramp of width `ramp` to 0 at the
    /// boundary of `rect.grown(ramp)`.
    Smooth { rect: Rect, ramp: f64 },
    /// 1 - Smooth: supported outside `rect`.
    SmoothComplement { rect: Rect, ramp: f64 },
}

impl Cutoff {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match *self {
            Cutoff::Zero => 0.0,
            Cutoff::One => 1.0,
            Cutoff::Indicator { rect } => f64::from(u8::from(rect.contains(x))),
            Cutoff::Smooth { rect, ramp } => ramp_profile(rect, ramp, x),
            Cutoff::SmoothComplement { rect, ramp } => 1.0 - ramp_profile(rect, ramp, x),
        }
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        match *self {
            Cutoff::Smooth { rect, ramp } => ramp_gradient(rect, ramp, x),
            Cutoff::SmoothComplement { rect, ramp } => {
                let g = ramp_gradient(rect, ramp, x);
                [-g[0], -g[1]]
            }
            _ => [0.0, 0.0],
        }
    }

    /// Bounding rectangle of the support, `None` if empty or unbounded.
    pub fn support(&self) -> Option<Rect> {
        match *self {
            Cutoff::Indicator { rect } => Some(rect),
            Cutoff::Smooth { rect, ramp } => Some(rect.grown(ramp)),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Cutoff::Zero)
    }
}

fn axis(lo: f64, hi: f64, ramp: f64, t: f64) -> (f64, f64) {
    let d = (lo - t).max(t - hi);
    if d <= 0.0 {
        return (1.0, 0.0);
    }
    let u = 1.0 - d / ramp;
    let sgn = if t > hi { -1.0 } else { 1.0 };
    (smoothstep(u), sgn * smoothstep_deriv(u) / ramp)
}

fn ramp_profile(r: Rect, ramp: f64, x: [f64; 2]) -> f64 {
    axis(r.lo[0], r.hi[0], ramp, x[0]).0 * axis(r.lo[1], r.hi[1], ramp, x[1]).0
}

fn ramp_gradient(r: Rect, ramp: f64, x: [f64; 2]) -> [f64; 2] {
    let (a, da) = axis(r.lo[0], r.hi[0], ramp, x[0]);
    let (b, db) = axis(r.lo[1], r.hi[1], ramp, x[1]);
    [da * b, a * db]
}

/// Support distance δ between two cutoffs with declared bounded supports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationPair {
    pub chi1: Cutoff,
    pub chi2: Cutoff,
}

impl LocalizationPair {
    pub fn new(chi1: Cutoff, chi2: Cutoff) -> Self {
        Self { chi1, chi2 }
    }

    /// Unit squares with lower-left corners (0,0) and (1 + δ, 0).
    pub fn unit_squares(delta: f64) -> Self {
        let a = Rect::new([0.0, 0.0], [1.0, 1.0]);
        let b = Rect::new([1.0 + delta, 0.0], [2.0 + delta, 1.0]);
        Self::new(Cutoff::Indicator { rect: a }, Cutoff::Indicator { rect: b })
    }

    pub fn delta(&self) -> f64 {
        match (self.chi1.support(), self.chi2.support()) {
            (Some(a), Some(b)) => a.distance(&b),
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_cutoff_values_and_gradient() {
        let c = Cutoff::Smooth { rect: Rect::centered([0.0, 0.0], 1.0), ramp: 0.5 };
        assert_eq!(c.eval([0.3, -0.9]), 1.0);
        assert_eq!(c.eval([1.5, 0.0]), 0.0);
        assert!((c.eval([1.25, 0.0]) - 0.5).abs() < 1e-15);
        let h = 1e-6;
        for x in [[1.1, 0.2], [-1.3, 1.2], [0.4, -1.45]] {
            let g = c.gradient(x);
            for i in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let fd = (c.eval(xp) - c.eval(xm)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6, "{x:?} {i}");
            }
        }
        let d = Cutoff::SmoothComplement { rect: Rect::centered([0.0, 0.0], 1.0), ramp: 0.5 };
        assert_eq!(d.eval([0.0, 0.0]), 0.0);
        assert_eq!(d.eval([2.0, 0.0]), 1.0);
    }

    #[test]
    fn pair_distance() {
        assert!((LocalizationPair::unit_squares(1.0).delta() - 1.0).abs() < 1e-15);
        let a = Rect::new([0.0, 0.0], [1.0, 1.0]);
        let b = Rect::new([4.0, 5.0], [5.0, 6.0]);
        assert!((a.distance(&b) - 5.0).abs() < 1e-15);
        assert_eq!(a.distance(&a), 0.0);
    }
}
