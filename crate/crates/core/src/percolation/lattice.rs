//! The dual lattice and bond configurations.
//!
//! Bonds are stored on an internal square lattice with vertices (m, n) in
//! Z². The map to the rotated lattice Γ sends vertex (m, n) to
//! `origin + (m - n, m + n)`, so every bond midpoint lands on Z² and the
//! bond direction is fixed by the parity of the midpoint coordinate sum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::TrialRng;
use rand::SeedableRng;

/// A bond of the internal lattice: `Horizontal(m, n)` joins (m,n)-(m+1,n),
/// `Vertical(m, n)` joins (m,n)-(m,n+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bond {
    Horizontal(i64, i64),
    Vertical(i64, i64),
}

impl Bond {
    pub fn endpoints(self) -> [[i64; 2]; 2] {
        match self {
            Bond::Horizontal(m, n) => [[m, n], [m + 1, n]],
            Bond::Vertical(m, n) => [[m, n], [m, n + 1]],
        }
    }

    /// Midpoint of the bond on Γ; always a point of Z².
    pub fn midpoint(self) -> [i64; 2] {
        match self {
            Bond::Horizontal(m, n) => [m - n + 1, m + n + 1],
            Bond::Vertical(m, n) => [m - n, m + n + 1],
        }
    }

    /// Inverse of [`Bond::midpoint`]. Even coordinate sum means direction
    /// (1, 1) on Γ, odd means (-1, 1).
    pub fn from_midpoint(j: [i64; 2]) -> Bond {
        let s = j[0] + j[1];
        if s.rem_euclid(2) == 0 {
            Bond::Horizontal(s / 2 - 1, (j[1] - j[0]) / 2)
        } else {
            Bond::Vertical((s - 1).div_euclid(2), (j[1] - 1 - j[0]).div_euclid(2))
        }
    }
}

/// Γ covering the internal box `|m|, |n| <= extent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualLattice {
    /// Position on Γ of the internal vertex (0, 0).
    pub origin_offset: [f64; 2],
    pub extent: i64,
}

impl DualLattice {
    pub fn new(extent: i64) -> Result<Self> {
        if extent < 1 {
            return Err(invalid("extent", "must be at least 1"));
        }
        Ok(Self {
            origin_offset: [0.5, 0.5],
            extent,
        })
    }

    pub fn side(&self) -> usize {
        (2 * self.extent + 1) as usize
    }

    pub fn vertex_count(&self) -> usize {
        self.side() * self.side()
    }

    pub fn bond_count(&self) -> usize {
        2 * self.side() * (self.side() - 1)
    }

    pub fn contains_vertex(&self, v: [i64; 2]) -> bool {
        v[0].abs() <= self.extent && v[1].abs() <= self.extent
    }

    pub fn vertex_index(&self, v: [i64; 2]) -> usize {
        let w = self.side() as i64;
        ((v[1] + self.extent) * w + (v[0] + self.extent)) as usize
    }

    pub fn bond_index(&self, b: Bond) -> Option<usize> {
        let r = self.extent;
        let w = self.side() as i64;
        match b {
            Bond::Horizontal(m, n) if (-r..r).contains(&m) && (-r..=r).contains(&n) => {
                Some(((n + r) * (w - 1) + (m + r)) as usize)
            }
            Bond::Vertical(m, n) if (-r..=r).contains(&m) && (-r..r).contains(&n) => {
                Some((w * (w - 1) + (n + r) * w + (m + r)) as usize)
            }
            _ => None,
        }
    }

    pub fn bond_at(&self, index: usize) -> Bond {
        let r = self.extent;
        let w = self.side() as i64;
        let i = index as i64;
        let h = w * (w - 1);
        if i < h {
            Bond::Horizontal(i % (w - 1) - r, i / (w - 1) - r)
        } else {
            let k = i - h;
            Bond::Vertical(k % w - r, k / w - r)
        }
    }

    /// Position of an internal vertex on Γ.
    pub fn vertex_position(&self, v: [i64; 2]) -> [f64; 2] {
        [
            self.origin_offset[0] + (v[0] - v[1]) as f64,
            self.origin_offset[1] + (v[0] + v[1]) as f64,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondConfig {
    pub lattice: DualLattice,
    pub occupied: Vec<bool>,
    pub p: f64,
    pub seed: u64,
}

impl BondConfig {
    pub fn is_occupied(&self, b: Bond) -> bool {
        self.lattice
            .bond_index(b)
            .is_some_and(|i| self.occupied[i])
    }

    pub fn is_occupied_at(&self, midpoint: [i64; 2]) -> bool {
        self.is_occupied(Bond::from_midpoint(midpoint))
    }

    pub fn set(&mut self, b: Bond, value: bool) {
        let i = self.lattice.bond_index(b).expect("bond outside region");
        self.occupied[i] = value;
    }

    pub fn filled(lattice: DualLattice, value: bool) -> Self {
        Self {
            occupied: vec![value; lattice.bond_count()],
            lattice,
            p: if value { 1.0 } else { 0.0 },
            seed: 0,
        }
    }

    pub fn occupied_fraction(&self) -> f64 {
        self.occupied.iter().filter(|&&b| b).count() as f64 / self.occupied.len() as f64
    }
}

/// Bernoulli bond percolation on the internal box of half-side `extent`.
///
/// Bond `k` (in index order) is occupied iff the `k`-th uniform of the
/// seeded stream is below `p`, so configurations for different `p` and the
/// same seed are monotonically coupled.
pub fn sample_bonds(p: f64, extent: i64, seed: u64) -> Result<BondConfig> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("{p} is not in [0, 1]")));
    }
    let lattice = DualLattice::new(extent)?;
    let mut rng = TrialRng::seed_from_u64(seed);
    let occupied = (0..lattice.bond_count())
        .map(|_| rng.random::<f64>() < p)
        .collect();
    Ok(BondConfig {
        lattice,
        occupied,
        p,
        seed,
    })
}
