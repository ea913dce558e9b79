use serde::{Deserialize, Serialize};

use super::bump::SingleSiteBump;
use super::coupling::CouplingSpec;
use crate::error::{invalid, Result};
use crate::rng::TrialRng;
use rand::SeedableRng;

/// Rectangle of lattice sites `lo..=hi` in each coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteRegion {
    pub lo: [i64; 2],
    pub hi: [i64; 2],
}

impl SiteRegion {
    pub fn new(lo: [i64; 2], hi: [i64; 2]) -> Result<Self> {
        if lo[0] > hi[0] || lo[1] > hi[1] {
            return Err(invalid("region", "empty site region"));
        }
        Ok(Self { lo, hi })
    }

    /// Sites with |j_i| <= r.
    pub fn centered(r: i64) -> Self {
        Self {
            lo: [-r, -r],
            hi: [r, r],
        }
    }

    /// All sites whose support of radius `r_u` can meet the closed box
    /// [min, max]².
    pub fn covering_box(min: [f64; 2], max: [f64; 2], r_u: f64) -> Self {
        Self {
            lo: [(min[0] - r_u).floor() as i64, (min[1] - r_u).floor() as i64],
            hi: [(max[0] + r_u).ceil() as i64, (max[1] + r_u).ceil() as i64],
        }
    }

    pub fn width(&self) -> usize {
        (self.hi[0] - self.lo[0] + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.width() * (self.hi[1] - self.lo[1] + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, j: [i64; 2]) -> bool {
        (self.lo[0]..=self.hi[0]).contains(&j[0]) && (self.lo[1]..=self.hi[1]).contains(&j[1])
    }

    pub fn index(&self, j: [i64; 2]) -> Option<usize> {
        self.contains(j)
            .then(|| (j[1] - self.lo[1]) as usize * self.width() + (j[0] - self.lo[0]) as usize)
    }

    pub fn site(&self, k: usize) -> [i64; 2] {
        let w = self.width();
        [self.lo[0] + (k % w) as i64, self.lo[1] + (k / w) as i64]
    }

    pub fn sites(&self) -> impl Iterator<Item = [i64; 2]> + '_ {
        (0..self.len()).map(|k| self.site(k))
    }
}

/// V(x) = Σ_j λ_j u(x - j) over the sites of a region (λ = 0 elsewhere).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    pub region: SiteRegion,
    pub couplings: Vec<f64>,
    pub bump: SingleSiteBump,
    pub spec: CouplingSpec,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct SparseCoupling {
    j: [i64; 2],
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct PotentialJson {
    seed: u64,
    spec: CouplingSpec,
    bump: SingleSiteBump,
    region: SiteRegion,
    couplings: Vec<SparseCoupling>,
}

/// i.i.d. couplings from `spec` on every site of `region`, in row-major
/// site order from one seeded stream.
pub fn sample_couplings(spec: &CouplingSpec, bump: SingleSiteBump, region: SiteRegion, seed: u64) -> PotentialSample {
    let mut rng = TrialRng::seed_from_u64(seed);
    let couplings = (0..region.len()).map(|_| spec.sample(&mut rng)).collect();
    PotentialSample {
        region,
        couplings,
        bump,
        spec: *spec,
        seed,
    }
}

impl PotentialSample {
    pub fn zero(spec: CouplingSpec, bump: SingleSiteBump, region: SiteRegion) -> Self {
        Self {
            region,
            couplings: vec![0.0; region.len()],
            bump,
            spec,
            seed: 0,
        }
    }

    pub fn coupling(&self, j: [i64; 2]) -> f64 {
        self.region.index(j).map_or(0.0, |k| self.couplings[k])
    }

    pub fn set_coupling(&mut self, j: [i64; 2], lambda: f64) {
        let k = self.region.index(j).expect("site outside region");
        self.couplings[k] = lambda;
    }

    /// V(x), summing only sites within r_u of x.
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let r = self.bump.r_u;
        let mut v = 0.0;
        for ja in (x[0] - r).ceil() as i64..=(x[0] + r).floor() as i64 {
            for jb in (x[1] - r).ceil() as i64..=(x[1] + r).floor() as i64 {
                let j = [ja, jb];
                let lambda = self.coupling(j);
                if lambda != 0.0 {
                    v += lambda * self.bump.eval([x[0] - ja as f64, x[1] - jb as f64]);
                }
            }
        }
        v
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let r = self.bump.r_u;
        let mut g = [0.0; 2];
        for ja in (x[0] - r).ceil() as i64..=(x[0] + r).floor() as i64 {
            for jb in (x[1] - r).ceil() as i64..=(x[1] + r).floor() as i64 {
                let lambda = self.coupling([ja, jb]);
                if lambda != 0.0 {
                    let d = self.bump.gradient([x[0] - ja as f64, x[1] - jb as f64]);
                    g[0] += lambda * d[0];
                    g[1] += lambda * d[1];
                }
            }
        }
        g
    }

    /// M₀ = M times the largest number of overlapping supports.
    pub fn m0(&self) -> f64 {
        self.spec.m * self.bump.max_overlap() as f64
    }

    /// Upper bound on ‖∇V‖_∞.
    pub fn gradient_bound(&self) -> f64 {
        self.spec.m * self.bump.max_overlap() as f64 * self.bump.max_gradient()
    }

    /// The same field shifted by a lattice vector: λ'_{j+a} = λ_j.
    pub fn translated(&self, a: [i64; 2]) -> Self {
        let mut out = self.clone();
        out.region = SiteRegion {
            lo: [self.region.lo[0] + a[0], self.region.lo[1] + a[1]],
            hi: [self.region.hi[0] + a[0], self.region.hi[1] + a[1]],
        };
        out
    }

    /// Keep only couplings of sites satisfying `keep`.
    pub fn restricted<F: Fn([i64; 2]) -> bool>(&self, keep: F) -> Self {
        let mut out = self.clone();
        for (k, c) in out.couplings.iter_mut().enumerate() {
            if !keep(self.region.site(k)) {
                *c = 0.0;
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let couplings = self
            .couplings
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0.0)
            .map(|(k, &lambda)| SparseCoupling {
                j: self.region.site(k),
                lambda,
            })
            .collect();
        serde_json::to_string(&PotentialJson {
            seed: self.seed,
            spec: self.spec,
            bump: self.bump,
            region: self.region,
            couplings,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: PotentialJson = serde_json::from_str(text)?;
        let mut out = Self::zero(p.spec, p.bump, p.region);
        out.seed = p.seed;
        for c in p.couplings {
            if !p.region.contains(c.j) {
                return Err(invalid("couplings", format!("site {:?} outside region", c.j)));
            }
            out.set_coupling(c.j, c.lambda);
        }
        Ok(out)
    }
}

/// Smoothing kernel: the bump profile at radius `eps`, unit mass.
#[derive(Debug, Clone)]
pub struct Mollifier {
    pub eps: f64,
    nodes: Vec<([f64; 2], f64)>,
}

impl Mollifier {
    /// Tensor midpoint rule with `k` x `k` nodes on [-eps, eps]², weights
    /// renormalized to sum to one.
    pub fn new(eps: f64, k: usize) -> Self {
        let h = 2.0 * eps / k as f64;
        let mut nodes = vec![];
        for a in 0..k {
            for b in 0..k {
                let y = [-eps + (a as f64 + 0.5) * h, -eps + (b as f64 + 0.5) * h];
                let w = super::bump::profile((y[0] * y[0] + y[1] * y[1]).sqrt() / eps);
                if w > 0.0 {
                    nodes.push((y, w));
                }
            }
        }
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        nodes.iter_mut().for_each(|n| n.1 /= total);
        Self { eps, nodes }
    }

    pub fn smooth<F: Fn([f64; 2]) -> f64>(&self, f: F, x: [f64; 2]) -> f64 {
        self.nodes
            .iter()
            .map(|(y, w)| w * f([x[0] - y[0], x[1] - y[1]]))
            .sum()
    }
}
