//! Ribbons: stadium neighbourhoods of the bonds of an occupied circuit,
//! on which V + B - E stays below -a.

use serde::{Deserialize, Serialize};

use super::bump::INV_SQRT2;
use super::coupling::is_occupied;
use super::sample::PotentialSample;
use crate::error::{invalid, Result};
use crate::percolation::{BondConfig, Circuit, DualLattice};

type P = [f64; 2];

fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: P, b: P) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: P, b: P) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn point_segment_distance(x: P, s: [P; 2]) -> f64 {
    let d = sub(s[1], s[0]);
    let t = (dot(sub(x, s[0]), d) / dot(d, d)).clamp(0.0, 1.0);
    let q = [s[0][0] + t * d[0], s[0][1] + t * d[1]];
    let r = sub(x, q);
    dot(r, r).sqrt()
}

fn segments_intersect(a: [P; 2], b: [P; 2]) -> bool {
    let d1 = cross(sub(a[1], a[0]), sub(b[0], a[0]));
    let d2 = cross(sub(a[1], a[0]), sub(b[1], a[0]));
    let d3 = cross(sub(b[1], b[0]), sub(a[0], b[0]));
    let d4 = cross(sub(b[1], b[0]), sub(a[1], b[0]));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

pub fn segment_distance(a: [P; 2], b: [P; 2]) -> f64 {
    if segments_intersect(a, b) {
        return 0.0;
    }
    [
        point_segment_distance(a[0], b),
        point_segment_distance(a[1], b),
        point_segment_distance(b[0], a),
        point_segment_distance(b[1], a),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ribbon {
    pub circuit: Circuit,
    pub r_1: f64,
    pub r_u: f64,
    pub lattice: DualLattice,
    /// Bond segments on Γ, in circuit order.
    pub segments: Vec<[P; 2]>,
}

/// Union of the stadiums {x : dist(x, b_j) < r_1}, r_1 = 1/sqrt(2) - r_u.
pub fn build_ribbon(circuit: &Circuit, lattice: &DualLattice, r_u: f64) -> Result<Ribbon> {
    if !(r_u > 0.0 && r_u < INV_SQRT2) {
        return Err(invalid("r_u", format!("{r_u} leaves an empty ribbon (need r_u < 1/sqrt 2)")));
    }
    if circuit.is_empty() {
        return Err(invalid("circuit", "no bonds"));
    }
    Ok(Ribbon {
        circuit: circuit.clone(),
        r_1: INV_SQRT2 - r_u,
        r_u,
        lattice: *lattice,
        segments: circuit.segments(lattice),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RibbonGeometry {
    pub dist_inner: f64,
    pub dist_outer: f64,
    pub width: f64,
    /// 1/sqrt(2) + r_u, the required clearance from both box boundaries.
    pub clearance: f64,
}

impl RibbonGeometry {
    pub fn satisfied(&self) -> bool {
        let tol = 1e-12;
        self.dist_inner >= self.clearance - tol
            && self.dist_outer >= self.clearance - tol
            && self.width >= 2.0 * (INV_SQRT2 - (self.clearance - INV_SQRT2)) - tol
    }
}

impl Ribbon {
    pub fn medial_distance(&self, x: P) -> f64 {
        self.segments
            .iter()
            .map(|&s| point_segment_distance(x, s))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: P) -> bool {
        self.medial_distance(x) < self.r_1
    }

    /// Boundary of the internal box of half-side `half` as four Γ segments.
    pub fn box_boundary(&self, half: i64) -> [[P; 2]; 4] {
        let c = |m: i64, n: i64| self.lattice.vertex_position([m, n]);
        let h = half;
        [
            [c(-h, -h), c(h, -h)],
            [c(h, -h), c(h, h)],
            [c(h, h), c(-h, h)],
            [c(-h, h), c(-h, -h)],
        ]
    }

    /// dist(R, ∂r_half).
    pub fn distance_to_box(&self, half: i64) -> f64 {
        let edges = self.box_boundary(half);
        let d = self
            .segments
            .iter()
            .flat_map(|&s| edges.iter().map(move |&e| segment_distance(s, e)))
            .fold(f64::INFINITY, f64::min);
        (d - self.r_1).max(0.0)
    }

    pub fn geometry(&self) -> RibbonGeometry {
        RibbonGeometry {
            dist_inner: self.distance_to_box(self.circuit.inner),
            dist_outer: self.distance_to_box(self.circuit.outer),
            // Every medial point carries a full transverse chord of length 2 r_1.
            width: 2.0 * self.r_1,
            clearance: INV_SQRT2 + self.r_u,
        }
    }

    /// Sample points: Weyl-sequence positions along each bond tensored with
    /// transverse offsets, plus points on the end caps.
    pub fn sample_points(&self, n_samples: usize, seed: u64) -> Vec<P> {
        let golden = 0.618_033_988_749_894_9;
        let start = (seed as f64 * golden).fract();
        let offsets = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let shrink = 1.0 - 1e-9;
        let per = (n_samples / (self.segments.len() * offsets.len())).max(1);
        let mut out = Vec::with_capacity(self.segments.len() * (per * offsets.len() + 8));
        for (k, s) in self.segments.iter().enumerate() {
            let d = sub(s[1], s[0]);
            let len = dot(d, d).sqrt();
            let nu = [-d[1] / len, d[0] / len];
            for i in 0..per {
                let t = (start + (k * per + i) as f64 * golden).fract();
                let base = [s[0][0] + t * d[0], s[0][1] + t * d[1]];
                for o in offsets {
                    let r = o * self.r_1 * shrink;
                    out.push([base[0] + r * nu[0], base[1] + r * nu[1]]);
                }
            }
            for q in 0..8 {
                let th = std::f64::consts::FRAC_PI_4 * q as f64;
                let r = self.r_1 * shrink;
                out.push([s[0][0] + r * th.cos(), s[0][1] + r * th.sin()]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RibbonCheck {
    pub pass: bool,
    /// Largest sampled value of V + B - E.
    pub worst: f64,
    pub worst_point: P,
    pub points: usize,
}

/// Samples `V + B - E < -a` over the ribbon for an arbitrary field `v`.
pub fn verify_ribbon_condition_with<F: Fn(P) -> f64>(
    ribbon: &Ribbon,
    v: F,
    e: f64,
    b: f64,
    a: f64,
    n_samples: usize,
    seed: u64,
) -> RibbonCheck {
    let pts = ribbon.sample_points(n_samples.max(1), seed);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_point = [f64::NAN; 2];
    for &x in &pts {
        let val = v(x) + b - e;
        if val > worst {
            worst = val;
            worst_point = x;
        }
    }
    RibbonCheck {
        pass: worst < -a,
        worst,
        worst_point,
        points: pts.len(),
    }
}

pub fn verify_ribbon_condition(
    ribbon: &Ribbon,
    sample: &PotentialSample,
    e: f64,
    b: f64,
    a: f64,
    n_samples: usize,
    seed: u64,
) -> RibbonCheck {
    verify_ribbon_condition_with(ribbon, |x| sample.eval(x), e, b, a, n_samples, seed)
}

/// Bond configuration on the box of half-side `extent` induced by the
/// couplings: the bond with midpoint j is occupied iff λ_j satisfies the
/// occupation predicate at (E, B).
pub fn bonds_from_potential(sample: &PotentialSample, e: f64, b: f64, extent: i64) -> Result<BondConfig> {
    let lattice = DualLattice::new(extent)?;
    let occupied = (0..lattice.bond_count())
        .map(|k| {
            let j = lattice.bond_at(k).midpoint();
            if !sample.region.contains(j) {
                return Err(invalid("region", format!("coupling site {j:?} missing")));
            }
            Ok(is_occupied(sample.coupling(j), e, b))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(BondConfig {
        lattice,
        occupied,
        p: f64::NAN,
        seed: sample.seed,
    })
}

/// Sites needed to decide every bond of the box of half-side `extent`.
pub fn sites_for_extent(extent: i64) -> super::sample::SiteRegion {
    super::sample::SiteRegion::centered(2 * extent + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percolation::{find_closed_circuit, Bond};
    use crate::potential::{sample_couplings, CouplingSpec, Mollifier, SingleSiteBump};
    use crate::rng::{stream_seed, trial_rng};
    use rand::Rng;

    fn single_bond_ribbon(r_u: f64) -> Ribbon {
        let lattice = DualLattice::new(3).unwrap();
        let circuit = Circuit {
            bonds: vec![Bond::Horizontal(2, 0).midpoint()],
            inner: 1,
            outer: 3,
        };
        build_ribbon(&circuit, &lattice, r_u).unwrap()
    }

    #[test]
    fn single_bond_is_a_stadium() {
        let rb = single_bond_ribbon(0.35);
        let s = rb.segments[0];
        let r1 = rb.r_1;
        let mid = [(s[0][0] + s[1][0]) / 2.0, (s[0][1] + s[1][1]) / 2.0];
        let d = sub(s[1], s[0]);
        let len = dot(d, d).sqrt();
        let nu = [-d[1] / len, d[0] / len];
        // Rectangle part.
        assert!(rb.contains([mid[0] + (r1 - 1e-9) * nu[0], mid[1] + (r1 - 1e-9) * nu[1]]));
        assert!(!rb.contains([mid[0] + (r1 + 1e-9) * nu[0], mid[1] + (r1 + 1e-9) * nu[1]]));
        // End disk beyond the endpoint along the axis.
        let u = [d[0] / len, d[1] / len];
        assert!(rb.contains([s[1][0] + (r1 - 1e-9) * u[0], s[1][1] + (r1 - 1e-9) * u[1]]));
        assert!(!rb.contains([s[1][0] + (r1 + 1e-9) * u[0], s[1][1] + (r1 + 1e-9) * u[1]]));
        assert!(build_ribbon(&rb.circuit, &rb.lattice, 0.75).is_err());
    }

    #[test]
    fn points_just_outside_every_bond_are_not_members() {
        let cfg = BondConfig::filled(DualLattice::new(9).unwrap(), true);
        let c = find_closed_circuit(&cfg, 3).unwrap().unwrap();
        let rb = build_ribbon(&c, &cfg.lattice, 0.35).unwrap();
        let mut rng = trial_rng(3, 3);
        let mut checked = 0;
        while checked < 200 {
            let x = [rng.random_range(-12.0..12.0), rng.random_range(-12.0..12.0)];
            let d = rb.medial_distance(x);
            if (d - rb.r_1).abs() > 1e-6 {
                assert_eq!(rb.contains(x), d < rb.r_1);
                checked += 1;
            }
        }
        // Push a member radially out to exactly r_1 + 1e-6 from its bond.
        let s = rb.segments[0];
        let d = sub(s[1], s[0]);
        let len = dot(d, d).sqrt();
        let nu = [-d[1] / len, d[0] / len];
        let mid = [(s[0][0] + s[1][0]) / 2.0, (s[0][1] + s[1][1]) / 2.0];
        for sign in [-1.0, 1.0] {
            let x = [mid[0] + sign * (rb.r_1 + 1e-6) * nu[0], mid[1] + sign * (rb.r_1 + 1e-6) * nu[1]];
            if rb.medial_distance(x) >= rb.r_1 + 1e-6 - 1e-12 {
                assert!(!rb.contains(x));
            }
        }
    }

    #[test]
    fn innermost_square_ribbon_meets_clearances() {
        let cfg = BondConfig::filled(DualLattice::new(12).unwrap(), true);
        let c = find_closed_circuit(&cfg, 4).unwrap().unwrap();
        let rb = build_ribbon(&c, &cfg.lattice, 0.35).unwrap();
        let g = rb.geometry();
        assert!(g.satisfied(), "{g:?}");
        // The innermost ring sits exactly at the clearance from the inner box.
        assert!((g.dist_inner - g.clearance).abs() < 1e-12);
        assert!(g.width >= 2.0 * (INV_SQRT2 - 0.35) - 1e-15);
    }

    #[test]
    fn zero_field_passes_with_margin() {
        let cfg = BondConfig::filled(DualLattice::new(6).unwrap(), true);
        let c = find_closed_circuit(&cfg, 2).unwrap().unwrap();
        let rb = build_ribbon(&c, &cfg.lattice, 0.35).unwrap();
        let spec = CouplingSpec::uniform(1.0).unwrap();
        let v = crate::potential::PotentialSample::zero(spec, SingleSiteBump::default(), sites_for_extent(6));
        let (e, b) = (11.0, 10.0);
        let chk = verify_ribbon_condition(&rb, &v, e, b, 0.5, 2000, 1);
        assert!(chk.pass);
        assert!((chk.worst + 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_bad_coupling_fails_near_its_site() {
        let (e, b, m) = (10.4, 10.0, 2.0);
        let spec = CouplingSpec::uniform(m).unwrap();
        let mut v = crate::potential::PotentialSample::zero(spec, SingleSiteBump::default(), sites_for_extent(6));
        for j in v.region.sites().collect::<Vec<_>>() {
            v.set_coupling(j, -m);
        }
        let cfg = bonds_from_potential(&v, e, b, 6).unwrap();
        let c = find_closed_circuit(&cfg, 2).unwrap().unwrap();
        let bad = c.bonds[3];
        v.set_coupling(bad, m);
        let rb = build_ribbon(&c, &cfg.lattice, 0.35).unwrap();
        let chk = verify_ribbon_condition(&rb, &v, e, b, 0.5 * (e - b), 4000, 2);
        assert!(!chk.pass);
        let d = ((chk.worst_point[0] - bad[0] as f64).powi(2) + (chk.worst_point[1] - bad[1] as f64).powi(2)).sqrt();
        assert!(d < 0.35, "worst point {:?} far from {bad:?}", chk.worst_point);
    }

    #[test]
    fn occupied_circuits_always_carry_a_valid_ribbon() {
        // Occupied circuits imply the ribbon condition: 10^3 circuit draws.
        let spec = CouplingSpec::uniform(3.0).unwrap();
        let bump = SingleSiteBump::default();
        let mol = Mollifier::new(0.1, 12);
        let mut found = 0;
        for t in 0..10_000u64 {
            if found == 1000 {
                break;
            }
            let mut rng = trial_rng(77, t);
            let b = 10.0;
            let e = b + rng.random_range(2.0..4.0);
            let extent = 6;
            let v = sample_couplings(&spec, bump, sites_for_extent(extent), stream_seed(78, t));
            let cfg = bonds_from_potential(&v, e, b, extent).unwrap();
            let Some(c) = find_closed_circuit(&cfg, 2).unwrap() else { continue };
            found += 1;
            let rb = build_ribbon(&c, &cfg.lattice, bump.r_u).unwrap();
            assert!(rb.geometry().satisfied());
            let a = 0.5 * (e - b);
            let chk = verify_ribbon_condition(&rb, &v, e, b, a, 600, t);
            assert!(chk.pass, "trial {t}: worst {} vs -a = {}", chk.worst, -a);
            // Smoothing moves sampled values by less than eps ‖∇V‖_∞.
            let bound = mol.eps * v.gradient_bound();
            for x in rb.sample_points(200, t) {
                let diff = (mol.smooth(|y| v.eval(y), x) - v.eval(x)).abs();
                assert!(diff < bound, "{diff} vs {bound}");
            }
        }
        assert_eq!(found, 1000);
    }
}
