use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{wedge, Grid};
use crate::error::{Error, Result};
use crate::linalg::{window, BandLu, HermitianBand, WindowOptions};
use crate::potential::PotentialSample;

type C = Complex64;

/// Flux per plaquette above which link phases alias.
pub const MAX_FLUX: f64 = std::f64::consts::PI;

/// Unit Peierls factor of H[x, y] for neighbouring nodes x, y.
#[inline]
pub fn link_phase(b: f64, x: [f64; 2], y: [f64; 2]) -> C {
    C::from_polar(1.0, -0.5 * b * wedge(x, y))
}

/// Five-point magnetic Laplacian plus potential on a Dirichlet box, in the
/// symmetric gauge A = (B/2)(x₂, -x₁).
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub grid: Grid,
    pub b: f64,
    /// Potential at the interior nodes.
    pub potential: Vec<f64>,
    band: HermitianBand,
}

impl HamiltonianMatrix {
    pub fn with_values(b: f64, grid: Grid, potential: Vec<f64>) -> Result<Self> {
        let flux = grid.flux(b);
        if !(flux.abs() <= MAX_FLUX) {
            return Err(Error::FluxAliasing(flux));
        }
        if potential.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let (nx, h) = (grid.nx(), grid.h);
        let t = 1.0 / (h * h);
        let mut band = HermitianBand::zeros(grid.len(), nx);
        for k in 0..grid.len() {
            let (ix, iy) = grid.coords(k);
            let x = grid.point(k);
            band.set_diag(k, 4.0 * t + potential[k]);
            if ix + 1 < nx {
                band.set_upper(k, k + 1, -t * link_phase(b, x, grid.node(ix + 2, iy + 1)));
            }
            if iy + 1 < nx {
                band.set_upper(k, k + nx, -t * link_phase(b, x, grid.node(ix + 1, iy + 2)));
            }
        }
        Ok(Self {
            grid,
            b,
            potential,
            band,
        })
    }

    pub fn free(b: f64, grid: Grid) -> Result<Self> {
        Self::with_values(b, grid, vec![0.0; grid.len()])
    }

    pub fn assemble_with<F: Fn([f64; 2]) -> f64 + Sync>(b: f64, grid: Grid, v: F) -> Result<Self> {
        let values = (0..grid.len()).into_par_iter().map(|k| v(grid.point(k))).collect();
        Self::with_values(b, grid, values)
    }

    /// H = H_A + V on `grid`; every site whose bump reaches the box must be
    /// present in the sample.
    pub fn assemble(b: f64, potential: &PotentialSample, grid: Grid) -> Result<Self> {
        let r = grid.rect().grown(potential.bump.r_u);
        for i in 0..2 {
            let need_lo = r.lo[i].ceil() as i64;
            let need_hi = r.hi[i].floor() as i64;
            if need_lo < potential.region.lo[i] || need_hi > potential.region.hi[i] {
                return Err(Error::Region(format!(
                    "sites {need_lo}..={need_hi} on axis {i} not covered by {:?}",
                    potential.region
                )));
            }
        }
        Self::assemble_with(b, grid, |x| potential.eval(x))
    }

    pub fn band(&self) -> &HermitianBand {
        &self.band
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn norm_bound(&self) -> f64 {
        self.band.norm_bound()
    }

    /// sup |V| over the nodes.
    pub fn m0(&self) -> f64 {
        self.potential.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn apply(&self, x: &[C]) -> Vec<C> {
        let mut y = vec![C::new(0.0, 0.0); x.len()];
        self.band.apply(x, &mut y);
        y
    }

    /// Free part H_A applied to x.
    pub fn apply_free(&self, x: &[C]) -> Vec<C> {
        let mut y = self.apply(x);
        y.iter_mut().zip(x).zip(&self.potential).for_each(|((y, x), v)| *y -= x * v);
        y
    }

    /// [χ, H_A] x for a diagonal multiplier χ.
    pub fn commutator(&self, chi: &[f64], x: &[C]) -> Vec<C> {
        let nx = self.grid.nx();
        let n = self.dim();
        let mut y = vec![C::new(0.0, 0.0); n];
        for i in 0..n {
            for j in [i + 1, i + nx] {
                if j >= n || (j == i + 1 && (i + 1) % nx == 0) {
                    continue;
                }
                let hij = self.band.get(i, j);
                let d = chi[i] - chi[j];
                y[i] += hij * d * x[j];
                y[j] -= hij.conj() * d * x[i];
            }
        }
        y
    }

    pub fn count_below(&self, e: f64) -> usize {
        self.band.count_below(e)
    }

    pub fn factor(&self, z: C) -> Result<BandLu> {
        self.band.factor_shifted(z)
    }

    /// Product of the hopping phases around the plaquette with lower-left
    /// interior node (ix, iy), counter-clockwise.
    pub fn plaquette(&self, ix: usize, iy: usize) -> C {
        let g = &self.grid;
        let (a, b, c, d) = (g.index(ix, iy), g.index(ix + 1, iy), g.index(ix + 1, iy + 1), g.index(ix, iy + 1));
        let p = self.band.get(a, b) * self.band.get(b, c) * self.band.get(c, d) * self.band.get(d, a);
        p / p.norm()
    }

    /// max over plaquettes of |phase product - e^{iBh²}|.
    pub fn plaquette_defect(&self) -> f64 {
        let target = C::from_polar(1.0, self.grid.flux(self.b));
        let nx = self.grid.nx();
        let mut worst = 0.0f64;
        for iy in 0..nx.saturating_sub(1) {
            for ix in 0..nx - 1 {
                worst = worst.max((self.plaquette(ix, iy) - target).norm());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<C> {
        self.band.to_dense()
    }

    /// Coordinate list, one `row col re im` line per stored entry of the full
    /// matrix (both triangles).
    pub fn write_coo<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.dim();
        let bw = self.band.bandwidth();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..(i + bw + 1).min(n) {
                let v = self.band.get(i, j);
                if v != C::new(0.0, 0.0) {
                    writeln!(w, "{i} {j} {:e} {:e}", v.re, v.im)?;
                }
            }
        }
        Ok(())
    }

    /// Eigenpairs in [lo, hi).
    pub fn eigs(&self, lo: f64, hi: f64, opts: WindowOptions) -> Result<SpectralData> {
        let pairs = window(&self.band, lo, hi, opts)?;
        Ok(SpectralData {
            values: pairs.values,
            vectors: Some(pairs.vectors),
            window: [lo, hi],
            residuals: pairs.residuals,
            norm: self.norm_bound(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    pub values: Vec<f64>,
    pub vectors: Option<DMatrix<C>>,
    pub window: [f64; 2],
    pub residuals: Vec<f64>,
    /// Norm bound the residuals are measured against.
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpectralRow {
    index: usize,
    eigenvalue: f64,
    residual: f64,
}

impl SpectralData {
    pub fn max_relative_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |m, r| m.max(*r)) / self.norm.max(1.0)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (i, (&e, &r)) in self.values.iter().zip(&self.residuals).enumerate() {
            out.serialize(SpectralRow {
                index: i,
                eigenvalue: e,
                residual: r,
            })?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{sample_couplings, CouplingSpec, SingleSiteBump, SiteRegion};
    use std::f64::consts::PI;

    fn sample(seed: u64) -> PotentialSample {
        sample_couplings(&CouplingSpec::uniform(1.0).unwrap(), SingleSiteBump::default(), SiteRegion::centered(6), seed)
    }

    #[test]
    fn dirichlet_laplacian_closed_form() {
        let g = Grid::new([0.3, -0.2], 2.0, 0.1).unwrap();
        let h = HamiltonianMatrix::free(0.0, g).unwrap();
        let n = g.intervals() as f64;
        let one = 4.0 / (g.h * g.h) * (PI / (2.0 * n)).sin().powi(2);
        let exact = 2.0 * one;
        assert_eq!(h.count_below(exact - 1e-9), 0);
        assert_eq!(h.count_below(exact + 1e-9), 1);
        let sd = h.eigs(exact - 1.0, exact + 1.0, WindowOptions::default()).unwrap();
        assert!((sd.values[0] - exact).abs() < 1e-10, "{} vs {exact}", sd.values[0]);
        assert!(h.to_dense().iter().all(|v| v.im == 0.0));
    }

    #[test]
    fn hermitian_and_plaquettes() {
        let g = Grid::new([0.0, 0.0], 3.0, 0.125).unwrap();
        let h = HamiltonianMatrix::assemble(7.0, &sample(1), g).unwrap();
        let d = h.to_dense();
        assert_eq!(d, d.adjoint());
        assert!(h.plaquette_defect() < 1e-12);
        assert!(HamiltonianMatrix::free(250.0, g).is_err());
    }

    #[test]
    fn plaquettes_off_centre() {
        let g = Grid::new([5.5, -3.0], 2.0, 0.25).unwrap();
        let h = HamiltonianMatrix::free(3.0, g).unwrap();
        assert!(h.plaquette_defect() < 1e-12);
    }

    #[test]
    fn coverage_checked() {
        let g = Grid::new([0.0, 0.0], 16.0, 0.5).unwrap();
        assert!(matches!(HamiltonianMatrix::assemble(1.0, &sample(1), g), Err(Error::Region(_))));
    }

    #[test]
    fn landau_cluster_near_b() {
        // Dirichlet edge states leak into the gap, so the lowest band is
        // counted up to the gap midpoint 2B.
        let (b, l, h) = (10.0, 8.0, 0.125);
        let g = Grid::new([0.0, 0.0], l, h).unwrap();
        let hm = HamiltonianMatrix::free(b, g).unwrap();
        assert_eq!(hm.count_below(0.9 * b), 0);
        assert!(hm.count_below(1.1 * b) > 0);
        let band = hm.count_below(2.0 * b);
        let expect = b * l * l / (2.0 * PI);
        assert!((band as f64 - expect).abs() < 0.2 * expect, "{band} vs {expect}");
    }

    #[test]
    fn window_agrees_with_dense_oracle() {
        let g = Grid::new([0.0, 0.0], 2.5, 0.125).unwrap();
        let hm = HamiltonianMatrix::assemble(12.0, &sample(5), g).unwrap();
        assert!(hm.dim() <= 400);
        let (all, _) = crate::linalg::dense_hermitian(hm.to_dense());
        let sd = hm.eigs(10.0, 40.0, WindowOptions::default()).unwrap();
        let want: Vec<f64> = all.into_iter().filter(|&e| (10.0..40.0).contains(&e)).collect();
        assert_eq!(sd.values.len(), want.len());
        for (a, b) in sd.values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(sd.max_relative_residual() <= 1e-8);
    }

    #[test]
    fn commutator_matches_dense() {
        let g = Grid::new([0.0, 0.0], 2.0, 0.25).unwrap();
        let hm = HamiltonianMatrix::assemble(5.0, &sample(2), g).unwrap();
        let chi: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.37).sin()).collect();
        let x: Vec<C> = (0..g.len()).map(|k| C::new((k as f64).cos(), (k as f64 * 0.5).sin())).collect();
        let d = hm.to_dense();
        let cm = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(g.len(), chi.iter().map(|&c| C::new(c, 0.0))));
        let want = (&cm * &d - &d * &cm) * nalgebra::DVector::from_column_slice(&x);
        let got = hm.commutator(&chi, &x);
        for (a, b) in got.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn coo_round_trip() {
        let g = Grid::new([0.0, 0.0], 1.0, 0.25).unwrap();
        let hm = HamiltonianMatrix::free(4.0, g).unwrap();
        let mut buf = vec![];
        hm.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut m = DMatrix::<C>::zeros(9, 9);
        for line in text.lines() {
            let f: Vec<&str> = line.split(' ').collect();
            let (i, j): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
            m[(i, j)] = C::new(f[2].parse().unwrap(), f[3].parse().unwrap());
        }
        assert_eq!(m, hm.to_dense());
    }

    mod props {
        use super::*;
        use crate::hamiltonian::grid::wedge;
        use proptest::prelude::*;

        fn random_vec(seed: u64, n: usize) -> Vec<C> {
            use rand::Rng;
            let mut rng = crate::rng::trial_rng(seed, 0);
            (0..n).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
        }

        fn dot(a: &[C], b: &[C]) -> C {
            a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn operator_is_hermitian(b in 0.0f64..20.0, seed in 0u64..1000, cx in -1.0f64..1.0, cy in -1.0f64..1.0) {
                let g = Grid::new([cx, cy], 2.0, 0.1).unwrap();
                let h = HamiltonianMatrix::assemble(b, &sample(seed), g).unwrap();
                let (x, y) = (random_vec(seed, h.dim()), random_vec(seed + 1, h.dim()));
                let lhs = dot(&x, &h.apply(&y));
                let rhs = dot(&h.apply(&x), &y);
                prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
            }

            #[test]
            fn translation_is_a_gauge_transformation(b in 1.0f64..20.0, ax in -3.0f64..3.0, ay in -3.0f64..3.0, seed in 0u64..1000) {
                // H on the shifted box equals G H G* with G = diag(exp(-i B wedge(x, a)/2)).
                let g = Grid::new([0.0, 0.0], 1.5, 0.1).unwrap();
                let a = [ax, ay];
                let h0 = HamiltonianMatrix::free(b, g).unwrap();
                let h1 = HamiltonianMatrix::free(b, g.translated(a)).unwrap();
                let phase: Vec<C> = g.points().map(|x| C::from_polar(1.0, -0.5 * b * wedge(x, a))).collect();
                let x = random_vec(seed, h0.dim());
                let gx: Vec<C> = x.iter().zip(&phase).map(|(v, p)| v * p.conj()).collect();
                let lhs = h1.apply(&x);
                let rhs: Vec<C> = h0.apply(&gx).iter().zip(&phase).map(|(v, p)| v * p).collect();
                let err = lhs.iter().zip(&rhs).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
                prop_assert!(err < 1e-9 * h0.norm_bound(), "{}", err);
            }
        }
    }
}
