//! Shared fixtures: disorder boxes whose walls avoid the impurity sites.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

use crate::error::Result;
use crate::linalg::WindowOptions;
use crate::hamiltonian::{Grid, HamiltonianMatrix};
use crate::potential::{sample_couplings, CouplingSpec, PotentialSample, SingleSiteBump, SiteRegion};

/// Box Λ of integer side `side` whose walls lie on half-integers, so that
/// it holds exactly side² whole single-site supports when r_u < 1/2.
pub fn site_box(side: u32, h: f64) -> Result<Grid> {
    padded_box(side, 0.0, h)
}

/// Λ grown by `pad` on every side (same center).
pub fn padded_box(side: u32, pad: f64, h: f64) -> Result<Grid> {
    let c = if side % 2 == 0 { 0.5 } else { 0.0 };
    Grid::new([c, c], side as f64 + 2.0 * pad, h)
}

/// Couplings drawn on every site that can reach `grid`, then zeroed
/// outside the sites of Λ (the frozen exterior is λ = 0).
pub fn box_potential(grid: &Grid, side: u32, spec: &CouplingSpec, bump: SingleSiteBump, seed: u64) -> PotentialSample {
    let r = grid.rect();
    let v = sample_couplings(spec, bump, SiteRegion::covering_box(r.lo, r.hi, bump.r_u), seed);
    let c = if side % 2 == 0 { 0.5 } else { 0.0 };
    let half = side as f64 / 2.0;
    v.restricted(|j| (0..2).all(|i| (j[i] as f64 - c).abs() < half))
}

/// H_A + V_Λ on Λ padded by `pad`, Dirichlet on the outer walls.
pub fn disordered_box(
    b: f64,
    side: u32,
    pad: f64,
    h: f64,
    spec: &CouplingSpec,
    bump: SingleSiteBump,
    seed: u64,
) -> Result<HamiltonianMatrix> {
    let grid = padded_box(side, pad, h)?;
    HamiltonianMatrix::assemble(b, &box_potential(&grid, side, spec, bump, seed), grid)
}

/// Λ of side `side` grown by `pad` on every side, with the coarsest
/// spacing such that B h² <= `flux`.
pub fn landau_box(b: f64, side: u32, pad: f64, flux: f64) -> Result<Grid> {
    let total = side as f64 + 2.0 * pad;
    let n = (total / (flux / b).sqrt()).ceil().max(2.0);
    let c = if side % 2 == 0 { 0.5 } else { 0.0 };
    Grid::new([c, c], total, total / n)
}

/// Eigenpairs of the first Landau band: everything below the mid-gap 2B.
pub fn first_band(h: &HamiltonianMatrix) -> Result<(Vec<f64>, DMatrix<C>)> {
    let lo = h.potential.iter().fold(0.0f64, |m, &v| m.min(v)) - 1.0;
    let s = h.eigs(lo, 2.0 * h.b, WindowOptions::default())?;
    Ok((s.values, s.vectors.expect("window solver returns vectors")))
}

/// Q₀X = X - V₀(V₀* X) for an orthonormal basis V₀ of Ran P₀.
pub fn complement(v0: &DMatrix<C>, x: &DMatrix<C>) -> DMatrix<C> {
    x - v0 * (v0.adjoint() * x)
}

/// Largest singular value of a tall matrix, via its Gram matrix.
pub fn max_singular(x: &DMatrix<C>) -> f64 {
    if x.ncols() == 0 {
        return 0.0;
    }
    let g = x.adjoint() * x;
    let (vals, _) = crate::linalg::dense_hermitian((&g + g.adjoint()) * C::new(0.5, 0.0));
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walls_sit_between_sites() {
        for side in [3, 4, 6] {
            let g = site_box(side, 0.1).unwrap();
            let r = g.rect();
            for v in r.lo.iter().chain(&r.hi) {
                assert!(((v - 0.5).rem_euclid(1.0)).abs() < 1e-12, "{v}");
            }
            let inside = (-10..=10)
                .flat_map(|a| (-10..=10).map(move |b| [a as f64, b as f64]))
                .filter(|&x| r.contains(x))
                .count();
            assert_eq!(inside, (side * side) as usize);
        }
    }

    #[test]
    fn padding_keeps_only_box_sites() {
        let spec = CouplingSpec::uniform(1.0).unwrap();
        let g = padded_box(3, 1.0, 0.1).unwrap();
        let v = box_potential(&g, 3, &spec, SingleSiteBump::default(), 9);
        let live = v.couplings.iter().filter(|&&c| c != 0.0).count();
        assert_eq!(live, 9);
        assert_eq!(v.coupling([2, 0]), 0.0);
    }
}
