use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{wedge, Grid};

type C = Complex64;

/// (U_a ψ)(x) = e^{-i(B/2) x∧a} ψ(x - a), carrying a function on `grid` to
/// the translated grid. `a` must lie on the grid's node lattice.
pub fn magnetic_translate(grid: &Grid, psi: &[C], a: [f64; 2], b: f64) -> Result<(Grid, Vec<C>)> {
    if psi.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    for (i, &ai) in a.iter().enumerate() {
        let r = ai / grid.h;
        if (r - r.round()).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(invalid("a", format!("component {i} = {ai} is off the h = {} lattice", grid.h)));
        }
    }
    let moved = grid.translated(a);
    let out = psi
        .iter()
        .enumerate()
        .map(|(k, v)| C::from_polar(1.0, -0.5 * b * wedge(moved.point(k), a)) * v)
        .collect();
    Ok((moved, out))
}
