//! Localized resolvent norms, the covariant gradient bounds and the
//! geometric resolvent identity.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::HamiltonianMatrix;
use crate::cutoff::Cutoff;
use crate::error::{invalid, Error, Result};
use crate::linalg::{operator_norm, BandLu, NormEstimate, NormOptions};
use crate::rng::trial_rng;

type C = Complex64;

fn scale(chi: &[f64], x: &[C]) -> Vec<C> {
    chi.iter().zip(x).map(|(c, v)| v * c).collect()
}

fn random_vector(n: usize, seed: u64, k: u64) -> Vec<C> {
    let mut r = trial_rng(seed, k);
    (0..n)
        .map(|_| C::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))
        .collect()
}

fn diff_norm(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn l2(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// (H - z)^{-1} with a cached factorization.
pub struct Resolvent<'a> {
    pub h: &'a HamiltonianMatrix,
    pub z: C,
    lu: BandLu,
}

impl<'a> Resolvent<'a> {
    pub fn new(h: &'a HamiltonianMatrix, z: C) -> Result<Self> {
        Ok(Self { h, z, lu: h.factor(z)? })
    }

    pub fn solve(&self, b: &[C]) -> Vec<C> {
        let mut x = b.to_vec();
        self.lu.solve_in_place(&mut x);
        x
    }

    pub fn solve_adjoint(&self, b: &[C]) -> Vec<C> {
        let mut x = b.to_vec();
        self.lu.solve_adjoint_in_place(&mut x);
        x
    }

    /// ‖χ_dst R χ_src‖ for diagonal multipliers.
    pub fn block_norm(&self, src: &[f64], dst: &[f64], opts: NormOptions) -> NormEstimate {
        let n = self.h.dim();
        operator_norm(
            n,
            |x| scale(dst, &self.solve(&scale(src, x))),
            |y| scale(src, &self.solve_adjoint(&scale(dst, y))),
            opts,
        )
    }
}

/// ‖χ_dst (H - E - iε)^{-1} χ_src‖.
pub fn green_norm(
    h: &HamiltonianMatrix,
    e: f64,
    eps: f64,
    src: &Cutoff,
    dst: &Cutoff,
    opts: NormOptions,
) -> Result<NormEstimate> {
    let r = Resolvent::new(h, C::new(e, eps))?;
    Ok(r.block_norm(&h.grid.sample(src), &h.grid.sample(dst), opts))
}

/// A forward link x -> x⁺ of the Dirichlet box, including the links that
/// start or end on boundary nodes.
#[derive(Debug, Clone, Copy)]
struct Link {
    from: Option<usize>,
    to: Option<usize>,
    x: [f64; 2],
    x_plus: [f64; 2],
}

fn links(h: &HamiltonianMatrix, axis: usize) -> Vec<Link> {
    let g = &h.grid;
    let n = g.intervals();
    let interior = |i: usize, j: usize| {
        (i >= 1 && i < n && j >= 1 && j < n).then(|| g.index(i - 1, j - 1))
    };
    let mut out = Vec::with_capacity(n * (n - 1));
    for j in 1..n {
        for i in 0..n {
            let (a, b) = if axis == 0 { ((i, j), (i + 1, j)) } else { ((j, i), (j, i + 1)) };
            out.push(Link {
                from: interior(a.0, a.1),
                to: interior(b.0, b.1),
                x: g.node(a.0, a.1),
                x_plus: g.node(b.0, b.1),
            });
        }
    }
    out
}

/// Forward covariant difference (e^{iα}ψ(x⁺) - ψ(x))/h on every link of
/// `axis`, with α matching the hopping phase, so that
/// Σ_i ‖D_i ψ‖² = ⟨ψ, H_A ψ⟩ exactly.
fn covariant_difference(h: &HamiltonianMatrix, psi: &[C], axis: usize) -> (Vec<Link>, Vec<C>) {
    let ls = links(h, axis);
    let inv = 1.0 / h.grid.h;
    let d = ls
        .iter()
        .map(|l| {
            let a = l.from.map_or(C::new(0.0, 0.0), |k| psi[k]);
            let b = l.to.map_or(C::new(0.0, 0.0), |k| psi[k]);
            (super::matrix::link_phase(h.b, l.x, l.x_plus) * b - a) * inv
        })
        .collect();
    (ls, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    /// ‖(p - A)_i R u‖² per axis.
    pub lhs: [f64; 2],
    pub rhs: f64,
    pub resolvent_norm: f64,
    /// rhs - max_i lhs_i.
    pub slack: f64,
}

fn normalized(h: &HamiltonianMatrix, u: &[C]) -> Result<Vec<C>> {
    if u.len() != h.dim() {
        return Err(Error::GridMismatch);
    }
    let n = h.grid.norm(u);
    if !(n > 0.0) || !n.is_finite() {
        return Err(invalid("u", "zero or non-finite vector"));
    }
    Ok(u.iter().map(|x| x / n).collect())
}

/// Evaluates ‖(p - A)_i R u‖² ≤ ‖R u‖ + (2M₀ + |E|)‖R u‖² with the
/// discrete covariant difference. `u` is normalized first.
pub fn gradient_bound_check(h: &HamiltonianMatrix, u: &[C], e: f64, eps: f64) -> Result<GradientReport> {
    let u = normalized(h, u)?;
    let r = Resolvent::new(h, C::new(e, eps))?;
    let psi = r.solve(&u);
    let g = &h.grid;
    let pn = g.norm(&psi);
    let lhs = [0, 1].map(|ax| {
        let (_, d) = covariant_difference(h, &psi, ax);
        g.h * g.h * d.iter().map(|x| x.norm_sqr()).sum::<f64>()
    });
    let rhs = pn + (2.0 * h.m0() + e.abs()) * pn * pn;
    Ok(GradientReport {
        lhs,
        rhs,
        resolvent_norm: pn,
        slack: rhs - lhs[0].max(lhs[1]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffGradientReport {
    /// Σ_i ‖χ (p - A)_i R u‖².
    pub lhs: f64,
    /// ‖χRu‖ + (2M₀ + |E|)‖χRu‖².
    pub main: f64,
    /// 2 Σ_i ‖(∂_iχ) R u‖ ‖χ (p - A)_i R u‖, with ∂χ and Ru on the link.
    pub cross: f64,
    /// h Σ_i ‖∂_iχ‖²_∞ ‖Ru‖ ‖(p - A)_i R u‖, the lattice correction.
    pub lattice: f64,
    pub slack: f64,
}

/// The cutoff version of the gradient bound, for real |χ| ≤ 1.
pub fn cutoff_gradient_check(
    h: &HamiltonianMatrix,
    u: &[C],
    e: f64,
    eps: f64,
    chi: &Cutoff,
) -> Result<CutoffGradientReport> {
    let u = normalized(h, u)?;
    let r = Resolvent::new(h, C::new(e, eps))?;
    let psi = r.solve(&u);
    let g = &h.grid;
    let w = g.h;
    let chi_psi = scale(&g.sample(chi), &psi);
    let cpn = g.norm(&chi_psi);
    let main = cpn + (2.0 * h.m0() + e.abs()) * cpn * cpn;
    let (mut lhs, mut cross, mut lattice) = (0.0, 0.0, 0.0);
    for ax in 0..2 {
        let (ls, d) = covariant_difference(h, &psi, ax);
        let (mut chid, mut dchi_psi, mut dmax, mut dn) = (0.0, 0.0, 0.0f64, 0.0);
        for (l, dv) in ls.iter().zip(&d) {
            let c = chi.eval(l.x);
            let dc = (chi.eval(l.x_plus) - c) / w;
            let after = l.to.map_or(0.0, |k| psi[k].norm_sqr());
            chid += c * c * dv.norm_sqr();
            dchi_psi += dc * dc * after;
            dmax = dmax.max(dc.abs());
            dn += dv.norm_sqr();
        }
        let (chid, dchi_psi, dn) = ((chid * w * w).sqrt(), (dchi_psi * w * w).sqrt(), (dn * w * w).sqrt());
        lhs += chid * chid;
        cross += 2.0 * dchi_psi * chid;
        lattice += w * dmax * dmax * g.norm(&psi) * dn;
    }
    Ok(CutoffGradientReport {
        lhs,
        main,
        cross,
        lattice,
        slack: main + cross + lattice - lhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreCheck {
    /// max over test vectors of ‖lhs - rhs‖ / ‖lhs‖.
    pub residual: f64,
    pub vectors: usize,
}

fn same_grid(a: &HamiltonianMatrix, b: &HamiltonianMatrix) -> Result<()> {
    if a.grid != b.grid || a.b != b.b {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// R_Λ T x with T = W(χ) + χ V_R - V_Λ χ applied to y = R_R x.
fn coupling_term(big: &HamiltonianMatrix, small: &HamiltonianMatrix, chi: &[f64], y: &[C]) -> Vec<C> {
    let mut t = big.commutator(chi, y);
    for k in 0..y.len() {
        t[k] += chi[k] * (small.potential[k] - big.potential[k]) * y[k];
    }
    t
}

/// Residual of R_Λ χ = χ R_R + R_Λ (W(χ) + χ V_R - V_Λ χ) R_R with
/// W(χ) = [χ, H_A], on random vectors. Both operators share the grid.
pub fn geometric_resolvent_check(
    big: &HamiltonianMatrix,
    small: &HamiltonianMatrix,
    chi: &Cutoff,
    z: C,
    vectors: usize,
    seed: u64,
) -> Result<GreCheck> {
    same_grid(big, small)?;
    let rb = Resolvent::new(big, z)?;
    let rs = Resolvent::new(small, z)?;
    let c = big.grid.sample(chi);
    let n = big.dim();
    let mut worst = 0.0f64;
    for k in 0..vectors {
        let v = random_vector(n, seed, k as u64);
        let lhs = rb.solve(&scale(&c, &v));
        let y = rs.solve(&v);
        let mut rhs = rb.solve(&coupling_term(big, small, &c, &y));
        rhs.iter_mut().zip(scale(&c, &y)).for_each(|(a, b)| *a += b);
        worst = worst.max(diff_norm(&lhs, &rhs) / l2(&lhs));
    }
    Ok(GreCheck { residual: worst, vectors })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeCheck {
    pub direct: f64,
    pub composite: f64,
    pub relative_difference: f64,
}

/// With χ₂ χ_R = 0: χ₂ R_Λ χ_R χ₁ = χ₂ R_Λ (W(χ_R) + χ_R V_R - V_Λ χ_R) R_R χ₁.
/// Both sides are applied to the same random vectors and their norms and
/// difference reported.
#[allow(clippy::too_many_arguments)]
pub fn gre_composite_check(
    big: &HamiltonianMatrix,
    small: &HamiltonianMatrix,
    chi_r: &Cutoff,
    chi1: &Cutoff,
    chi2: &Cutoff,
    z: C,
    vectors: usize,
    seed: u64,
) -> Result<CompositeCheck> {
    same_grid(big, small)?;
    let g = &big.grid;
    let (cr, c1, c2) = (g.sample(chi_r), g.sample(chi1), g.sample(chi2));
    if cr.iter().zip(&c2).any(|(a, b)| a * b != 0.0) {
        return Err(invalid("chi2", "support meets the ribbon cutoff"));
    }
    let rb = Resolvent::new(big, z)?;
    let rs = Resolvent::new(small, z)?;
    let n = big.dim();
    let (mut dn, mut cn, mut diff) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..vectors {
        let v = scale(&c1, &random_vector(n, seed, k as u64));
        let direct = scale(&c2, &rb.solve(&scale(&cr, &v)));
        let y = rs.solve(&v);
        let composite = scale(&c2, &rb.solve(&coupling_term(big, small, &cr, &y)));
        dn = dn.max(l2(&direct));
        cn = cn.max(l2(&composite));
        diff = diff.max(diff_norm(&direct, &composite) / l2(&direct).max(f64::MIN_POSITIVE));
    }
    Ok(CompositeCheck {
        direct: dn,
        composite: cn,
        relative_difference: diff,
    })
}
