//! Frobenius-norm rank-1 Hankel approximation.
//!
//! For fixed `z` the optimal scale is closed form, `ĉ = s_D(z)ᴴ X s_W(z)*`,
//! so the search maximizes `|s_D(z)ᴴ X s_W(z)*|` over the lattice.

use super::grid::{refine_polar, search, GridSpec, RingOutcome, SearchOutcome};
use super::{
    check_nonzero, needs_preflip, rank1_hankel, reciprocal, Branch, NormFlavor, Rank1HankelFit,
    SearchDiagnostics, Structure,
};
use crate::error::{Error, Result};
use crate::matrix::{flip, power_sum_norm, structure_vector, ComplexMatrix, FlipMode, C64};

/// `s_D(z)ᴴ X s_W(z)*`.
pub fn coefficient_l2(x: &ComplexMatrix, z: C64) -> C64 {
    let (d, w) = x.shape();
    let sd = structure_vector(z, d);
    let sw = structure_vector(z, w);
    let sw_conj: Vec<C64> = sw.as_slice().iter().map(|v| v.conj()).collect();
    let mut acc = C64::new(0.0, 0.0);
    for (i, u) in sd.as_slice().iter().enumerate() {
        let row: C64 = (0..w).map(|j| x.get(i, j) * sw_conj[j]).sum();
        acc += u.conj() * row;
    }
    acc
}

/// `|s_D(z)ᴴ X s_W(z)*|`.
pub fn objective_l2(x: &ComplexMatrix, z: C64) -> f64 {
    coefficient_l2(x, z).norm()
}

/// The same objective through anti-diagonal sums:
/// `s_D(z)ᴴ X s_W(z)* = α(|z|) · Σ_m h_m (z*)^m` with `h_m = Σ_{i+j=m} x_ij`,
/// so each lattice point costs `O(D + W)` after one `O(DW)` pass.
#[derive(Debug, Clone)]
pub(crate) struct AntiDiagonalObjective {
    h: Vec<C64>,
    rows: usize,
    cols: usize,
}

impl AntiDiagonalObjective {
    pub fn new(x: &ComplexMatrix) -> Self {
        Self {
            h: x.anti_diagonal_sums(),
            rows: x.rows(),
            cols: x.cols(),
        }
    }

    /// Objective of `J_D X J_W`: its anti-diagonal sums are `h` reversed.
    pub fn flipped(&self) -> Self {
        let mut h = self.h.clone();
        h.reverse();
        Self { h, ..*self }
    }

    /// `Σ_m h_m w^m` by Horner.
    pub fn polynomial(&self, w: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &hm in self.h.iter().rev() {
            acc = acc * w + hm;
        }
        acc
    }

    pub fn alpha(&self, rho: f64) -> f64 {
        1.0 / (power_sum_norm(rho, self.rows) * power_sum_norm(rho, self.cols))
    }

    pub fn value(&self, z: C64) -> f64 {
        self.alpha(z.norm()) * self.polynomial(z.conj()).norm()
    }
}

fn search_max(obj: &AntiDiagonalObjective, grid: &GridSpec, include_origin: bool) -> SearchOutcome {
    search(grid, include_origin, true, |ring| {
        let alpha = obj.alpha(ring.rho);
        let mut out = RingOutcome::new();
        for j in 0..ring.n_phi {
            let z = ring.z(j, grid);
            out.offer(true, alpha * obj.polynomial(z.conj()).norm(), j, ());
        }
        out
    })
}

/// Optimal rank-1 Hankel approximation in the Frobenius norm.
pub fn approx_l2(x: &ComplexMatrix, grid: &GridSpec) -> Result<Rank1HankelFit> {
    approx_l2_impl(x, grid)
}

/// [`approx_l2`] with the search restricted to real `z ∈ [−1, 1]`.
pub fn approx_l2_real(x: &ComplexMatrix, grid: &GridSpec) -> Result<Rank1HankelFit> {
    approx_l2_impl(x, &grid.with_restrict_real(true))
}

fn approx_l2_impl(x: &ComplexMatrix, grid: &GridSpec) -> Result<Rank1HankelFit> {
    grid.validate()?;
    check_nonzero(x)?;
    let (d, w) = x.shape();

    let preflipped = needs_preflip(x);
    let work = if preflipped {
        flip(x, FlipMode::Both)
    } else {
        x.clone()
    };
    let obj_a = AntiDiagonalObjective::new(&work);
    let obj_b = obj_a.flipped();

    let a = search_max(&obj_a, grid, true);
    // ρ = 0 has no reciprocal, so the flipped problem skips the origin
    let b = search_max(&obj_b, grid, false);
    let wa = a.winner.expect("lattice always contains the origin");

    let (branch, mut z_branch, mut objective, obj) = match &b.winner {
        Some(wb) if wb.value > wa.value => (Branch::Flipped, wb.z, wb.value, &obj_b),
        _ => (Branch::Direct, wa.z, wa.value, &obj_a),
    };

    let mut refined = false;
    if grid.refine {
        let (rho0, phi0) = (z_branch.norm(), if z_branch.norm() == 0.0 { 0.0 } else { z_branch.arg().rem_euclid(std::f64::consts::TAU) });
        let floor = match branch {
            Branch::Direct => 0.0,
            Branch::Flipped => 1e-3 * grid.delta_rho,
        };
        if let Some((z, v)) = refine_polar(grid, rho0, phi0, objective, floor, |z| obj.value(z)) {
            z_branch = z;
            objective = v;
            refined = true;
        }
    }

    let z_work = match branch {
        Branch::Direct => z_branch,
        Branch::Flipped => reciprocal(z_branch)?,
    };
    let z_hat = if preflipped { reciprocal(z_work)? } else { z_work };

    let c_hat = coefficient_l2(x, z_hat);
    if c_hat.norm() == 0.0 {
        return Err(Error::DegenerateInput {
            reason: "optimal coefficient vanishes at the winning generator".into(),
            z: Some(z_hat),
        });
    }
    let approximation = rank1_hankel(c_hat, z_hat, d, w);
    let residual = x.sub(&approximation).norm_l2();

    Ok(Rank1HankelFit {
        z_hat,
        c_hat,
        approximation,
        residual,
        norm: NormFlavor::L2,
        branch,
        structure: Structure::Hankel,
        objective,
        preflipped,
        refined,
        search: SearchDiagnostics {
            points_evaluated: a.evaluated + b.evaluated,
            warm_start: false,
            nonconverged: 0,
        },
    })
}
