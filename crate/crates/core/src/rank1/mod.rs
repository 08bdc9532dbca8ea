//! Optimal rank-1 Hankel approximation by polar grid search over the
//! generator `z` on the closed unit disc.
//!
//! Every rank-1 Hankel matrix is `c · s_D(z) s_W(z)ᵀ`. Both solvers search
//! `|z| ≤ 1` twice, once on `X` and once on the doubly flipped `J_D X J_W`,
//! and map a flipped winner back through `z ↦ 1/z`, which covers the whole
//! extended plane.

pub(crate) mod grid;
pub mod l1;
pub mod l2;
pub mod weiszfeld;

use std::f64::consts::PI;

pub use grid::GridSpec;
pub use l1::{approx_l1, approx_l1_real, objective_l1};
pub use l2::{approx_l2, approx_l2_real, coefficient_l2, objective_l2};
pub use weiszfeld::{
    alpha, weighted_median_coeff, weiszfeld_coeff, weiszfeld_trace, L1InnerSolution, WeiszfeldConfig,
};

use crate::error::{Error, Result};
use crate::matrix::{structure_vector, ComplexMatrix, C64};
pub(crate) use crate::matrix::unit_phase_power;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormFlavor {
    L2,
    L1,
}

/// Which of the two complementary unit-disc problems produced `z_hat`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// argmax/argmin on `X` itself, `|z_hat| ≤ 1`.
    Direct,
    /// reciprocal of the winner on `J_D X J_W`.
    Flipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Hankel,
    /// `approximation = J_D · c s_D(z) s_W(z)ᵀ`
    Toeplitz,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchDiagnostics {
    pub points_evaluated: usize,
    /// Weiszfeld iterates were warm-started along each ring of the grid.
    pub warm_start: bool,
    /// Grid points whose inner L1 solve hit the iteration bound.
    pub nonconverged: usize,
}

/// Result of a rank-1 Hankel (or Toeplitz) approximation.
#[derive(Debug, Clone)]
pub struct Rank1HankelFit {
    pub z_hat: C64,
    pub c_hat: C64,
    pub approximation: ComplexMatrix,
    /// `‖X − approximation‖` in the fit's norm.
    pub residual: f64,
    pub norm: NormFlavor,
    pub branch: Branch,
    pub structure: Structure,
    /// Winning grid objective (maximized for L2, minimized for L1).
    pub objective: f64,
    /// `|x₁₁| < |x_{D,W}|` held, so the search ran on `J_D X J_W`.
    pub preflipped: bool,
    pub refined: bool,
    pub search: SearchDiagnostics,
}

pub(crate) fn reciprocal(z: C64) -> Result<C64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::ReciprocalOfZero);
    }
    if z.im == 0.0 {
        return Ok(C64::new(1.0 / z.re, 0.0));
    }
    Ok(z.inv())
}

/// Pre-flip rule: search on `J_D X J_W` when `|x₁₁| < |x_{D,W}|`.
pub(crate) fn needs_preflip(x: &ComplexMatrix) -> bool {
    let (d, w) = x.shape();
    x.get(0, 0).norm() < x.get(d - 1, w - 1).norm()
}

pub(crate) fn check_nonzero(x: &ComplexMatrix) -> Result<()> {
    if x.is_zero() {
        return Err(Error::DegenerateInput {
            reason: "input matrix is identically zero".into(),
            z: None,
        });
    }
    Ok(())
}

/// `c · s_D(z) s_W(z)ᵀ` as a `D × W` matrix.
pub fn rank1_hankel(c: C64, z: C64, d: usize, w: usize) -> ComplexMatrix {
    let sd = structure_vector(z, d);
    let sw = structure_vector(z, w);
    ComplexMatrix::outer(c, sd.as_slice(), sw.as_slice())
}

/// Grid point on the polar lattice; real-restricted grids use `φ ∈ {0, π}`
/// and return an exactly real value.
pub(crate) fn polar_point(rho: f64, phi: f64, restrict_real: bool) -> C64 {
    if restrict_real {
        if phi < PI / 2.0 {
            C64::new(rho, 0.0)
        } else {
            C64::new(-rho, 0.0)
        }
    } else {
        C64::from_polar(rho, phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_of_zero_is_an_error() {
        assert!(matches!(reciprocal(C64::new(0.0, 0.0)), Err(Error::ReciprocalOfZero)));
        assert_eq!(reciprocal(C64::new(-0.5, 0.0)).unwrap(), C64::new(-2.0, 0.0));
    }

    #[test]
    fn phase_power_is_exact_for_reals() {
        assert_eq!(unit_phase_power(C64::new(-3.0, 0.0), 5), C64::new(-1.0, 0.0));
        assert_eq!(unit_phase_power(C64::new(-3.0, 0.0), 4), C64::new(1.0, 0.0));
        let z = C64::from_polar(2.0, 0.3);
        assert!((unit_phase_power(z, 3) - C64::from_polar(1.0, 0.9)).norm() < 1e-15);
    }
}
