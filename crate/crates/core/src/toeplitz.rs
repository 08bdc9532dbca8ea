//! Rank-1 Toeplitz approximation through the row-flip reduction: `T` fits
//! `X` exactly when `J_D T` fits `J_D X` as a Hankel matrix.

use crate::error::Result;
use crate::matrix::{flip, ComplexMatrix, FlipMode};
use crate::rank1::{approx_l1, approx_l2, GridSpec, NormFlavor, Rank1HankelFit, Structure, WeiszfeldConfig};

/// Fits `J_D X` with the requested Hankel solver and returns `T = J_D H`.
///
/// `z_hat` and `c_hat` describe the Hankel factor, so
/// `approximation = J_D · c_hat s_D(z_hat) s_W(z_hat)ᵀ`. `cfg` is only read
/// for the L1 flavor and defaults when absent.
pub fn toeplitz_approx(
    x: &ComplexMatrix,
    flavor: NormFlavor,
    grid: &GridSpec,
    cfg: Option<&WeiszfeldConfig>,
) -> Result<Rank1HankelFit> {
    let jx = flip(x, FlipMode::Rows);
    let mut fit = match flavor {
        NormFlavor::L2 => approx_l2(&jx, grid)?,
        NormFlavor::L1 => approx_l1(&jx, grid, &cfg.copied().unwrap_or_default())?,
    };
    fit.approximation = flip(&fit.approximation, FlipMode::Rows);
    fit.structure = Structure::Toeplitz;
    Ok(fit)
}

/// `true` iff every diagonal of `t` is constant within `tol`.
pub fn is_toeplitz(t: &ComplexMatrix, tol: f64) -> bool {
    let (d, w) = t.shape();
    (0..d.saturating_sub(1)).all(|i| (0..w.saturating_sub(1)).all(|j| (t[(i, j)] - t[(i + 1, j + 1)]).norm() <= tol))
}
