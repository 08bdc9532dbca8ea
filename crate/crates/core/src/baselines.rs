//! Literature DoA estimators used as benchmark baselines. All assume a
//! single source.
//!
//! `max_energy` and `toeplitz_music` take the per-sensor average `r̃`; the
//! others take the measurement matrix directly.

use nalgebra::DMatrix;

use crate::doa::{grid_argmax, steering_vector, theta_of_z, z_of_theta, ArrayConfig, DoaEstimate, ThetaGrid};
use crate::error::{Error, Result};
use crate::matrix::{structure_vector, ComplexMatrix, C64};

type CMat = DMatrix<C64>;

fn to_nalgebra(x: &ComplexMatrix) -> CMat {
    CMat::from_row_slice(x.rows(), x.cols(), x.as_slice())
}

/// `|Σ_m r_m (z*)^m|`, i.e. `|a_M(θ)ᴴ r|`.
fn beam_power(r: &[C64], theta: f64, spacing_ratio: f64) -> f64 {
    let zc = z_of_theta(theta, spacing_ratio).conj();
    r.iter().rev().fold(C64::new(0.0, 0.0), |acc, &v| acc * zc + v).norm()
}

fn check_len(r: &[C64], config: &ArrayConfig) -> Result<()> {
    if r.len() != config.m {
        return Err(Error::invalid(format!("expected {} sensor values, got {}", config.m, r.len())));
    }
    Ok(())
}

fn check_shape(x: &ComplexMatrix, config: &ArrayConfig) -> Result<()> {
    if x.shape() != (config.d, config.w()) {
        return Err(Error::invalid(format!(
            "measurement matrix is {}x{}, array expects {}x{}",
            x.rows(),
            x.cols(),
            config.d,
            config.w()
        )));
    }
    Ok(())
}

/// Grid argmax of `|a_M(θ)ᴴ r̃|`.
pub fn max_energy(r_tilde: &[C64], config: &ArrayConfig, grid: &ThetaGrid) -> Result<DoaEstimate> {
    check_len(r_tilde, config)?;
    let (k, _) = grid_argmax(0..grid.len(), |k| beam_power(r_tilde, grid.theta(k), config.spacing_ratio));
    Ok(DoaEstimate::on_grid(grid, k))
}

/// Lag-`k` correlation `(1/(M−k)) Σ_m r_{m+k} r_m*`.
pub fn lag_correlations(r: &[C64]) -> Vec<C64> {
    let m = r.len();
    (0..m)
        .map(|k| (0..m - k).map(|i| r[i + k] * r[i].conj()).sum::<C64>() / (m - k) as f64)
        .collect()
}

/// Hermitian Toeplitz covariance with `R[p][q] = ρ_{p−q}`.
pub fn toeplitz_covariance(r: &[C64]) -> CMat {
    let rho = lag_correlations(r);
    let m = r.len();
    CMat::from_fn(m, m, |p, q| if p >= q { rho[p - q] } else { rho[q - p].conj() })
}

/// Dominant eigenvector of a Hermitian matrix and whether the top
/// eigenvalue is isolated.
fn principal_eigenvector(r: CMat) -> (Vec<C64>, bool) {
    let n = r.nrows();
    let trace: f64 = (0..n).map(|i| r[(i, i)].re).sum();
    let eig = r.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]];
    let second = if n > 1 { eig.eigenvalues[order[1]] } else { 0.0 };
    let isolated = trace > 0.0 && top - second > 1e-12 * trace.abs();
    (eig.eigenvectors.column(order[0]).iter().copied().collect(), isolated)
}

/// `‖a‖² − |uᴴa|²`, the squared norm of `a` on the complement of unit `u`.
fn noise_projection(u: &[C64], a: &[C64]) -> f64 {
    let energy: f64 = a.iter().map(|v| v.norm_sqr()).sum();
    let inner: C64 = u.iter().zip(a).map(|(p, q)| p.conj() * q).sum();
    (energy - inner.norm_sqr()).max(0.0)
}

/// MUSIC on the Toeplitz covariance estimated from `r̃`. Falls back to
/// [`max_energy`] when the covariance has no isolated top eigenvalue.
pub fn toeplitz_music(r_tilde: &[C64], config: &ArrayConfig, grid: &ThetaGrid) -> Result<DoaEstimate> {
    check_len(r_tilde, config)?;
    if config.m < 2 {
        return Err(Error::invalid("toeplitz MUSIC needs at least 2 sensors"));
    }
    let (u, isolated) = principal_eigenvector(toeplitz_covariance(r_tilde));
    if !isolated {
        let mut est = max_energy(r_tilde, config, grid)?;
        est.diagnostics.fallback = true;
        return Ok(est);
    }
    let (k, _) = grid_argmax(0..grid.len(), |k| {
        -noise_projection(&u, &steering_vector(grid.theta(k), config.m, config.spacing_ratio))
    });
    Ok(DoaEstimate::on_grid(grid, k))
}

/// Default pencil parameter `⌊D/2⌋`, kept within `[1, D−1]`.
pub fn default_pencil_param(d: usize) -> usize {
    (d / 2).clamp(1, d.saturating_sub(1).max(1))
}

/// Matrix pencil with signal order 1.
///
/// Every column is expanded into an `(L+1) × (D−L)` Hankel matrix and the
/// blocks are placed side by side. With `u` the dominant left singular
/// vector, the pole is the least-squares solution of
/// `u[1..] = z · u[..L]`, and `θ̂` follows from `arg z`. `|ln|z|| > 1` marks
/// the estimate unreliable.
pub fn matrix_pencil(x: &ComplexMatrix, config: &ArrayConfig, pencil_param: Option<usize>) -> Result<DoaEstimate> {
    check_shape(x, config)?;
    let d = config.d;
    if d < 2 {
        return Err(Error::invalid("matrix pencil needs D >= 2"));
    }
    let l = pencil_param.unwrap_or_else(|| default_pencil_param(d));
    if l == 0 || l >= d {
        return Err(Error::invalid(format!("pencil parameter must lie in [1, D-1], got {l}")));
    }
    let w = x.cols();
    let block = d - l;
    let y = CMat::from_fn(l + 1, block * w, |row, col| {
        let (i, s) = (col / block, col % block);
        x[(s + row, i)]
    });
    let u = dominant_left_vector(y);
    let top = &u[..l];
    let bottom = &u[1..];
    let num: C64 = top.iter().zip(bottom).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = top.iter().map(|a| a.norm_sqr()).sum();
    let z = if den > 0.0 { num / den } else { C64::new(0.0, 0.0) };
    let theta = theta_of_z(z, config.spacing_ratio);
    let mut est = DoaEstimate {
        theta_deg: theta,
        grid_index: None,
        diagnostics: Default::default(),
    };
    est.diagnostics.unreliable = !(z.norm() > 0.0) || z.norm().ln().abs() > 1.0;
    Ok(est)
}

fn dominant_left_vector(y: CMat) -> Vec<C64> {
    let svd = y.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .fold(0, |best, (i, s)| if *s > svd.singular_values[best] { i } else { best });
    u.column(k).iter().copied().collect()
}

/// MUSIC with the noise subspace taken as the complement of the dominant
/// left singular vector of `X`, scanned with the length-`D` steering vector.
pub fn hankel_music(x: &ComplexMatrix, config: &ArrayConfig, grid: &ThetaGrid) -> Result<DoaEstimate> {
    check_shape(x, config)?;
    if config.d < 2 {
        return Err(Error::invalid("Hankel MUSIC needs D >= 2"));
    }
    let u = dominant_left_vector(to_nalgebra(x));
    let (k, _) = grid_argmax(0..grid.len(), |k| {
        let s = structure_vector(z_of_theta(grid.theta(k), config.spacing_ratio), config.d);
        -noise_projection(&u, s.as_slice())
    });
    Ok(DoaEstimate::on_grid(grid, k))
}

/// Forward-backward smoothed covariance of length-`len` windows taken from
/// every column of `X`. Satisfies `R = J R* J` exactly.
pub fn fbss_covariance(x: &ComplexMatrix, len: usize) -> Result<CMat> {
    let (d, w) = x.shape();
    if len < 2 || len > d {
        return Err(Error::invalid(format!("smoothing length must lie in [2, D={d}], got {len}")));
    }
    let mut forward = CMat::zeros(len, len);
    for i in 0..w {
        for s in 0..=d - len {
            for p in 0..len {
                for q in 0..len {
                    forward[(p, q)] += x[(s + p, i)] * x[(s + q, i)].conj();
                }
            }
        }
    }
    forward /= C64::new((w * (d - len + 1)) as f64, 0.0);
    Ok(CMat::from_fn(len, len, |p, q| {
        (forward[(p, q)] + forward[(len - 1 - p, len - 1 - q)].conj()) * 0.5
    }))
}

/// FB spatial-smoothing MUSIC; `smoothing_len` defaults to `D − 1`.
pub fn fbss_music(
    x: &ComplexMatrix,
    config: &ArrayConfig,
    grid: &ThetaGrid,
    smoothing_len: Option<usize>,
) -> Result<DoaEstimate> {
    check_shape(x, config)?;
    let len = smoothing_len.unwrap_or(config.d.saturating_sub(1));
    let (u, _) = principal_eigenvector(fbss_covariance(x, len)?);
    let (k, _) = grid_argmax(0..grid.len(), |k| {
        let s = structure_vector(z_of_theta(grid.theta(k), config.spacing_ratio), len);
        -noise_projection(&u, s.as_slice())
    });
    Ok(DoaEstimate::on_grid(grid, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doa::{acquire, average_per_sensor};

    fn grid() -> ThetaGrid {
        ThetaGrid::new(0.05).unwrap()
    }

    #[test]
    fn noiseless_recovery() {
        let cfg = ArrayConfig::new(12, 6, 0.5).unwrap();
        let g = grid();
        for theta0 in [-61.25, 0.0, 17.5] {
            let x = acquire(&cfg, theta0, C64::new(0.7, 0.4), None, 0).unwrap().x;
            let r = average_per_sensor(&x, &cfg).unwrap();
            let ests = [
                max_energy(&r, &cfg, &g).unwrap(),
                toeplitz_music(&r, &cfg, &g).unwrap(),
                hankel_music(&x, &cfg, &g).unwrap(),
                fbss_music(&x, &cfg, &g, None).unwrap(),
                matrix_pencil(&x, &cfg, None).unwrap(),
            ];
            for e in ests {
                assert!((e.theta_deg - theta0).abs() <= g.step_deg, "{e:?} vs {theta0}");
            }
        }
    }

    #[test]
    fn pencil_pole_is_exact_without_noise() {
        let cfg = ArrayConfig::new(10, 5, 0.5).unwrap();
        let x = acquire(&cfg, 23.4, C64::new(1.0, 0.0), None, 0).unwrap().x;
        let est = matrix_pencil(&x, &cfg, None).unwrap();
        assert!((est.theta_deg - 23.4).abs() < 1e-6);
        assert!(!est.diagnostics.unreliable);
    }

    #[test]
    fn lag_phase() {
        let r = steering_vector(25.0, 6, 0.5);
        let rho = lag_correlations(&r);
        for (k, v) in rho.iter().enumerate() {
            let want = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 * 0.5 * 25f64.to_radians().sin());
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn forward_backward_symmetry() {
        let x = ComplexMatrix::from_fn(5, 4, |i, j| C64::new((i * 3 + j) as f64 % 4.0, (j * j) as f64 - i as f64));
        let r = fbss_covariance(&x, 4).unwrap();
        for p in 0..4 {
            for q in 0..4 {
                assert_eq!(r[(p, q)], r[(3 - p, 3 - q)].conj());
            }
        }
        assert!(fbss_covariance(&x, 1).is_err());
        assert!(fbss_covariance(&x, 6).is_err());
    }

    #[test]
    fn smallest_problems_run() {
        let cfg = ArrayConfig::new(2, 1, 0.5).unwrap();
        let r = vec![C64::new(1.0, 0.0), C64::new(0.3, -0.9)];
        let e = toeplitz_music(&r, &cfg, &grid()).unwrap();
        assert!((-90.0..90.0).contains(&e.theta_deg));
        let cfg = ArrayConfig::new(3, 2, 0.5).unwrap();
        let x = ComplexMatrix::from_real(2, 2, &[1.0, -0.5, 0.2, 2.0]).unwrap();
        let e = hankel_music(&x, &cfg, &grid()).unwrap();
        assert!((-90.0..90.0).contains(&e.theta_deg));
    }

    #[test]
    fn zero_data_falls_back() {
        let cfg = ArrayConfig::new(4, 2, 0.5).unwrap();
        let r = vec![C64::new(0.0, 0.0); 4];
        assert!(toeplitz_music(&r, &cfg, &grid()).unwrap().diagnostics.fallback);
    }
}
