//! Direction-of-arrival estimation from sliding-subarray acquisitions on a
//! uniform linear array.
//!
//! A length-`D` window slides over `M` sensors and each of the
//! `W = M − D + 1` positions is sampled once with fresh noise. Column `i` of
//! the `D × W` measurement matrix holds window `i`, so a single plane wave
//! produces the rank-1 Hankel matrix `x · z^{i+j}` with
//! `z = exp(−j2π (d/λ) sin θ)`.
//!
//! Angles are in degrees at the API boundary and lie in `[−90, 90)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matrix::{structure_vector, ComplexMatrix, C64};
use crate::noise::{rng_from_seed, NoiseModel, Rng};
use crate::rank1::grid::golden_section_max;
use crate::rank1::weiszfeld::geometric_median;
use crate::rank1::WeiszfeldConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    pub m: usize,
    pub d: usize,
    /// `d/λ`
    pub spacing_ratio: f64,
}

impl ArrayConfig {
    pub fn new(m: usize, d: usize, spacing_ratio: f64) -> Result<Self> {
        let c = Self { m, d, spacing_ratio };
        c.validate()?;
        Ok(c)
    }

    /// `D = M/2` (rounded down, at least 1) at half-wavelength spacing.
    pub fn half_of(m: usize) -> Result<Self> {
        Self::new(m, (m / 2).max(1), 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > self.m {
            return Err(Error::invalid(format!("need 1 <= D <= M, got D={} M={}", self.d, self.m)));
        }
        if !(self.spacing_ratio > 0.0 && self.spacing_ratio.is_finite()) {
            return Err(Error::invalid(format!("spacing ratio must be positive, got {}", self.spacing_ratio)));
        }
        Ok(())
    }

    pub fn w(&self) -> usize {
        self.m - self.d + 1
    }

    /// Spacing above half a wavelength aliases.
    pub fn aliasing(&self) -> bool {
        self.spacing_ratio > 0.5
    }

    fn check_shape(&self, x: &ComplexMatrix) -> Result<()> {
        if x.shape() != (self.d, self.w()) {
            return Err(Error::invalid(format!(
                "measurement matrix is {}x{}, array expects {}x{}",
                x.rows(),
                x.cols(),
                self.d,
                self.w()
            )));
        }
        Ok(())
    }
}

/// Uniform angle grid `θ_k = −90 + k·step` over `[−90, 90)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaGrid {
    pub step_deg: f64,
    /// Golden-section polish of the grid winner within one step.
    pub refine: bool,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        Self { step_deg: 0.01, refine: false }
    }
}

impl ThetaGrid {
    pub fn new(step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0 && step_deg <= 180.0) {
            return Err(Error::invalid(format!("theta step must lie in (0, 180], got {step_deg}")));
        }
        Ok(Self { step_deg, refine: false })
    }

    pub fn with_refine(mut self, on: bool) -> Self {
        self.refine = on;
        self
    }

    pub fn len(&self) -> usize {
        let n = (180.0 / self.step_deg - 1e-9).ceil() as usize;
        if n > 1 && self.theta(n - 1) >= 90.0 {
            n - 1
        } else {
            n.max(1)
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta(&self, k: usize) -> f64 {
        -90.0 + k as f64 * self.step_deg
    }

    /// Grid indices whose angle lies in `[lo, hi]`.
    fn index_range(&self, lo: f64, hi: f64) -> std::ops::RangeInclusive<usize> {
        let n = self.len();
        let a = ((lo + 90.0) / self.step_deg - 1e-9).ceil().max(0.0) as usize;
        let b = (((hi + 90.0) / self.step_deg + 1e-9).floor().max(0.0) as usize).min(n - 1);
        a.min(n - 1)..=b
    }
}

/// `a_M(θ)_m = exp(−j2π m (d/λ) sin θ)`, `m = 0..M`.
pub fn steering_vector(theta_deg: f64, m: usize, spacing_ratio: f64) -> Vec<C64> {
    let step = phase_step(theta_deg, spacing_ratio);
    (0..m).map(|k| C64::from_polar(1.0, k as f64 * step)).collect()
}

fn phase_step(theta_deg: f64, spacing_ratio: f64) -> f64 {
    -2.0 * PI * spacing_ratio * theta_deg.to_radians().sin()
}

pub fn z_of_theta(theta_deg: f64, spacing_ratio: f64) -> C64 {
    C64::from_polar(1.0, phase_step(theta_deg, spacing_ratio))
}

/// Maps a generator back to an angle through its phase, clamped to `[−90, 90)`.
pub fn theta_of_z(z: C64, spacing_ratio: f64) -> f64 {
    let s = (-z.arg() / (2.0 * PI * spacing_ratio)).clamp(-1.0, 1.0);
    let theta = s.asin().to_degrees();
    if theta >= 90.0 {
        90.0 - 1e-9
    } else {
        theta
    }
}

#[derive(Debug, Clone)]
pub struct DoaScene {
    pub config: ArrayConfig,
    pub theta0: f64,
    pub amplitude: C64,
    pub x: ComplexMatrix,
    pub seed: u64,
}

/// Builds a scene from a fresh stream seeded with `seed`.
pub fn acquire(config: &ArrayConfig, theta0: f64, amplitude: C64, noise: Option<&NoiseModel>, seed: u64) -> Result<DoaScene> {
    let mut rng = rng_from_seed(seed);
    let mut scene = acquire_with_rng(config, theta0, amplitude, noise, &mut rng)?;
    scene.seed = seed;
    Ok(scene)
}

/// Window `i` sees `x · a_M(θ₀)[i..i+D]` plus an independent noise draw.
/// Noise is drawn column by column, top to bottom.
pub fn acquire_with_rng(
    config: &ArrayConfig,
    theta0: f64,
    amplitude: C64,
    noise: Option<&NoiseModel>,
    rng: &mut Rng,
) -> Result<DoaScene> {
    config.validate()?;
    if !(-90.0..90.0).contains(&theta0) {
        return Err(Error::invalid(format!("theta0 must lie in [-90, 90), got {theta0}")));
    }
    if let Some(n) = noise {
        n.validate()?;
    }
    let (d, w) = (config.d, config.w());
    let a = steering_vector(theta0, config.m, config.spacing_ratio);
    let mut data = vec![C64::new(0.0, 0.0); d * w];
    for i in 0..w {
        for j in 0..d {
            let mut v = amplitude * a[i + j];
            if let Some(n) = noise {
                v += n.sample(rng);
            }
            data[j * w + i] = v;
        }
    }
    Ok(DoaScene {
        config: *config,
        theta0,
        amplitude,
        x: ComplexMatrix::new(d, w, data)?,
        seed: 0,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DoaDiagnostics {
    /// The estimator fell back to a simpler method.
    pub fallback: bool,
    /// The estimate is known to be poorly conditioned.
    pub unreliable: bool,
    /// Grid points whose inner L1 solve hit the iteration bound.
    pub nonconverged: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaEstimate {
    pub theta_deg: f64,
    /// Winning index on the θ grid; `None` for gridless methods.
    pub grid_index: Option<usize>,
    pub diagnostics: DoaDiagnostics,
}

impl DoaEstimate {
    pub(crate) fn on_grid(grid: &ThetaGrid, k: usize) -> Self {
        Self {
            theta_deg: grid.theta(k),
            grid_index: Some(k),
            diagnostics: DoaDiagnostics::default(),
        }
    }
}

/// First maximizer of `score` over `indices`.
pub(crate) fn grid_argmax(indices: impl Iterator<Item = usize>, mut score: impl FnMut(usize) -> f64) -> (usize, f64) {
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for k in indices {
        let v = score(k);
        if v > best.1 || best.0 == usize::MAX {
            best = (k, v);
        }
    }
    best
}

fn polish(grid: &ThetaGrid, est: &mut DoaEstimate, value: f64, score: impl Fn(f64) -> f64) {
    if !grid.refine {
        return;
    }
    let t = est.theta_deg;
    let lo = (t - grid.step_deg).max(-90.0);
    let hi = (t + grid.step_deg).min(90.0 - 1e-9);
    let (theta, v) = golden_section_max(&score, lo, hi, 48);
    if v > value {
        est.theta_deg = theta;
    }
}

/// `|Σ_m h_m (z*)^m|` for unit-modulus `z`; proportional to
/// `|s_D(z)ᴴ X s_W(z)*|` with a constant factor `1/√(DW)`.
fn anti_diagonal_score(h: &[C64], theta: f64, spacing_ratio: f64) -> f64 {
    let zc = z_of_theta(theta, spacing_ratio).conj();
    h.iter().rev().fold(C64::new(0.0, 0.0), |acc, &hm| acc * zc + hm).norm()
}

/// Grid argmax of `|s_D(z(θ))ᴴ X s_W(z(θ))*|`, the Frobenius-norm
/// rank-1 Hankel fit restricted to the unit circle.
pub fn estimate_doa_l2(x: &ComplexMatrix, config: &ArrayConfig, grid: &ThetaGrid) -> Result<DoaEstimate> {
    config.check_shape(x)?;
    let h = x.anti_diagonal_sums();
    let sr = config.spacing_ratio;
    let (k, value) = grid_argmax(0..grid.len(), |k| anti_diagonal_score(&h, grid.theta(k), sr));
    let mut est = DoaEstimate::on_grid(grid, k);
    polish(grid, &mut est, value, |t| anti_diagonal_score(&h, t, sr));
    Ok(est)
}

/// How [`estimate_doa_l1`] visits the θ grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum L1Search {
    /// Every grid angle.
    Full,
    /// Every `coarse_step` degrees, then every grid angle within
    /// `±window` degrees of the coarse winner.
    TwoStage { coarse_step: f64, window: f64 },
}

impl Default for L1Search {
    fn default() -> Self {
        L1Search::TwoStage { coarse_step: 1.0, window: 2.0 }
    }
}

struct L1Scorer<'a> {
    values: &'a [C64],
    power: Vec<usize>,
    n_powers: usize,
    spacing_ratio: f64,
    eps: f64,
    cfg: &'a WeiszfeldConfig,
    rotated: Vec<C64>,
    powers: Vec<C64>,
    warm: Option<C64>,
    nonconverged: usize,
}

impl<'a> L1Scorer<'a> {
    fn new(x: &'a ComplexMatrix, spacing_ratio: f64, cfg: &'a WeiszfeldConfig) -> Self {
        let (d, w) = x.shape();
        Self {
            values: x.as_slice(),
            power: (0..d).flat_map(|i| (0..w).map(move |j| i + j)).collect(),
            n_powers: d + w - 1,
            spacing_ratio,
            eps: cfg.epsilon_for(x.max_abs()),
            cfg,
            rotated: Vec::with_capacity(d * w),
            powers: Vec::with_capacity(d + w - 1),
            warm: None,
            nonconverged: 0,
        }
    }

    /// `min_c ‖X − c s_D sᵀ_W‖₁` at `θ`, warm-started from the previous call.
    ///
    /// On the unit circle `|x_k − c̃ z^m| = |x_k z^{−m} − c̃|`, so the inner
    /// problem is the plain geometric median of the de-rotated entries.
    fn objective(&mut self, theta: f64) -> f64 {
        let step = phase_step(theta, self.spacing_ratio);
        self.powers.clear();
        self.powers.extend((0..self.n_powers).map(|m| C64::from_polar(1.0, -(m as f64) * step)));
        self.rotated.clear();
        self.rotated.extend(self.values.iter().zip(&self.power).map(|(&v, &m)| v * self.powers[m]));
        let init = if self.cfg.warm_start { self.warm } else { None };
        let s = geometric_median(&self.rotated, init, self.cfg.max_iters, self.cfg.tol, self.eps);
        if !s.converged {
            self.nonconverged += 1;
        }
        self.warm = Some(s.c);
        s.objective
    }
}

/// Grid argmin of `min_c ‖X − c s_D(z(θ)) s_W(z(θ))ᵀ‖₁`.
pub fn estimate_doa_l1(
    x: &ComplexMatrix,
    config: &ArrayConfig,
    grid: &ThetaGrid,
    cfg: &WeiszfeldConfig,
    mode: L1Search,
) -> Result<DoaEstimate> {
    config.check_shape(x)?;
    cfg.validate()?;
    let mut scorer = L1Scorer::new(x, config.spacing_ratio, cfg);
    let (k, value) = match mode {
        L1Search::Full => grid_argmax(0..grid.len(), |k| -scorer.objective(grid.theta(k))),
        L1Search::TwoStage { coarse_step, window } => {
            if !(coarse_step > 0.0 && window >= 0.0) {
                return Err(Error::invalid("two-stage search needs coarse_step > 0 and window >= 0"));
            }
            let coarse = ThetaGrid::new(coarse_step.min(180.0))?;
            let (kc, _) = grid_argmax(0..coarse.len(), |k| -scorer.objective(coarse.theta(k)));
            let centre = coarse.theta(kc);
            scorer.warm = None;
            grid_argmax(grid.index_range(centre - window, centre + window), |k| {
                -scorer.objective(grid.theta(k))
            })
        }
    };
    let mut est = DoaEstimate::on_grid(grid, k);
    if grid.refine {
        let warm = scorer.warm;
        polish(grid, &mut est, value, |t| {
            let mut s = L1Scorer::new(x, config.spacing_ratio, cfg);
            s.warm = warm;
            -s.objective(t)
        });
    }
    est.diagnostics.nonconverged = scorer.nonconverged;
    Ok(est)
}

/// Grid argmax of `|a^v(θ)ᴴ vec(X)|²` with `a^v = s_W(z) ⊗ s_D(z)` and
/// `vec` stacking columns. Evaluated without the anti-diagonal shortcut.
pub fn matched_filter_ml(x: &ComplexMatrix, config: &ArrayConfig, grid: &ThetaGrid) -> Result<DoaEstimate> {
    config.check_shape(x)?;
    let r = x.vec_columns();
    let (d, w) = (config.d, config.w());
    let score = |theta: f64| {
        let z = z_of_theta(theta, config.spacing_ratio);
        let sd = structure_vector(z, d);
        let sw = structure_vector(z, w);
        let mut acc = C64::new(0.0, 0.0);
        for (j, b) in sw.as_slice().iter().enumerate() {
            for (i, a) in sd.as_slice().iter().enumerate() {
                acc += (b * a).conj() * r[j * d + i];
            }
        }
        acc.norm_sqr()
    };
    let (k, value) = grid_argmax(0..grid.len(), |k| score(grid.theta(k)));
    let mut est = DoaEstimate::on_grid(grid, k);
    polish(grid, &mut est, value, score);
    Ok(est)
}

/// Virtual steering vector `s_W(z) ⊗ s_D(z)` in column-stacking order.
pub fn virtual_steering(theta_deg: f64, config: &ArrayConfig) -> Vec<C64> {
    let z = z_of_theta(theta_deg, config.spacing_ratio);
    let sd = structure_vector(z, config.d);
    let sw = structure_vector(z, config.w());
    sw.as_slice().iter().flat_map(|b| sd.as_slice().iter().map(move |a| b * a)).collect()
}

/// Mean of all entries that sample each sensor, i.e. anti-diagonal means.
pub fn average_per_sensor(x: &ComplexMatrix, config: &ArrayConfig) -> Result<Vec<C64>> {
    config.check_shape(x)?;
    let (d, w) = x.shape();
    Ok(x
        .anti_diagonal_sums()
        .into_iter()
        .enumerate()
        .map(|(m, s)| {
            let count = (m + 1).min(d).min(w).min(d + w - 1 - m);
            s / count as f64
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn steering_examples() {
        assert!(steering_vector(0.0, 4, 0.5).iter().all(|v| close(*v, C64::new(1.0, 0.0))));
        let a = steering_vector(90.0 - 1e-12, 2, 0.5);
        assert!(close(a[1], C64::new(-1.0, 0.0)));
        let a = steering_vector(30.0, 3, 0.5);
        assert!(close(a[1], C64::new(0.0, -1.0)));
        assert!(close(a[2], C64::new(-1.0, 0.0)));
    }

    #[test]
    fn generator_examples() {
        assert_eq!(z_of_theta(0.0, 0.5), C64::new(1.0, 0.0));
        assert!(close(z_of_theta(30.0, 0.5), C64::new(0.0, -1.0)));
        assert!(close(z_of_theta(-30.0, 0.5), C64::new(0.0, 1.0)));
        assert!((theta_of_z(z_of_theta(-41.5, 0.5), 0.5) + 41.5).abs() < 1e-9);
    }

    #[test]
    fn grid_covers_half_open_range() {
        let g = ThetaGrid::default();
        assert_eq!(g.len(), 18000);
        assert_eq!(g.theta(0), -90.0);
        assert!(g.theta(g.len() - 1) < 90.0);
        let g = ThetaGrid::new(7.0).unwrap();
        assert_eq!(g.len(), 26);
        assert!(ThetaGrid::new(0.0).is_err());
    }

    #[test]
    fn noiseless_acquisition_is_rank1_hankel() {
        let cfg = ArrayConfig::new(8, 4, 0.5).unwrap();
        let scene = acquire(&cfg, 20.0, C64::new(1.0, 0.0), None, 0).unwrap();
        assert_eq!(scene.x.shape(), (4, 5));
        assert!(crate::matrix::hankel_project_check(&scene.x, 1e-12));
        let z = z_of_theta(20.0, 0.5);
        assert!(close(scene.x[(1, 2)], z.powu(3)));
    }

    #[test]
    fn noiseless_estimates() {
        let cfg = ArrayConfig::new(16, 8, 0.5).unwrap();
        let grid = ThetaGrid::default();
        let x = acquire(&cfg, 20.0, C64::new(0.3, 0.8), None, 0).unwrap().x;
        assert!((estimate_doa_l2(&x, &cfg, &grid).unwrap().theta_deg - 20.0).abs() <= grid.step_deg);
        assert!((matched_filter_ml(&x, &cfg, &grid).unwrap().theta_deg - 20.0).abs() <= grid.step_deg);
        let x = acquire(&cfg, -33.3, C64::new(1.0, 0.0), None, 0).unwrap().x;
        let est = estimate_doa_l1(&x, &cfg, &grid, &WeiszfeldConfig::default(), L1Search::default()).unwrap();
        assert!((est.theta_deg + 33.3).abs() <= grid.step_deg);
    }

    #[test]
    fn virtual_steering_is_unit_norm() {
        let cfg = ArrayConfig::new(10, 4, 0.5).unwrap();
        for t in [-80.0, -3.0, 0.0, 45.0] {
            let n: f64 = virtual_steering(t, &cfg).iter().map(|v| v.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn per_sensor_average() {
        let cfg = ArrayConfig::new(3, 2, 0.5).unwrap();
        let x = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        let r = average_per_sensor(&x, &cfg).unwrap();
        assert_eq!(r, vec![C64::new(1.0, 0.0), C64::new(3.0, 0.0), C64::new(8.0, 0.0)]);

        let cfg = ArrayConfig::new(9, 4, 0.5).unwrap();
        let amp = C64::new(0.6, -0.2);
        let x = acquire(&cfg, 12.0, amp, None, 0).unwrap().x;
        let a = steering_vector(12.0, 9, 0.5);
        for (r, a) in average_per_sensor(&x, &cfg).unwrap().iter().zip(a) {
            assert!((r - amp * a).norm() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let cfg = ArrayConfig::new(8, 4, 0.5).unwrap();
        let x = ComplexMatrix::zeros(3, 3);
        assert!(estimate_doa_l2(&x, &cfg, &ThetaGrid::default()).is_err());
        assert!(ArrayConfig::new(4, 5, 0.5).is_err());
        assert!(ArrayConfig::new(4, 2, 0.7).unwrap().aliasing());
    }
}
