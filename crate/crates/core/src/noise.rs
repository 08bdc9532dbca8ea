//! Noise models, SNR calibration and sensor-fault injection.
//!
//! `CN(0, σ²)` denotes a circularly-symmetric complex Gaussian with total
//! variance `σ²`, i.e. real and imaginary parts each `N(0, σ²/2)`.
//!
//! All randomness flows through [`Rng`], a ChaCha8 stream from `rand_chacha`
//! 0.9 (pinned), seeded per scene by [`derive_seed`].

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Per-trial seed from the master seed and the cell coordinates. The method
/// is deliberately not an input, so every method sees the same scene.
pub fn derive_seed(master: u64, m: usize, snr_index: usize, trial: usize) -> u64 {
    let mut h = splitmix64(master);
    for v in [m as u64, snr_index as u64, trial as u64] {
        h = splitmix64(h ^ v);
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    WhiteGaussian {
        sigma2: f64,
    },
    /// `CN(0, σ₁²)` with probability `1 − p`, else `CN(0, σ₂²)`.
    BernoulliGaussian {
        p: f64,
        sigma1_2: f64,
        sigma2_2: f64,
    },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::WhiteGaussian { sigma2 } => {
                if !(sigma2 > 0.0 && sigma2.is_finite()) {
                    return Err(Error::InvalidConfiguration(format!("white noise needs sigma2 > 0, got {sigma2}")));
                }
            }
            NoiseModel::BernoulliGaussian { p, sigma1_2, sigma2_2 } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidConfiguration(format!("impulse probability must lie in (0, 1), got {p}")));
                }
                if !(sigma1_2 > 0.0 && sigma2_2 > sigma1_2 && sigma2_2.is_finite()) {
                    return Err(Error::InvalidConfiguration(format!(
                        "need sigma2_2 > sigma1_2 > 0, got {sigma1_2} and {sigma2_2}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `σ²` for white noise, `(1 − p)σ₁² + pσ₂²` for the mixture.
    pub fn effective_power(&self) -> f64 {
        match *self {
            NoiseModel::WhiteGaussian { sigma2 } => sigma2,
            NoiseModel::BernoulliGaussian { p, sigma1_2, sigma2_2 } => (1.0 - p) * sigma1_2 + p * sigma2_2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            NoiseModel::WhiteGaussian { .. } => "white",
            NoiseModel::BernoulliGaussian { .. } => "impulsive",
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> C64 {
        match *self {
            NoiseModel::WhiteGaussian { sigma2 } => complex_gaussian(sigma2, rng),
            NoiseModel::BernoulliGaussian { p, sigma1_2, sigma2_2 } => {
                let var = if rng.random::<f64>() < p { sigma2_2 } else { sigma1_2 };
                complex_gaussian(var, rng)
            }
        }
    }
}

/// One draw from `CN(0, var)`.
pub fn complex_gaussian(var: f64, rng: &mut Rng) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

pub fn draw_noise(model: &NoiseModel, n: usize, rng: &mut Rng) -> Vec<C64> {
    (0..n).map(|_| model.sample(rng)).collect()
}

/// Signal amplitude with `|x|² = 10^{snr/10} · effective_power` and a
/// uniform phase on `[0, 2π)`.
pub fn calibrate_amplitude(snr_db: f64, model: &NoiseModel, rng: &mut Rng) -> C64 {
    let modulus = (10f64.powf(snr_db / 10.0) * model.effective_power()).sqrt();
    let phase = rng.random::<f64>() * TAU;
    C64::from_polar(modulus, phase)
}

/// Which physical sensor each entry of the measurement matrix samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorMap {
    rows: usize,
    cols: usize,
    n_sensors: usize,
    sensor: Vec<usize>,
}

impl SensorMap {
    /// Row-major sensor indices; `n_sensors` bounds them.
    pub fn new(rows: usize, cols: usize, n_sensors: usize, sensor: Vec<usize>) -> Result<Self> {
        if sensor.len() != rows * cols {
            return Err(Error::invalid(format!("sensor map has {} entries, expected {}", sensor.len(), rows * cols)));
        }
        if let Some(&s) = sensor.iter().find(|&&s| s >= n_sensors) {
            return Err(Error::invalid(format!("sensor index {s} out of range for {n_sensors} sensors")));
        }
        Ok(Self { rows, cols, n_sensors, sensor })
    }

    /// Sliding window over a ULA: entry `(i, j)` samples sensor `i + j`.
    pub fn ula(d: usize, w: usize) -> Self {
        let sensor = (0..d).flat_map(|i| (0..w).map(move |j| i + j)).collect();
        Self { rows: d, cols: w, n_sensors: d + w - 1, sensor }
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn sensor(&self, i: usize, j: usize) -> usize {
        self.sensor[i * self.cols + j]
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FaultSpec {
    pub faulty_sensors: BTreeSet<usize>,
    /// Fault power relative to the healthy entries of the same column.
    pub alpha_db: f64,
}

/// Replaces every entry that samples a faulty sensor with `CN(0, σ_i²)`,
/// where `σ_i²` is `10^{α/10}` times the mean power of the healthy entries
/// in column `i`.
pub fn inject_faults(x: &ComplexMatrix, map: &SensorMap, spec: &FaultSpec, rng: &mut Rng) -> Result<ComplexMatrix> {
    let (d, w) = x.shape();
    if (map.rows, map.cols) != (d, w) {
        return Err(Error::invalid(format!(
            "sensor map is {}x{} but the matrix is {d}x{w}",
            map.rows, map.cols
        )));
    }
    if let Some(&s) = spec.faulty_sensors.iter().find(|&&s| s >= map.n_sensors) {
        return Err(Error::InvalidConfiguration(format!(
            "faulty sensor {s} out of range for {} sensors",
            map.n_sensors
        )));
    }
    if spec.faulty_sensors.is_empty() {
        return Ok(x.clone());
    }
    let gain = 10f64.powf(spec.alpha_db / 10.0);
    let mut out = x.as_slice().to_vec();
    for j in 0..w {
        let faulty = |i: usize| spec.faulty_sensors.contains(&map.sensor(i, j));
        let healthy: Vec<f64> = (0..d).filter(|&i| !faulty(i)).map(|i| x[(i, j)].norm_sqr()).collect();
        if healthy.is_empty() {
            return Err(Error::InvalidConfiguration(format!("column {j} has no healthy entries")));
        }
        let var = gain * healthy.iter().sum::<f64>() / healthy.len() as f64;
        for i in (0..d).filter(|&i| faulty(i)) {
            out[i * w + j] = complex_gaussian(var, rng);
        }
    }
    ComplexMatrix::new(d, w, out)
}
