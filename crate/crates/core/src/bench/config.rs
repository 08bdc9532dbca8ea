use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::Method;
use crate::doa::{ArrayConfig, L1Search, ThetaGrid};
use crate::error::{Error, Result};
use crate::noise::{FaultSpec, NoiseModel};
use crate::rank1::WeiszfeldConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Monte Carlo experiment description, read from TOML.
///
/// ```toml
/// schema_version = 1
///
/// [array]
/// m = [16, 32]
/// d = "half"            # or an explicit list matching `m`
/// spacing_ratio = 0.5
///
/// [noise]
/// kind = "white_gaussian"
/// sigma2 = 1.0
///
/// [run]
/// snr_db = [0.0, 10.0]
/// trials = 500
/// methods = ["r1h_l2", "max_energy"]
/// theta0 = "uniform"    # or a fixed angle in degrees
/// seed = 1
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub array: ArraySection,
    pub noise: NoiseModel,
    pub run: RunSection,
    #[serde(default)]
    pub faults: Option<FaultSpec>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub m: Vec<usize>,
    #[serde(default)]
    pub d: DRule,
    #[serde(default = "half")]
    pub spacing_ratio: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DRule {
    Keyword(HalfKeyword),
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub enum HalfKeyword {
    #[serde(rename = "half")]
    Half,
}

impl Default for DRule {
    fn default() -> Self {
        DRule::Keyword(HalfKeyword::Half)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Theta0Policy {
    Fixed(f64),
    Keyword(UniformKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub enum UniformKeyword {
    /// Uniform over `[−85, 85]` per trial.
    #[serde(rename = "uniform")]
    Uniform,
}

impl Default for Theta0Policy {
    fn default() -> Self {
        Theta0Policy::Keyword(UniformKeyword::Uniform)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L1SearchMode {
    Full,
    TwoStage,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub theta0: Theta0Policy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_step")]
    pub theta_step: f64,
    #[serde(default)]
    pub refine: bool,
    /// Drop the noise and use a unit-modulus amplitude.
    #[serde(default)]
    pub noiseless: bool,
    #[serde(default = "default_l1_search")]
    pub l1_search: L1SearchMode,
    #[serde(default = "default_coarse")]
    pub l1_coarse_step: f64,
    #[serde(default = "default_window")]
    pub l1_window: f64,
    /// Failed-trial fraction above which the CLI exits with status 2.
    #[serde(default = "default_threshold")]
    pub failure_threshold: f64,
    pub threads: Option<usize>,
}

fn default_step() -> f64 {
    0.01
}
fn default_l1_search() -> L1SearchMode {
    L1SearchMode::TwoStage
}
fn default_coarse() -> f64 {
    1.0
}
fn default_window() -> f64 {
    2.0
}
fn default_threshold() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotFormat {
    Svg,
    Gnuplot,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_trials_csv")]
    pub trials_csv: String,
    #[serde(default = "default_summary_csv")]
    pub summary_csv: String,
    #[serde(default = "default_plot")]
    pub plot: Option<String>,
    #[serde(default = "default_plot_format")]
    pub plot_format: PlotFormat,
}

fn default_dir() -> PathBuf {
    PathBuf::from("bench-out")
}
fn default_trials_csv() -> String {
    "trials.csv".into()
}
fn default_summary_csv() -> String {
    "summary.csv".into()
}
fn default_plot() -> Option<String> {
    Some("mean_abs_error.svg".into())
}
fn default_plot_format() -> PlotFormat {
    PlotFormat::Svg
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            trials_csv: default_trials_csv(),
            summary_csv: default_summary_csv(),
            plot: default_plot(),
            plot_format: default_plot_format(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfiguration(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfiguration(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.array.m.is_empty() {
            return bad("array.m must not be empty".into());
        }
        if let DRule::Explicit(d) = &self.array.d {
            if d.len() != self.array.m.len() {
                return bad(format!("array.d has {} entries but array.m has {}", d.len(), self.array.m.len()));
            }
        }
        for i in 0..self.array.m.len() {
            self.array_config(i).map_err(|e| Error::InvalidConfiguration(e.to_string()))?;
        }
        self.noise.validate()?;
        if self.run.snr_db.is_empty() || self.run.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("run.snr_db must be a non-empty list of finite values".into());
        }
        if self.run.trials == 0 {
            return bad("run.trials must be at least 1".into());
        }
        if self.run.methods.is_empty() {
            return bad("run.methods must not be empty".into());
        }
        let unique: BTreeSet<_> = self.run.methods.iter().collect();
        if unique.len() != self.run.methods.len() {
            return bad("run.methods lists a method twice".into());
        }
        if let Theta0Policy::Fixed(t) = self.run.theta0 {
            if !(-90.0..90.0).contains(&t) {
                return bad(format!("run.theta0 must lie in [-90, 90), got {t}"));
            }
        }
        ThetaGrid::new(self.run.theta_step).map_err(|e| Error::InvalidConfiguration(e.to_string()))?;
        if !(self.run.l1_coarse_step > 0.0 && self.run.l1_window >= 0.0) {
            return bad("run.l1_coarse_step must be positive and run.l1_window non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.run.failure_threshold) {
            return bad("run.failure_threshold must lie in [0, 1]".into());
        }
        if self.run.threads == Some(0) {
            return bad("run.threads must be at least 1".into());
        }
        Ok(())
    }

    pub fn array_config(&self, index: usize) -> Result<ArrayConfig> {
        let m = self.array.m[index];
        let d = match &self.array.d {
            DRule::Keyword(HalfKeyword::Half) => (m / 2).max(1),
            DRule::Explicit(d) => d[index],
        };
        ArrayConfig::new(m, d, self.array.spacing_ratio)
    }

    pub fn theta_grid(&self) -> ThetaGrid {
        ThetaGrid {
            step_deg: self.run.theta_step,
            refine: self.run.refine,
        }
    }

    pub fn l1_search(&self) -> L1Search {
        match self.run.l1_search {
            L1SearchMode::Full => L1Search::Full,
            L1SearchMode::TwoStage => L1Search::TwoStage {
                coarse_step: self.run.l1_coarse_step,
                window: self.run.l1_window,
            },
        }
    }

    pub fn weiszfeld(&self) -> WeiszfeldConfig {
        WeiszfeldConfig::default()
    }
}
