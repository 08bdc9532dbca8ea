//! Config-driven Monte Carlo benchmark of the DoA estimators.

mod config;
mod csv;
mod plot;
mod runner;

use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

pub use config::{
    ArraySection, DRule, ExperimentConfig, L1SearchMode, OutputSection, PlotFormat, RunSection, Theta0Policy,
    SCHEMA_VERSION,
};
pub use csv::{emit_csv, emit_summary_csv, parse_csv, write_csv, CSV_HEADER};
pub use plot::{emit_plot, render_plot};
pub use runner::{run_experiment, run_method, summarize, write_outputs, ExperimentResult, SummaryRow};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    R1hL2,
    R1hL1,
    MatrixPencil,
    HankelMusic,
    FbssMusic,
    MaxEnergy,
    ToeplitzMusic,
    MatchedFilterMl,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::R1hL2,
        Method::R1hL1,
        Method::MatrixPencil,
        Method::HankelMusic,
        Method::FbssMusic,
        Method::MaxEnergy,
        Method::ToeplitzMusic,
        Method::MatchedFilterMl,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::R1hL2 => "r1h_l2",
            Method::R1hL1 => "r1h_l1",
            Method::MatrixPencil => "matrix_pencil",
            Method::HankelMusic => "hankel_music",
            Method::FbssMusic => "fbss_music",
            Method::MaxEnergy => "max_energy",
            Method::ToeplitzMusic => "toeplitz_music",
            Method::MatchedFilterMl => "matched_filter_ml",
        }
    }

    /// The five literature estimators.
    pub fn is_baseline(&self) -> bool {
        !matches!(self, Method::R1hL2 | Method::R1hL1 | Method::MatchedFilterMl)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method {s:?}")))
    }
}

/// One Monte Carlo outcome. A failed trial has no estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: Method,
    pub m: usize,
    pub d: usize,
    pub snr_db: f64,
    pub noise: String,
    pub theta0_deg: f64,
    pub theta_hat_deg: Option<f64>,
    pub abs_err_deg: Option<f64>,
    pub seed: u64,
}

impl TrialRecord {
    pub fn ok(&self) -> bool {
        self.theta_hat_deg.is_some()
    }
}
