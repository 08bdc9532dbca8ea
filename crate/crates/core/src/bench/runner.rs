use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng as _;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Theta0Policy};
use super::{csv, plot, Method, TrialRecord};
use crate::baselines::{fbss_music, hankel_music, matrix_pencil, max_energy, toeplitz_music};
use crate::doa::{
    acquire_with_rng, average_per_sensor, estimate_doa_l1, estimate_doa_l2, matched_filter_ml, DoaEstimate, DoaScene,
    L1Search, ThetaGrid,
};
use crate::error::{Error, Result};
use crate::noise::{calibrate_amplitude, derive_seed, inject_faults, rng_from_seed, SensorMap};
use crate::rank1::WeiszfeldConfig;

/// Runs one estimator on a scene.
pub fn run_method(
    method: Method,
    scene: &DoaScene,
    grid: &ThetaGrid,
    cfg: &WeiszfeldConfig,
    l1_search: L1Search,
) -> Result<DoaEstimate> {
    let (x, ac) = (&scene.x, &scene.config);
    match method {
        Method::R1hL2 => estimate_doa_l2(x, ac, grid),
        Method::R1hL1 => estimate_doa_l1(x, ac, grid, cfg, l1_search),
        Method::MatchedFilterMl => matched_filter_ml(x, ac, grid),
        Method::MatrixPencil => matrix_pencil(x, ac, None),
        Method::HankelMusic => hankel_music(x, ac, grid),
        Method::FbssMusic => fbss_music(x, ac, grid, None),
        Method::MaxEnergy => max_energy(&average_per_sensor(x, ac)?, ac, grid),
        Method::ToeplitzMusic => toeplitz_music(&average_per_sensor(x, ac)?, ac, grid),
    }
}

/// Mean absolute error of one `(method, M, SNR)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub m: usize,
    pub d: usize,
    pub snr_db: f64,
    pub noise: String,
    pub trials: usize,
    pub ok: usize,
    pub failed: usize,
    /// Over successful trials; `None` when every trial failed.
    pub mean_abs_err_deg: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// Ordered by M, SNR, method (config order), then trial.
    pub records: Vec<TrialRecord>,
    /// Wall time of each record, same order. Not part of any CSV.
    pub wall_times: Vec<Duration>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    pub fn failure_fraction(&self) -> f64 {
        let failed = self.records.iter().filter(|r| !r.ok()).count();
        failed as f64 / self.records.len().max(1) as f64
    }

    pub fn cell(&self, method: Method, m: usize, snr_db: f64) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.method == method && s.m == m && s.snr_db == snr_db)
    }
}

struct SceneOutcome {
    theta0: f64,
    seed: u64,
    results: Vec<(Option<f64>, Duration)>,
}

fn simulate(cfg: &ExperimentConfig, mi: usize, si: usize, trial: usize) -> SceneOutcome {
    let ac = cfg.array_config(mi).expect("validated config");
    let seed = derive_seed(cfg.run.seed, ac.m, si, trial);
    let mut rng = rng_from_seed(seed);
    let theta0 = match cfg.run.theta0 {
        Theta0Policy::Fixed(t) => t,
        Theta0Policy::Keyword(_) => rng.random_range(-85.0..=85.0),
    };
    let (amplitude, noise) = if cfg.run.noiseless {
        (calibrate_amplitude(0.0, &crate::noise::NoiseModel::WhiteGaussian { sigma2: 1.0 }, &mut rng), None)
    } else {
        (calibrate_amplitude(cfg.run.snr_db[si], &cfg.noise, &mut rng), Some(&cfg.noise))
    };
    let n_methods = cfg.run.methods.len();
    let scene = acquire_with_rng(&ac, theta0, amplitude, noise, &mut rng).and_then(|mut scene| {
        scene.seed = seed;
        if let Some(faults) = &cfg.faults {
            scene.x = inject_faults(&scene.x, &SensorMap::ula(ac.d, ac.w()), faults, &mut rng)?;
        }
        Ok(scene)
    });
    let scene = match scene {
        Ok(s) => s,
        Err(_) => {
            return SceneOutcome {
                theta0,
                seed,
                results: vec![(None, Duration::ZERO); n_methods],
            }
        }
    };
    let grid = cfg.theta_grid();
    let wcfg = cfg.weiszfeld();
    let l1 = cfg.l1_search();
    let results = cfg
        .run
        .methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let est = run_method(method, &scene, &grid, &wcfg, l1).ok().map(|e| e.theta_deg);
            (est.filter(|t| t.is_finite()), start.elapsed())
        })
        .collect();
    SceneOutcome {
        theta0,
        seed,
        results,
    }
}

/// Runs every `(M, SNR, trial)` scene and every method on it.
///
/// Each scene draws from its own stream seeded by
/// `derive_seed(seed, M, snr_index, trial)`, so all methods share the
/// noise realization and the output does not depend on `threads`.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult> {
    cfg.validate()?;
    let n_m = cfg.array.m.len();
    let n_snr = cfg.run.snr_db.len();
    let trials = cfg.run.trials;
    let jobs: Vec<(usize, usize, usize)> = (0..n_m)
        .flat_map(|mi| (0..n_snr).flat_map(move |si| (0..trials).map(move |t| (mi, si, t))))
        .collect();

    let work = || -> Vec<SceneOutcome> { jobs.par_iter().map(|&(mi, si, t)| simulate(cfg, mi, si, t)).collect() };
    let outcomes = match threads.or(cfg.run.threads) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfiguration(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut records = Vec::with_capacity(outcomes.len() * cfg.run.methods.len());
    let mut wall_times = Vec::with_capacity(records.capacity());
    for mi in 0..n_m {
        let ac = cfg.array_config(mi)?;
        for si in 0..n_snr {
            let base = (mi * n_snr + si) * trials;
            for (k, &method) in cfg.run.methods.iter().enumerate() {
                for o in &outcomes[base..base + trials] {
                    let (theta_hat, wall) = o.results[k];
                    records.push(TrialRecord {
                        method,
                        m: ac.m,
                        d: ac.d,
                        snr_db: cfg.run.snr_db[si],
                        noise: if cfg.run.noiseless { "none".into() } else { cfg.noise.label().into() },
                        theta0_deg: o.theta0,
                        theta_hat_deg: theta_hat,
                        abs_err_deg: theta_hat.map(|t| (t - o.theta0).abs()),
                        seed: o.seed,
                    });
                    wall_times.push(wall);
                }
            }
        }
    }
    let summary = summarize(&records);
    Ok(ExperimentResult {
        records,
        wall_times,
        summary,
    })
}

/// One row per contiguous `(method, M, SNR)` cell of `records`.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    for r in records {
        let same = rows
            .last()
            .is_some_and(|s| s.method == r.method && s.m == r.m && s.d == r.d && s.snr_db == r.snr_db);
        if !same {
            rows.push(SummaryRow {
                method: r.method,
                m: r.m,
                d: r.d,
                snr_db: r.snr_db,
                noise: r.noise.clone(),
                trials: 0,
                ok: 0,
                failed: 0,
                mean_abs_err_deg: None,
            });
            sums.push(0.0);
        }
        let row = rows.last_mut().unwrap();
        row.trials += 1;
        match r.abs_err_deg {
            Some(e) => {
                row.ok += 1;
                *sums.last_mut().unwrap() += e;
            }
            None => row.failed += 1,
        }
    }
    for (row, sum) in rows.iter_mut().zip(sums) {
        if row.ok > 0 {
            row.mean_abs_err_deg = Some(sum / row.ok as f64);
        }
    }
    rows
}

/// Writes the trial CSV, the summary CSV and the plot named in the config's
/// output section. Returns the paths written.
pub fn write_outputs(cfg: &ExperimentConfig, result: &ExperimentResult, dir: Option<&std::path::Path>) -> Result<Vec<PathBuf>> {
    let out = &cfg.output;
    let dir = dir.map(PathBuf::from).unwrap_or_else(|| out.dir.clone());
    let mut written = Vec::new();
    let trials = dir.join(&out.trials_csv);
    csv::emit_csv(&result.records, &trials)?;
    written.push(trials);
    let summary = dir.join(&out.summary_csv);
    csv::emit_summary_csv(&result.summary, &summary)?;
    written.push(summary);
    if let Some(name) = &out.plot {
        let path = dir.join(name);
        plot::emit_plot(&result.summary, &path, out.plot_format)?;
        written.push(path);
    }
    Ok(written)
}
