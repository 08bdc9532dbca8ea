use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use rank1_hankel::bench::{self, ExperimentConfig, Method};
use rank1_hankel::doa::{acquire, ArrayConfig, DoaScene, ThetaGrid};
use rank1_hankel::io::{read_matrix, write_matrix};
use rank1_hankel::noise::{calibrate_amplitude, rng_from_seed, NoiseModel};
use rank1_hankel::rank1::{approx_l1, approx_l1_real, approx_l2, approx_l2_real, GridSpec, NormFlavor, WeiszfeldConfig};
use rank1_hankel::toeplitz::toeplitz_approx;
use rank1_hankel::{selftest, Error};

#[derive(Parser)]
#[command(name = "r1h", version, about = "Rank-1 Hankel approximation and DoA benchmarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Norm {
    L2,
    L1,
}

#[derive(Clone, Copy, ValueEnum)]
enum StructureArg {
    Hankel,
    Toeplitz,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    White,
    Impulsive,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a rank-1 Hankel or Toeplitz matrix to a matrix file.
    Approx {
        /// Text file: "D W" then D*W "re im" pairs, row-major.
        input: PathBuf,
        #[arg(long, value_enum, default_value = "l2")]
        norm: Norm,
        #[arg(long, value_enum, default_value = "hankel")]
        structure: StructureArg,
        /// Restrict the generator to [-1, 1].
        #[arg(long)]
        real: bool,
        #[arg(long)]
        delta_rho: Option<f64>,
        #[arg(long)]
        delta_phi: Option<f64>,
        #[arg(long, action = ArgAction::Set, default_value_t = false)]
        refine: bool,
        /// Write the approximation here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the arrival angle of a single scene.
    Doa {
        /// Measurement matrix file; simulates a scene when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        m: usize,
        /// Subarray length, M/2 by default.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        spacing_ratio: f64,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        theta0: f64,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        snr: f64,
        #[arg(long, value_enum, default_value = "white")]
        noise: NoiseArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        theta_step: f64,
        #[arg(long, action = ArgAction::Set, default_value_t = false)]
        refine: bool,
        /// Comma-separated method names; all methods by default.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
    },
    /// Run a Monte Carlo experiment described by a TOML file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        theta_step: Option<f64>,
        #[arg(long, action = ArgAction::Set)]
        refine: Option<bool>,
    },
    /// Run the built-in numerical self-checks.
    Selftest,
}

enum Failure {
    Config(Error),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Approx {
            input,
            norm,
            structure,
            real,
            delta_rho,
            delta_phi,
            refine,
            out,
        } => {
            let x = read_matrix(&input)?;
            let base = match norm {
                Norm::L2 => GridSpec::l2_default(),
                Norm::L1 => GridSpec::l1_default(),
            };
            let grid = GridSpec::new(delta_rho.unwrap_or(base.delta_rho), delta_phi.unwrap_or(base.delta_phi))?
                .with_restrict_real(real)
                .with_refine(refine);
            let cfg = WeiszfeldConfig::default();
            let fit = match (structure, norm) {
                (StructureArg::Toeplitz, Norm::L2) => toeplitz_approx(&x, NormFlavor::L2, &grid, None),
                (StructureArg::Toeplitz, Norm::L1) => toeplitz_approx(&x, NormFlavor::L1, &grid, Some(&cfg)),
                (StructureArg::Hankel, Norm::L2) if real => approx_l2_real(&x, &grid),
                (StructureArg::Hankel, Norm::L2) => approx_l2(&x, &grid),
                (StructureArg::Hankel, Norm::L1) if real => approx_l1_real(&x, &grid, &cfg),
                (StructureArg::Hankel, Norm::L1) => approx_l1(&x, &grid, &cfg),
            }
            .map_err(|e| Failure::Runtime(e.to_string()))?;
            println!("z_hat = {} {}", fit.z_hat.re, fit.z_hat.im);
            println!("c_hat = {} {}", fit.c_hat.re, fit.c_hat.im);
            println!("residual = {}", fit.residual);
            println!("branch = {:?}", fit.branch);
            println!("structure = {:?}", fit.structure);
            println!("preflipped = {}", fit.preflipped);
            println!("refined = {}", fit.refined);
            println!("points_evaluated = {}", fit.search.points_evaluated);
            if fit.search.nonconverged > 0 {
                println!("nonconverged = {}", fit.search.nonconverged);
            }
            if let Some(path) = out {
                write_matrix(&fit.approximation, &path)?;
            }
            Ok(())
        }
        Command::Doa {
            input,
            m,
            d,
            spacing_ratio,
            theta0,
            snr,
            noise,
            seed,
            theta_step,
            refine,
            methods,
        } => {
            let ac = ArrayConfig::new(m, d.unwrap_or((m / 2).max(1)), spacing_ratio)?;
            if ac.aliasing() {
                eprintln!("warning: spacing ratio {spacing_ratio} > 1/2 aliases");
            }
            let methods: Vec<Method> = if methods.is_empty() {
                Method::ALL.to_vec()
            } else {
                methods.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
            };
            let grid = ThetaGrid::new(theta_step)?.with_refine(refine);
            let scene = match input {
                Some(path) => DoaScene {
                    config: ac,
                    theta0: f64::NAN,
                    amplitude: Default::default(),
                    x: read_matrix(&path)?,
                    seed,
                },
                None => {
                    let model = match noise {
                        NoiseArg::White => NoiseModel::WhiteGaussian { sigma2: 1.0 },
                        NoiseArg::Impulsive => NoiseModel::BernoulliGaussian {
                            p: 0.1,
                            sigma1_2: 1.0,
                            sigma2_2: 200.0,
                        },
                    };
                    let amp = calibrate_amplitude(snr, &model, &mut rng_from_seed(seed));
                    acquire(&ac, theta0, amp, Some(&model), seed.wrapping_add(1))?
                }
            };
            let cfg = WeiszfeldConfig::default();
            let mut failed = 0;
            for method in &methods {
                match bench::run_method(*method, &scene, &grid, &cfg, Default::default()) {
                    Ok(est) => {
                        if scene.theta0.is_nan() {
                            println!("{method}: {}", est.theta_deg);
                        } else {
                            println!("{method}: {} (error {})", est.theta_deg, (est.theta_deg - scene.theta0).abs());
                        }
                        let diag = est.diagnostics;
                        if diag.fallback || diag.unreliable || diag.nonconverged > 0 {
                            println!(
                                "  fallback={} unreliable={} nonconverged={}",
                                diag.fallback, diag.unreliable, diag.nonconverged
                            );
                        }
                    }
                    Err(e) => {
                        failed += 1;
                        println!("{method}: failed ({e})");
                    }
                }
            }
            if failed == methods.len() {
                return Err(Failure::Runtime("every method failed".into()));
            }
            Ok(())
        }
        Command::Bench {
            config,
            seed,
            out,
            threads,
            theta_step,
            refine,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.run.seed = s;
            }
            if let Some(t) = theta_step {
                cfg.run.theta_step = t;
            }
            if let Some(r) = refine {
                cfg.run.refine = r;
            }
            if threads == Some(0) {
                return Err(Error::InvalidConfiguration("--threads must be at least 1".into()).into());
            }
            cfg.validate()?;
            let result = bench::run_experiment(&cfg, threads)?;
            let written = bench::write_outputs(&cfg, &result, out.as_deref())?;
            println!("{:<18} {:>5} {:>8} {:>7} {:>7} {:>14}", "method", "M", "snr_db", "ok", "failed", "mean_abs_err");
            for row in &result.summary {
                let err = row.mean_abs_err_deg.map(|e| format!("{e:.6}")).unwrap_or_else(|| "-".into());
                println!(
                    "{:<18} {:>5} {:>8} {:>7} {:>7} {:>14}",
                    row.method.as_str(),
                    row.m,
                    row.snr_db,
                    row.ok,
                    row.failed,
                    err
                );
            }
            for path in written {
                println!("wrote {}", path.display());
            }
            let fraction = result.failure_fraction();
            if fraction > cfg.run.failure_threshold {
                return Err(Failure::Runtime(format!(
                    "{:.1}% of trials failed (threshold {:.1}%)",
                    100.0 * fraction,
                    100.0 * cfg.run.failure_threshold
                )));
            }
            Ok(())
        }
        Command::Selftest => {
            let results = selftest::run_selftest();
            let mut failed = 0;
            for r in &results {
                println!("{} {} ({})", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                failed += usize::from(!r.passed);
            }
            if failed > 0 {
                return Err(Failure::Runtime(format!("{failed} self-check(s) failed")));
            }
            Ok(())
        }
    }
}
