//! Fast numerical self-checks behind the `selftest` subcommand. Each check
//! compares a production path against an independent evaluation.

use rand::Rng as _;

use crate::bench::{parse_csv, write_csv, Method, TrialRecord};
use crate::doa::{acquire, estimate_doa_l2, matched_filter_ml, ArrayConfig, ThetaGrid};
use crate::matrix::{flip, structure_vector, ComplexMatrix, FlipMode, C64};
use crate::noise::{calibrate_amplitude, rng_from_seed, NoiseModel, Rng};
use crate::rank1::{
    approx_l1, approx_l2, coefficient_l2, rank1_hankel, weighted_median_coeff, GridSpec, NormFlavor, WeiszfeldConfig,
};
use crate::toeplitz::toeplitz_approx;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, limit: f64) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= limit,
        detail: format!("worst {worst:.3e}, limit {limit:.1e}"),
    }
}

fn random_c64(rng: &mut Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_matrix(rng: &mut Rng, d: usize, w: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, w, |_, _| random_c64(rng))
}

fn structure_norms(rng: &mut Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let z = C64::from_polar(rng.random_range(0.0..=1.0), rng.random_range(0.0..std::f64::consts::TAU));
        let d = rng.random_range(1..=64);
        let n: f64 = structure_vector(z, d).as_slice().iter().map(|v| v.norm_sqr()).sum();
        worst = worst.max((n.sqrt() - 1.0).abs());
    }
    check("structure vector has unit norm", worst, 1e-12)
}

fn l2_objective_naive(rng: &mut Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = random_matrix(rng, 3, 4);
        let z = random_c64(rng) * 0.7;
        let p: Vec<C64> = (0..6).map(|k| z.powu(k)).collect();
        let nd = p[..3].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let nw = p[..4].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let mut naive = C64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..4 {
                naive += (p[i] / nd).conj() * x[(i, j)] * (p[j] / nw).conj();
            }
        }
        worst = worst.max((naive - coefficient_l2(&x, z)).norm());
    }
    check("L2 coefficient matches direct summation", worst, 1e-12)
}

fn exact_recovery(rng: &mut Rng) -> CheckResult {
    let grid = GridSpec::new(1.0 / 128.0, std::f64::consts::TAU / 256.0).unwrap();
    let cell = grid.delta_rho.hypot(grid.delta_phi);
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let z = C64::from_polar(rng.random_range(0.1..=1.0), rng.random_range(0.0..std::f64::consts::TAU));
        let x = rank1_hankel(random_c64(rng) + C64::new(1.5, 0.0), z, 3, 4);
        let l2 = approx_l2(&x, &grid).map(|f| (f.z_hat - z).norm() / cell).unwrap_or(f64::INFINITY);
        let l1 = approx_l1(&x, &grid, &WeiszfeldConfig::default())
            .map(|f| (f.z_hat - z).norm() / cell)
            .unwrap_or(f64::INFINITY);
        worst = worst.max(l2).max(l1);
    }
    check("exact rank-1 Hankel inputs recovered (grid cells)", worst, 2.0)
}

fn weiszfeld_vs_scan(rng: &mut Rng) -> CheckResult {
    let cfg = WeiszfeldConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let x = random_matrix(rng, 2, 2);
        let z = C64::from_polar(0.6, 0.8);
        let sol = weighted_median_coeff(&x, z, &cfg);
        let a: Vec<C64> = (0..2).flat_map(|i| (0..2).map(move |j| z.powu((i + j) as u32))).collect();
        let f = |c: C64| -> f64 { x.as_slice().iter().zip(&a).map(|(xk, ak)| (xk - c * ak).norm()).sum() };
        let (mut centre, mut half) = (sol.c_tilde, 1.0);
        let mut best = f(centre);
        for _ in 0..30 {
            for p in 0..=40 {
                for q in 0..=40 {
                    let c = centre + C64::new(half * (p as f64 / 20.0 - 1.0), half * (q as f64 / 20.0 - 1.0));
                    let v = f(c);
                    if v < best {
                        best = v;
                        centre = c;
                    }
                }
            }
            half /= 4.0;
        }
        worst = worst.max(sol.objective - best);
    }
    check("Weiszfeld objective matches a complex-plane scan", worst, 1e-6)
}

fn l2_equals_matched_filter(rng: &mut Rng) -> CheckResult {
    let ac = ArrayConfig::new(16, 8, 0.5).unwrap();
    let grid = ThetaGrid::new(0.05).unwrap();
    let noise = NoiseModel::WhiteGaussian { sigma2: 1.0 };
    let mut mismatches = 0.0;
    for t in 0..5 {
        let amp = calibrate_amplitude(0.0, &noise, rng);
        let scene = acquire(&ac, rng.random_range(-85.0..85.0), amp, Some(&noise), t).unwrap();
        let a = estimate_doa_l2(&scene.x, &ac, &grid).unwrap().grid_index;
        let b = matched_filter_ml(&scene.x, &ac, &grid).unwrap().grid_index;
        if a != b {
            mismatches += 1.0;
        }
    }
    check("L2 estimator and matched filter pick the same angle", mismatches, 0.0)
}

fn toeplitz_residual(rng: &mut Rng) -> CheckResult {
    let grid = GridSpec::new(1.0 / 64.0, std::f64::consts::TAU / 128.0).unwrap();
    let mut worst: f64 = 0.0;
    for flavor in [NormFlavor::L2, NormFlavor::L1] {
        let x = random_matrix(rng, 3, 3);
        let fit = toeplitz_approx(&x, flavor, &grid, None).unwrap();
        let hankel = match flavor {
            NormFlavor::L2 => approx_l2(&flip(&x, FlipMode::Rows), &grid).unwrap().residual,
            NormFlavor::L1 => approx_l1(&flip(&x, FlipMode::Rows), &grid, &WeiszfeldConfig::default())
                .unwrap()
                .residual,
        };
        let direct = match flavor {
            NormFlavor::L2 => x.sub(&fit.approximation).norm_l2(),
            NormFlavor::L1 => x.sub(&fit.approximation).norm_l1(),
        };
        worst = worst.max((direct - hankel).abs() / hankel.max(f64::MIN_POSITIVE));
    }
    check("Toeplitz residual equals the flipped Hankel residual", worst, 1e-12)
}

fn csv_round_trip(rng: &mut Rng) -> CheckResult {
    let records: Vec<TrialRecord> = (0..5)
        .map(|k| {
            let theta0: f64 = rng.random_range(-85.0..85.0);
            let hat = (k % 2 == 0).then(|| theta0 + rng.random_range(-1.0..1.0));
            TrialRecord {
                method: Method::ALL[k],
                m: 8,
                d: 4,
                snr_db: -5.0,
                noise: "white".into(),
                theta0_deg: theta0,
                theta_hat_deg: hat,
                abs_err_deg: hat.map(|h| (h - theta0).abs()),
                seed: rng.random(),
            }
        })
        .collect();
    let same = parse_csv(&write_csv(&records)).map(|r| r == records).unwrap_or(false);
    check("CSV round trip", if same { 0.0 } else { 1.0 }, 0.0)
}

/// Runs every check with a fixed seed.
pub fn run_selftest() -> Vec<CheckResult> {
    let mut rng = rng_from_seed(0x5e1f);
    vec![
        structure_norms(&mut rng),
        l2_objective_naive(&mut rng),
        exact_recovery(&mut rng),
        weiszfeld_vs_scan(&mut rng),
        l2_equals_matched_filter(&mut rng),
        toeplitz_residual(&mut rng),
        csv_round_trip(&mut rng),
    ]
}
