//! Property checks run through a deterministic proptest runner. Each returns
//! `Err` with the minimal failing case.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use rank1_hankel::baselines::{fbss_music, hankel_music, matrix_pencil, max_energy, toeplitz_music};
use rank1_hankel::doa::{
    acquire, average_per_sensor, estimate_doa_l1, estimate_doa_l2, ArrayConfig, L1Search, ThetaGrid,
};
use rank1_hankel::matrix::{
    flip, hankel_from_vector, hankel_project_check, power_sum_norm, structure_vector, FlipMode, HankelParams,
};
use rank1_hankel::noise::{calibrate_amplitude, rng_from_seed, NoiseModel};
use rank1_hankel::rank1::{
    approx_l1, approx_l2, weighted_median_coeff, weiszfeld_trace, GridSpec, NormFlavor, Rank1HankelFit,
    WeiszfeldConfig,
};
use rank1_hankel::toeplitz::{is_toeplitz, toeplitz_approx};
use rank1_hankel::{ComplexMatrix, C64};

pub type Check = fn() -> Result<(), String>;

pub const ALL: &[(&str, Check)] = &[
    ("structure vector has unit norm", structure_vector_norm),
    ("power-sum norm is continuous across |z| = 1", branch_continuity),
    ("Hankel construction passes the structure check", hankel_structure),
    ("flip keeps entries and norms", flip_multiset),
    ("L2 fit of the flipped matrix is the flipped fit", flip_duality_l2),
    ("L1 fit of the flipped matrix is the flipped fit", flip_duality_l1),
    ("L2 fit is scale equivariant", scale_equivariance_l2),
    ("L1 fit is scale equivariant", scale_equivariance_l1),
    ("halving the L2 grid never worsens the fit", monotone_refinement),
    ("L2 residual respects the unstructured rank-1 bound", eckart_young),
    ("overflow-safe L1 form equals the literal form", overflow_safe_identity),
    ("Weiszfeld objective never increases", weiszfeld_descent),
    ("Toeplitz fit has constant diagonals", toeplitz_diagonals),
    ("row flip preserves L1 and L2 norms", row_flip_norms),
    ("conjugating the data mirrors both DoA estimates", mirror_symmetry),
    ("baselines ignore a global phase", baseline_phase_invariance),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn matrix(d: std::ops::RangeInclusive<usize>, w: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ComplexMatrix> {
    (d, w).prop_flat_map(|(d, w)| {
        prop::collection::vec(complex(), d * w).prop_map(move |v| ComplexMatrix::new(d, w, v).unwrap())
    })
}

fn polar(rho: std::ops::RangeInclusive<f64>) -> impl Strategy<Value = C64> {
    (rho, 0.0..TAU).prop_map(|(r, p)| C64::from_polar(r, p))
}

fn coarse_grid() -> GridSpec {
    GridSpec::new(1.0 / 64.0, TAU / 256.0).unwrap()
}

fn flip_both(x: &ComplexMatrix) -> ComplexMatrix {
    flip(x, FlipMode::Both)
}

fn same_matrix(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.sub(b).max_abs() <= tol
}

pub fn structure_vector_norm() -> Result<(), String> {
    run(1000, (polar(0.0..=1.0), 1..=64usize), |(z, d)| {
        let v = structure_vector(z, d);
        let n = v.as_slice().iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((n - 1.0).abs() <= 1e-12, "norm {n} at z={z}, D={d}");
        prop_assert!(v.as_slice()[0].im == 0.0 && v.as_slice()[0].re > 0.0);
        Ok(())
    })
}

pub fn branch_continuity() -> Result<(), String> {
    run(500, 1..=64usize, |d| {
        let inside = power_sum_norm(1.0 - 1e-9, d);
        let on = power_sum_norm(1.0, d);
        prop_assert!((inside - on).abs() <= 1e-6 * (d as f64).sqrt(), "{inside} vs {on}");
        Ok(())
    })
}

pub fn hankel_structure() -> Result<(), String> {
    let h = (1..=12usize).prop_flat_map(|m| (prop::collection::vec(complex(), m), 1..=m));
    run(300, h, |(h, d)| {
        let x = hankel_from_vector(&HankelParams::new(h.clone(), d).unwrap());
        prop_assert_eq!(x.shape(), (d, h.len() - d + 1));
        prop_assert!(hankel_project_check(&x, 0.0));
        Ok(())
    })
}

pub fn flip_multiset() -> Result<(), String> {
    run(300, matrix(1..=6, 1..=6), |x| {
        for mode in [FlipMode::Rows, FlipMode::Both] {
            let f = flip(&x, mode);
            let key = |v: &C64| (v.re.to_bits(), v.im.to_bits());
            let mut a: Vec<_> = x.as_slice().iter().map(key).collect();
            let mut b: Vec<_> = f.as_slice().iter().map(key).collect();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
            let l1 = |m: &ComplexMatrix| -> f64 {
                let mut v: Vec<f64> = m.as_slice().iter().map(|e| e.norm()).collect();
                v.sort_by(f64::total_cmp);
                v.iter().sum()
            };
            prop_assert_eq!(l1(&x), l1(&f));
        }
        prop_assert_eq!(flip_both(&flip_both(&x)), x);
        Ok(())
    })
}

fn check_flip_duality(fit: &Rank1HankelFit, fit_flipped: &Rank1HankelFit, x: &ComplexMatrix) -> Result<(), TestCaseError> {
    let expected = flip_both(&fit.approximation);
    let tol = 1e-8 * x.max_abs();
    prop_assert!(
        same_matrix(&fit_flipped.approximation, &expected, tol),
        "flipped fit differs by {}",
        fit_flipped.approximation.sub(&expected).max_abs()
    );
    Ok(())
}

pub fn flip_duality_l2() -> Result<(), String> {
    let grid = coarse_grid();
    run(60, matrix(2..=5, 2..=5), |x| {
        let a = approx_l2(&x, &grid).unwrap();
        let b = approx_l2(&flip_both(&x), &grid).unwrap();
        check_flip_duality(&a, &b, &x)
    })
}

pub fn flip_duality_l1() -> Result<(), String> {
    let grid = coarse_grid();
    let cfg = WeiszfeldConfig::default();
    run(30, matrix(2..=4, 2..=4), |x| {
        let a = approx_l1(&x, &grid, &cfg).unwrap();
        let b = approx_l1(&flip_both(&x), &grid, &cfg).unwrap();
        check_flip_duality(&a, &b, &x)
    })
}

fn scale() -> impl Strategy<Value = C64> {
    (0.01..100.0f64, 0.0..TAU).prop_map(|(r, p)| C64::from_polar(r, p))
}

pub fn scale_equivariance_l2() -> Result<(), String> {
    let grid = coarse_grid();
    run(60, (matrix(1..=5, 2..=5), scale()), |(x, alpha)| {
        let a = approx_l2(&x, &grid).unwrap();
        let b = approx_l2(&x.scale(alpha), &grid).unwrap();
        prop_assert!((a.z_hat - b.z_hat).norm() <= 1e-9, "{} vs {}", a.z_hat, b.z_hat);
        prop_assert!((b.c_hat - alpha * a.c_hat).norm() <= 1e-10 * (alpha * a.c_hat).norm());
        Ok(())
    })
}

pub fn scale_equivariance_l1() -> Result<(), String> {
    let grid = coarse_grid();
    let cfg = WeiszfeldConfig::default();
    run(30, (matrix(2..=4, 2..=4), scale()), |(x, alpha)| {
        let a = approx_l1(&x, &grid, &cfg).unwrap();
        let b = approx_l1(&x.scale(alpha), &grid, &cfg).unwrap();
        prop_assert!((a.z_hat - b.z_hat).norm() <= 1e-9, "{} vs {}", a.z_hat, b.z_hat);
        prop_assert!((b.c_hat - alpha * a.c_hat).norm() <= 1e-6 * (alpha * a.c_hat).norm());
        Ok(())
    })
}

pub fn monotone_refinement() -> Result<(), String> {
    let coarse = GridSpec::new(1.0 / 32.0, TAU / 128.0).unwrap();
    run(60, matrix(1..=5, 2..=5), |x| {
        let a = approx_l2(&x, &coarse).unwrap();
        let b = approx_l2(&x, &coarse.halved()).unwrap();
        prop_assert!(b.objective >= a.objective, "{} < {}", b.objective, a.objective);
        prop_assert!(b.residual <= a.residual + 1e-12 * x.norm_l2());
        Ok(())
    })
}

pub fn eckart_young() -> Result<(), String> {
    let grid = coarse_grid();
    run(60, matrix(1..=6, 1..=6), |x| {
        let (d, w) = x.shape();
        let m = DMatrix::from_fn(d, w, |i, j| x.get(i, j));
        let sigma1 = m.singular_values().max();
        let fro2 = x.norm_l2().powi(2);
        let fit = approx_l2(&x, &grid).unwrap();
        prop_assert!(
            fit.residual.powi(2) >= fro2 - sigma1 * sigma1 - 1e-10 * fro2,
            "residual² {} below bound {}",
            fit.residual.powi(2),
            fro2 - sigma1 * sigma1
        );
        Ok(())
    })
}

pub fn overflow_safe_identity() -> Result<(), String> {
    run(1000, (complex(), complex(), polar(0.1..=1.0), 0..=30i32), |(x, ct, z, m)| {
        let literal = z.norm().powi(m) * (x * z.powi(-m) - ct).norm();
        let safe = (x - ct * z.powi(m)).norm();
        prop_assert!((literal - safe).abs() <= 1e-9 * safe.max(literal).max(f64::MIN_POSITIVE));
        Ok(())
    })?;
    let cfg = WeiszfeldConfig::default();
    run(200, (matrix(3..=3, 3..=3), polar(0.1..=1.0)), |(x, z)| {
        let sol = weighted_median_coeff(&x, z, &cfg);
        let mut literal = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let m = (i + j) as i32;
                literal += z.norm().powi(m) * (x.get(i, j) * z.powi(-m) - sol.c_tilde).norm();
            }
        }
        prop_assert!((literal - sol.objective).abs() <= 1e-9 * literal.max(1e-300));
        Ok(())
    })
}

pub fn weiszfeld_descent() -> Result<(), String> {
    let cfg = WeiszfeldConfig::default();
    run(300, (matrix(1..=5, 1..=5), polar(0.0..=1.0)), |(x, z)| {
        let trace = weiszfeld_trace(&x, z, &cfg);
        prop_assert!(!trace.is_empty());
        for pair in trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-12, "{} -> {}", pair[0], pair[1]);
        }
        Ok(())
    })
}

pub fn toeplitz_diagonals() -> Result<(), String> {
    let grid = coarse_grid();
    run(40, (matrix(1..=5, 1..=5), prop::bool::ANY), |(x, l1)| {
        let flavor = if l1 { NormFlavor::L1 } else { NormFlavor::L2 };
        let fit = toeplitz_approx(&x, flavor, &grid, None).unwrap();
        let t = &fit.approximation;
        prop_assert!(is_toeplitz(t, 1e-10 * t.max_abs().max(f64::MIN_POSITIVE)));
        Ok(())
    })
}

pub fn row_flip_norms() -> Result<(), String> {
    run(300, matrix(1..=8, 1..=8), |a| {
        let j = flip(&a, FlipMode::Rows);
        let sorted = |m: &ComplexMatrix, p: fn(C64) -> f64| -> f64 {
            let mut v: Vec<f64> = m.as_slice().iter().map(|&e| p(e)).collect();
            v.sort_by(f64::total_cmp);
            v.iter().sum()
        };
        prop_assert_eq!(sorted(&a, |e| e.norm()), sorted(&j, |e| e.norm()));
        prop_assert_eq!(sorted(&a, |e| e.norm_sqr()), sorted(&j, |e| e.norm_sqr()));
        Ok(())
    })
}

fn scene(m: usize, theta0: f64, snr_db: f64, seed: u64) -> (ArrayConfig, ComplexMatrix) {
    let ac = ArrayConfig::half_of(m).unwrap();
    let noise = NoiseModel::WhiteGaussian { sigma2: 1.0 };
    let amp = calibrate_amplitude(snr_db, &noise, &mut rng_from_seed(seed));
    let s = acquire(&ac, theta0, amp, Some(&noise), seed.wrapping_add(1)).unwrap();
    (ac, s.x)
}

pub fn mirror_symmetry() -> Result<(), String> {
    let grid = ThetaGrid::new(0.01).unwrap();
    let cfg = WeiszfeldConfig::default();
    run(40, (-85.0..85.0f64, -5.0..15.0f64, any::<u64>()), |(theta0, snr, seed)| {
        let (ac, x) = scene(12, theta0, snr, seed);
        let xc = x.conj();
        let l2 = estimate_doa_l2(&x, &ac, &grid).unwrap().theta_deg;
        let l2c = estimate_doa_l2(&xc, &ac, &grid).unwrap().theta_deg;
        prop_assert!((l2 + l2c).abs() <= grid.step_deg + 1e-9, "L2 {l2} vs {l2c}");
        let l1 = estimate_doa_l1(&x, &ac, &grid, &cfg, L1Search::default()).unwrap().theta_deg;
        let l1c = estimate_doa_l1(&xc, &ac, &grid, &cfg, L1Search::default()).unwrap().theta_deg;
        prop_assert!((l1 + l1c).abs() <= grid.step_deg + 1e-9, "L1 {l1} vs {l1c}");
        Ok(())
    })
}

pub fn baseline_phase_invariance() -> Result<(), String> {
    let grid = ThetaGrid::new(0.01).unwrap();
    run(30, (-85.0..85.0f64, 0.0..20.0f64, 0.0..TAU, any::<u64>()), |(theta0, snr, psi, seed)| {
        let (ac, x) = scene(16, theta0, snr, seed);
        let rot = C64::from_polar(1.0, psi);
        let xr = x.scale(rot);
        let r = average_per_sensor(&x, &ac).unwrap();
        let rr: Vec<C64> = r.iter().map(|v| v * rot).collect();

        let pairs = [
            ("max_energy", max_energy(&r, &ac, &grid), max_energy(&rr, &ac, &grid)),
            ("toeplitz_music", toeplitz_music(&r, &ac, &grid), toeplitz_music(&rr, &ac, &grid)),
            ("hankel_music", hankel_music(&x, &ac, &grid), hankel_music(&xr, &ac, &grid)),
            ("fbss_music", fbss_music(&x, &ac, &grid, None), fbss_music(&xr, &ac, &grid, None)),
        ];
        for (name, a, b) in pairs {
            let (a, b) = (a.unwrap(), b.unwrap());
            prop_assert_eq!(a.grid_index, b.grid_index, "{}", name);
        }
        let a = matrix_pencil(&x, &ac, None).unwrap().theta_deg;
        let b = matrix_pencil(&xr, &ac, None).unwrap().theta_deg;
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "matrix_pencil {a} vs {b}");
        prop_assert!((-90.0..90.0).contains(&a) && a.is_finite());
        let _ = PI;
        Ok(())
    })
}
