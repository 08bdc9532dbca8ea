#![allow(dead_code)]

use std::sync::{Mutex, MutexGuard};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rank1_hankel::{ComplexMatrix, C64};

pub mod props;

static TIMED: Mutex<()> = Mutex::new(());

/// Serializes wall-clock measurements across tests of one binary.
pub fn timed_section() -> MutexGuard<'static, ()> {
    TIMED.lock().unwrap_or_else(|e| e.into_inner())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize, w: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, w, |_, _| random_c64(rng))
}

/// `[1, z, …, z^{n−1}] / ‖·‖₂` built directly from powers.
pub fn unit_powers(z: C64, n: usize) -> Vec<C64> {
    let p: Vec<C64> = (0..n).map(|k| z.powu(k as u32)).collect();
    let norm = p.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    p.into_iter().map(|v| v / norm).collect()
}

/// `c · s_D(z) s_W(z)ᵀ` from explicit powers.
pub fn hankel_rank1(cc: C64, z: C64, d: usize, w: usize) -> ComplexMatrix {
    let sd = unit_powers(z, d);
    let sw = unit_powers(z, w);
    ComplexMatrix::from_fn(d, w, |i, j| cc * sd[i] * sw[j])
}

/// `|s_D(z)ᴴ X s_W(z)*|` by direct double summation.
pub fn l2_objective(x: &ComplexMatrix, z: C64) -> f64 {
    let (d, w) = x.shape();
    let sd = unit_powers(z, d);
    let sw = unit_powers(z, w);
    let mut acc = c(0.0, 0.0);
    for i in 0..d {
        for j in 0..w {
            acc += sd[i].conj() * x.get(i, j) * sw[j].conj();
        }
    }
    acc.norm()
}

/// `J_D X J_W`.
pub fn flip_both(x: &ComplexMatrix) -> ComplexMatrix {
    let (d, w) = x.shape();
    ComplexMatrix::from_fn(d, w, |i, j| x.get(d - 1 - i, w - 1 - j))
}

/// `J_D X`.
pub fn flip_rows(x: &ComplexMatrix) -> ComplexMatrix {
    let (d, w) = x.shape();
    ComplexMatrix::from_fn(d, w, |i, j| x.get(d - 1 - i, j))
}

/// Minimizes a convex function of one complex variable by nested grid
/// scans: a `first × first` grid over the box `[lo, hi]`, then `41 × 41`
/// grids shrinking around the incumbent until the spacing drops below
/// `resolution`.
pub fn complex_plane_scan(
    f: impl Fn(C64) -> f64,
    lo: C64,
    hi: C64,
    first: usize,
    resolution: f64,
) -> (C64, f64) {
    let mut best = (lo, f64::INFINITY);
    let (mut sx, mut sy) = ((hi.re - lo.re) / (first - 1) as f64, (hi.im - lo.im) / (first - 1) as f64);
    for p in 0..first {
        for q in 0..first {
            let z = c(lo.re + p as f64 * sx, lo.im + q as f64 * sy);
            let v = f(z);
            if v < best.1 {
                best = (z, v);
            }
        }
    }
    while sx.max(sy) > resolution {
        let (hx, hy) = (2.0 * sx, 2.0 * sy);
        sx = hx / 20.0;
        sy = hy / 20.0;
        let centre = best.0;
        for p in 0..=40 {
            for q in 0..=40 {
                let z = centre + c(-hx + p as f64 * sx, -hy + q as f64 * sy);
                let v = f(z);
                if v < best.1 {
                    best = (z, v);
                }
            }
        }
    }
    best
}

/// Prints one criterion line and returns whether it passed.
pub fn report(id: u32, passed: bool, detail: impl AsRef<str>) -> bool {
    println!(
        "{} criterion {id}: {}",
        if passed { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    passed
}
