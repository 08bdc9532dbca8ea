//! Element-wise L1 rank-1 Hankel approximation.
//!
//! No closed form exists for the scale, so every lattice point solves a
//! weighted geometric median. The complementary problem in `1/z` is searched
//! as the same problem on `J_D X J_W`, which keeps every power of `z` at
//! modulus ≤ 1.

use super::grid::{refine_polar, search, GridSpec, RingOutcome, SearchOutcome};
use super::weiszfeld::{irls_median, weighted_median_coeff, weighted_median_real, WeiszfeldConfig};
use super::{
    check_nonzero, needs_preflip, rank1_hankel, reciprocal, Branch, NormFlavor, Rank1HankelFit,
    SearchDiagnostics, Structure,
};
use crate::error::{Error, Result};
use crate::matrix::{flip, ComplexMatrix, FlipMode, C64};

pub use super::weiszfeld::objective_l1;

/// Data laid out for repeated inner solves over the lattice.
struct InnerProblem {
    values: Vec<C64>,
    real_values: Option<Vec<f64>>,
    /// anti-diagonal index `i + j` of each entry
    power: Vec<usize>,
    n_powers: usize,
    eps: f64,
}

impl InnerProblem {
    fn new(x: &ComplexMatrix, cfg: &WeiszfeldConfig, real_path: bool) -> Self {
        let (d, w) = x.shape();
        let mut power = Vec::with_capacity(d * w);
        for i in 0..d {
            for j in 0..w {
                power.push(i + j);
            }
        }
        Self {
            values: x.as_slice().to_vec(),
            real_values: real_path.then(|| x.as_slice().iter().map(|v| v.re).collect()),
            power,
            n_powers: d + w - 1,
            eps: cfg.epsilon_for(x.max_abs()),
        }
    }

    fn regressors(&self, z: C64, buf: &mut Vec<C64>) {
        let mut powers = Vec::with_capacity(self.n_powers);
        let mut p = C64::new(1.0, 0.0);
        for _ in 0..self.n_powers {
            powers.push(p);
            p *= z;
        }
        buf.clear();
        buf.extend(self.power.iter().map(|&m| powers[m]));
    }

    /// Returns `(objective, c̃, converged)`.
    fn solve(&self, z: C64, init: Option<C64>, cfg: &WeiszfeldConfig, buf: &mut Vec<C64>) -> (f64, C64, bool) {
        self.regressors(z, buf);
        if let Some(xr) = &self.real_values {
            let ar: Vec<f64> = buf.iter().map(|v| v.re).collect();
            let (c, obj) = weighted_median_real(xr, &ar);
            return (obj, C64::new(c, 0.0), true);
        }
        let s = irls_median(&self.values, buf, init, cfg.max_iters, cfg.tol, self.eps, None);
        (s.objective, s.c, s.converged)
    }
}

fn search_min(
    problem: &InnerProblem,
    grid: &GridSpec,
    cfg: &WeiszfeldConfig,
    include_origin: bool,
) -> SearchOutcome {
    search(grid, include_origin, false, |ring| {
        let mut out = RingOutcome::new();
        let mut buf = Vec::new();
        let mut prev: Option<C64> = None;
        for j in 0..ring.n_phi {
            let z = ring.z(j, grid);
            let init = if cfg.warm_start { prev } else { None };
            let (obj, c, converged) = problem.solve(z, init, cfg, &mut buf);
            if !converged {
                out.nonconverged += 1;
            }
            prev = Some(c);
            out.offer(false, obj, j, c);
        }
        out
    })
}

/// Optimal rank-1 Hankel approximation in the element-wise L1 norm.
pub fn approx_l1(x: &ComplexMatrix, grid: &GridSpec, cfg: &WeiszfeldConfig) -> Result<Rank1HankelFit> {
    approx_l1_impl(x, grid, cfg)
}

/// [`approx_l1`] with `z ∈ [−1, 1]`. Real data then use the exact sorted
/// weighted median at every lattice point.
pub fn approx_l1_real(x: &ComplexMatrix, grid: &GridSpec, cfg: &WeiszfeldConfig) -> Result<Rank1HankelFit> {
    approx_l1_impl(x, &grid.with_restrict_real(true), cfg)
}

fn approx_l1_impl(x: &ComplexMatrix, grid: &GridSpec, cfg: &WeiszfeldConfig) -> Result<Rank1HankelFit> {
    grid.validate()?;
    cfg.validate()?;
    check_nonzero(x)?;
    let (d, w) = x.shape();

    let preflipped = needs_preflip(x);
    let work = if preflipped {
        flip(x, FlipMode::Both)
    } else {
        x.clone()
    };
    let work_flipped = flip(&work, FlipMode::Both);
    let real_path = grid.restrict_real && x.is_real();
    let prob_c = InnerProblem::new(&work, cfg, real_path);
    let prob_d = InnerProblem::new(&work_flipped, cfg, real_path);

    let c_search = search_min(&prob_c, grid, cfg, true);
    let d_search = search_min(&prob_d, grid, cfg, false);
    let wc = c_search.winner.expect("lattice always contains the origin");

    let (branch, mut z_branch, mut objective, prob) = match &d_search.winner {
        Some(wd) if wd.value < wc.value => (Branch::Flipped, wd.z, wd.value, &prob_d),
        _ => (Branch::Direct, wc.z, wc.value, &prob_c),
    };

    let mut refined = false;
    if grid.refine {
        let rho0 = z_branch.norm();
        let phi0 = if rho0 == 0.0 {
            0.0
        } else {
            z_branch.arg().rem_euclid(std::f64::consts::TAU)
        };
        let floor = match branch {
            Branch::Direct => 0.0,
            Branch::Flipped => 1e-3 * grid.delta_rho,
        };
        let score = |z: C64| {
            let mut buf = Vec::new();
            -prob.solve(z, None, cfg, &mut buf).0
        };
        if let Some((z, v)) = refine_polar(grid, rho0, phi0, -objective, floor, score) {
            z_branch = z;
            objective = -v;
            refined = true;
        }
    }

    let z_work = match branch {
        Branch::Direct => z_branch,
        Branch::Flipped => reciprocal(z_branch)?,
    };
    let z_hat = if preflipped { reciprocal(z_work)? } else { z_work };

    let inner = weighted_median_coeff(x, z_hat, cfg);
    let c_hat = inner.c;
    if c_hat.norm() == 0.0 {
        return Err(Error::DegenerateInput {
            reason: "optimal coefficient vanishes at the winning generator".into(),
            z: Some(z_hat),
        });
    }
    let approximation = rank1_hankel(c_hat, z_hat, d, w);
    let residual = x.sub(&approximation).norm_l1();

    Ok(Rank1HankelFit {
        z_hat,
        c_hat,
        approximation,
        residual,
        norm: NormFlavor::L1,
        branch,
        structure: Structure::Hankel,
        objective,
        preflipped,
        refined,
        search: SearchDiagnostics {
            points_evaluated: c_search.evaluated + d_search.evaluated,
            warm_start: cfg.warm_start && !real_path,
            nonconverged: c_search.nonconverged + d_search.nonconverged,
        },
    })
}
