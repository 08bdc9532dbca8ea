use std::f64::consts::PI;

use rayon::prelude::*;

use super::polar_point;
use crate::error::{Error, Result};
use crate::matrix::C64;

/// Polar search lattice `z = ρ e^{jφ}` over the closed unit disc.
///
/// Radii are `k·Δρ` for `k = 0..=⌈1/Δρ⌉` (clamped to 1) and angles are
/// `k·Δφ` below `2π`, so halving both steps keeps every coarse point.
/// Traversal is ρ-major, then φ; ties keep the earliest point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub delta_rho: f64,
    pub delta_phi: f64,
    /// Include the `ρ = 1` circle.
    pub include_boundary: bool,
    /// Only `φ ∈ {0, π}`, i.e. `z ∈ [−1, 1]`.
    pub restrict_real: bool,
    /// One golden-section pass in ρ then φ around the grid winner.
    pub refine: bool,
}

impl GridSpec {
    pub fn new(delta_rho: f64, delta_phi: f64) -> Result<Self> {
        let g = Self {
            delta_rho,
            delta_phi,
            include_boundary: true,
            restrict_real: false,
            refine: false,
        };
        g.validate()?;
        Ok(g)
    }

    /// `Δρ = 1/512`, `Δφ = 2π/2048`.
    pub fn l2_default() -> Self {
        Self::new(1.0 / 512.0, 2.0 * PI / 2048.0).unwrap()
    }

    /// `Δρ = 1/256`, `Δφ = 2π/1024`.
    pub fn l1_default() -> Self {
        Self::new(1.0 / 256.0, 2.0 * PI / 1024.0).unwrap()
    }

    pub fn with_restrict_real(mut self, on: bool) -> Self {
        self.restrict_real = on;
        self
    }

    pub fn with_refine(mut self, on: bool) -> Self {
        self.refine = on;
        self
    }

    pub fn with_boundary(mut self, on: bool) -> Self {
        self.include_boundary = on;
        self
    }

    /// Same lattice at half the step in both coordinates.
    pub fn halved(&self) -> Self {
        Self {
            delta_rho: self.delta_rho / 2.0,
            delta_phi: self.delta_phi / 2.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_rho > 0.0 && self.delta_rho <= 1.0) {
            return Err(Error::invalid(format!(
                "delta_rho must lie in (0, 1], got {}",
                self.delta_rho
            )));
        }
        if !(self.delta_phi > 0.0 && self.delta_phi <= 2.0 * PI) {
            return Err(Error::invalid(format!(
                "delta_phi must lie in (0, 2π], got {}",
                self.delta_phi
            )));
        }
        Ok(())
    }

    fn phi_count(&self) -> usize {
        if self.restrict_real {
            2
        } else {
            let n = (2.0 * PI / self.delta_phi - 1e-9).ceil() as usize;
            // drop a last angle that lands on 2π through rounding
            if n > 1 && (n - 1) as f64 * self.delta_phi >= 2.0 * PI {
                n - 1
            } else {
                n.max(1)
            }
        }
    }

    pub(crate) fn phi(&self, j: usize) -> f64 {
        if self.restrict_real {
            if j == 0 {
                0.0
            } else {
                PI
            }
        } else {
            j as f64 * self.delta_phi
        }
    }

    pub(crate) fn rings(&self, include_origin: bool) -> Vec<Ring> {
        let k_max = (1.0 / self.delta_rho - 1e-9).ceil() as usize;
        let n_phi = self.phi_count();
        let mut rings = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let rho = (k as f64 * self.delta_rho).min(1.0);
            if rho == 0.0 && !include_origin {
                continue;
            }
            if rho >= 1.0 && !self.include_boundary {
                continue;
            }
            let n = if rho == 0.0 { 1 } else { n_phi };
            rings.push(Ring {
                rho,
                n_phi: n,
            });
        }
        rings
    }

    /// Number of lattice points visited by one search.
    pub fn point_count(&self, include_origin: bool) -> usize {
        self.rings(include_origin).iter().map(|r| r.n_phi).sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Ring {
    pub rho: f64,
    pub n_phi: usize,
}

impl Ring {
    pub fn z(&self, j: usize, grid: &GridSpec) -> C64 {
        polar_point(self.rho, grid.phi(j), grid.restrict_real)
    }
}

/// Best point within a ring, plus bookkeeping.
pub(crate) struct RingOutcome<T> {
    pub best: Option<(f64, usize, T)>,
    pub evaluated: usize,
    pub nonconverged: usize,
}

impl<T> RingOutcome<T> {
    pub fn new() -> Self {
        Self {
            best: None,
            evaluated: 0,
            nonconverged: 0,
        }
    }

    /// Keeps the first of equal values.
    pub fn offer(&mut self, maximize: bool, value: f64, j: usize, payload: T) {
        self.evaluated += 1;
        if value.is_nan() {
            return;
        }
        let better = match &self.best {
            None => true,
            Some((cur, _, _)) => {
                if maximize {
                    value > *cur
                } else {
                    value < *cur
                }
            }
        };
        if better {
            self.best = Some((value, j, payload));
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Winner {
    pub value: f64,
    pub z: C64,
}

pub(crate) struct SearchOutcome {
    pub winner: Option<Winner>,
    pub evaluated: usize,
    pub nonconverged: usize,
}

/// Evaluates rings in parallel and reduces in traversal order, so the
/// result is identical to a sequential sweep.
pub(crate) fn search<T, F>(
    grid: &GridSpec,
    include_origin: bool,
    maximize: bool,
    eval_ring: F,
) -> SearchOutcome
where
    T: Send,
    F: Fn(&Ring) -> RingOutcome<T> + Sync + Send,
{
    let rings = grid.rings(include_origin);
    let outcomes: Vec<(Ring, RingOutcome<T>)> =
        rings.par_iter().map(|r| (*r, eval_ring(r))).collect();

    let mut winner: Option<Winner> = None;
    let mut evaluated = 0;
    let mut nonconverged = 0;
    for (ring, out) in outcomes {
        evaluated += out.evaluated;
        nonconverged += out.nonconverged;
        if let Some((value, j, _)) = out.best {
            let better = match &winner {
                None => true,
                Some(w) => {
                    if maximize {
                        value > w.value
                    } else {
                        value < w.value
                    }
                }
            };
            if better {
                winner = Some(Winner {
                    value,
                    z: ring.z(j, grid),
                });
            }
        }
    }
    SearchOutcome {
        winner,
        evaluated,
        nonconverged,
    }
}

/// Golden-section maximization of `f` on `[lo, hi]`.
pub(crate) fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

const REFINE_ITERS: usize = 48;

/// One golden-section pass in ρ then φ around a grid winner, maximizing
/// `score`. Returns the refined point only if it beats the grid value.
/// `rho_floor` keeps the flipped branch away from `z = 0`.
pub(crate) fn refine_polar(
    grid: &GridSpec,
    rho0: f64,
    phi0: f64,
    value0: f64,
    rho_floor: f64,
    score: impl Fn(C64) -> f64,
) -> Option<(C64, f64)> {
    let rho_max = if grid.include_boundary {
        1.0
    } else {
        1.0 - 1e-6 * grid.delta_rho
    };
    let (z, v) = if grid.restrict_real {
        let t0 = if phi0 < PI / 2.0 { rho0 } else { -rho0 };
        let lo = (t0 - grid.delta_rho).max(-rho_max);
        let hi = (t0 + grid.delta_rho).min(rho_max);
        let (t, v) = golden_section_max(|t| score(C64::new(t, 0.0)), lo, hi, REFINE_ITERS);
        if t.abs() < rho_floor {
            return None;
        }
        (C64::new(t, 0.0), v)
    } else {
        let lo = (rho0 - grid.delta_rho).max(rho_floor);
        let hi = (rho0 + grid.delta_rho).min(rho_max);
        let (rho, _) = golden_section_max(|r| score(C64::from_polar(r, phi0)), lo, hi, REFINE_ITERS);
        let (phi, v) = golden_section_max(
            |p| score(C64::from_polar(rho, p)),
            phi0 - grid.delta_phi,
            phi0 + grid.delta_phi,
            REFINE_ITERS,
        );
        (C64::from_polar(rho, phi), v)
    };
    (v > value0).then_some((z, v))
}
