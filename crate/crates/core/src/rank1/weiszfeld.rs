//! Inner L1 problem: for a fixed generator `z`, the optimal scale solves a
//! weighted geometric median in the complex plane.
//!
//! The objective `Σ |z|^m |x_k z^{−m} − c̃|` is evaluated in the equivalent
//! form `Σ |x_k − c̃ z^m|` (with `m = i + j`), which stays finite for small
//! `|z|` and covers `z = 0`. The iteration is Weiszfeld's fixed point, i.e.
//! iteratively reweighted least squares with regressors `a_k = z^m`, with a
//! safeguarded Newton step.

use super::unit_phase_power;
use crate::error::{Error, Result};
use crate::matrix::{flip, power_sum_norm, structure_vector, ComplexMatrix, FlipMode, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeiszfeldConfig {
    /// Iteration bound `T`.
    pub max_iters: usize,
    /// Stop once `|Δc̃| ≤ tol · (|c̃| + ε)`.
    pub tol: f64,
    /// Residual floor relative to the data scale: `ε = anchor_epsilon · (1 + max|x|)`.
    pub anchor_epsilon: f64,
    /// Warm-start each grid point from its neighbour along the traversal.
    pub warm_start: bool,
}

impl Default for WeiszfeldConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-10,
            anchor_epsilon: 1e-12,
            warm_start: true,
        }
    }
}

impl WeiszfeldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("Weiszfeld max_iters must be at least 1"));
        }
        if !(self.tol > 0.0) || !(self.anchor_epsilon > 0.0) {
            return Err(Error::invalid("Weiszfeld tol and anchor_epsilon must be positive"));
        }
        Ok(())
    }

    pub fn epsilon_for(&self, max_abs: f64) -> f64 {
        self.anchor_epsilon * (1.0 + max_abs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1InnerSolution {
    /// Minimizer of the weighted median problem.
    pub c_tilde: C64,
    /// Recovered scale, `c_tilde / α(z)`.
    pub c: C64,
    pub objective: f64,
    pub iters_used: usize,
    pub converged: bool,
}

/// `1 / (‖ŝ_D(z)‖₂ ‖ŝ_W(z)‖₂)`.
pub fn alpha(z: C64, d: usize, w: usize) -> f64 {
    let r = z.norm();
    1.0 / (power_sum_norm(r, d) * power_sum_norm(r, w))
}

/// Output of [`irls_median`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct MedianSolve {
    pub c: C64,
    pub objective: f64,
    pub iters: usize,
    pub converged: bool,
}

/// Sums gathered in one pass over the data at the current iterate.
/// `num / den` is the Weiszfeld update, `c·den − num` the gradient and
/// `den`, `s` define the 2×2 Hessian.
struct Sums {
    objective: f64,
    num: C64,
    den: f64,
    s: C64,
    /// largest single contribution to `den`
    peak: f64,
}

/// Weiszfeld iteration with a Newton step taken whenever the Hessian is
/// well conditioned. A Newton step that raises the objective is undone and
/// replaced by the Weiszfeld step from the same point, so accepted iterates
/// never increase the objective. Rejections shrink a trust radius on the
/// Newton step; acceptances grow it.
///
/// `anchor(c)` returns the data point nearest `c` with its objective and
/// whether the subgradient condition holds there. It is consulted after a
/// rejected Newton step, every few iterations while one weight dominates,
/// and at the end unless the iteration converged away from every data point.
fn newton_weiszfeld(
    init: C64,
    max_iters: usize,
    tol: f64,
    eps: f64,
    eval: impl Fn(C64) -> Sums,
    anchor: impl Fn(C64) -> Option<(C64, f64, bool)>,
    mut trace: Option<&mut Vec<f64>>,
) -> MedianSolve {
    let mut c = init;
    let mut best = (f64::INFINITY, c);
    let mut fallback: Option<(f64, C64, f64)> = None;
    let mut iters = 0;
    let mut converged = false;
    let mut anchored = false;
    let mut radius = f64::INFINITY;
    // a dominant weight means the iterates are crawling onto a data point
    let mut crawling = false;
    let mut next_probe = 0;
    while iters < max_iters {
        let sm = eval(c);
        iters += 1;
        if let Some((prev, weisz, len)) = fallback.take() {
            if sm.objective > prev {
                radius = 0.25 * len;
                if let Some((p, value, true)) = anchor(best.1) {
                    if value <= best.0 {
                        best = (value, p);
                        converged = true;
                        anchored = true;
                        break;
                    }
                }
                c = weisz;
                continue;
            }
            radius = (2.0 * radius).max(2.0 * len);
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(sm.objective);
        }
        if sm.objective < best.0 {
            best = (sm.objective, c);
        }
        crawling = 2.0 * sm.peak >= sm.den;
        if crawling && iters >= next_probe {
            next_probe = iters + 4;
            if let Some((p, value, true)) = anchor(best.1) {
                if value <= best.0 {
                    best = (value, p);
                    converged = true;
                    anchored = true;
                    break;
                }
            }
        }
        if sm.den <= 0.0 {
            converged = true;
            break;
        }
        let weisz = sm.num / sm.den;
        let det = sm.den * sm.den - sm.s.norm_sqr();
        let next = if det > 1e-9 * sm.den * sm.den {
            let g = c * sm.den - sm.num;
            let k = 2.0 / det;
            let delta = C64::new(
                k * ((sm.den + sm.s.re) * g.re + sm.s.im * g.im),
                k * (sm.s.im * g.re + (sm.den - sm.s.re) * g.im),
            );
            let len = delta.norm();
            c - if len > radius { delta * (radius / len) } else { delta }
        } else {
            weisz
        };
        if next != weisz {
            fallback = Some((sm.objective, weisz, (next - c).norm()));
        }
        if (next - c).norm() <= tol * (next.norm() + eps) {
            converged = true;
            break;
        }
        c = next;
    }
    if !anchored {
        if !converged {
            let last = eval(c);
            if last.objective < best.0 {
                best = (last.objective, c);
                if let Some(t) = trace {
                    t.push(last.objective);
                }
            }
            crawling = 2.0 * last.peak >= last.den;
        }
        if let Some((p, value, optimal)) = (crawling || !converged).then(|| anchor(best.1)).flatten() {
            if value < best.0 {
                best = (value, p);
            }
            if optimal && value <= best.0 {
                converged = true;
            }
        }
    }
    MedianSolve {
        c: best.1,
        objective: best.0,
        iters,
        converged,
    }
}

/// Data point nearest `c`, its objective, and whether the subgradient
/// condition `|pull| ≤ hold` makes it a minimizer.
fn nearest_anchor(pairs: impl Iterator<Item = (C64, C64)> + Clone, c: C64) -> Option<(C64, f64, bool)> {
    let (k, _) = pairs
        .clone()
        .enumerate()
        .filter(|(_, (_, ak))| ak.norm_sqr() > 0.0)
        .map(|(k, (xk, ak))| (k, (xk - c * ak).norm_sqr() / ak.norm_sqr()))
        .min_by(|p, q| p.1.total_cmp(&q.1))?;
    let (xk, ak) = pairs.clone().nth(k)?;
    let anchor = xk / ak;
    let mut value = 0.0;
    let mut pull = C64::new(0.0, 0.0);
    let mut hold = 0.0;
    for (j, (xj, aj)) in pairs.enumerate() {
        let fit = anchor * aj;
        let r = xj - fit;
        let n = r.norm_sqr().sqrt();
        value += n;
        // points coinciding with the anchor up to rounding share its hold
        let coincident = n <= 4.0 * f64::EPSILON * (xj.norm_sqr() + fit.norm_sqr()).sqrt();
        if j != k && !coincident {
            pull += aj.conj() * r / n;
        } else {
            hold += aj.norm();
        }
    }
    Some((anchor, value, pull.norm() <= hold))
}

/// Minimizes `Σ_k |x_k − c·a_k|` over complex `c`.
///
/// Starts from `init` or from the least-squares solution; returns the best
/// iterate seen. `trace` receives the objective at every accepted iterate.
pub(crate) fn irls_median(
    x: &[C64],
    a: &[C64],
    init: Option<C64>,
    max_iters: usize,
    tol: f64,
    eps: f64,
    mut trace: Option<&mut Vec<f64>>,
) -> MedianSolve {
    debug_assert_eq!(x.len(), a.len());
    let pairs = || x.iter().copied().zip(a.iter().copied());

    let mut support = a.iter().enumerate().filter(|(_, ak)| ak.norm_sqr() > 0.0);
    let first = support.next();
    if let (Some((k, &ak)), None) = (first, support.next()) {
        // a single nonzero regressor fits its point exactly
        let c = x[k] / ak;
        let objective = pairs().map(|(xk, ak)| (xk - c * ak).norm()).sum();
        if let Some(t) = trace.as_deref_mut() {
            t.push(objective);
        }
        return MedianSolve {
            c,
            objective,
            iters: 0,
            converged: true,
        };
    }

    let c0 = init.unwrap_or_else(|| {
        let (num, den) = pairs().fold((C64::new(0.0, 0.0), 0.0), |(n, d), (xk, ak)| {
            (n + xk * ak.conj(), d + ak.norm_sqr())
        });
        if den > 0.0 {
            num / den
        } else {
            C64::new(0.0, 0.0)
        }
    });

    let eval = |c: C64| {
        const L: usize = 4;
        let mut obj = [0.0; L];
        let (mut nr, mut ni) = ([0.0; L], [0.0; L]);
        let mut den = [0.0; L];
        let (mut sr, mut si) = ([0.0; L], [0.0; L]);
        let mut peak = [0.0f64; L];
        let mut term = |l: usize, xk: C64, ak: C64| {
            let (ur, ui) = (c.re * ak.re - c.im * ak.im - xk.re, c.re * ak.im + c.im * ak.re - xk.im);
            let r = (ur * ur + ui * ui).sqrt();
            obj[l] += r;
            let inv = 1.0 / r.max(eps);
            nr[l] += (xk.re * ak.re + xk.im * ak.im) * inv;
            ni[l] += (xk.im * ak.re - xk.re * ak.im) * inv;
            let wk = (ak.re * ak.re + ak.im * ak.im) * inv;
            den[l] += wk;
            peak[l] = peak[l].max(wk);
            // t = conj(a)·u, accumulate t² / r³
            let (tr, ti) = (ak.re * ur + ak.im * ui, ak.re * ui - ak.im * ur);
            let inv3 = inv * inv * inv;
            sr[l] += (tr * tr - ti * ti) * inv3;
            si[l] += 2.0 * tr * ti * inv3;
        };
        let xs = x.chunks_exact(L);
        let as_ = a.chunks_exact(L);
        let (xt, at) = (xs.remainder(), as_.remainder());
        for (xc, ac) in xs.zip(as_) {
            for l in 0..L {
                term(l, xc[l], ac[l]);
            }
        }
        for (l, (&xk, &ak)) in xt.iter().zip(at).enumerate() {
            term(l, xk, ak);
        }
        let sum = |v: [f64; L]| v.iter().sum::<f64>();
        Sums {
            objective: sum(obj),
            num: C64::new(sum(nr), sum(ni)),
            den: sum(den),
            s: C64::new(sum(sr), sum(si)),
            peak: peak.iter().fold(0.0, |m: f64, &v| m.max(v)),
        }
    };
    newton_weiszfeld(c0, max_iters, tol, eps, eval, |c| nearest_anchor(pairs(), c), trace)
}

/// [`irls_median`] with every `|a_k| = 1`, after rotating the data to
/// `y_k = x_k / a_k`: the plain geometric median of `y`.
pub(crate) fn geometric_median(y: &[C64], init: Option<C64>, max_iters: usize, tol: f64, eps: f64) -> MedianSolve {
    if y.len() == 1 {
        return MedianSolve { c: y[0], objective: 0.0, iters: 0, converged: true };
    }
    let c0 = init.unwrap_or_else(|| y.iter().sum::<C64>() / y.len() as f64);
    let eval = |c: C64| {
        const L: usize = 4;
        let mut obj = [0.0; L];
        let (mut nr, mut ni) = ([0.0; L], [0.0; L]);
        let mut den = [0.0; L];
        let (mut sr, mut si) = ([0.0; L], [0.0; L]);
        let mut peak = [0.0f64; L];
        let mut term = |l: usize, v: C64| {
            let (ur, ui) = (c.re - v.re, c.im - v.im);
            let r = (ur * ur + ui * ui).sqrt();
            obj[l] += r;
            let inv = 1.0 / r.max(eps);
            nr[l] += v.re * inv;
            ni[l] += v.im * inv;
            den[l] += inv;
            peak[l] = peak[l].max(inv);
            let inv3 = inv * inv * inv;
            sr[l] += (ur * ur - ui * ui) * inv3;
            si[l] += 2.0 * ur * ui * inv3;
        };
        let chunks = y.chunks_exact(L);
        let tail = chunks.remainder();
        for ch in chunks {
            for l in 0..L {
                term(l, ch[l]);
            }
        }
        for (l, &v) in tail.iter().enumerate() {
            term(l, v);
        }
        let sum = |v: [f64; L]| v.iter().sum::<f64>();
        Sums {
            objective: sum(obj),
            num: C64::new(sum(nr), sum(ni)),
            den: sum(den),
            s: C64::new(sum(sr), sum(si)),
            peak: peak.iter().fold(0.0, |m: f64, &v| m.max(v)),
        }
    };
    let one = C64::new(1.0, 0.0);
    newton_weiszfeld(c0, max_iters, tol, eps, eval, |c| nearest_anchor(y.iter().map(|&v| (v, one)), c), None)
}

/// Exact minimizer of `Σ_k |x_k − c·a_k|` over real `c` for real data:
/// the `|a_k|`-weighted median of the ratios `x_k / a_k`.
pub(crate) fn weighted_median_real(x: &[f64], a: &[f64]) -> (f64, f64) {
    let mut pts: Vec<(f64, f64)> = x
        .iter()
        .zip(a)
        .filter(|(_, &ak)| ak != 0.0)
        .map(|(&xk, &ak)| (xk / ak, ak.abs()))
        .collect();
    let c = if pts.is_empty() {
        0.0
    } else {
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        let total: f64 = pts.iter().map(|p| p.1).sum();
        let mut acc = 0.0;
        let mut pick = pts[pts.len() - 1].0;
        for &(y, wgt) in &pts {
            acc += wgt;
            if acc >= 0.5 * total {
                pick = y;
                break;
            }
        }
        pick
    };
    let objective = x.iter().zip(a).map(|(&xk, &ak)| (xk - c * ak).abs()).sum();
    (c, objective)
}

/// Entries of `X` with their regressors `z^{i+j}`.
pub(crate) fn regressors(x: &ComplexMatrix, z: C64) -> Vec<C64> {
    let (d, w) = x.shape();
    let mut powers = Vec::with_capacity(d + w - 1);
    let mut p = C64::new(1.0, 0.0);
    for _ in 0..d + w - 1 {
        powers.push(p);
        p *= z;
    }
    let mut a = Vec::with_capacity(d * w);
    for i in 0..d {
        for j in 0..w {
            a.push(powers[i + j]);
        }
    }
    a
}

/// Solves the inner problem with Weiszfeld iterations regardless of whether
/// the data are real. `|z| ≤ 1` only.
pub fn weiszfeld_coeff(
    x: &ComplexMatrix,
    z: C64,
    cfg: &WeiszfeldConfig,
    init: Option<C64>,
) -> L1InnerSolution {
    let (d, w) = x.shape();
    let a = regressors(x, z);
    let eps = cfg.epsilon_for(x.max_abs());
    let s = irls_median(x.as_slice(), &a, init, cfg.max_iters, cfg.tol, eps, None);
    L1InnerSolution {
        c_tilde: s.c,
        c: s.c / alpha(z, d, w),
        objective: s.objective,
        iters_used: s.iters,
        converged: s.converged,
    }
}

/// Objective of [`weiszfeld_coeff`] at every accepted iterate, starting
/// from the least-squares initialization. `|z| ≤ 1` only.
pub fn weiszfeld_trace(x: &ComplexMatrix, z: C64, cfg: &WeiszfeldConfig) -> Vec<f64> {
    let a = regressors(x, z);
    let eps = cfg.epsilon_for(x.max_abs());
    let mut trace = Vec::new();
    irls_median(x.as_slice(), &a, None, cfg.max_iters, cfg.tol, eps, Some(&mut trace));
    trace
}

/// Weighted geometric median coefficient at a fixed generator `z`.
///
/// Real data at a real generator take the exact sorted weighted median.
/// For `|z| > 1` the problem is solved on `J_D X J_W` at `1/z` and mapped
/// back, so no power of `z` above one is ever formed.
pub fn weighted_median_coeff(x: &ComplexMatrix, z: C64, cfg: &WeiszfeldConfig) -> L1InnerSolution {
    let (d, w) = x.shape();
    if z.norm() > 1.0 {
        let zr = z.inv();
        let inner = weighted_median_coeff(&flip(x, FlipMode::Both), zr, cfg);
        // J s_D(ζ) = e^{j(D−1) arg ζ} s_D(1/ζ)
        let c = inner.c * unit_phase_power(zr, d + w - 2);
        return L1InnerSolution {
            c_tilde: c * alpha(z, d, w),
            c,
            ..inner
        };
    }
    if x.is_real() && z.im == 0.0 {
        let xr: Vec<f64> = x.as_slice().iter().map(|v| v.re).collect();
        let ar: Vec<f64> = regressors(x, z).iter().map(|v| v.re).collect();
        let (c, objective) = weighted_median_real(&xr, &ar);
        let c_tilde = C64::new(c, 0.0);
        return L1InnerSolution {
            c_tilde,
            c: c_tilde / alpha(z, d, w),
            objective,
            iters_used: 0,
            converged: true,
        };
    }
    weiszfeld_coeff(x, z, cfg, None)
}

/// `‖X − ĉ_{L1}(z) s_D(z) s_W(z)ᵀ‖₁`.
pub fn objective_l1(x: &ComplexMatrix, z: C64, cfg: &WeiszfeldConfig) -> f64 {
    let (d, w) = x.shape();
    let sol = weighted_median_coeff(x, z, cfg);
    let sd = structure_vector(z, d);
    let sw = structure_vector(z, w);
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..w {
            total += (x.get(i, j) - sol.c * sd.as_slice()[i] * sw.as_slice()[j]).norm();
        }
    }
    total
}
