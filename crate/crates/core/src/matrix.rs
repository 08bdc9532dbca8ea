//! Dense complex matrices, the Hankel operator, exchange-matrix flips and
//! the normalized polynomial structure vector.
//!
//! Storage is row-major everywhere in the crate: entry `(i, j)` of a
//! `rows × cols` matrix lives at `data[i * cols + j]`.

use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// `| |z| - 1 |` below this uses the unit-circle branch of the power-sum norm.
pub const UNIT_CIRCLE_BRANCH_TOL: f64 = 1e-9;

/// Dense `rows × cols` complex matrix with finite entries, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a generator.
    ///
    /// Panics if a dimension is zero or the generator yields a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data).expect("from_fn: invalid matrix")
    }

    pub fn try_from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> C64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| C64::new(0.0, 0.0))
    }

    /// Row-major real entries.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("ragged rows"));
        }
        Self::new(r, c, rows.concat())
    }

    /// Stacks equal-length columns side by side.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|col| col.len() != r) {
            return Err(Error::invalid("ragged columns"));
        }
        Self::try_from_fn(r, c, |i, j| columns[j][i])
    }

    /// Outer product `scale · u vᵀ` (no conjugation).
    pub fn outer(scale: C64, u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| scale * u[i] * v[j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Column-stacking vectorization, `vec(X)`.
    pub fn vec_columns(&self) -> Vec<C64> {
        (0..self.cols)
            .flat_map(|j| (0..self.rows).map(move |i| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| f(self.get(i, j)))
    }

    pub fn scale(&self, alpha: C64) -> Self {
        self.map(|v| v * alpha)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Entry-wise `self - other`. Panics on shape mismatch.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j))
    }

    /// Element-wise L1 norm, `Σ |a_ij|` with the complex modulus.
    pub fn norm_l1(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).sum()
    }

    /// Frobenius norm.
    pub fn norm_l2(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|v| v.im == 0.0)
    }

    /// Sums along anti-diagonals: `h[m] = Σ_{i+j=m} x_ij`, `m = 0..rows+cols-1`.
    pub fn anti_diagonal_sums(&self) -> Vec<C64> {
        let mut h = vec![C64::new(0.0, 0.0); self.rows + self.cols - 1];
        for i in 0..self.rows {
            for j in 0..self.cols {
                h[i + j] += self.get(i, j);
            }
        }
        h
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

/// Parameter vector of a `D × (M−D+1)` Hankel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelParams {
    h: Vec<C64>,
    rows: usize,
}

impl HankelParams {
    pub fn new(h: Vec<C64>, rows: usize) -> Result<Self> {
        if rows == 0 || h.len() < rows {
            return Err(Error::invalid(format!(
                "Hankel parameters need M >= D >= 1, got M = {}, D = {rows}",
                h.len()
            )));
        }
        Ok(Self { h, rows })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.h.len() - self.rows + 1
    }

    pub fn values(&self) -> &[C64] {
        &self.h
    }
}

/// `H[i][j] = h[i + j]` (0-based).
pub fn hankel_from_vector(p: &HankelParams) -> ComplexMatrix {
    ComplexMatrix::from_fn(p.rows(), p.cols(), |i, j| p.h[i + j])
}

/// True iff every anti-diagonal has all pairwise entry distances `<= tol`.
pub fn hankel_project_check(x: &ComplexMatrix, tol: f64) -> bool {
    let (rows, cols) = x.shape();
    for m in 0..rows + cols - 1 {
        let i_lo = m.saturating_sub(cols - 1);
        let i_hi = m.min(rows - 1);
        for a in i_lo..=i_hi {
            for b in a + 1..=i_hi {
                if (x.get(a, m - a) - x.get(b, m - b)).norm() > tol {
                    return false;
                }
            }
        }
    }
    true
}

/// `‖[1, r, …, r^{D−1}]‖₂` for a modulus `r = |z|`.
pub fn power_sum_norm(r: f64, d: usize) -> f64 {
    let n = d as f64;
    if (r - 1.0).abs() < UNIT_CIRCLE_BRANCH_TOL {
        n.sqrt()
    } else if r == 0.0 {
        1.0
    } else if r < 1.0 {
        // (1 - r^{2D}) / (1 - r^2), both factors through expm1 to keep digits near r = 1
        let ln_r = r.ln();
        ((2.0 * n * ln_r).exp_m1() / (2.0 * ln_r).exp_m1()).sqrt()
    } else {
        r.powi(d as i32 - 1) * power_sum_norm(1.0 / r, d)
    }
}

/// Unit-norm geometric progression `s_D(z) = [1, z, …, z^{D−1}]ᵀ / ‖·‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureVector {
    z: C64,
    v: Vec<C64>,
}

impl StructureVector {
    pub fn generator(&self) -> C64 {
        self.z
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.v
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.v
    }
}

/// Builds `s_D(z)`. For `|z| > 1` the vector is formed from the reflected
/// generator `1/z` so that large powers never overflow.
///
/// Panics if `d == 0`.
pub fn structure_vector(z: C64, d: usize) -> StructureVector {
    assert!(d >= 1, "structure vector length must be positive");
    let r = z.norm();
    if r > 1.0 + UNIT_CIRCLE_BRANCH_TOL {
        // s_D(z) = e^{j(D-1) arg z} · J s_D(1/z)
        let inner = structure_vector(z.inv(), d);
        let phase = unit_phase_power(z, d - 1);
        let mut v: Vec<C64> = inner.v.iter().rev().map(|&s| phase * s).collect();
        v[0] = C64::new(v[0].norm(), 0.0);
        return StructureVector { z, v };
    }
    let norm = power_sum_norm(r, d);
    let mut v = Vec::with_capacity(d);
    let mut p = C64::new(1.0, 0.0);
    for _ in 0..d {
        v.push(p / norm);
        p *= z;
    }
    StructureVector { z, v }
}

/// Phase `e^{j k arg z}` with exact signs for real `z`.
pub(crate) fn unit_phase_power(z: C64, k: usize) -> C64 {
    if z.im == 0.0 {
        if z.re < 0.0 && k % 2 == 1 {
            C64::new(-1.0, 0.0)
        } else {
            C64::new(1.0, 0.0)
        }
    } else {
        C64::from_polar(1.0, k as f64 * z.arg())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipMode {
    /// `J_D X`
    Rows,
    /// `J_D X J_W`
    Both,
}

pub fn flip(x: &ComplexMatrix, mode: FlipMode) -> ComplexMatrix {
    let (rows, cols) = x.shape();
    match mode {
        FlipMode::Rows => ComplexMatrix::from_fn(rows, cols, |i, j| x.get(rows - 1 - i, j)),
        FlipMode::Both => {
            ComplexMatrix::from_fn(rows, cols, |i, j| x.get(rows - 1 - i, cols - 1 - j))
        }
    }
}
