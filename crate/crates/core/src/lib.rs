//! Optimal rank-1 Hankel and Toeplitz approximation of complex matrices
//! under element-wise L2 and L1 error, direction-of-arrival estimators built
//! on it, and a Monte Carlo benchmark against classical baselines.
//!
//! ```
//! use rank1_hankel::matrix::{ComplexMatrix, C64};
//! use rank1_hankel::rank1::{approx_l2, rank1_hankel, GridSpec};
//!
//! let x = rank1_hankel(C64::new(2.0, 0.0), C64::new(0.5, 0.0), 2, 3);
//! let fit = approx_l2(&x, &GridSpec::l2_default()).unwrap();
//! assert!((fit.z_hat - C64::new(0.5, 0.0)).norm() < 1e-2);
//! ```

pub mod baselines;
pub mod bench;
pub mod doa;
pub mod error;
pub mod io;
pub mod matrix;
pub mod noise;
pub mod rank1;
pub mod selftest;
pub mod toeplitz;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, C64};
