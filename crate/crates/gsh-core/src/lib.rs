//! Generalized simplex gradients and Hessians from function evaluations.
//!
//! This crate approximates gradients and Hessians of a black-box scalar
//! function using nothing but function values at structured sample points.
//! The estimates are assembled with Moore–Penrose pseudoinverses of the
//! direction matrices that generate the sample set, so they stay well-defined
//! for any number of sample directions: square, tall, wide or rank-deficient.
//!
//! The main entry points are:
//!
//! - [`gradient::gsg`] — the generalized simplex gradient,
//! - [`hessian::gsh`] — the generalized simplex Hessian (order-1 accurate),
//! - [`hessian::gcsh`] — its centered variant (order-2 accurate),
//! - [`poised`] — minimal poised sample sets and quadratic interpolation,
//! - [`analysis`] — a test-function catalog, a memoizing evaluation oracle,
//!   and convergence studies that measure empirical accuracy orders against
//!   the theoretical error bounds.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod gradient;
pub mod hessian;
pub mod io;
pub mod linalg;
pub mod poised;
pub mod verify;

pub use error::{Error, Result};

/// Dense real matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real column vector used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;

/// Numerical tolerances threaded through a computation.
///
/// `svd_rtol` overrides the per-matrix default rank cutoff
/// (`eps * max(rows, cols)`); `dedup_tol` controls when two sample points are
/// considered the same (see [`geometry::PointSet`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub svd_rtol: Option<f64>,
    pub dedup_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            svd_rtol: None,
            dedup_tol: geometry::DEFAULT_DEDUP_TOL,
        }
    }
}

impl Tolerances {
    /// Rank cutoff for `a`: the override if set, otherwise the scale-aware default.
    pub fn rank_rtol(&self, a: &Matrix) -> f64 {
        self.svd_rtol.unwrap_or_else(|| linalg::default_rtol(a))
    }
}
