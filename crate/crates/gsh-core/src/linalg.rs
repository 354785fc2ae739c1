//! Dense small-matrix primitives: Moore–Penrose pseudoinverse, numerical
//! rank, spectral and Frobenius norms.
//!
//! Everything here targets desk-scale matrices (tens of rows/columns at
//! most), so all decompositions go through a full SVD: exactness over speed.

use crate::{Error, Matrix, Result};

/// Default rank cutoff for `a`: `eps * max(rows, cols)`, relative to the
/// largest singular value.
pub fn default_rtol(a: &Matrix) -> f64 {
    f64::EPSILON * a.nrows().max(a.ncols()) as f64
}

fn ensure_finite(a: &Matrix) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// One-sided Jacobi SVD of a tall-or-square matrix: returns `(u, sigma, v)`
/// with `A = U diag(sigma) V'`, `U` of the same shape as `A` (zero columns
/// where the singular value vanishes) and `V` square orthogonal.
///
/// Jacobi is slower than bidiagonalization but keeps full accuracy on
/// rank-deficient inputs, which this crate produces on purpose all the time.
fn jacobi_svd_tall(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (n, m) = (a.nrows(), a.ncols());
    debug_assert!(n >= m);
    let mut work = a.clone();
    let mut v = Matrix::identity(m, m);

    let tol = 1e-15_f64;
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let col_p = work.column(p);
                let col_q = work.column(q);
                let alpha = col_p.norm_squared();
                let beta = col_q.norm_squared();
                let gamma = col_p.dot(&col_q);
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let wp = work[(i, p)];
                    let wq = work[(i, q)];
                    work[(i, p)] = c * wp - s * wq;
                    work[(i, q)] = s * wp + c * wq;
                }
                for i in 0..m {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma = vec![0.0; m];
    let mut u = Matrix::zeros(n, m);
    for j in 0..m {
        let norm = work.column(j).norm();
        sigma[j] = norm;
        if norm > 0.0 {
            let col = work.column(j) / norm;
            u.column_mut(j).copy_from(&col);
        }
    }
    (u, sigma, v)
}

/// Full SVD `A = U diag(sigma) V'` as `(u, sigma, v_t)`, decomposing the tall
/// orientation and swapping factors for wide inputs.
fn svd_parts(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    if a.ncols() > a.nrows() {
        // A' = U Σ V'  =>  A = V Σ U'.
        let (u, sigma, v) = jacobi_svd_tall(&a.transpose());
        (v, sigma, u.transpose())
    } else {
        let (u, sigma, v) = jacobi_svd_tall(a);
        (u, sigma, v.transpose())
    }
}

/// Singular values of `a` (unordered).
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let tall = if a.ncols() > a.nrows() {
        a.transpose()
    } else {
        a.clone()
    };
    jacobi_svd_tall(&tall).1
}

/// Moore–Penrose pseudoinverse of `a` with the default rank cutoff.
///
/// The result `P` satisfies the four Penrose conditions: `APA = A`,
/// `PAP = P`, and both `AP` and `PA` symmetric.
pub fn pseudoinverse(a: &Matrix) -> Result<Matrix> {
    pseudoinverse_with_rtol(a, default_rtol(a))
}

/// Pseudoinverse with an explicit relative cutoff: singular values at or
/// below `rtol * sigma_max` are treated as zero.
pub fn pseudoinverse_with_rtol(a: &Matrix, rtol: f64) -> Result<Matrix> {
    ensure_finite(a)?;
    if rtol <= 0.0 {
        return Err(Error::Invalid(format!("rtol must be positive, got {rtol}")));
    }
    let (u, sigma, v_t) = svd_parts(a);
    let sigma_max = sigma.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = rtol * sigma_max;

    // P = V diag(1/sigma_i) U^T over the retained singular values.
    let mut p = Matrix::zeros(a.ncols(), a.nrows());
    for (i, &s) in sigma.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            let vi = v_t.row(i).transpose();
            let ui = u.column(i);
            p += vi * ui.transpose() / s;
        }
    }
    Ok(p)
}

/// Number of singular values exceeding `rtol * sigma_max`.
///
/// Returns 0 exactly when `a` is numerically the zero matrix.
pub fn numerical_rank(a: &Matrix, rtol: f64) -> usize {
    assert!(rtol > 0.0, "rtol must be positive");
    if a.iter().any(|x| !x.is_finite()) {
        return 0;
    }
    let sigma = singular_values(a);
    let sigma_max = sigma.iter().cloned().fold(0.0_f64, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    let cutoff = rtol * sigma_max;
    sigma.iter().filter(|&&s| s > cutoff).count()
}

/// Largest singular value of `a`.
pub fn spectral_norm(a: &Matrix) -> f64 {
    if a.iter().any(|x| !x.is_finite()) {
        return f64::NAN;
    }
    singular_values(a).into_iter().fold(0.0_f64, f64::max)
}

/// Square root of the entry-wise sum of squares.
pub fn frobenius_norm(a: &Matrix) -> f64 {
    a.norm()
}
