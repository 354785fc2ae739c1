//! Minimal poised sample sets for simplex-Hessian computation, poisedness
//! checks for quadratic interpolation, and quadratic interpolation itself
//! (general solve and the closed-form coefficients available on minimal
//! sets).

use crate::analysis::EvaluationOracle;
use crate::geometry::{enumerate_gsh_points, gsh_layout, DirectionMatrix, PointSet, SamplePlan};
use crate::gradient::eval_point_set;
use crate::linalg::{numerical_rank, pseudoinverse};
use crate::{Error, Matrix, Result, Vector};

/// Number of points a poised quadratic interpolation set must have in
/// dimension `n`.
pub fn quadratic_basis_size(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

/// Column replacement that makes the sample set of a simplex-Hessian
/// computation minimal: `ell = 0` returns `S` itself, otherwise column `j`
/// becomes `s^j - s^ell` and column `ell` becomes `-s^ell`.
///
/// `ell` is 1-based to match the column it distinguishes.
pub fn build_u(s: &DirectionMatrix, ell: usize) -> Result<DirectionMatrix> {
    let n = s.rows();
    if s.cols() != n {
        return Err(Error::Dimension(format!(
            "need a square direction matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if ell > n {
        return Err(Error::IndexRange { index: ell, max: n });
    }
    if ell == 0 {
        return Ok(s.clone());
    }
    let l = ell - 1;
    let s_l = s.column(l);
    let mut mat = Matrix::zeros(n, n);
    for j in 0..n {
        let col = if j == l { -&s_l } else { s.column(j) - &s_l };
        mat.column_mut(j).copy_from(&col);
    }
    DirectionMatrix::new(mat)
}

/// The canonical matrices `E_ell = build_u(Id_n, ell)`.
pub fn canonical_e(n: usize, ell: usize) -> Result<DirectionMatrix> {
    if n == 0 {
        return Err(Error::Invalid("dimension must be at least 1".into()));
    }
    build_u(&DirectionMatrix::scaled_identity(n, 1.0)?, ell)
}

/// Check whether `(S, Tbar)` generates a minimal poised sample set at `x0`:
/// both square and full rank with exactly `(n+1)(n+2)/2` distinct points.
/// Returns the flag together with the observed point count.
pub fn is_minimal_poised(
    x0: &Vector,
    s: &DirectionMatrix,
    tbar: &DirectionMatrix,
) -> Result<(bool, usize)> {
    let n = x0.len();
    if s.rows() != n || s.cols() != n || tbar.rows() != n || tbar.cols() != n {
        return Err(Error::Dimension(format!(
            "need square {n}x{n} direction matrices, got {}x{} and {}x{}",
            s.rows(),
            s.cols(),
            tbar.rows(),
            tbar.cols()
        )));
    }
    let plan = SamplePlan::shared(x0.clone(), s.clone(), tbar.clone())?;
    let count = enumerate_gsh_points(&plan).len();
    let full_rank = |d: &DirectionMatrix| {
        numerical_rank(d.mat(), crate::linalg::default_rtol(d.mat())) == n
    };
    Ok((full_rank(s) && full_rank(tbar) && count == quadratic_basis_size(n), count))
}

/// Rank/condition report for the quadratic interpolation system of a point
/// set.
#[derive(Clone, Copy, Debug)]
pub struct PoisednessReport {
    pub poised: bool,
    pub system_rank: usize,
    /// Ratio of extreme singular values of the interpolation system.
    pub condition: f64,
}

/// Interpolation system row for point `y`:
/// `[1, y_1..y_n, y_1^2/2, y_1 y_2, ..., y_1 y_n, y_2^2/2, ..., y_n^2/2]`.
///
/// The half factors on the squares are folded into the basis so the solved
/// quadratic coefficients are Hessian entries directly.
fn interpolation_row(y: &Vector) -> Vec<f64> {
    let n = y.len();
    let mut row = Vec::with_capacity(quadratic_basis_size(n));
    row.push(1.0);
    for i in 0..n {
        row.push(y[i]);
    }
    for i in 0..n {
        for j in i..n {
            if i == j {
                row.push(0.5 * y[i] * y[i]);
            } else {
                row.push(y[i] * y[j]);
            }
        }
    }
    row
}

fn interpolation_matrix(points: &PointSet) -> Result<Matrix> {
    let n = points.points()[0].len();
    let p = quadratic_basis_size(n);
    if points.len() != p {
        return Err(Error::Cardinality {
            expected: p,
            found: points.len(),
        });
    }
    let rows: Vec<Vec<f64>> = points.points().iter().map(interpolation_row).collect();
    Ok(Matrix::from_fn(p, p, |i, j| rows[i][j]))
}

/// Decide whether a set of `(n+1)(n+2)/2` points pins down a unique
/// interpolating quadratic, reporting the system rank and conditioning.
pub fn qi_poised(points: &PointSet) -> Result<PoisednessReport> {
    if points.is_empty() {
        return Err(Error::Invalid("empty point set".into()));
    }
    let m = interpolation_matrix(points)?;
    let p = m.nrows();
    let rank = numerical_rank(&m, 1e-10);
    let sigma = crate::linalg::singular_values(&m);
    let smax = sigma.iter().cloned().fold(0.0_f64, f64::max);
    let smin = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    Ok(PoisednessReport {
        poised: rank == p,
        system_rank: rank,
        condition,
    })
}

/// A quadratic `q(x) = alpha0 + alpha' x + x' H x / 2` with symmetric `H`.
#[derive(Clone, Debug)]
pub struct QuadraticModel {
    pub alpha0: f64,
    pub alpha: Vector,
    pub hessian: Matrix,
}

impl QuadraticModel {
    pub fn evaluate(&self, x: &Vector) -> f64 {
        self.alpha0 + self.alpha.dot(x) + 0.5 * x.dot(&(&self.hessian * x))
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }
}

/// Solve the interpolation system through a poised point set.
pub fn qi_solve(points: &PointSet, values: &[f64]) -> Result<QuadraticModel> {
    if values.len() != points.len() {
        return Err(Error::Cardinality {
            expected: points.len(),
            found: values.len(),
        });
    }
    let report = qi_poised(points)?;
    let m = interpolation_matrix(points)?;
    if !report.poised {
        return Err(Error::NotPoised {
            rank: report.system_rank,
            size: m.nrows(),
        });
    }
    let rhs = Vector::from_vec(values.to_vec());
    let coeffs = m
        .lu()
        .solve(&rhs)
        .ok_or(Error::NotPoised {
            rank: report.system_rank,
            size: points.len(),
        })?;

    let n = points.points()[0].len();
    let alpha0 = coeffs[0];
    let alpha = Vector::from_fn(n, |i, _| coeffs[1 + i]);
    let mut hessian = Matrix::zeros(n, n);
    let mut idx = 1 + n;
    for i in 0..n {
        for j in i..n {
            hessian[(i, j)] = coeffs[idx];
            hessian[(j, i)] = coeffs[idx];
            idx += 1;
        }
    }
    Ok(QuadraticModel {
        alpha0,
        alpha,
        hessian,
    })
}

/// Closed-form quadratic interpolation coefficients over the minimal sample
/// set generated by `(S, build_u(S, ell))` at `x0`.
///
/// All coefficients come from the same function values a simplex-Hessian
/// computation over that plan consumes, so the model is free once the
/// Hessian estimate has been paid for; its Hessian equals that estimate.
pub fn qi_closed_form(
    oracle: &EvaluationOracle,
    x0: &Vector,
    s: &DirectionMatrix,
    ell: usize,
) -> Result<QuadraticModel> {
    let n = x0.len();
    if s.rows() != n || s.cols() != n {
        return Err(Error::Dimension(format!(
            "need a square {n}x{n} direction matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if numerical_rank(s.mat(), crate::linalg::default_rtol(s.mat())) < n {
        return Err(Error::Invalid(
            "direction matrix must be full rank for closed-form interpolation".into(),
        ));
    }
    let u = build_u(s, ell)?;
    let plan = SamplePlan::shared(x0.clone(), s.clone(), u)?;
    let layout = gsh_layout(&plan);
    let v = eval_point_set(oracle, &layout.points)?;
    let idx = &layout.idx;

    let f0 = v[idx.x0];
    // In the U_ell geometry (1-based ell, column index l):
    //   x0 + t^j          = x0 + s^j - s^l   (j != l),  x0 - s^l (j = l)
    //   (x0 + s^i) + t^j  = x0 + s^i + s^j - s^l, with j = l giving
    //                       x0 + s^i - s^l and j = i giving x0 + 2 s^i - s^l.
    let mut h_hat = Matrix::zeros(n, n);
    if ell == 0 {
        for i in 0..n {
            h_hat[(i, i)] = v[idx.at_shifted[i][i]] - 2.0 * v[idx.shifted[i]] + f0;
            for j in (i + 1)..n {
                let hij = v[idx.at_shifted[i][j]] - v[idx.shifted[i]] - v[idx.shifted[j]] + f0;
                h_hat[(i, j)] = hij;
                h_hat[(j, i)] = hij;
            }
        }
    } else {
        let l = ell - 1;
        let f_minus_l = v[idx.at_base[0][l]];
        h_hat[(l, l)] = v[idx.shifted[l]] + f_minus_l - 2.0 * f0;
        for i in (0..n).filter(|&i| i != l) {
            let f_i_minus_l = v[idx.at_shifted[i][l]];
            let hil = -f_i_minus_l + v[idx.shifted[i]] + f_minus_l - f0;
            h_hat[(i, l)] = hil;
            h_hat[(l, i)] = hil;
            h_hat[(i, i)] = v[idx.at_shifted[i][i]] - 2.0 * f_i_minus_l + f_minus_l;
            for j in (i + 1..n).filter(|&j| j != l) {
                let hij = v[idx.at_shifted[i][j]] - f_i_minus_l - v[idx.at_shifted[j][l]]
                    + f_minus_l;
                h_hat[(i, j)] = hij;
                h_hat[(j, i)] = hij;
            }
        }
    }

    let s_inv = pseudoinverse(s.mat())?;
    let hessian = s_inv.transpose() * &h_hat * &s_inv;
    let hessian = (&hessian + hessian.transpose()) * 0.5;

    let alpha_bar = Vector::from_fn(n, |i, _| {
        v[idx.shifted[i]] - f0 - 0.5 * h_hat[(i, i)] - x0.dot(&(&hessian * s.column(i)))
    });
    let alpha = s_inv.transpose() * alpha_bar;
    let alpha0 = f0 - alpha.dot(x0) - 0.5 * x0.dot(&(&hessian * x0));

    Ok(QuadraticModel {
        alpha0,
        alpha,
        hessian,
    })
}

/// Brute-force search for a pair `(S, Tbar)` of full-rank square matrices
/// whose sample set at `x0` equals `points` exactly.
///
/// Candidate `S` columns are the offsets from `x0` to the other points;
/// candidate `Tbar` columns are all inter-point differences. Supported for
/// `n <= 2`, where exhausting the candidates is cheap.
pub fn find_gsh_representation(
    points: &PointSet,
    x0: &Vector,
) -> Result<Option<(DirectionMatrix, DirectionMatrix)>> {
    let n = x0.len();
    if n > 2 {
        return Err(Error::Invalid(
            "representation search is implemented for dimensions 1 and 2 only".into(),
        ));
    }
    if points.find(x0).is_none() {
        return Err(Error::Invalid("x0 must belong to the point set".into()));
    }
    let tol = points.dedup_tol();

    let s_cands: Vec<Vector> = points
        .points()
        .iter()
        .filter(|p| {
            let d: Vector = *p - x0;
            d.amax() > tol
        })
        .map(|p| p - x0)
        .collect();
    let mut t_cands: PointSet = PointSet::new(tol);
    for p in points.points() {
        for q in points.points() {
            let d = q - p;
            if d.amax() > tol {
                t_cands.insert(d);
            }
        }
    }
    let t_cands = t_cands.points().to_vec();

    let full_rank = |m: &Matrix| numerical_rank(m, 1e-10) == n;
    let tuples = |cands: &[Vector]| -> Vec<Matrix> {
        let mut out = Vec::new();
        if n == 1 {
            for c in cands {
                out.push(Matrix::from_fn(1, 1, |_, _| c[0]));
            }
        } else {
            for (i, a) in cands.iter().enumerate() {
                for (j, b) in cands.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let mut m = Matrix::zeros(2, 2);
                    m.column_mut(0).copy_from(a);
                    m.column_mut(1).copy_from(b);
                    out.push(m);
                }
            }
        }
        out.retain(|m| full_rank(m));
        out
    };

    for s_mat in tuples(&s_cands) {
        let s = DirectionMatrix::new(s_mat)?;
        for t_mat in tuples(&t_cands) {
            let tbar = DirectionMatrix::new(t_mat)?;
            let plan = SamplePlan::shared(x0.clone(), s.clone(), tbar.clone())?;
            let generated = enumerate_gsh_points(&plan);
            if generated.same_set(points) {
                return Ok(Some((s, tbar)));
            }
        }
    }
    Ok(None)
}
