//! First-order building blocks: difference vectors, the generalized simplex
//! gradient, and its error-bound right-hand side.

use crate::analysis::EvaluationOracle;
use crate::geometry::{DirectionMatrix, PointSet, DEFAULT_DEDUP_TOL};
use crate::linalg::{pseudoinverse, spectral_norm};
use crate::{Error, Result, Vector};

/// A gradient estimate together with the number of distinct evaluations it
/// consumed.
#[derive(Clone, Debug)]
pub struct GradientEstimate {
    pub vector: Vector,
    pub eval_count: usize,
}

pub(crate) fn eval_point_set(oracle: &EvaluationOracle, set: &PointSet) -> Result<Vec<f64>> {
    set.points().iter().map(|p| oracle.eval(p)).collect()
}

/// Difference vector with component `j` equal to `f(x0 + d^j) - f(x0)`.
pub fn delta_s(oracle: &EvaluationOracle, x0: &Vector, d: &DirectionMatrix) -> Result<Vector> {
    if d.rows() != x0.len() {
        return Err(Error::Dimension(format!(
            "direction matrix has {} rows but x0 has dimension {}",
            d.rows(),
            x0.len()
        )));
    }
    let f0 = oracle.eval(x0)?;
    let mut out = Vector::zeros(d.cols());
    for j in 0..d.cols() {
        out[j] = oracle.eval(&(x0 + d.column(j)))? - f0;
    }
    Ok(out)
}

/// Generalized simplex gradient: the pseudoinverse of `S'` applied to the
/// difference vector over `S`.
///
/// With `S` a positive diagonal this reduces to the forward-finite-difference
/// gradient.
pub fn gsg(oracle: &EvaluationOracle, x0: &Vector, s: &DirectionMatrix) -> Result<GradientEstimate> {
    if s.rows() != x0.len() {
        return Err(Error::Dimension(format!(
            "direction matrix has {} rows but x0 has dimension {}",
            s.rows(),
            x0.len()
        )));
    }
    // Deduplicate the sample set so repeated directions are evaluated once.
    let mut set = PointSet::new(DEFAULT_DEDUP_TOL);
    let idx0 = set.insert(x0.clone());
    let idx: Vec<usize> = (0..s.cols()).map(|j| set.insert(x0 + s.column(j))).collect();
    let values = eval_point_set(oracle, &set)?;

    let delta = Vector::from_fn(s.cols(), |j, _| values[idx[j]] - values[idx0]);
    let st_pinv = pseudoinverse(&s.mat().transpose())?;
    Ok(GradientEstimate {
        vector: &st_pinv * delta,
        eval_count: set.len(),
    })
}

/// Right-hand side of the gradient error bound:
/// `(sqrt(m)/2) * L * ||(S_hat')^+|| * Delta_S`, where `S_hat` is `S`
/// normalized to unit radius and `L` is a Lipschitz constant of the gradient
/// on a ball covering the sample set.
pub fn gsg_error_bound(s: &DirectionMatrix, lip_grad: f64) -> f64 {
    let m = s.cols() as f64;
    let s_hat = s.normalized();
    let factor = spectral_norm(&pseudoinverse(&s_hat.mat().transpose()).expect("finite by construction"));
    0.5 * m.sqrt() * lip_grad * factor * s.radius()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    fn oracle_of(dim: usize, f: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> EvaluationOracle {
        EvaluationOracle::new(dim, f)
    }

    #[test]
    fn delta_s_on_squared_norm() {
        let oracle = oracle_of(2, |x| x.norm_squared());
        let d = DirectionMatrix::new(Matrix::from_row_slice(2, 2, &[1., 1., 0., 1.])).unwrap();
        let v = delta_s(&oracle, &Vector::zeros(2), &d).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!((v[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn delta_s_of_constant_function() {
        let oracle = oracle_of(3, |_| 4.25);
        let d = DirectionMatrix::new(Matrix::from_row_slice(3, 2, &[1., 0.5, 0., 1., 2., -1.]))
            .unwrap();
        let v = delta_s(&oracle, &Vector::from_vec(vec![0.2, -0.1, 0.3]), &d).unwrap();
        assert_eq!(v, Vector::zeros(2));
    }

    #[test]
    fn delta_s_exp_sum() {
        let oracle = oracle_of(2, |x| (x[0] + x[1]).exp());
        let d = DirectionMatrix::scaled_identity(2, 0.1).unwrap();
        let v = delta_s(&oracle, &Vector::zeros(2), &d).unwrap();
        let expected = 0.1f64.exp() - 1.0;
        assert!((v[0] - expected).abs() < 1e-15);
        assert!((v[1] - expected).abs() < 1e-15);
    }

    #[test]
    fn gsg_exact_on_linear_functions() {
        // Full row rank S recovers the coefficient vector exactly.
        let c = Vector::from_vec(vec![2.0, -3.0]);
        let cc = c.clone();
        let oracle = oracle_of(2, move |x| cc.dot(x));
        let s = DirectionMatrix::new(Matrix::from_row_slice(2, 3, &[0.1, 0., 0.2, 0., 0.1, 0.1]))
            .unwrap();
        let g = gsg(&oracle, &Vector::zeros(2), &s).unwrap();
        assert!((g.vector - c).norm() < 1e-12);
    }

    #[test]
    fn gsg_one_dimensional_parabola() {
        let oracle = oracle_of(1, |x| x[0] * x[0]);
        let h = 0.25;
        let s = DirectionMatrix::new(Matrix::from_row_slice(1, 1, &[h])).unwrap();
        let g = gsg(&oracle, &Vector::zeros(1), &s).unwrap();
        assert!((g.vector[0] - h).abs() < 1e-15);
        assert_eq!(g.eval_count, 2);
    }

    #[test]
    fn gsg_exp_sum_forward_difference() {
        let oracle = oracle_of(2, |x| (x[0] + x[1]).exp());
        let s = DirectionMatrix::scaled_identity(2, 0.1).unwrap();
        let g = gsg(&oracle, &Vector::zeros(2), &s).unwrap();
        let expected = 10.0 * (0.1f64.exp() - 1.0);
        assert!((g.vector[0] - expected).abs() < 1e-12);
        assert!((g.vector[1] - expected).abs() < 1e-12);
        assert_eq!(g.eval_count, 3);
    }

    #[test]
    fn gsg_projection_fixed_point() {
        let oracle = oracle_of(2, |x| (x[0] + 2.0 * x[1]).exp());
        // Tall S: the estimate lives in the row space of S'.
        let s = DirectionMatrix::new(Matrix::from_row_slice(2, 1, &[0.1, 0.05])).unwrap();
        let g = gsg(&oracle, &Vector::zeros(2), &s).unwrap();
        let st = s.mat().transpose();
        let st_pinv = pseudoinverse(&st).unwrap();
        let projected = &st_pinv * (&st * &g.vector);
        assert!((projected - &g.vector).norm() <= 1e-12 * g.vector.norm().max(1.0));
    }

    #[test]
    fn bound_for_scaled_identity() {
        let n = 3;
        let h = 0.05;
        let lip = 2.5;
        let s = DirectionMatrix::scaled_identity(n, h).unwrap();
        let b = gsg_error_bound(&s, lip);
        let expected = (n as f64).sqrt() / 2.0 * lip * h;
        assert!((b - expected).abs() < 1e-12);
    }

    #[test]
    fn bound_zero_for_affine() {
        let s = DirectionMatrix::scaled_identity(4, 0.1).unwrap();
        assert_eq!(gsg_error_bound(&s, 0.0), 0.0);
    }

    #[test]
    fn bound_grows_with_degeneracy() {
        // Nearly parallel columns inflate ||(S_hat')^+||.
        let s_good = DirectionMatrix::new(Matrix::from_row_slice(2, 2, &[1., 0., 0., 1.])).unwrap();
        let s_bad =
            DirectionMatrix::new(Matrix::from_row_slice(2, 2, &[1., 1., 0., 1e-3])).unwrap();
        let factor_bad = spectral_norm(
            &pseudoinverse(&s_bad.normalized().mat().transpose()).unwrap(),
        );
        let b_good = gsg_error_bound(&s_good, 1.0);
        let b_bad = gsg_error_bound(&s_bad, 1.0);
        assert!(b_bad > 100.0 * b_good);
        let expected = 0.5 * 2f64.sqrt() * factor_bad * s_bad.radius();
        assert!((b_bad - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn evaluation_error_carries_point() {
        let oracle = oracle_of(1, |x| (1.0 - x[0]).ln());
        let s = DirectionMatrix::new(Matrix::from_row_slice(1, 1, &[1.0])).unwrap();
        let err = gsg(&oracle, &Vector::zeros(1), &s).unwrap_err();
        assert!(matches!(err, Error::Evaluation { point } if point == vec![1.0]));
    }
}
