//! Generalized simplex Hessians: difference matrices, the GSH and GCSH
//! estimators, the projection onto a plan's direction spaces, and the
//! theoretical error-bound right-hand sides.

use serde::{Deserialize, Serialize};

use crate::analysis::EvaluationOracle;
use crate::geometry::{self, CaseLabel, GshIndices, SamplePlan};
use crate::gradient::eval_point_set;
use crate::linalg::{numerical_rank, pseudoinverse_with_rtol, spectral_norm};
use crate::{Error, Matrix, Result, Vector};

/// Which estimator produced a [`HessianEstimate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMode {
    Gsh,
    Gcsh,
}

impl std::fmt::Display for EstimateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimateMode::Gsh => write!(f, "gsh"),
            EstimateMode::Gcsh => write!(f, "gcsh"),
        }
    }
}

/// An `n x n` Hessian estimate plus metadata.
///
/// The stored matrix is the raw estimator output, which need not be
/// symmetric; [`HessianEstimate::symmetrized`] averages it with its transpose
/// when the caller wants symmetry.
#[derive(Clone, Debug)]
pub struct HessianEstimate {
    pub matrix: Matrix,
    pub mode: EstimateMode,
    pub case: CaseLabel,
    /// Distinct sample points the computation consumed.
    pub eval_count: usize,
}

impl HessianEstimate {
    pub fn symmetrized(&self) -> Matrix {
        (&self.matrix + self.matrix.transpose()) * 0.5
    }
}

fn st_pinv(plan: &SamplePlan) -> Result<Matrix> {
    let st = plan.s().mat().transpose();
    let rtol = plan.tols().rank_rtol(&st);
    pseudoinverse_with_rtol(&st, rtol)
}

/// Pseudoinverse of `T_i'` for each i, computed once when all `T_i` are equal.
fn tt_pinvs(plan: &SamplePlan) -> Result<Vec<Matrix>> {
    if plan.shared_t() {
        let tt = plan.ts()[0].mat().transpose();
        let p = pseudoinverse_with_rtol(&tt, plan.tols().rank_rtol(&tt))?;
        Ok(vec![p; plan.m()])
    } else {
        plan.ts()
            .iter()
            .map(|t| {
                let tt = t.mat().transpose();
                pseudoinverse_with_rtol(&tt, plan.tols().rank_rtol(&tt))
            })
            .collect()
    }
}

fn assemble_delta2_s(plan: &SamplePlan, idx: &GshIndices, values: &[f64]) -> Result<Matrix> {
    let (m, n) = (plan.m(), plan.dim());
    let pinvs = tt_pinvs(plan)?;
    let mut d2 = Matrix::zeros(m, n);
    for i in 0..m {
        let k = plan.ts()[i].cols();
        let diff = Vector::from_fn(k, |j, _| {
            let hi = values[idx.at_shifted[i][j]] - values[idx.shifted[i]];
            let lo = values[idx.at_base[i][j]] - values[idx.x0];
            hi - lo
        });
        let row = &pinvs[i] * diff;
        d2.row_mut(i).copy_from(&row.transpose());
    }
    Ok(d2)
}

/// The `m x n` difference matrix whose row `i` is the transposed difference
/// of simplex gradients over `T_i` at `x0 + s^i` and at `x0`.
pub fn delta2_s(oracle: &EvaluationOracle, plan: &SamplePlan) -> Result<Matrix> {
    let layout = geometry::gsh_layout(plan);
    let values = eval_point_set(oracle, &layout.points)?;
    assemble_delta2_s(plan, &layout.idx, &values)
}

/// Generalized simplex Hessian of the oracle's function at the plan's point
/// of interest.
///
/// With `S = T = diag(h_1..h_n)` this is the forward-finite-difference
/// Hessian.
pub fn gsh(oracle: &EvaluationOracle, plan: &SamplePlan) -> Result<HessianEstimate> {
    let layout = geometry::gsh_layout(plan);
    let values = eval_point_set(oracle, &layout.points)?;
    let d2 = assemble_delta2_s(plan, &layout.idx, &values)?;
    let matrix = st_pinv(plan)? * d2;
    Ok(HessianEstimate {
        matrix,
        mode: EstimateMode::Gsh,
        case: geometry::classify(plan, plan.tols().rank_rtol(plan.s().mat())),
        eval_count: layout.points.len(),
    })
}

fn assemble_delta2_c(
    plan: &SamplePlan,
    pos: &GshIndices,
    neg: &GshIndices,
    values: &[f64],
) -> Result<Matrix> {
    let (m, n) = (plan.m(), plan.dim());
    let pinvs = tt_pinvs(plan)?;
    let mut d2 = Matrix::zeros(m, n);
    for i in 0..m {
        let k = plan.ts()[i].cols();
        // Bracket of four difference vectors from the centered expansion;
        // entry j expands to seven function values:
        //   f(x0+s+t) + f(x0-s-t) - f(x0+s) - f(x0-s) - f(x0+t) - f(x0-t) + 2 f(x0).
        let bracket = Vector::from_fn(k, |j, _| {
            let fwd = values[pos.at_shifted[i][j]] - values[pos.shifted[i]];
            let bwd = values[neg.at_shifted[i][j]] - values[neg.shifted[i]];
            let base_fwd = values[pos.at_base[i][j]] - values[pos.x0];
            let base_bwd = values[neg.at_base[i][j]] - values[neg.x0];
            fwd + bwd - base_fwd - base_bwd
        });
        let row = (&pinvs[i] * bracket) * 0.5;
        d2.row_mut(i).copy_from(&row.transpose());
    }
    Ok(d2)
}

/// Centered counterpart of [`delta2_s`].
pub fn delta2_c(oracle: &EvaluationOracle, plan: &SamplePlan) -> Result<Matrix> {
    let layout = geometry::gcsh_layout(plan);
    let values = eval_point_set(oracle, &layout.points)?;
    assemble_delta2_c(plan, &layout.pos, &layout.neg, &values)
}

/// Generalized centered simplex Hessian.
///
/// Computed as the pseudoinverse of `S'` applied to the centered difference
/// matrix, which equals the average of the two one-sided estimators over
/// `(S, T)` and `(-S, -T)` and the one-sided estimator over the stacked plan
/// `([S, -S], {T, -T})`.
pub fn gcsh(oracle: &EvaluationOracle, plan: &SamplePlan) -> Result<HessianEstimate> {
    let layout = geometry::gcsh_layout(plan);
    let values = eval_point_set(oracle, &layout.points)?;
    let d2 = assemble_delta2_c(plan, &layout.pos, &layout.neg, &values)?;
    let matrix = st_pinv(plan)? * d2;
    Ok(HessianEstimate {
        matrix,
        mode: EstimateMode::Gcsh,
        case: geometry::classify(plan, plan.tols().rank_rtol(plan.s().mat())),
        eval_count: layout.points.len(),
    })
}

/// Projection of an `n x n` matrix onto the plan's direction spaces:
/// the sum over i of `(S')^+ e_i e_i' S' H T_i T_i^+`, which collapses to
/// `(S')^+ S' H T T^+` when all `T_i` are equal.
pub fn project_hessian(h: &Matrix, plan: &SamplePlan) -> Result<Matrix> {
    let n = plan.dim();
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::Dimension(format!(
            "expected a {n}x{n} matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let sp = st_pinv(plan)?;
    if plan.shared_t() {
        let t = plan.ts()[0].mat();
        let tp = pseudoinverse_with_rtol(t, plan.tols().rank_rtol(t))?;
        return Ok(&sp * (plan.s().mat().transpose() * h) * (t * tp));
    }
    let mut out = Matrix::zeros(n, n);
    for i in 0..plan.m() {
        let t = plan.ts()[i].mat();
        let tp = pseudoinverse_with_rtol(t, plan.tols().rank_rtol(t))?;
        let s_col = plan.s().column(i);
        // (S')^+ e_i (s^i)' H T_i T_i^+, assembled as an outer product.
        let row = (s_col.transpose() * h) * (t * tp);
        out += sp.column(i) * row;
    }
    Ok(out)
}

/// Which error-bound formula applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundFormula {
    /// The per-direction bound: needs `S` full column rank or every `T_i`
    /// full row rank.
    PerDirection,
    /// The shared-T bound: needs all `T_i` equal, covers every rank case.
    SharedT,
}

/// An error-bound value plus which formula produced it and whether the
/// per-direction preconditions held.
#[derive(Clone, Copy, Debug)]
pub struct ErrorBound {
    pub value: f64,
    pub formula: BoundFormula,
    pub general_case_holds: bool,
}

struct BoundFactors {
    s_factor: f64,
    t_factor: f64,
    ratio: f64,
    delta_u: f64,
    m: f64,
    k: f64,
    general_case_holds: bool,
}

fn bound_factors(plan: &SamplePlan) -> Result<BoundFactors> {
    let s_hat_t = plan.s().normalized().mat().transpose();
    let s_factor = spectral_norm(&pseudoinverse_with_rtol(
        &s_hat_t,
        plan.tols().rank_rtol(&s_hat_t),
    )?);
    let mut t_factor = 0.0_f64;
    for t in plan.ts() {
        let t_hat = t.normalized();
        let p = pseudoinverse_with_rtol(t_hat.mat(), plan.tols().rank_rtol(t_hat.mat()))?;
        t_factor = t_factor.max(spectral_norm(&p));
    }
    let s_mat = plan.s().mat();
    let s_full_col = numerical_rank(s_mat, plan.tols().rank_rtol(s_mat)) == s_mat.ncols();
    let all_t_full_row = plan.ts().iter().all(|t| {
        numerical_rank(t.mat(), plan.tols().rank_rtol(t.mat())) == t.rows()
    });
    Ok(BoundFactors {
        s_factor,
        t_factor,
        ratio: plan.delta_u() / plan.delta_l(),
        delta_u: plan.delta_u(),
        m: plan.m() as f64,
        k: plan.k_max() as f64,
        general_case_holds: s_full_col || all_t_full_row,
    })
}

/// Theoretical error-bound right-hand side for the GSH, given a Lipschitz
/// constant of the Hessian on a ball covering the sample set.
///
/// Uses the shared-T formula when the plan shares one `T`, otherwise the
/// per-direction formula; refuses when neither applies (those rank cases have
/// no known bound).
pub fn gsh_error_bound(plan: &SamplePlan, lip_hess: f64) -> Result<ErrorBound> {
    if lip_hess < 0.0 {
        return Err(Error::Invalid(format!(
            "Lipschitz constant must be nonnegative, got {lip_hess}"
        )));
    }
    let f = bound_factors(plan)?;
    if plan.shared_t() {
        Ok(ErrorBound {
            value: 4.0 * (f.m * f.k).sqrt() * lip_hess * f.ratio * f.s_factor * f.t_factor
                * f.delta_u,
            formula: BoundFormula::SharedT,
            general_case_holds: f.general_case_holds,
        })
    } else if f.general_case_holds {
        Ok(ErrorBound {
            value: 4.0 * f.m * f.k.sqrt() * lip_hess * f.ratio * f.ratio * f.s_factor
                * f.t_factor
                * f.delta_u,
            formula: BoundFormula::PerDirection,
            general_case_holds: true,
        })
    } else {
        Err(Error::BoundNotApplicable)
    }
}

/// Error-bound right-hand side for the GCSH, given a Lipschitz constant of
/// the third derivative. Same applicability rules as [`gsh_error_bound`],
/// with the radius entering quadratically.
pub fn gcsh_error_bound(plan: &SamplePlan, lip_third: f64) -> Result<ErrorBound> {
    if lip_third < 0.0 {
        return Err(Error::Invalid(format!(
            "Lipschitz constant must be nonnegative, got {lip_third}"
        )));
    }
    let f = bound_factors(plan)?;
    let du2 = f.delta_u * f.delta_u;
    if plan.shared_t() {
        Ok(ErrorBound {
            value: 2.0 * (f.m * f.k).sqrt() * lip_third * f.ratio * f.s_factor * f.t_factor * du2,
            formula: BoundFormula::SharedT,
            general_case_holds: f.general_case_holds,
        })
    } else if f.general_case_holds {
        Ok(ErrorBound {
            value: 2.0 * f.m * f.k.sqrt() * lip_third * f.ratio * f.ratio * f.s_factor
                * f.t_factor
                * du2,
            formula: BoundFormula::PerDirection,
            general_case_holds: true,
        })
    } else {
        Err(Error::BoundNotApplicable)
    }
}
