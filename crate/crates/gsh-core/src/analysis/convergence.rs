//! Convergence studies over shrinking sampling radii, empirical order
//! estimation, and bound verification.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{oracle_for, TestFunction};
use crate::geometry::{DirectionMatrix, SamplePlan};
use crate::gradient::{gsg, gsg_error_bound};
use crate::hessian::{gcsh, gcsh_error_bound, gsh, gsh_error_bound, project_hessian};
use crate::linalg::{pseudoinverse, spectral_norm};
use crate::{Error, Result};

/// Which estimator a convergence study exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyMode {
    Gsg,
    Gsh,
    Gcsh,
}

impl std::fmt::Display for StudyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StudyMode::Gsg => write!(f, "gsg"),
            StudyMode::Gsh => write!(f, "gsh"),
            StudyMode::Gcsh => write!(f, "gcsh"),
        }
    }
}

/// One row of a convergence study.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub delta: f64,
    pub error: f64,
    /// Theoretical bound; absent when no bound formula applies to the plan.
    pub bound: Option<f64>,
}

/// Outcome of fitting `log error` against `log delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum OrderFit {
    /// Every row sits at the round-off floor: the estimator is exact for
    /// this function up to floating-point noise.
    Exact,
    /// Least-squares slope and the constant `exp(intercept)`.
    Fitted { order: f64, constant: f64 },
}

/// Rows of `(radius, measured error, theoretical bound)` with a fitted order
/// slope.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub mode: StudyMode,
    pub rows: Vec<ConvergenceRow>,
    pub fit: OrderFit,
    /// `max(1, norm of the reference derivative)`; sets the round-off floor.
    pub scale: f64,
}

/// Baseline noise guard: `1e3 * eps * scale`.
pub const ORDER_FIT_FLOOR_FACTOR: f64 = 1e3;

/// Rows at or below the round-off floor are treated as noise and excluded
/// from order fits and bound checks.
///
/// The floor is mode-aware: Hessian estimates divide function-value rounding
/// by two radius factors, so their noise reaches `eps * |f| / delta^2`
/// (about 1e-9 of scale at the default smallest radius), far above the bare
/// `1e3 * eps` guard that suffices for first differences.
fn floor_for(mode: StudyMode, scale: f64) -> f64 {
    let base = ORDER_FIT_FLOOR_FACTOR * f64::EPSILON;
    let factor = match mode {
        StudyMode::Gsg => base.max(1e-12),
        StudyMode::Gsh | StudyMode::Gcsh => base.max(1e-8),
    };
    factor * scale
}

/// Geometric grid of `count` radii from `start` down to `stop`.
pub fn radii_geometric(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0 && start > stop) {
        return Err(Error::Invalid(format!(
            "need start > stop > 0, got start={start}, stop={stop}"
        )));
    }
    if count < 2 {
        return Err(Error::Invalid("need at least two radii".into()));
    }
    let ratio = (stop / start).powf(1.0 / (count - 1) as f64);
    Ok((0..count).map(|i| start * ratio.powi(i as i32)).collect())
}

/// Run one estimator over a plan template rescaled to each radius and record
/// the measured error against the theoretical bound.
///
/// The template's direction matrices fix the sampling geometry; for each
/// radius they are normalized to unit radius and rescaled, so every row uses
/// the same shape at a different size. Errors are measured against the
/// projection of the true derivative onto the plan's direction spaces, which
/// is what the bounds control (and equals the full derivative for full-row-
/// rank geometries).
pub fn convergence_study(
    func: &Arc<dyn TestFunction>,
    template: &SamplePlan,
    radii: &[f64],
    mode: StudyMode,
) -> Result<ConvergenceReport> {
    if template.dim() != func.dim() {
        return Err(Error::Dimension(format!(
            "plan dimension {} does not match function dimension {}",
            template.dim(),
            func.dim()
        )));
    }
    if radii.is_empty() {
        return Err(Error::Invalid("empty radius grid".into()));
    }
    if radii.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Invalid("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid("radii must be strictly decreasing".into()));
    }

    let x0 = template.x0().clone();
    let s_hat = template.s().normalized();
    let t_hats: Vec<DirectionMatrix> = template.ts().iter().map(|t| t.normalized()).collect();

    let mut rows = Vec::with_capacity(radii.len());
    let mut scale = 1.0_f64;
    for &delta in radii {
        let s = s_hat.scaled(delta)?;
        let ts: Result<Vec<_>> = t_hats.iter().map(|t| t.scaled(delta)).collect();
        let plan = SamplePlan::new(x0.clone(), s.clone(), ts?)?.with_tolerances(template.tols());
        let oracle = oracle_for(func);

        let (error, bound) = match mode {
            StudyMode::Gsg => {
                let est = gsg(&oracle, &x0, &s)?;
                let st = s.mat().transpose();
                let reference = pseudoinverse(&st)? * (st * func.gradient(&x0));
                scale = scale.max(reference.norm());
                let error = (est.vector - reference).norm();
                let bound = gsg_error_bound(&s, func.lip_grad(&x0, plan.delta_s()));
                (error, Some(bound))
            }
            StudyMode::Gsh => {
                let est = gsh(&oracle, &plan)?;
                let reference = project_hessian(&func.hessian(&x0), &plan)?;
                scale = scale.max(spectral_norm(&reference));
                let error = spectral_norm(&(est.matrix - reference));
                let ball = plan.delta_s() + plan.delta_t();
                let bound = gsh_error_bound(&plan, func.lip_hess(&x0, ball))
                    .ok()
                    .map(|b| b.value);
                (error, bound)
            }
            StudyMode::Gcsh => {
                let est = gcsh(&oracle, &plan)?;
                let reference = project_hessian(&func.hessian(&x0), &plan)?;
                scale = scale.max(spectral_norm(&reference));
                let error = spectral_norm(&(est.matrix - reference));
                let ball = plan.delta_s() + plan.delta_t();
                let bound = gcsh_error_bound(&plan, func.lip_third(&x0, ball))
                    .ok()
                    .map(|b| b.value);
                (error, bound)
            }
        };
        rows.push(ConvergenceRow {
            delta,
            error,
            bound,
        });
    }

    let fit = fit_rows(&rows, mode, scale)?;
    Ok(ConvergenceReport {
        mode,
        rows,
        fit,
        scale,
    })
}

fn fit_rows(rows: &[ConvergenceRow], mode: StudyMode, scale: f64) -> Result<OrderFit> {
    let floor = floor_for(mode, scale);
    let usable: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.error > floor).collect();
    if usable.is_empty() {
        return Ok(OrderFit::Exact);
    }
    if usable.len() < 3 {
        return Err(Error::TooFewRows {
            needed: 3,
            found: usable.len(),
        });
    }
    let n = usable.len() as f64;
    let xs: Vec<f64> = usable.iter().map(|r| r.delta.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.error.ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let order = sxy / sxx;
    let constant = (mean_y - order * mean_x).exp();
    Ok(OrderFit::Fitted { order, constant })
}

/// Least-squares order of a report's rows above the round-off floor.
pub fn estimate_order(report: &ConvergenceReport) -> Result<OrderFit> {
    fit_rows(&report.rows, report.mode, report.scale)
}

/// True when every row's error is within its theoretical bound, allowing the
/// relative slack `1e-8` plus the round-off floor (rows of exactly-recovered
/// functions have bound zero and error at floating-point noise).
pub fn verify_bounds(report: &ConvergenceReport) -> bool {
    let floor = floor_for(report.mode, report.scale);
    report.rows.iter().all(|r| match r.bound {
        Some(b) => r.error <= b * (1.0 + 1e-8) + floor,
        None => false,
    })
}
