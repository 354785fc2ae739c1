//! Shared text formats: matrix CSV (one row per line, no header), point-set
//! CSV/JSON, and JSON records for estimates, models and convergence reports.

use serde::{Deserialize, Serialize};

use crate::analysis::{ConvergenceReport, OrderFit};
use crate::geometry::{CaseLabel, PointSet};
use crate::hessian::HessianEstimate;
use crate::poised::QuadraticModel;
use crate::{Error, Matrix, Result, Vector};

/// Render a matrix as CSV: one row per line, comma-separated decimal
/// literals, no header.
pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parse a CSV matrix. Rejects empty input, ragged rows and non-finite
/// entries.
pub fn matrix_from_csv(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number {field:?}", lineno + 1)))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!(
                    "line {}: non-finite entry {field:?}",
                    lineno + 1
                )));
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn points_to_csv(points: &PointSet) -> String {
    let mut out = String::new();
    for p in points.points() {
        let row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn points_to_json(points: &PointSet) -> serde_json::Value {
    serde_json::Value::Array(
        points
            .points()
            .iter()
            .map(|p| serde_json::json!(p.iter().cloned().collect::<Vec<f64>>()))
            .collect(),
    )
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    let c = rows[0].len();
    if rows.iter().any(|r| r.len() != c) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(Matrix::from_fn(rows.len(), c, |i, j| rows[i][j]))
}

/// JSON-serializable form of a [`HessianEstimate`]: mode, row-major matrix,
/// case labels and the distinct-evaluation count.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HessianEstimateRecord {
    pub mode: String,
    pub matrix: Vec<Vec<f64>>,
    pub s_case: String,
    pub t_case: String,
    pub eval_count: usize,
}

impl From<&HessianEstimate> for HessianEstimateRecord {
    fn from(est: &HessianEstimate) -> Self {
        HessianEstimateRecord {
            mode: est.mode.to_string(),
            matrix: matrix_rows(&est.matrix),
            s_case: est.case.s_case.to_string(),
            t_case: est.case.t_case.to_string(),
            eval_count: est.eval_count,
        }
    }
}

impl HessianEstimateRecord {
    pub fn matrix(&self) -> Result<Matrix> {
        matrix_from_rows(&self.matrix)
    }
}

pub fn hessian_estimate_to_json(est: &HessianEstimate) -> String {
    serde_json::to_string_pretty(&HessianEstimateRecord::from(est)).expect("serializable record")
}

pub fn hessian_estimate_from_json(text: &str) -> Result<HessianEstimateRecord> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// JSON form of a quadratic model `{alpha0, alpha, H}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadraticModelRecord {
    pub alpha0: f64,
    pub alpha: Vec<f64>,
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
}

impl From<&QuadraticModel> for QuadraticModelRecord {
    fn from(m: &QuadraticModel) -> Self {
        QuadraticModelRecord {
            alpha0: m.alpha0,
            alpha: m.alpha.iter().cloned().collect(),
            h: matrix_rows(&m.hessian),
        }
    }
}

impl QuadraticModelRecord {
    pub fn model(&self) -> Result<QuadraticModel> {
        Ok(QuadraticModel {
            alpha0: self.alpha0,
            alpha: Vector::from_vec(self.alpha.clone()),
            hessian: matrix_from_rows(&self.h)?,
        })
    }
}

pub fn quadratic_model_to_json(m: &QuadraticModel) -> String {
    serde_json::to_string_pretty(&QuadraticModelRecord::from(m)).expect("serializable record")
}

/// CSV body of a convergence report with header `delta,error,bound`; the
/// bound field is left empty on rows without an applicable bound.
pub fn report_to_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("delta,error,bound\n");
    for row in &report.rows {
        match row.bound {
            Some(b) => out.push_str(&format!("{},{},{}\n", row.delta, row.error, b)),
            None => out.push_str(&format!("{},{},\n", row.delta, row.error)),
        }
    }
    out
}

/// JSON summary of a convergence report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub mode: String,
    pub exact: bool,
    pub fitted_order: Option<f64>,
    pub fitted_constant: Option<f64>,
    pub scale: f64,
    pub rows: Vec<ConvergenceRowRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRowRecord {
    pub delta: f64,
    pub error: f64,
    pub bound: Option<f64>,
}

impl From<&ConvergenceReport> for ConvergenceRecord {
    fn from(r: &ConvergenceReport) -> Self {
        let (exact, fitted_order, fitted_constant) = match r.fit {
            OrderFit::Exact => (true, None, None),
            OrderFit::Fitted { order, constant } => (false, Some(order), Some(constant)),
        };
        ConvergenceRecord {
            mode: r.mode.to_string(),
            exact,
            fitted_order,
            fitted_constant,
            scale: r.scale,
            rows: r
                .rows
                .iter()
                .map(|row| ConvergenceRowRecord {
                    delta: row.delta,
                    error: row.error,
                    bound: row.bound,
                })
                .collect(),
        }
    }
}

pub fn report_to_json(report: &ConvergenceReport) -> String {
    serde_json::to_string_pretty(&ConvergenceRecord::from(report)).expect("serializable record")
}

/// Parse case labels back from their lowercase names.
pub fn case_label_from_strs(s_case: &str, t_case: &str) -> Result<CaseLabel> {
    use crate::geometry::Determination::*;
    let parse = |s: &str| match s {
        "underdetermined" => Ok(Underdetermined),
        "determined" => Ok(Determined),
        "overdetermined" => Ok(Overdetermined),
        "nondetermined" => Ok(Nondetermined),
        other => Err(Error::Parse(format!("unknown case label {other:?}"))),
    };
    Ok(CaseLabel {
        s_case: parse(s_case)?,
        t_case: parse(t_case)?,
    })
}
