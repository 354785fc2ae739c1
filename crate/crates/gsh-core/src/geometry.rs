//! Direction matrices, sample plans, case classification, and enumeration of
//! the distinct sample points a simplex-Hessian computation touches.

use serde::{Deserialize, Serialize};

use crate::linalg::numerical_rank;
use crate::{Error, Matrix, Result, Tolerances, Vector};

/// Default relative tolerance for deciding that two sample points coincide.
///
/// Points arise as sums of the same floats, so exact collisions dominate;
/// the relative guard absorbs order-of-summation noise.
pub const DEFAULT_DEDUP_TOL: f64 = 1e-12;

/// An `n x m` matrix whose columns are displacement directions, together with
/// its radius (the largest column 2-norm).
///
/// Construction rejects zero and non-finite matrices: every direction matrix
/// in a computation must have a positive radius.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionMatrix {
    mat: Matrix,
    radius: f64,
}

impl DirectionMatrix {
    pub fn new(mat: Matrix) -> Result<Self> {
        if mat.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let radius = (0..mat.ncols())
            .map(|j| mat.column(j).norm())
            .fold(0.0_f64, f64::max);
        if radius == 0.0 {
            return Err(Error::ZeroRadius);
        }
        Ok(DirectionMatrix { mat, radius })
    }

    /// `h * Id_n`.
    pub fn scaled_identity(n: usize, h: f64) -> Result<Self> {
        DirectionMatrix::new(Matrix::identity(n, n) * h)
    }

    pub fn mat(&self) -> &Matrix {
        &self.mat
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn column(&self, j: usize) -> Vector {
        self.mat.column(j).into_owned()
    }

    /// Every entry divided by the radius; the result has radius 1 up to
    /// round-off.
    pub fn normalized(&self) -> DirectionMatrix {
        let mat = &self.mat / self.radius;
        let radius = (0..mat.ncols())
            .map(|j| mat.column(j).norm())
            .fold(0.0_f64, f64::max);
        DirectionMatrix { mat, radius }
    }

    pub fn scaled(&self, alpha: f64) -> Result<DirectionMatrix> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::Invalid(format!("scale factor must be finite and nonzero, got {alpha}")));
        }
        Ok(DirectionMatrix {
            mat: &self.mat * alpha,
            radius: self.radius * alpha.abs(),
        })
    }

    pub fn negated(&self) -> DirectionMatrix {
        DirectionMatrix {
            mat: -&self.mat,
            radius: self.radius,
        }
    }
}

/// Normalize a direction matrix to unit radius.
pub fn normalize(d: &DirectionMatrix) -> DirectionMatrix {
    d.normalized()
}

/// The full input of a simplex-Hessian computation: a point of interest, a
/// direction matrix `S`, and one direction matrix `T_i` per column of `S`.
#[derive(Clone, Debug)]
pub struct SamplePlan {
    x0: Vector,
    s: DirectionMatrix,
    ts: Vec<DirectionMatrix>,
    shared_t: bool,
    tols: Tolerances,
}

impl SamplePlan {
    /// Plan with per-column direction matrices. `ts.len()` must equal the
    /// number of columns of `s`, and all matrices must share the dimension of
    /// `x0`. The shared-T flag is set automatically when all `T_i` are
    /// bit-identical.
    pub fn new(x0: Vector, s: DirectionMatrix, ts: Vec<DirectionMatrix>) -> Result<Self> {
        if x0.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = x0.len();
        if s.rows() != n {
            return Err(Error::Dimension(format!(
                "S has {} rows but x0 has dimension {n}",
                s.rows()
            )));
        }
        if ts.len() != s.cols() {
            return Err(Error::Dimension(format!(
                "expected {} T matrices (one per column of S), got {}",
                s.cols(),
                ts.len()
            )));
        }
        for (i, t) in ts.iter().enumerate() {
            if t.rows() != n {
                return Err(Error::Dimension(format!(
                    "T_{} has {} rows but x0 has dimension {n}",
                    i + 1,
                    t.rows()
                )));
            }
        }
        let shared_t = ts.windows(2).all(|w| w[0].mat() == w[1].mat());
        Ok(SamplePlan {
            x0,
            s,
            ts,
            shared_t,
            tols: Tolerances::default(),
        })
    }

    /// Plan in which every column of `S` uses the same `T`.
    pub fn shared(x0: Vector, s: DirectionMatrix, tbar: DirectionMatrix) -> Result<Self> {
        let m = s.cols();
        SamplePlan::new(x0, s, vec![tbar; m])
    }

    pub fn with_tolerances(mut self, tols: Tolerances) -> Self {
        self.tols = tols;
        self
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    pub fn s(&self) -> &DirectionMatrix {
        &self.s
    }

    pub fn ts(&self) -> &[DirectionMatrix] {
        &self.ts
    }

    pub fn shared_t(&self) -> bool {
        self.shared_t
    }

    pub fn tols(&self) -> Tolerances {
        self.tols
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    /// Number of columns of `S`.
    pub fn m(&self) -> usize {
        self.s.cols()
    }

    /// Largest column count among the `T_i`.
    pub fn k_max(&self) -> usize {
        self.ts.iter().map(|t| t.cols()).max().unwrap_or(0)
    }

    pub fn delta_s(&self) -> f64 {
        self.s.radius()
    }

    pub fn delta_t(&self) -> f64 {
        self.ts.iter().map(|t| t.radius()).fold(0.0_f64, f64::max)
    }

    /// Largest radius among `S` and all `T_i`.
    pub fn delta_u(&self) -> f64 {
        self.delta_s().max(self.delta_t())
    }

    /// Smallest radius among `S` and all `T_i`.
    pub fn delta_l(&self) -> f64 {
        self.ts
            .iter()
            .map(|t| t.radius())
            .fold(self.delta_s(), f64::min)
    }

    /// The plan over `(-S, -T_1, ..., -T_m)`.
    pub fn negated(&self) -> SamplePlan {
        SamplePlan {
            x0: self.x0.clone(),
            s: self.s.negated(),
            ts: self.ts.iter().map(|t| t.negated()).collect(),
            shared_t: self.shared_t,
            tols: self.tols,
        }
    }

    /// The plan over `([S, -S], {T_1, ..., T_m, -T_1, ..., -T_m})`.
    pub fn stacked(&self) -> SamplePlan {
        let n = self.dim();
        let m = self.m();
        let mut mat = Matrix::zeros(n, 2 * m);
        mat.view_mut((0, 0), (n, m)).copy_from(self.s.mat());
        mat.view_mut((0, m), (n, m)).copy_from(&(-self.s.mat()));
        let s = DirectionMatrix {
            mat,
            radius: self.s.radius(),
        };
        let mut ts = self.ts.clone();
        ts.extend(self.ts.iter().map(|t| t.negated()));
        SamplePlan {
            x0: self.x0.clone(),
            s,
            ts,
            shared_t: false,
            tols: self.tols,
        }
    }
}

/// Squareness/rank classification of a direction matrix or a family of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Determination {
    Underdetermined,
    Determined,
    Overdetermined,
    Nondetermined,
}

impl std::fmt::Display for Determination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Determination::Underdetermined => "underdetermined",
            Determination::Determined => "determined",
            Determination::Overdetermined => "overdetermined",
            Determination::Nondetermined => "nondetermined",
        };
        write!(f, "{s}")
    }
}

/// Case labels for the `S` matrix and the `T` family of a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseLabel {
    pub s_case: Determination,
    pub t_case: Determination,
}

fn classify_single(mat: &Matrix, rtol: f64) -> Determination {
    let (n, m) = (mat.nrows(), mat.ncols());
    let rank = numerical_rank(mat, rtol);
    let square = n == m;
    if square && rank == n {
        Determination::Determined
    } else if !square && rank == m {
        Determination::Underdetermined
    } else if !square && rank == n {
        Determination::Overdetermined
    } else {
        Determination::Nondetermined
    }
}

/// Classify a plan's `S` matrix and `T` family by squareness and rank.
pub fn classify(plan: &SamplePlan, rtol: f64) -> CaseLabel {
    let s_case = classify_single(plan.s().mat(), rtol);

    let ranks: Vec<usize> = plan
        .ts()
        .iter()
        .map(|t| numerical_rank(t.mat(), rtol))
        .collect();
    let all_square = plan.ts().iter().all(|t| t.rows() == t.cols());
    let any_non_square = plan.ts().iter().any(|t| t.rows() != t.cols());
    let all_full_col = plan
        .ts()
        .iter()
        .zip(&ranks)
        .all(|(t, &r)| r == t.cols());
    let all_full_row = plan
        .ts()
        .iter()
        .zip(&ranks)
        .all(|(t, &r)| r == t.rows());

    let t_case = if all_square && all_full_row {
        Determination::Determined
    } else if all_full_col && any_non_square {
        Determination::Underdetermined
    } else if all_full_row && any_non_square {
        Determination::Overdetermined
    } else {
        Determination::Nondetermined
    };

    CaseLabel { s_case, t_case }
}

/// A list of pairwise-distinct points under a relative dedup tolerance.
#[derive(Clone, Debug)]
pub struct PointSet {
    points: Vec<Vector>,
    dedup_tol: f64,
}

fn same_point(p: &Vector, q: &Vector, tol: f64) -> bool {
    let scale = 1.0_f64.max(p.amax()).max(q.amax());
    (p - q).amax() <= tol * scale
}

impl PointSet {
    pub fn new(dedup_tol: f64) -> Self {
        PointSet {
            points: Vec::new(),
            dedup_tol,
        }
    }

    /// Insert `p`, returning the index of its representative (either an
    /// existing point within the dedup tolerance or the newly stored one).
    pub fn insert(&mut self, p: Vector) -> usize {
        for (i, q) in self.points.iter().enumerate() {
            if same_point(&p, q, self.dedup_tol) {
                return i;
            }
        }
        self.points.push(p);
        self.points.len() - 1
    }

    pub fn find(&self, p: &Vector) -> Option<usize> {
        self.points
            .iter()
            .position(|q| same_point(p, q, self.dedup_tol))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn dedup_tol(&self) -> f64 {
        self.dedup_tol
    }

    /// Build from raw points, deduplicating as they are inserted.
    pub fn from_points(points: impl IntoIterator<Item = Vector>, dedup_tol: f64) -> Self {
        let mut set = PointSet::new(dedup_tol);
        for p in points {
            set.insert(p);
        }
        set
    }

    /// True when both sets contain the same points up to this set's tolerance.
    pub fn same_set(&self, other: &PointSet) -> bool {
        self.len() == other.len() && other.points.iter().all(|p| self.find(p).is_some())
    }
}

/// Indexes into a [`PointSet`] locating every value a simplex-Hessian
/// computation over one plan consumes.
#[derive(Clone, Debug)]
pub struct GshIndices {
    /// Index of `x0`.
    pub x0: usize,
    /// `shifted[i]`: index of `x0 + s^i`.
    pub shifted: Vec<usize>,
    /// `at_base[i][j]`: index of `x0 + t_i^j`.
    pub at_base: Vec<Vec<usize>>,
    /// `at_shifted[i][j]`: index of `(x0 + s^i) + t_i^j`.
    pub at_shifted: Vec<Vec<usize>>,
}

/// The deduplicated sample set of a GSH computation together with the index
/// map used to assemble difference matrices from per-point values.
#[derive(Clone, Debug)]
pub struct GshLayout {
    pub points: PointSet,
    pub idx: GshIndices,
}

/// Sample set and index maps for a centered (GCSH) computation: the union of
/// the GSH layouts over `(S, T)` and `(-S, -T)`.
#[derive(Clone, Debug)]
pub struct GcshLayout {
    pub points: PointSet,
    pub pos: GshIndices,
    pub neg: GshIndices,
}

/// Insert every point of the plan into `set` in canonical construction order:
/// `x0`, then `x0 + s^i`, then `x0 + t_i^j`, then `(x0 + s^i) + t_i^j`.
///
/// Points are built left-to-right (`x0 + s` computed once, then `+ t`) so
/// identical points are bit-identical whenever possible, maximizing cache
/// hits downstream.
fn fill_indices(plan: &SamplePlan, set: &mut PointSet) -> GshIndices {
    let x0 = plan.x0();
    let m = plan.m();

    let idx_x0 = set.insert(x0.clone());

    let bases: Vec<Vector> = (0..m).map(|i| x0 + plan.s().column(i)).collect();
    let shifted: Vec<usize> = bases.iter().map(|b| set.insert(b.clone())).collect();

    let mut at_base = Vec::with_capacity(m);
    for t in plan.ts() {
        let row: Vec<usize> = (0..t.cols())
            .map(|j| set.insert(x0 + t.column(j)))
            .collect();
        at_base.push(row);
    }

    let mut at_shifted = Vec::with_capacity(m);
    for (i, t) in plan.ts().iter().enumerate() {
        let row: Vec<usize> = (0..t.cols())
            .map(|j| set.insert(&bases[i] + t.column(j)))
            .collect();
        at_shifted.push(row);
    }

    GshIndices {
        x0: idx_x0,
        shifted,
        at_base,
        at_shifted,
    }
}

pub fn gsh_layout(plan: &SamplePlan) -> GshLayout {
    let mut points = PointSet::new(plan.tols().dedup_tol);
    let idx = fill_indices(plan, &mut points);
    GshLayout { points, idx }
}

pub fn gcsh_layout(plan: &SamplePlan) -> GcshLayout {
    let mut points = PointSet::new(plan.tols().dedup_tol);
    let pos = fill_indices(plan, &mut points);
    let neg = fill_indices(&plan.negated(), &mut points);
    GcshLayout { points, pos, neg }
}

/// The distinct points `{x0} ∪ (x0 ⊕ S) ∪ (x0 ⊕ T_i) ∪ (x0 + s^i ⊕ T_i)`.
pub fn enumerate_gsh_points(plan: &SamplePlan) -> PointSet {
    gsh_layout(plan).points
}

/// Union of the GSH point sets over `(S, T_1..T_m)` and `(-S, -T_1..-T_m)`.
pub fn enumerate_gcsh_points(plan: &SamplePlan) -> PointSet {
    gcsh_layout(plan).points
}
