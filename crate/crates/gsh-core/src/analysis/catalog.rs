//! Catalog of smooth test functions with analytic derivatives and
//! ball-restricted Lipschitz constants for the gradient, Hessian and third
//! derivative.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::EvaluationOracle;
use crate::linalg::spectral_norm;
use crate::{Matrix, Vector};

/// A test function with closed-form derivatives.
///
/// The `lip_*` methods return Lipschitz constants valid on the closed ball of
/// radius `delta` about `x0`. They are upper bounds, not suprema: loose is
/// fine, invalid is not.
pub trait TestFunction: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    fn hessian(&self, x: &Vector) -> Matrix;
    /// Lipschitz constant of the gradient on `B(x0, delta)`.
    fn lip_grad(&self, x0: &Vector, delta: f64) -> f64;
    /// Lipschitz constant of the Hessian on `B(x0, delta)`.
    fn lip_hess(&self, x0: &Vector, delta: f64) -> f64;
    /// Lipschitz constant of the third derivative on `B(x0, delta)`.
    fn lip_third(&self, x0: &Vector, delta: f64) -> f64;
}

/// Wrap a catalog function in a fresh memoizing oracle.
pub fn oracle_for(f: &Arc<dyn TestFunction>) -> EvaluationOracle {
    let g = Arc::clone(f);
    EvaluationOracle::new(f.dim(), move |x: &Vector| g.value(x))
}

// ---------------------------------------------------------------------------

/// `f(x) = x' A x / 2 + b' x + c` with symmetric `A`.
pub struct Quadratic {
    name: String,
    a: Matrix,
    b: Vector,
    c: f64,
    a_norm: f64,
}

impl Quadratic {
    pub fn new(name: impl Into<String>, a: Matrix, b: Vector, c: f64) -> Self {
        assert_eq!(a.nrows(), a.ncols());
        assert_eq!(a.nrows(), b.len());
        let a = (&a + a.transpose()) * 0.5;
        let a_norm = spectral_norm(&a);
        Quadratic {
            name: name.into(),
            a,
            b,
            c,
            a_norm,
        }
    }

    /// Seeded random symmetric quadratic.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let b = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let c = rng.random_range(-1.0..1.0);
        Quadratic::new(format!("quad{n}"), raw, b, c)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }
}

impl TestFunction for Quadratic {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x) + self.c
    }
    fn gradient(&self, x: &Vector) -> Vector {
        &self.a * x + &self.b
    }
    fn hessian(&self, _x: &Vector) -> Matrix {
        self.a.clone()
    }
    fn lip_grad(&self, _x0: &Vector, _delta: f64) -> f64 {
        self.a_norm
    }
    fn lip_hess(&self, _x0: &Vector, _delta: f64) -> f64 {
        0.0
    }
    fn lip_third(&self, _x0: &Vector, _delta: f64) -> f64 {
        0.0
    }
}

// ---------------------------------------------------------------------------

/// `f(x) = sum_i x_i^3`.
pub struct CubicSum {
    name: String,
    n: usize,
}

impl CubicSum {
    pub fn new(n: usize) -> Self {
        CubicSum {
            name: format!("cubicsum{n}"),
            n,
        }
    }
}

impl TestFunction for CubicSum {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &Vector) -> f64 {
        x.iter().map(|v| v * v * v).sum()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_fn(self.n, |i, _| 3.0 * x[i] * x[i])
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| if i == j { 6.0 * x[i] } else { 0.0 })
    }
    fn lip_grad(&self, x0: &Vector, delta: f64) -> f64 {
        6.0 * (x0.amax() + delta)
    }
    fn lip_hess(&self, _x0: &Vector, _delta: f64) -> f64 {
        // diag(6 x_i) moves at component-wise slope 6
        6.0
    }
    fn lip_third(&self, _x0: &Vector, _delta: f64) -> f64 {
        0.0
    }
}

// ---------------------------------------------------------------------------

/// `f(x) = exp(a' x)`.
pub struct ExpSum {
    name: String,
    a: Vector,
    a_norm: f64,
}

impl ExpSum {
    pub fn new(a: Vector) -> Self {
        let a_norm = a.norm();
        ExpSum {
            name: format!("expsum{}", a.len()),
            a,
            a_norm,
        }
    }

    pub fn ones(n: usize) -> Self {
        ExpSum::new(Vector::from_element(n, 1.0))
    }

    /// sup of exp(a'x) over the ball of radius `delta` about `x0`.
    fn ball_sup(&self, x0: &Vector, delta: f64) -> f64 {
        (self.a.dot(x0) + self.a_norm * delta).exp()
    }
}

impl TestFunction for ExpSum {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.a.dot(x).exp()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        &self.a * self.value(x)
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        let v = self.value(x);
        let n = self.a.len();
        Matrix::from_fn(n, n, |i, j| self.a[i] * self.a[j] * v)
    }
    fn lip_grad(&self, x0: &Vector, delta: f64) -> f64 {
        self.a_norm.powi(2) * self.ball_sup(x0, delta)
    }
    fn lip_hess(&self, x0: &Vector, delta: f64) -> f64 {
        self.a_norm.powi(3) * self.ball_sup(x0, delta)
    }
    fn lip_third(&self, x0: &Vector, delta: f64) -> f64 {
        self.a_norm.powi(4) * self.ball_sup(x0, delta)
    }
}

// ---------------------------------------------------------------------------

/// `f(x) = prod_i sin(x_i + phase)`.
///
/// Every mixed partial of any order is a product of sines and cosines, so
/// each entry is bounded by 1 in magnitude; the Lipschitz constants below are
/// Frobenius-norm bounds on the corresponding derivative tensors.
pub struct TrigProd {
    name: String,
    n: usize,
    phase: f64,
}

impl TrigProd {
    pub fn new(n: usize) -> Self {
        TrigProd {
            name: format!("trigprod{n}"),
            n,
            phase: 0.7,
        }
    }

    fn sines(&self, x: &Vector) -> (Vec<f64>, Vec<f64>) {
        let s: Vec<f64> = x.iter().map(|v| (v + self.phase).sin()).collect();
        let c: Vec<f64> = x.iter().map(|v| (v + self.phase).cos()).collect();
        (s, c)
    }

    fn product_excluding(s: &[f64], skip: &[usize]) -> f64 {
        s.iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .map(|(_, v)| v)
            .product()
    }
}

impl TestFunction for TrigProd {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &Vector) -> f64 {
        let (s, _) = self.sines(x);
        s.iter().product()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let (s, c) = self.sines(x);
        Vector::from_fn(self.n, |i, _| c[i] * Self::product_excluding(&s, &[i]))
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        let (s, c) = self.sines(x);
        let f: f64 = s.iter().product();
        Matrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                -f
            } else {
                c[i] * c[j] * Self::product_excluding(&s, &[i, j])
            }
        })
    }
    fn lip_grad(&self, _x0: &Vector, _delta: f64) -> f64 {
        self.n as f64
    }
    fn lip_hess(&self, _x0: &Vector, _delta: f64) -> f64 {
        (self.n as f64).powf(1.5)
    }
    fn lip_third(&self, _x0: &Vector, _delta: f64) -> f64 {
        (self.n as f64).powi(2)
    }
}

// ---------------------------------------------------------------------------

/// The two-dimensional Rosenbrock function `(1-x1)^2 + 100 (x2 - x1^2)^2`.
pub struct Rosenbrock {
    a: f64,
    b: f64,
}

impl Rosenbrock {
    pub fn new() -> Self {
        Rosenbrock { a: 1.0, b: 100.0 }
    }
}

impl Default for Rosenbrock {
    fn default() -> Self {
        Rosenbrock::new()
    }
}

impl TestFunction for Rosenbrock {
    fn name(&self) -> &str {
        "rosenbrock"
    }
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &Vector) -> f64 {
        (self.a - x[0]).powi(2) + self.b * (x[1] - x[0] * x[0]).powi(2)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let g1 = -2.0 * (self.a - x[0]) - 4.0 * self.b * x[0] * (x[1] - x[0] * x[0]);
        let g2 = 2.0 * self.b * (x[1] - x[0] * x[0]);
        Vector::from_vec(vec![g1, g2])
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        let h11 = 2.0 - 4.0 * self.b * x[1] + 12.0 * self.b * x[0] * x[0];
        let h12 = -4.0 * self.b * x[0];
        Matrix::from_row_slice(2, 2, &[h11, h12, h12, 2.0 * self.b])
    }
    fn lip_grad(&self, x0: &Vector, delta: f64) -> f64 {
        let z1 = x0[0].abs() + delta;
        let z2 = x0[1].abs() + delta;
        let h11 = 2.0 + 4.0 * self.b * z2 + 12.0 * self.b * z1 * z1;
        let h12 = 4.0 * self.b * z1;
        (h11 * h11 + 2.0 * h12 * h12 + (2.0 * self.b).powi(2)).sqrt()
    }
    fn lip_hess(&self, x0: &Vector, delta: f64) -> f64 {
        let z1 = x0[0].abs() + delta;
        ((24.0 * self.b * z1).powi(2) + 3.0 * (4.0 * self.b).powi(2)).sqrt()
    }
    fn lip_third(&self, _x0: &Vector, _delta: f64) -> f64 {
        24.0 * self.b
    }
}

// ---------------------------------------------------------------------------

const QUAD_SEED_BASE: u64 = 0x5eed;

/// The standard catalog for dimension `n`: a seeded random quadratic, the
/// separable cubic, the exponential of a sum, a trigonometric product, and
/// (in two dimensions) Rosenbrock.
pub fn catalog(n: usize) -> Vec<Arc<dyn TestFunction>> {
    assert!(n >= 1);
    let mut list: Vec<Arc<dyn TestFunction>> = vec![
        Arc::new(Quadratic::random(n, QUAD_SEED_BASE + n as u64)),
        Arc::new(CubicSum::new(n)),
        Arc::new(ExpSum::ones(n)),
        Arc::new(TrigProd::new(n)),
    ];
    if n == 2 {
        list.push(Arc::new(Rosenbrock::new()));
    }
    list
}

/// Look up a catalog function by name: `quad<N>`, `cubicsum<N>`, `expsum<N>`,
/// `trigprod<N>`, `rosenbrock`, plus the alias `cubic1d`.
pub fn by_name(name: &str) -> Option<Arc<dyn TestFunction>> {
    match name {
        "rosenbrock" => return Some(Arc::new(Rosenbrock::new())),
        "cubic1d" => return Some(Arc::new(CubicSum::new(1))),
        _ => {}
    }
    let split = name.find(|c: char| c.is_ascii_digit())?;
    let (base, digits) = name.split_at(split);
    let n: usize = digits.parse().ok()?;
    if n == 0 || n > 16 {
        return None;
    }
    match base {
        "quad" => Some(Arc::new(Quadratic::random(n, QUAD_SEED_BASE + n as u64))),
        "cubicsum" => Some(Arc::new(CubicSum::new(n))),
        "expsum" => Some(Arc::new(ExpSum::ones(n))),
        "trigprod" => Some(Arc::new(TrigProd::new(n))),
        _ => None,
    }
}
