//! Memoizing, counting wrapper around a black-box scalar function.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crate::{Error, Result, Vector};

type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;

/// A black-box scalar function of an n-vector behind a memoizing cache.
///
/// The cache key is the exact bit pattern of the point's coordinates, so two
/// requests hit the same entry only when the constructed points are
/// bit-identical. Tolerance-based identification of nearby points is the job
/// of [`crate::geometry::PointSet`], never of the cache: a tolerance-keyed
/// cache would make results depend on evaluation order.
///
/// Insertion is atomic per key and the wrapped function must be
/// deterministic, so concurrent evaluation is safe and idempotent.
pub struct EvaluationOracle {
    dim: usize,
    func: ValueFn,
    memo: Mutex<HashMap<Vec<u64>, f64>>,
    calls: AtomicUsize,
}

impl EvaluationOracle {
    pub fn new(dim: usize, func: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        EvaluationOracle {
            dim,
            func: Arc::new(func),
            memo: Mutex::new(HashMap::new()),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluate at `x`, consulting the cache first.
    ///
    /// A non-finite result is reported as an evaluation error carrying the
    /// offending point and is not cached.
    pub fn eval(&self, x: &Vector) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "oracle expects dimension {}, got {}",
                self.dim,
                x.len()
            )));
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        {
            let memo = self.memo.lock().unwrap();
            if let Some(&v) = memo.get(&key) {
                return Ok(v);
            }
        }
        let value = (self.func)(x);
        if !value.is_finite() {
            return Err(Error::Evaluation {
                point: x.iter().cloned().collect(),
            });
        }
        self.memo.lock().unwrap().entry(key).or_insert(value);
        Ok(value)
    }

    /// Number of distinct points evaluated so far.
    pub fn distinct_count(&self) -> usize {
        self.memo.lock().unwrap().len()
    }

    /// Total number of evaluation requests, cache hits included.
    pub fn raw_calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    /// Drop all cached values and reset the call counter.
    pub fn reset(&self) {
        self.memo.lock().unwrap().clear();
        self.calls.store(0, Ordering::Relaxed);
    }
}

impl std::fmt::Debug for EvaluationOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvaluationOracle")
            .field("dim", &self.dim)
            .field("distinct_count", &self.distinct_count())
            .field("raw_calls", &self.raw_calls())
            .finish()
    }
}
