//! Test-function catalog, memoizing evaluation oracle, convergence studies,
//! and empirical order estimation.

mod catalog;
mod convergence;
mod oracle;

pub use catalog::{
    by_name, catalog, oracle_for, CubicSum, ExpSum, Quadratic, Rosenbrock, TestFunction, TrigProd,
};
pub use convergence::{
    convergence_study, estimate_order, radii_geometric, verify_bounds, ConvergenceReport,
    ConvergenceRow, OrderFit, StudyMode, ORDER_FIT_FLOOR_FACTOR,
};
pub use oracle::EvaluationOracle;
