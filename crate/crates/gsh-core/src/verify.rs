//! Runnable invariant suites behind the `verify` command: each suite
//! re-checks a family of structural identities or error bounds on seeded
//! random inputs and reports machine-readable pass/fail results.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::analysis::{
    catalog, convergence_study, oracle_for, radii_geometric, verify_bounds, StudyMode,
    TestFunction,
};
use crate::geometry::{enumerate_gsh_points, DirectionMatrix, SamplePlan};
use crate::gradient::gsg;
use crate::hessian::{gcsh, gsh, project_hessian};
use crate::linalg::{frobenius_norm, pseudoinverse, spectral_norm};
use crate::poised::{build_u, qi_closed_form, qi_poised, qi_solve, quadratic_basis_size};
use crate::{Matrix, Result, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Linalg,
    Hessian,
    Poised,
    Bounds,
    All,
}

impl Suite {
    pub fn from_name(name: &str) -> Option<Suite> {
        match name {
            "linalg" => Some(Suite::Linalg),
            "hessian" => Some(Suite::Hessian),
            "poised" => Some(Suite::Poised),
            "bounds" => Some(Suite::Bounds),
            "all" => Some(Suite::All),
            _ => None,
        }
    }
}

/// One named check with its outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn check(checks: &mut Vec<Check>, name: &str, passed: bool, detail: String) {
    checks.push(Check {
        name: name.to_string(),
        passed,
        detail,
    });
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Random square matrix with condition number below 20: the structural
/// identities hold exactly in real arithmetic, and bounding the conditioning
/// keeps their floating-point residuals near machine precision.
fn random_full_rank(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    loop {
        let m = random_matrix(rng, n, n);
        let sigma = crate::linalg::singular_values(&m);
        let smax = sigma.iter().cloned().fold(0.0_f64, f64::max);
        let smin = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin > 0.05 * smax {
            return m;
        }
    }
}

fn linalg_suite(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let mut worst_penrose = 0.0_f64;
    let mut worst_double = 0.0_f64;
    let mut norm_ok = true;
    for trial in 0..200 {
        let rows = rng.random_range(1..=8);
        let cols = rng.random_range(1..=8);
        let a = if trial % 3 == 0 && rows.min(cols) > 1 {
            let inner = rng.random_range(1..rows.min(cols));
            random_matrix(&mut rng, rows, inner) * random_matrix(&mut rng, inner, cols)
        } else {
            random_matrix(&mut rng, rows, cols)
        };
        let p = match pseudoinverse(&a) {
            Ok(p) => p,
            Err(e) => {
                check(&mut checks, "pseudoinverse", false, format!("{e}"));
                return checks;
            }
        };
        let scale = 1.0_f64.max(a.norm());
        let ap = &a * &p;
        let pa = &p * &a;
        let residual = [
            (&ap * &a - &a).norm(),
            (&pa * &p - &p).norm(),
            (ap.transpose() - &ap).norm(),
            (pa.transpose() - &pa).norm(),
        ]
        .into_iter()
        .fold(0.0_f64, f64::max)
            / scale;
        worst_penrose = worst_penrose.max(residual);
        if let Ok(back) = pseudoinverse(&p) {
            worst_double = worst_double.max((back - &a).norm() / scale);
        }
        norm_ok &= spectral_norm(&a) <= frobenius_norm(&a) + 1e-12;
    }
    check(
        &mut checks,
        "penrose_conditions",
        worst_penrose <= 1e-10,
        format!("worst relative residual {worst_penrose:.3e} over 200 matrices"),
    );
    check(
        &mut checks,
        "double_pseudoinverse",
        worst_double <= 1e-9,
        format!("worst relative deviation {worst_double:.3e}"),
    );
    check(
        &mut checks,
        "spectral_below_frobenius",
        norm_ok,
        "spectral norm bounded by Frobenius norm".into(),
    );
    checks
}

fn smooth_test_field(n: usize) -> Arc<dyn TestFunction> {
    // A function with non-trivial third derivatives everywhere.
    Arc::clone(&catalog(n)[2])
}

fn hessian_suite(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let n = 3;
    let func = smooth_test_field(n);

    let mut worst_triangle = 0.0_f64;
    let mut worst_transpose = 0.0_f64;
    let mut worst_idempotent = 0.0_f64;
    let mut worst_stack_pinv = 0.0_f64;
    let mut worst_gsg_fixed = 0.0_f64;

    for _ in 0..20 {
        let x0 = Vector::from_fn(n, |_, _| rng.random_range(-0.3..0.3));
        // Radii well above the scale where eps * |f| / h^2 cancellation
        // noise would mask the identities.
        let h = rng.random_range(0.05..0.2);
        let s = DirectionMatrix::new(random_full_rank(&mut rng, n) * h).unwrap();
        let t = DirectionMatrix::new(random_full_rank(&mut rng, n) * h).unwrap();
        let plan = SamplePlan::shared(x0.clone(), s.clone(), t.clone()).unwrap();
        let oracle = oracle_for(&func);

        // Definitional triangle: centered assembly, the average of the two
        // one-sided estimates, and the stacked-plan estimate all agree.
        let centered = gcsh(&oracle, &plan).unwrap().matrix;
        let fwd = gsh(&oracle, &plan).unwrap().matrix;
        let bwd = gsh(&oracle, &plan.negated()).unwrap().matrix;
        let average = (&fwd + &bwd) * 0.5;
        let stacked = gsh(&oracle, &plan.stacked()).unwrap().matrix;
        let scale = 1.0_f64.max(spectral_norm(&centered));
        worst_triangle = worst_triangle
            .max(spectral_norm(&(&centered - &average)) / scale)
            .max(spectral_norm(&(&centered - &stacked)) / scale);

        // Transpose identity over swapped direction roles.
        let plan_ts = SamplePlan::shared(x0.clone(), t.clone(), s.clone()).unwrap();
        let swapped = gsh(&oracle, &plan_ts).unwrap().matrix;
        worst_transpose =
            worst_transpose.max(spectral_norm(&(fwd.transpose() - &swapped)) / scale);
        let swapped_c = gcsh(&oracle, &plan_ts).unwrap().matrix;
        worst_transpose =
            worst_transpose.max(spectral_norm(&(centered.transpose() - &swapped_c)) / scale);

        // Projection leaves both estimators unchanged (full-rank shared T).
        let proj = project_hessian(&fwd, &plan).unwrap();
        worst_idempotent = worst_idempotent.max(spectral_norm(&(&proj - &fwd)) / scale);
        let proj_c = project_hessian(&centered, &plan).unwrap();
        worst_idempotent = worst_idempotent.max(spectral_norm(&(&proj_c - &centered)) / scale);

        // Pseudoinverse of [S, -S].
        let m = s.cols();
        let mut stacked_s = Matrix::zeros(n, 2 * m);
        stacked_s.view_mut((0, 0), (n, m)).copy_from(s.mat());
        stacked_s.view_mut((0, m), (n, m)).copy_from(&(-s.mat()));
        let lhs = pseudoinverse(&stacked_s).unwrap();
        let sp = pseudoinverse(s.mat()).unwrap();
        let mut rhs = Matrix::zeros(2 * m, n);
        rhs.view_mut((0, 0), (m, n)).copy_from(&(&sp * 0.5));
        rhs.view_mut((m, 0), (m, n)).copy_from(&(&sp * -0.5));
        worst_stack_pinv = worst_stack_pinv.max((lhs - &rhs).norm() / rhs.norm().max(1.0));

        // Gradient projection fixed point.
        let g = gsg(&oracle, &x0, &s).unwrap().vector;
        let st = s.mat().transpose();
        let st_pinv = pseudoinverse(&st).unwrap();
        let projected = &st_pinv * (&st * &g);
        worst_gsg_fixed = worst_gsg_fixed.max((projected - &g).norm() / g.norm().max(1.0));
    }

    check(
        &mut checks,
        "gcsh_definitional_triangle",
        worst_triangle <= 1e-12,
        format!("worst relative deviation {worst_triangle:.3e}"),
    );
    check(
        &mut checks,
        "transpose_identity",
        worst_transpose <= 1e-12,
        format!("worst relative deviation {worst_transpose:.3e}"),
    );
    check(
        &mut checks,
        "projection_idempotence",
        worst_idempotent <= 1e-12,
        format!("worst relative deviation {worst_idempotent:.3e}"),
    );
    check(
        &mut checks,
        "stacked_pseudoinverse",
        worst_stack_pinv <= 1e-12,
        format!("worst relative deviation {worst_stack_pinv:.3e}"),
    );
    check(
        &mut checks,
        "gsg_projection_fixed_point",
        worst_gsg_fixed <= 1e-12,
        format!("worst relative deviation {worst_gsg_fixed:.3e}"),
    );
    checks
}

fn poised_suite(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // Point counts for the minimal construction across dimensions.
    let mut counts_ok = true;
    let mut detail = String::new();
    for n in 1..=6 {
        let s = DirectionMatrix::new(random_full_rank(&mut rng, n)).unwrap();
        for ell in 0..=n {
            let u = build_u(&s, ell).unwrap();
            let x0 = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let plan = SamplePlan::shared(x0, s.clone(), u).unwrap();
            let count = enumerate_gsh_points(&plan).len();
            if count != quadratic_basis_size(n) {
                counts_ok = false;
                detail = format!("n={n} ell={ell}: {count} points");
            }
        }
    }
    check(
        &mut checks,
        "minimal_point_counts",
        counts_ok,
        if detail.is_empty() {
            "exact counts for n in 1..=6, all ell".into()
        } else {
            detail
        },
    );

    // Invariance under invertible column mixing and permutations.
    let mut invariance_ok = true;
    for n in [2usize, 3] {
        let s = DirectionMatrix::new(random_full_rank(&mut rng, n)).unwrap();
        let u = build_u(&s, n).unwrap();
        let nmat = random_full_rank(&mut rng, n);
        let mut p1 = Matrix::zeros(n, n);
        let mut p2 = Matrix::zeros(n, n);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(1);
        for (i, &j) in perm.iter().enumerate() {
            p1[(j, i)] = 1.0;
            p2[(i, j)] = 1.0;
        }
        let s2 = DirectionMatrix::new(&nmat * s.mat() * p1).unwrap();
        let u2 = DirectionMatrix::new(&nmat * u.mat() * p2).unwrap();
        let x0 = Vector::zeros(n);
        let plan = SamplePlan::shared(x0.clone(), s2, u2).unwrap();
        invariance_ok &= enumerate_gsh_points(&plan).len() == quadratic_basis_size(n);
    }
    check(
        &mut checks,
        "minimal_set_invariance",
        invariance_ok,
        "counts preserved under N S P1, N T P2".into(),
    );

    // Every generated minimal set is poised for quadratic interpolation.
    let mut poised_ok = true;
    for n in [2usize, 3, 4] {
        let s = DirectionMatrix::new(random_full_rank(&mut rng, n)).unwrap();
        for ell in 0..=n {
            let u = build_u(&s, ell).unwrap();
            let plan = SamplePlan::shared(Vector::zeros(n), s.clone(), u).unwrap();
            let points = enumerate_gsh_points(&plan);
            poised_ok &= qi_poised(&points).map(|r| r.poised).unwrap_or(false);
        }
    }
    check(
        &mut checks,
        "minimal_sets_poised",
        poised_ok,
        "interpolation system full rank on every generated set".into(),
    );

    // Closed-form interpolation agrees with the general solve and with the
    // Hessian estimator.
    let mut agreement = 0.0_f64;
    for _ in 0..6 {
        let n = rng.random_range(2..=3);
        let func = smooth_test_field(n);
        let s = DirectionMatrix::new(random_full_rank(&mut rng, n) * 0.5).unwrap();
        let ell = rng.random_range(0..=n);
        let x0 = Vector::from_fn(n, |_, _| rng.random_range(-0.2..0.2));
        let oracle = oracle_for(&func);
        let model = match qi_closed_form(&oracle, &x0, &s, ell) {
            Ok(m) => m,
            Err(e) => {
                check(&mut checks, "closed_form_interpolation", false, format!("{e}"));
                return checks;
            }
        };
        let u = build_u(&s, ell).unwrap();
        let plan = SamplePlan::shared(x0.clone(), s.clone(), u).unwrap();
        let points = enumerate_gsh_points(&plan);
        let values: Vec<f64> = points.points().iter().map(|p| func.value(p)).collect();
        let solved = qi_solve(&points, &values).unwrap();
        let scale = 1.0_f64.max(spectral_norm(&solved.hessian));
        agreement = agreement
            .max(spectral_norm(&(&model.hessian - &solved.hessian)) / scale)
            .max((&model.alpha - &solved.alpha).norm() / scale)
            .max((model.alpha0 - solved.alpha0).abs() / scale);
        let est = gsh(&oracle, &plan).unwrap();
        // The raw estimator output may be asymmetric only at round-off here.
        agreement = agreement.max(spectral_norm(&(&model.hessian - &est.matrix)) / scale);
        let vmax = values.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        for (p, &fv) in points.points().iter().zip(&values) {
            agreement = agreement.max((model.evaluate(p) - fv).abs() / vmax.max(1.0) * 10.0);
        }
    }
    check(
        &mut checks,
        "closed_form_interpolation",
        agreement <= 1e-8,
        format!("worst relative deviation {agreement:.3e}"),
    );
    checks
}

fn bounds_suite(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let n = 3;
    let radii = radii_geometric(1e-1, 1e-3, 8).expect("valid grid");

    // Plan shape templates at unit scale.
    let identity = DirectionMatrix::scaled_identity(n, 1.0).unwrap();
    let tall = DirectionMatrix::new(Matrix::from_row_slice(
        n,
        2,
        &[1., 0., 0., 1., 0., 0.],
    ))
    .unwrap();
    let wide = DirectionMatrix::new(Matrix::from_row_slice(
        n,
        4,
        &[1., 0., 0., 0.5, 0., 1., 0., 0.5, 0., 0., 1., -0.5],
    ))
    .unwrap();
    let x0 = Vector::from_fn(n, |_, _| rng.random_range(-0.2..0.2));

    let shapes: Vec<(&str, SamplePlan)> = vec![
        (
            "determined_shared",
            SamplePlan::shared(x0.clone(), identity.clone(), identity.clone()).unwrap(),
        ),
        (
            "s_underdetermined_shared",
            SamplePlan::shared(x0.clone(), tall.clone(), identity.clone()).unwrap(),
        ),
        (
            "t_overdetermined_shared",
            SamplePlan::shared(x0.clone(), identity.clone(), wide.clone()).unwrap(),
        ),
        (
            "determined_distinct_t",
            SamplePlan::new(
                x0.clone(),
                identity.clone(),
                vec![
                    identity.clone(),
                    DirectionMatrix::new(random_full_rank(&mut rng, n)).unwrap().normalized(),
                    DirectionMatrix::new(random_full_rank(&mut rng, n)).unwrap().normalized(),
                ],
            )
            .unwrap(),
        ),
        (
            "s_underdetermined_distinct_t",
            SamplePlan::new(
                x0.clone(),
                tall.clone(),
                vec![
                    identity.clone(),
                    DirectionMatrix::new(random_full_rank(&mut rng, n)).unwrap().normalized(),
                ],
            )
            .unwrap(),
        ),
    ];

    let mut triples = 0usize;
    let mut all_ok = true;
    let mut first_failure = String::new();
    for func in catalog(n) {
        for (shape_name, template) in &shapes {
            for mode in [StudyMode::Gsh, StudyMode::Gcsh] {
                match convergence_study(&func, template, &radii, mode) {
                    Ok(report) => {
                        triples += report.rows.len();
                        if !verify_bounds(&report) {
                            all_ok = false;
                            if first_failure.is_empty() {
                                first_failure =
                                    format!("{} / {} / {:?}", func.name(), shape_name, mode);
                            }
                        }
                    }
                    Err(e) => {
                        all_ok = false;
                        if first_failure.is_empty() {
                            first_failure =
                                format!("{} / {} / {:?}: {e}", func.name(), shape_name, mode);
                        }
                    }
                }
            }
        }
    }
    check(
        &mut checks,
        "error_bounds_hold",
        all_ok,
        if all_ok {
            format!("checked {triples} (function, plan, radius) triples")
        } else {
            format!("first failure at {first_failure}")
        },
    );
    checks
}

/// Run one suite (or all of them) with a fixed seed.
pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let (name, checks) = match suite {
        Suite::Linalg => ("linalg", linalg_suite(seed)),
        Suite::Hessian => ("hessian", hessian_suite(seed)),
        Suite::Poised => ("poised", poised_suite(seed)),
        Suite::Bounds => ("bounds", bounds_suite(seed)),
        Suite::All => {
            let mut checks = linalg_suite(seed);
            checks.extend(hessian_suite(seed));
            checks.extend(poised_suite(seed));
            checks.extend(bounds_suite(seed));
            ("all", checks)
        }
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        checks,
    })
}
