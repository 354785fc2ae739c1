//! Command-line front end: compute Hessian estimates, run convergence
//! studies, generate minimal sample sets, and run the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage/input error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gsh_core::analysis::{
    by_name, convergence_study, oracle_for, radii_geometric, StudyMode, TestFunction,
};
use gsh_core::geometry::{enumerate_gsh_points, DirectionMatrix, SamplePlan};
use gsh_core::hessian::{gcsh, gsh, HessianEstimate};
use gsh_core::io;
use gsh_core::poised::{build_u, qi_poised, quadratic_basis_size};
use gsh_core::verify::{run_suite, Suite};
use gsh_core::{Matrix, Tolerances, Vector};

#[derive(Parser)]
#[command(
    name = "gsh",
    about = "Simplex-gradient and simplex-Hessian estimation from function values",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a Hessian estimate for a catalog function.
    Compute(ComputeArgs),
    /// Run a convergence study over a shrinking radius grid.
    Converge(ConvergeArgs),
    /// Generate a minimal sample set and check its poisedness.
    MinimalSet(MinimalSetArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Gsh,
    Gcsh,
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyModeArg {
    Gsg,
    Gsh,
    Gcsh,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// S = T = h * Id.
    Identity,
    /// S = h * Id, T the canonical minimal-set companion for --ell.
    Canonical,
    /// T built from S by the minimal-set column replacement for --ell.
    UOfS,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct ComputeArgs {
    /// Catalog function name (quad2, cubicsum3, expsum2, trigprod3,
    /// rosenbrock, cubic1d, ...).
    #[arg(long)]
    func: String,
    /// Point of interest, comma-separated.
    #[arg(long)]
    x0: String,
    /// Estimator to use.
    #[arg(long, value_enum, default_value = "gsh")]
    mode: ModeArg,
    /// Direction preset; ignored when --s-file is given together with
    /// --t-file.
    #[arg(long, value_enum, default_value = "identity")]
    preset: Preset,
    /// Scale for preset directions.
    #[arg(long, default_value_t = 0.1)]
    h: f64,
    /// Distinguished column index for canonical/u-of-s presets (0..=n).
    #[arg(long)]
    ell: Option<usize>,
    /// CSV file holding S (one matrix row per line).
    #[arg(long)]
    s_file: Option<PathBuf>,
    /// CSV file holding a shared T.
    #[arg(long)]
    t_file: Option<PathBuf>,
    /// Return the symmetrized estimate (M + M')/2.
    #[arg(long)]
    symmetrize: bool,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long)]
    func: String,
    #[arg(long, value_enum, default_value = "gsh")]
    mode: StudyModeArg,
    /// Radius grid as start:stop:count (geometric).
    #[arg(long, default_value = "1e-1:1e-3:8")]
    radii: String,
    /// Point of interest; defaults to the origin.
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, value_enum, default_value = "identity")]
    preset: Preset,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    s_file: Option<PathBuf>,
    #[arg(long)]
    t_file: Option<PathBuf>,
    /// Write the JSON summary to this file instead of stderr.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct MinimalSetArgs {
    /// Ambient dimension.
    #[arg(long)]
    dim: usize,
    /// Distinguished column index (0..=dim).
    #[arg(long)]
    ell: usize,
    /// Optional CSV file holding a full-rank square S; identity otherwise.
    #[arg(long)]
    s_file: Option<PathBuf>,
    /// Point of interest; defaults to the origin.
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name: linalg, hessian, poised, bounds, all.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Errors that indicate misuse and exit with code 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn parse_vector(text: &str) -> Result<Vector, UsageError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|f| f.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| UsageError(format!("bad vector {text:?}: {e}")))?;
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(UsageError(format!("bad vector {text:?}")));
    }
    Ok(Vector::from_vec(values))
}

fn parse_radii(text: &str) -> Result<Vec<f64>, UsageError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(UsageError(format!(
            "radii must be given as start:stop:count, got {text:?}"
        )));
    }
    let start: f64 = parts[0].trim().parse().map_err(|e| UsageError(format!("{e}")))?;
    let stop: f64 = parts[1].trim().parse().map_err(|e| UsageError(format!("{e}")))?;
    let count: usize = parts[2].trim().parse().map_err(|e| UsageError(format!("{e}")))?;
    Ok(radii_geometric(start, stop, count)?)
}

fn read_matrix(path: &PathBuf) -> Result<Matrix, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    Ok(io::matrix_from_csv(&text)?)
}

fn env_tolerances() -> Result<Tolerances, UsageError> {
    let mut tols = Tolerances::default();
    if let Ok(text) = std::env::var("GSH_SVD_RTOL") {
        let v: f64 = text
            .parse()
            .map_err(|e| UsageError(format!("bad GSH_SVD_RTOL: {e}")))?;
        if !(v > 0.0) {
            return Err(UsageError("GSH_SVD_RTOL must be positive".into()));
        }
        tols.svd_rtol = Some(v);
    }
    if let Ok(text) = std::env::var("GSH_DEDUP_TOL") {
        let v: f64 = text
            .parse()
            .map_err(|e| UsageError(format!("bad GSH_DEDUP_TOL: {e}")))?;
        if !(v > 0.0) {
            return Err(UsageError("GSH_DEDUP_TOL must be positive".into()));
        }
        tols.dedup_tol = v;
    }
    Ok(tols)
}

fn lookup_function(name: &str) -> Result<Arc<dyn TestFunction>, UsageError> {
    by_name(name).ok_or_else(|| UsageError(format!("unknown function {name:?}")))
}

fn build_directions(
    n: usize,
    preset: Preset,
    h: f64,
    ell: Option<usize>,
    s_file: &Option<PathBuf>,
    t_file: &Option<PathBuf>,
) -> Result<(DirectionMatrix, DirectionMatrix), UsageError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(UsageError(format!("h must be positive, got {h}")));
    }
    let s = match s_file {
        Some(path) => DirectionMatrix::new(read_matrix(path)?)?,
        None => DirectionMatrix::scaled_identity(n, h)?,
    };
    if s.rows() != n {
        return Err(UsageError(format!(
            "S has {} rows but the function dimension is {n}",
            s.rows()
        )));
    }
    let t = match t_file {
        Some(path) => DirectionMatrix::new(read_matrix(path)?)?,
        None => match preset {
            Preset::Identity => DirectionMatrix::scaled_identity(n, h)?,
            Preset::Canonical => {
                let ell = ell.ok_or(UsageError("--preset canonical requires --ell".into()))?;
                let base = DirectionMatrix::scaled_identity(n, 1.0)?;
                build_u(&base, ell)?.scaled(h)?
            }
            Preset::UOfS => {
                let ell = ell.ok_or(UsageError("--preset u-of-s requires --ell".into()))?;
                build_u(&s, ell)?
            }
        },
    };
    if t.rows() != n {
        return Err(UsageError(format!(
            "T has {} rows but the function dimension is {n}",
            t.rows()
        )));
    }
    Ok((s, t))
}

fn cmd_compute(args: &ComputeArgs) -> Result<(), UsageError> {
    let func = lookup_function(&args.func)?;
    let x0 = parse_vector(&args.x0)?;
    if x0.len() != func.dim() {
        return Err(UsageError(format!(
            "x0 has dimension {} but {} expects {}",
            x0.len(),
            args.func,
            func.dim()
        )));
    }
    let (s, t) = build_directions(
        func.dim(),
        args.preset,
        args.h,
        args.ell,
        &args.s_file,
        &args.t_file,
    )?;
    let plan = SamplePlan::shared(x0, s, t)?.with_tolerances(env_tolerances()?);
    let oracle = oracle_for(&func);
    let mut est: HessianEstimate = match args.mode {
        ModeArg::Gsh => gsh(&oracle, &plan)?,
        ModeArg::Gcsh => gcsh(&oracle, &plan)?,
    };
    if args.symmetrize {
        est.matrix = est.symmetrized();
    }
    println!("{}", io::hessian_estimate_to_json(&est));
    Ok(())
}

fn cmd_converge(args: &ConvergeArgs) -> Result<(), UsageError> {
    let func = lookup_function(&args.func)?;
    let n = func.dim();
    let x0 = match &args.x0 {
        Some(text) => parse_vector(text)?,
        None => Vector::zeros(n),
    };
    if x0.len() != n {
        return Err(UsageError(format!(
            "x0 has dimension {} but {} expects {n}",
            x0.len(),
            args.func
        )));
    }
    let radii = parse_radii(&args.radii)?;
    let (s, t) = build_directions(n, args.preset, 1.0, args.ell, &args.s_file, &args.t_file)?;
    let template = SamplePlan::shared(x0, s, t)?.with_tolerances(env_tolerances()?);
    let mode = match args.mode {
        StudyModeArg::Gsg => StudyMode::Gsg,
        StudyModeArg::Gsh => StudyMode::Gsh,
        StudyModeArg::Gcsh => StudyMode::Gcsh,
    };
    let report = convergence_study(&func, &template, &radii, mode)?;
    print!("{}", io::report_to_csv(&report));
    let summary = io::report_to_json(&report);
    match &args.sidecar {
        Some(path) => std::fs::write(path, summary)
            .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?,
        None => eprintln!("{summary}"),
    }
    Ok(())
}

fn cmd_minimal_set(args: &MinimalSetArgs) -> Result<(), UsageError> {
    if args.dim == 0 {
        return Err(UsageError("dimension must be at least 1".into()));
    }
    let x0 = match &args.x0 {
        Some(text) => parse_vector(text)?,
        None => Vector::zeros(args.dim),
    };
    if x0.len() != args.dim {
        return Err(UsageError(format!(
            "x0 has dimension {} but --dim is {}",
            x0.len(),
            args.dim
        )));
    }
    let s = match &args.s_file {
        Some(path) => DirectionMatrix::new(read_matrix(path)?)?,
        None => DirectionMatrix::scaled_identity(args.dim, 1.0)?,
    };
    if s.rows() != args.dim || s.cols() != args.dim {
        return Err(UsageError(format!(
            "S must be {0}x{0}, got {1}x{2}",
            args.dim,
            s.rows(),
            s.cols()
        )));
    }
    let u = build_u(&s, args.ell)?;
    let tols = env_tolerances()?;
    let plan = SamplePlan::shared(x0, s, u)?.with_tolerances(tols);
    let points = enumerate_gsh_points(&plan);

    let expected = quadratic_basis_size(args.dim);
    if points.len() != expected {
        return Err(UsageError(format!(
            "generated {} points, expected {expected}; S is likely rank-deficient",
            points.len()
        )));
    }
    let poised = qi_poised(&points)?;
    if !poised.poised {
        return Err(UsageError(format!(
            "generated set is not poised (rank {})",
            poised.system_rank
        )));
    }
    match args.format {
        OutputFormat::Csv => print!("{}", io::points_to_csv(&points)),
        OutputFormat::Json => println!("{}", io::points_to_json(&points)),
    }
    eprintln!(
        "count={} poised=true condition={:.3e}",
        points.len(),
        poised.condition
    );
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, UsageError> {
    let suite =
        Suite::from_name(&args.suite).ok_or(UsageError(format!("unknown suite {:?}", args.suite)))?;
    let report = run_suite(suite, args.seed)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable report")
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compute(args) => cmd_compute(args).map(|()| true),
        Command::Converge(args) => cmd_converge(args).map(|()| true),
        Command::MinimalSet(args) => cmd_minimal_set(args).map(|()| true),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
