//! Command-line driver: trajectory search, closed-form sphere answers,
//! and exact cohomology reports, as JSON (default) or plain text.
//!
//! Exit codes: 0 on success with all verdicts true, 1 on a failed verdict
//! or operational error, 2 on usage errors. Reports are written
//! atomically (temp file in the target directory, then rename).

use anyhow::Context;
use billiards_core::geometry::{SurfaceKind, SurfacePoint, SurfaceSpec};
use billiards_core::leray::{self, CohomologyReport, FieldChoice};
use billiards_core::oracle::{sphere_trajectories, SphereTrajectory};
use billiards_core::solver::{find_critical_points, solve_report, SolveOptions, SolveReport};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "billiards",
    version,
    about = "Billiard trajectory search and configuration-space cohomology",
    propagate_version = true
)]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Find billiard trajectories between two endpoints on a convex surface.
    Solve(SolveArgs),
    /// Print the closed-form round-sphere trajectories for endpoints at a
    /// given angle.
    Oracle(OracleArgs),
    /// Compute the cohomology report of the configuration-space algebra.
    Cohomology(CohomologyArgs),
    /// Recompute all cohomology verdicts; exit 0 only if every one holds.
    Verify(VerifyArgs),
}

/// Comma-separated coordinate list (accepts leading minus signs).
#[derive(Clone, Debug)]
struct Coords(Vec<f64>);

fn parse_coords(s: &str) -> Result<Coords, String> {
    let values: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| format!("expected comma-separated numbers: {e}"))?;
    if values.len() < 2 {
        return Err("need at least two coordinates".into());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err("coordinates must be finite".into());
    }
    Ok(Coords(values))
}

fn parse_axes(s: &str) -> Result<Coords, String> {
    let coords = parse_coords(s)?;
    if coords.0.len() < 3 {
        return Err("an ellipsoid needs at least three semi-axes".into());
    }
    if coords.0.iter().any(|v| *v <= 0.0) {
        return Err("semi-axes must be positive".into());
    }
    Ok(coords)
}

fn parse_angle(s: &str) -> Result<f64, String> {
    let phi: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(phi > 0.0 && phi < std::f64::consts::PI) {
        return Err("angle must lie strictly between 0 and pi".into());
    }
    Ok(phi)
}

fn parse_field(s: &str) -> Result<FieldChoice, String> {
    FieldChoice::parse(s).ok_or_else(|| "expected one of: q, f2, f3, f5, f7".into())
}

#[derive(Args)]
struct SolveArgs {
    /// Surface family.
    #[arg(long, value_enum)]
    surface: SurfaceArg,
    /// Sphere dimension m (the surface lives in R^(m+1)); required for
    /// spheres, optional consistency check for ellipsoids.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=16))]
    m: Option<u64>,
    /// Ellipsoid semi-axes, e.g. 1.0,1.15,0.9.
    #[arg(long, value_parser = parse_axes)]
    axes: Option<Coords>,
    /// Start endpoint (radially projected onto the surface).
    #[arg(long = "A", value_parser = parse_coords, allow_hyphen_values = true)]
    a: Coords,
    /// End endpoint (radially projected onto the surface).
    #[arg(long = "B", value_parser = parse_coords, allow_hyphen_values = true)]
    b: Coords,
    /// Number of reflections.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=32))]
    n: u64,
    /// Number of seeded Newton starts.
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    starts: u64,
    /// RNG seed; fixed seed and inputs give byte-identical reports.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Convergence tolerance on the reflection residual.
    #[arg(long = "tol", default_value_t = 1e-12)]
    tol: f64,
    /// Iteration cap per start.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    max_iters: u64,
    /// Max-coordinate distance under which trajectories are merged.
    #[arg(long, default_value_t = 1e-6)]
    dedup_tol: f64,
    /// Classify critical points with the finite-difference Hessian.
    #[arg(long)]
    fd_hessian: bool,
    /// Report file (written atomically); stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceArg {
    Sphere,
    Ellipsoid,
}

#[derive(Args)]
struct OracleArgs {
    /// Angle between the two endpoints, strictly between 0 and pi.
    #[arg(long, value_parser = parse_angle)]
    phi: f64,
    /// Number of reflections.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=32))]
    n: u64,
    /// Sphere dimension.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=16))]
    m: u64,
    /// Report file (written atomically); stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CohomologyArgs {
    /// Sphere dimension.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=32))]
    m: u64,
    /// Number of reflections.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=32))]
    n: u64,
    /// Coefficient field: q, f2, f3, f5, or f7.
    #[arg(long, default_value = "q", value_parser = parse_field)]
    field: FieldChoice,
    /// Include the full cup-product table in the report.
    #[arg(long)]
    products: bool,
    /// Report file (written atomically); stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Sphere dimension.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=32))]
    m: u64,
    /// Number of reflections.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=32))]
    n: u64,
    /// Coefficient field: q, f2, f3, f5, or f7.
    #[arg(long, default_value = "q", value_parser = parse_field)]
    field: FieldChoice,
}

fn main() -> ExitCode {
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Applies the `BILLIARDS_THREADS` cap before any parallel work starts.
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("BILLIARDS_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| format!("BILLIARDS_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Solve(args) => run_solve(args, cli.format),
        Command::Oracle(args) => run_oracle(args, cli.format),
        Command::Cohomology(args) => run_cohomology(args, cli.format),
        Command::Verify(args) => run_verify(args, cli.format),
    }
}

/// Exits with usage semantics for argument combinations clap cannot see.
fn usage_error(message: &str) -> ! {
    let mut command = Cli::command();
    command
        .error(clap::error::ErrorKind::ArgumentConflict, message)
        .exit()
}

fn build_surface(args: &SolveArgs) -> SurfaceSpec {
    match args.surface {
        SurfaceArg::Sphere => {
            if args.axes.is_some() {
                usage_error("--axes only applies to --surface ellipsoid");
            }
            let Some(m) = args.m else {
                usage_error("--surface sphere requires --m");
            };
            SurfaceSpec::sphere(m as usize).expect("validated by clap range")
        }
        SurfaceArg::Ellipsoid => {
            let Some(axes) = &args.axes else {
                usage_error("--surface ellipsoid requires --axes");
            };
            if let Some(m) = args.m {
                if m as usize + 1 != axes.0.len() {
                    usage_error("--m disagrees with the number of --axes entries");
                }
            }
            match SurfaceSpec::ellipsoid(axes.0.clone()) {
                Ok(s) => s,
                Err(e) => usage_error(&format!("invalid --axes: {e}")),
            }
        }
    }
}

fn project_endpoint(surface: &SurfaceSpec, label: &str, coords: &Coords) -> SurfacePoint {
    if coords.0.len() != surface.ambient_dim() {
        usage_error(&format!(
            "--{label} needs {} coordinates for this surface, got {}",
            surface.ambient_dim(),
            coords.0.len()
        ));
    }
    match surface.retract(&DVector::from_vec(coords.0.clone())) {
        Ok(p) => p,
        Err(e) => usage_error(&format!(
            "--{label} cannot be projected to the surface: {e}"
        )),
    }
}

fn run_solve(args: SolveArgs, format: Format) -> anyhow::Result<ExitCode> {
    let surface = build_surface(&args);
    let a = project_endpoint(&surface, "A", &args.a);
    let b = project_endpoint(&surface, "B", &args.b);
    let opts = SolveOptions {
        starts: args.starts as usize,
        seed: args.seed,
        newton_tol: args.tol,
        max_iters: args.max_iters as usize,
        dedup_tol: args.dedup_tol,
        hessian_fd: args.fd_hessian,
        ..SolveOptions::default()
    };
    let outcome = find_critical_points(&surface, &a, &b, args.n as usize, &opts)?;
    if let Some(warning) = &outcome.warning {
        eprintln!("warning: {warning}");
    }
    let report = solve_report(&surface, args.n as usize, &outcome);
    let rendered = match format {
        Format::Json => to_json(&report)?,
        Format::Text => render_solve_text(&report),
    };
    emit(args.out.as_deref(), &rendered)?;
    Ok(ExitCode::SUCCESS)
}

fn render_solve_text(report: &SolveReport) -> String {
    let mut text = format!(
        "surface: {} m={} axes={:?}\nn={} count={} bound={} generic={}\n",
        match report.surface.kind {
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Ellipsoid => "ellipsoid",
        },
        report.surface.m,
        report.surface.axes,
        report.n,
        report.count,
        report.bound,
        report.generic,
    );
    for (idx, t) in report.trajectories.iter().enumerate() {
        text.push_str(&format!(
            "#{idx}: value={:.12} morse_index={} degenerate={} residual={:.2e} eps={:.6e}\n",
            t.value, t.morse_index, t.degenerate, t.residual, t.epsilon_product
        ));
    }
    text.trim_end().to_owned()
}

#[derive(Serialize)]
struct OracleReport {
    m: usize,
    phi: f64,
    n: usize,
    #[serde(rename = "A")]
    a: Vec<f64>,
    #[serde(rename = "B")]
    b: Vec<f64>,
    trajectories: Vec<OracleTrajectory>,
}

#[derive(Serialize)]
struct OracleTrajectory {
    k: usize,
    alpha: f64,
    total_length: f64,
    points: Vec<Vec<f64>>,
}

fn run_oracle(args: OracleArgs, format: Format) -> anyhow::Result<ExitCode> {
    let m = args.m as usize;
    let n = args.n as usize;
    let mut a = vec![0.0; m + 1];
    a[0] = 1.0;
    let mut b = vec![0.0; m + 1];
    b[0] = args.phi.cos();
    b[1] = args.phi.sin();
    let a_vec = DVector::from_vec(a.clone());
    let b_vec = DVector::from_vec(b.clone());
    let trajectories = sphere_trajectories(&a_vec, &b_vec, n)?;
    let report = OracleReport {
        m,
        phi: args.phi,
        n,
        a,
        b,
        trajectories: trajectories
            .iter()
            .map(|t: &SphereTrajectory| OracleTrajectory {
                k: t.k,
                alpha: t.alpha,
                total_length: t.total_length(),
                points: t
                    .points
                    .iter()
                    .map(|p| p.iter().copied().collect())
                    .collect(),
            })
            .collect(),
    };
    let rendered = match format {
        Format::Json => to_json(&report)?,
        Format::Text => {
            let mut text = format!("sphere m={} phi={:.12} n={}\n", m, args.phi, n);
            for t in &report.trajectories {
                text.push_str(&format!(
                    "k={}: alpha={:.12} total_length={:.12}\n",
                    t.k, t.alpha, t.total_length
                ));
            }
            text.trim_end().to_owned()
        }
    };
    emit(args.out.as_deref(), &rendered)?;
    Ok(ExitCode::SUCCESS)
}

/// Cohomology report with the product table elided.
#[derive(Serialize)]
struct DimsOnlyReport<'a> {
    m: usize,
    n: usize,
    field: &'a str,
    dims: &'a std::collections::BTreeMap<usize, usize>,
    poincare: &'a [usize],
    verdicts: &'a leray::Verdicts,
    cup_length: usize,
    cat_lower_bound: usize,
}

fn render_cohomology_text(report: &CohomologyReport, products: bool) -> String {
    let mut text = format!("m={} n={} field={}\n", report.m, report.n, report.field);
    let dims: Vec<String> = report
        .dims
        .iter()
        .map(|(degree, dim)| format!("H^{degree}={dim}"))
        .collect();
    text.push_str(&format!("dims: {}\n", dims.join(" ")));
    if products {
        for entry in &report.products {
            text.push_str(&format!(
                "sigma_{} * sigma_{} = {}\n",
                entry.0,
                entry.1,
                entry
                    .2
                    .as_deref()
                    .map(|c| format!("{c} * sigma_{}", entry.0 + entry.1))
                    .unwrap_or_else(|| "0 (target group vanishes)".to_owned()),
            ));
        }
    }
    text.push_str(&format!(
        "verdicts: poincare={} products={} cuplength={} cocycles={}\n",
        report.verdicts.poincare_ok,
        report.verdicts.products_ok,
        report.verdicts.cuplength_ok,
        report.verdicts.sigma_cocycles_ok,
    ));
    text.push_str(&format!(
        "cup_length={} cat_lower_bound={}",
        report.cup_length, report.cat_lower_bound
    ));
    text
}

fn run_cohomology(args: CohomologyArgs, format: Format) -> anyhow::Result<ExitCode> {
    let report = leray::report(args.m as usize, args.n as usize, args.field)?;
    let rendered = match (format, args.products) {
        (Format::Json, true) => to_json(&report)?,
        (Format::Json, false) => to_json(&DimsOnlyReport {
            m: report.m,
            n: report.n,
            field: &report.field,
            dims: &report.dims,
            poincare: &report.poincare,
            verdicts: &report.verdicts,
            cup_length: report.cup_length,
            cat_lower_bound: report.cat_lower_bound,
        })?,
        (Format::Text, products) => render_cohomology_text(&report, products),
    };
    emit(args.out.as_deref(), &rendered)?;
    Ok(if report.verdicts.all_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_verify(args: VerifyArgs, format: Format) -> anyhow::Result<ExitCode> {
    let report = leray::report(args.m as usize, args.n as usize, args.field)?;
    let all_ok = report.verdicts.all_ok();
    let rendered = match format {
        Format::Json => to_json(&report.verdicts)?,
        Format::Text => format!(
            "poincare={} products={} cuplength={} cocycles={}\nall_ok={all_ok}",
            report.verdicts.poincare_ok,
            report.verdicts.products_ok,
            report.verdicts.cuplength_ok,
            report.verdicts.sigma_cocycles_ok,
        ),
    };
    print_stdout(&rendered)?;
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Prints `content`, treating a closed pipe as a normal early exit.
fn print_stdout(content: &str) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{content}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        other => Ok(other?),
    }
}

/// Prints to stdout, or writes atomically next to the target path.
fn emit(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match out {
        None => print_stdout(content)?,
        Some(path) => {
            let dir = match path.parent() {
                Some(parent) if !parent.as_os_str().is_empty() => parent,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .with_context(|| format!("creating temp file in {}", dir.display()))?;
            tmp.write_all(content.as_bytes())?;
            tmp.write_all(b"\n")?;
            tmp.persist(path)
                .with_context(|| format!("renaming into {}", path.display()))?;
        }
    }
    Ok(())
}
