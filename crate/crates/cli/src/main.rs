//! Command-line front end: kernel evaluation, mesh generation, BEM solves and
//! the validation experiments. Every command writes plain CSV/JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use holeplane::experiments::{
    accuracy_map, evaluation_grid, measure_cost_curve, run_bump_experiment, run_dip_experiment,
    AccuracyMapConfig, BumpExperimentConfig, CostCurveConfig, DipExperimentConfig,
};
use holeplane::{
    assemble, choose_truncation, evaluate_field, load_mesh, make_bump_dip_mesh, save_mesh, solve,
    BemConfig, DomainSpec, Error, EvaluationPath, Feature, GroundKernel, KernelConfig, Point3,
    PointSource, Region, SolverKind, SERIES_RADIUS_LIMIT,
};

#[derive(Parser)]
#[command(
    name = "holeplane",
    version,
    about = "Green's-function analogues for a ground plane with a circular hole, and a BEM solver built on them",
    after_help = "Exit codes: 0 success, 1 usage or input error, 2 numeric failure."
)]
struct Cli {
    /// Maximum number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory receiving output files.
    #[arg(long, global = true, env = "HOLEPLANE_OUT", default_value = "holeplane-out")]
    out: PathBuf,

    /// Seed for randomized point sets (default: the experiment's own seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate K^(D)(y, x; R) or K^(N)(y, x; R) at one pair of points.
    Kernel(KernelArgs),
    /// Generate a bump or dip mesh with flat ground and extension rings.
    Mesh(MeshArgs),
    /// Solve the Dirichlet problem for point sources above a mesh.
    Solve(SolveArgs),
    /// Run one of the validation experiments.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Series,
    Integral,
    Auto,
}

impl From<PathArg> for EvaluationPath {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Series => EvaluationPath::Series,
            PathArg::Integral => EvaluationPath::Integral,
            PathArg::Auto => EvaluationPath::Auto,
        }
    }
}

#[derive(Args)]
struct KernelArgs {
    /// Receiver point `x,y,z`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    y: Point3,
    /// Source point `x,y,z`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    x: Point3,
    /// Hole radius R.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Truncation number of the series path.
    #[arg(long, conflicts_with = "eps")]
    p: Option<usize>,
    /// Target accuracy; picks p from (max(|x|, |y|) / R)^p <= eps.
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, value_enum, default_value = "auto")]
    path: PathArg,
    /// Evaluate K^(N)(y, x) = -K^(D)(x, y) instead of K^(D).
    #[arg(long)]
    neumann: bool,
    /// Relative tolerance of the integral path.
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Bump,
    Dip,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Radius of the detailed region (default 2 for a bump, 1 for a dip).
    #[arg(long)]
    r0: Option<f64>,
    /// Extended radius.
    #[arg(long, conflicts_with = "delta")]
    re: Option<f64>,
    /// Relative extension, re = (1 + delta) r0.
    #[arg(long, default_value_t = 0.0935)]
    delta: f64,
    /// Target panel edge length.
    #[arg(long, default_value_t = 0.1)]
    edge: f64,
    /// Mesh file to write (default `<out>/mesh-<kind>.txt`).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Direct,
    Gmres,
}

#[derive(Args)]
struct SolveArgs {
    /// Mesh file with a `domain` record.
    #[arg(long)]
    mesh: PathBuf,
    /// Unit point source `x,y,z`; repeat for several sources.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, required = true)]
    source: Vec<Point3>,
    /// Prescribed kernel accuracy; sets p from (r0 / re)^p <= eps.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    /// Truncation number, overriding the one implied by --eps.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, value_enum, default_value = "direct")]
    solver: SolverArg,
    /// Relative residual target of the iterative solver.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Drop the ground kernel (plain BEM truncated at the mesh edge).
    #[arg(long)]
    no_kernel: bool,
    /// Also sample the potential on a grid of this spacing in the plane y = 0.
    #[arg(long)]
    grid_spacing: Option<f64>,
    /// File name stem of the outputs.
    #[arg(long, default_value = "solve")]
    name: String,
}

#[derive(Subcommand)]
enum Experiment {
    /// Bump benchmark against the exact image-charge solution.
    Bump {
        #[arg(long, default_value_t = 2.0)]
        h: f64,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 0.0935)]
        delta: f64,
        #[arg(long, default_value_t = 0.075)]
        edge: f64,
        #[arg(long, default_value_t = 0.05)]
        grid_spacing: f64,
        #[arg(long, value_enum, default_value = "direct")]
        solver: SolverArg,
    },
    /// Dip benchmark: error of the extended and truncated methods over re / r0.
    Dip {
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        h: f64,
        #[arg(long, default_value_t = 0.07)]
        edge: f64,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        /// Comma-separated re / r0 values.
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.05)]
        reference_edge: f64,
        #[arg(long, value_enum, default_value = "direct")]
        solver: SolverArg,
    },
    /// Series-vs-integral error over (re / r0, p).
    AccuracyMap {
        /// Comma-separated re / r0 values.
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        /// Largest truncation number (even values from 2).
        #[arg(long, default_value_t = 40)]
        max_p: usize,
    },
    /// Measured kernel factorization time over re / r0 at fixed accuracy.
    CostCurve {
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_)
            | Error::Quadrature { .. }
            | Error::Singular { .. }
            | Error::NotConverged { .. }
            | Error::SingularPoint(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn parse_point(s: &str) -> Result<Point3, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    }
    let mut c = [0.0; 3];
    for (slot, part) in c.iter_mut().zip(&parts) {
        *slot = part
            .parse::<f64>()
            .map_err(|_| format!("`{part}` is not a number"))?;
        if !slot.is_finite() {
            return Err(format!("`{part}` is not finite"));
        }
    }
    Ok(Point3::from(c))
}

fn solver_kind(arg: SolverArg, tolerance: f64) -> SolverKind {
    match arg {
        SolverArg::Direct => SolverKind::DenseDirect,
        SolverArg::Gmres => SolverKind::iterative(tolerance),
    }
}

fn prepare_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Usage(format!("cannot create output directory {}: {e}", dir.display())))?;
    let probe = dir.join(".holeplane-write-check");
    fs::write(&probe, b"")
        .map_err(|e| Failure::Usage(format!("output directory {} is not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    fs::write(path, text + "\n")
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn print(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("json values serialize"));
}

fn cmd_kernel(args: &KernelArgs) -> Outcome {
    if !(args.r > 0.0 && args.r.is_finite()) {
        return Err(Failure::Usage(format!("--r must be positive, got {}", args.r)));
    }
    let radius = args.x.norm().max(args.y.norm()) / args.r;
    let p = match args.p {
        Some(p) => p,
        None if radius > 0.0 && radius < 1.0 => choose_truncation(radius, 1.0, args.eps)?,
        None => 2,
    };
    let mut config = KernelConfig::new(args.r, p)?;
    config.integral_tolerance = args.tolerance;
    let kernel = GroundKernel::new(config)?;
    let path: EvaluationPath = args.path.into();
    let value = if args.neumann {
        kernel.neumann(args.y, args.x, path)?
    } else {
        kernel.dirichlet(args.y, args.x, path)?
    };
    let series = match path {
        EvaluationPath::Series => true,
        EvaluationPath::Integral => false,
        EvaluationPath::Auto => radius <= SERIES_RADIUS_LIMIT,
    };
    let (used, bound) = if series {
        ("series", radius.powi(p as i32))
    } else {
        ("integral", args.tolerance)
    };
    print(json!({
        "kernel": if args.neumann { "neumann" } else { "dirichlet" },
        "y": args.y.to_array(),
        "x": args.x.to_array(),
        "r": args.r,
        "p": p,
        "path": used,
        "value": value,
        "relative_error_bound": bound,
    }));
    Ok(())
}

fn cmd_mesh(args: &MeshArgs, out: &Path) -> Outcome {
    let (feature, default_r0, name) = match args.kind {
        KindArg::Bump => (Feature::Bump, 2.0, "bump"),
        KindArg::Dip => (Feature::Dip, 1.0, "dip"),
    };
    let r0 = args.r0.unwrap_or(default_r0);
    let re = args.re.unwrap_or((1.0 + args.delta) * r0);
    let mesh = make_bump_dip_mesh(feature, r0, re, args.edge)?;
    let path = match &args.output {
        Some(p) => p.clone(),
        None => {
            prepare_dir(out)?;
            out.join(format!("mesh-{name}.txt"))
        }
    };
    save_mesh(&mesh, &path)?;
    print(json!({
        "file": path.display().to_string(),
        "kind": name,
        "r0": r0,
        "re": re,
        "delta": re / r0 - 1.0,
        "panels": mesh.len(),
        "object": mesh.count(Region::Object),
        "ground": mesh.count(Region::Ground),
        "extension": mesh.count(Region::Extension),
    }));
    Ok(())
}

fn cmd_solve(args: &SolveArgs, out: &Path) -> Outcome {
    if !args.mesh.is_file() {
        return Err(Failure::Usage(format!("mesh file {} does not exist", args.mesh.display())));
    }
    let mesh = load_mesh(&args.mesh)?;
    let domain: DomainSpec = mesh.domain.ok_or_else(|| {
        Failure::Usage(format!("{} has no `domain` record", args.mesh.display()))
    })?;
    let config = if args.no_kernel {
        BemConfig {
            solver: solver_kind(args.solver, args.tolerance),
            ..BemConfig::free_space()
        }
    } else {
        if domain.re <= domain.r0 {
            return Err(Failure::Usage(
                "the mesh has no extension ring (re = r0); pass --no-kernel for a plain BEM solve".into(),
            ));
        }
        let p = match args.p {
            Some(p) => p,
            None => choose_truncation(domain.r0, domain.re, args.eps)?,
        };
        let mut config = BemConfig::new(p, args.eps)?;
        config.solver = solver_kind(args.solver, args.tolerance);
        config
    };
    prepare_dir(out)?;
    let feature = mesh.feature;
    let sources: Vec<PointSource> = args.source.iter().map(|&s| PointSource::unit(s)).collect();
    let mut system = assemble(mesh, domain, config)?;
    system.set_sources(&sources)?;
    let solution = solve(&system)?;
    let csv = out.join(format!("{}-solution.csv", args.name));
    let report = out.join(format!("{}-solution.json", args.name));
    system.write_solution_csv(&solution, &csv)?;
    system.write_solution_json(&solution, &report)?;
    let mut summary = json!({
        "panels": system.len(),
        "p": config.include_ground_kernel.then_some(config.p),
        "relative_residual": solution.relative_residual,
        "solution_csv": csv.display().to_string(),
        "solution_json": report.display().to_string(),
    });
    if let Some(spacing) = args.grid_spacing {
        let standoff = 2.0 * system.mesh.mean_diameter();
        let grid = evaluation_grid(feature, domain.r0, spacing, standoff, &args.source);
        let field = evaluate_field(&system, &solution, &grid, &args.name)?;
        let path = out.join(format!("{}-field.csv", args.name));
        field.write_csv(&path)?;
        summary["field_csv"] = json!(path.display().to_string());
        summary["field_points"] = json!(grid.len());
    }
    print(summary);
    Ok(())
}

fn cmd_experiment(which: &Experiment, out: &Path, seed: Option<u64>) -> Outcome {
    prepare_dir(out)?;
    match which {
        Experiment::Bump {
            h,
            eps,
            delta,
            edge,
            grid_spacing,
            solver,
        } => {
            let config = BumpExperimentConfig {
                h: *h,
                eps: *eps,
                delta: *delta,
                edge: *edge,
                grid_spacing: *grid_spacing,
                solver: solver_kind(*solver, 1e-10),
                ..BumpExperimentConfig::default()
            };
            let outcome = run_bump_experiment(&config)?;
            let stem = format!("bump-seed{}", seed.unwrap_or(0));
            outcome.write_csv(&out.join(format!("{stem}.csv")))?;
            write_json(&out.join(format!("{stem}.json")), &outcome.report)?;
            print(serde_json::to_value(&outcome.report).map_err(|e| Failure::Usage(e.to_string()))?);
        }
        Experiment::Dip {
            h,
            edge,
            eps,
            ratios,
            reference_edge,
            solver,
        } => {
            let mut config = DipExperimentConfig {
                h: *h,
                edge: *edge,
                eps: *eps,
                reference_edge: *reference_edge,
                solver: solver_kind(*solver, 1e-10),
                ..DipExperimentConfig::default()
            };
            if let Some(r) = ratios {
                config.ratios = r.clone();
            }
            let report = run_dip_experiment(&config)?;
            let stem = format!("dip-seed{}", seed.unwrap_or(0));
            report.write_csv(&out.join(format!("{stem}.csv")))?;
            write_json(&out.join(format!("{stem}.json")), &report)?;
            print(json!({
                "truncated_exponent": report.truncated_fit.exponent,
                "extended_spread": report.extended_spread,
                "csv": out.join(format!("{stem}.csv")).display().to_string(),
            }));
        }
        Experiment::AccuracyMap { ratios, max_p } => {
            let mut config = AccuracyMapConfig::default();
            if let Some(r) = ratios {
                config.ratios = r.clone();
            }
            if *max_p < 2 {
                return Err(Failure::Usage(format!("--max-p must be at least 2, got {max_p}")));
            }
            config.truncations = (2..=*max_p).step_by(2).collect();
            if let Some(s) = seed {
                config.points.seed = s;
            }
            let map = accuracy_map(&config)?;
            let stem = format!("accuracy-map-seed{}", config.points.seed);
            map.write_csv(&out.join(format!("{stem}.csv")))?;
            write_json(&out.join(format!("{stem}.json")), &map)?;
            print(json!({
                "cells": map.cells.len(),
                "csv": out.join(format!("{stem}.csv")).display().to_string(),
            }));
        }
        Experiment::CostCurve { eps, repeats } => {
            let mut config = CostCurveConfig {
                eps: *eps,
                repeats: *repeats,
                ..CostCurveConfig::default()
            };
            if let Some(s) = seed {
                config.seed = s;
            }
            let curve = measure_cost_curve(&config)?;
            let stem = format!("cost-curve-seed{}", config.seed);
            curve.write_csv(&out.join(format!("{stem}.csv")))?;
            write_json(&out.join(format!("{stem}.json")), &curve)?;
            print(json!({
                "minimum_ratio": curve.minimum_ratio,
                "interior_minimum": curve.interior_minimum,
                "csv": out.join(format!("{stem}.csv")).display().to_string(),
            }));
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Kernel(args) => cmd_kernel(args),
        Command::Mesh(args) => cmd_mesh(args, &cli.out),
        Command::Solve(args) => cmd_solve(args, &cli.out),
        Command::Experiment { which } => cmd_experiment(which, &cli.out, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
