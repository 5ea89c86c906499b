use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{choose_truncation, evaluation_grid, relative_l2_error, BumpBenchmark};
use crate::bem::{assemble, evaluate_field, solve, BemConfig, FieldGrid, PointSource, SolverKind};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::mesh::{make_bump_dip_mesh, make_sphere_mesh, DomainSpec, Feature, PanelMesh};

/// Solver variants compared by the benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Free-space kernel plus the ground kernel of the extended domain.
    Extended,
    /// Free-space kernel on the same surface, ground kernel dropped.
    Truncated,
    /// Free-space kernel on the closed sphere with mirrored sources.
    Image,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Extended => "extended",
            Method::Truncated => "truncated",
            Method::Image => "image",
        }
    }
}

/// Outcome of one boundary-element run on an evaluation grid.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub method: Method,
    pub panels: usize,
    /// Truncation number, when the ground kernel is used.
    pub p: Option<usize>,
    pub relative_residual: f64,
    pub eps2: f64,
    pub assemble_seconds: f64,
    pub solve_seconds: f64,
}

/// Assembles, solves and evaluates one configuration.
fn run_method(
    method: Method,
    mesh: PanelMesh,
    domain: DomainSpec,
    config: BemConfig,
    sources: &[PointSource],
    grid: &[Point3],
) -> Result<(FieldGrid, RunSummary)> {
    let panels = mesh.len();
    let start = Instant::now();
    let mut system = assemble(mesh, domain, config)?;
    system.set_sources(sources)?;
    let assemble_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let solution = solve(&system)?;
    let solve_seconds = start.elapsed().as_secs_f64();
    let field = evaluate_field(&system, &solution, grid, method.as_str())?;
    log::info!(
        "{}: {panels} panels, assembly {assemble_seconds:.1} s, solve {solve_seconds:.1} s",
        method.as_str()
    );
    let summary = RunSummary {
        method,
        panels,
        p: config.include_ground_kernel.then_some(config.p),
        relative_residual: solution.relative_residual,
        eps2: f64::NAN,
        assemble_seconds,
        solve_seconds,
    };
    Ok((field, summary))
}

fn extended_config(r0: f64, re: f64, eps: f64, solver: SolverKind) -> Result<BemConfig> {
    let mut config = BemConfig::new(choose_truncation(r0, re, eps)?, eps)?;
    config.solver = solver;
    Ok(config)
}

fn truncated_config(solver: SolverKind) -> BemConfig {
    let mut config = BemConfig::free_space();
    config.solver = solver;
    config
}

/// Parameters of the bump benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpExperimentConfig {
    /// Source height above the ground.
    pub h: f64,
    pub r0: f64,
    /// Relative width of the extension ring, `re = (1 + delta) r0`.
    pub delta: f64,
    /// Target panel edge length.
    pub edge: f64,
    /// Prescribed kernel accuracy.
    pub eps: f64,
    pub grid_spacing: f64,
    /// Standoff of evaluation points from boundaries and sources, in mean
    /// panel diameters.
    pub standoff_diameters: f64,
    pub solver: SolverKind,
}

impl Default for BumpExperimentConfig {
    fn default() -> Self {
        Self {
            h: 2.0,
            r0: 2.0,
            delta: 0.0935,
            edge: 0.075,
            eps: 1e-4,
            grid_spacing: 0.05,
            standoff_diameters: 2.0,
            solver: SolverKind::DenseDirect,
        }
    }
}

/// Results of the bump benchmark.
#[derive(Clone, Debug, Serialize)]
pub struct BumpReport {
    pub config: BumpExperimentConfig,
    pub re: f64,
    pub grid_points: usize,
    pub runs: Vec<RunSummary>,
}

impl BumpReport {
    pub fn eps2(&self, method: Method) -> Option<f64> {
        self.runs.iter().find(|r| r.method == method).map(|r| r.eps2)
    }
}

/// Report together with the sampled fields.
#[derive(Clone, Debug)]
pub struct BumpOutcome {
    pub report: BumpReport,
    pub analytic: Vec<f64>,
    pub fields: Vec<FieldGrid>,
}

impl BumpOutcome {
    /// One row per grid point: coordinates, exact potential, then the
    /// potential of every method.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = vec!["x".to_string(), "z".to_string(), "analytic".to_string()];
        header.extend(self.fields.iter().map(|f| f.label.clone()));
        writer.write_record(&header)?;
        let points = &self.fields[0].points;
        for (i, y) in points.iter().enumerate() {
            let mut row = vec![
                format!("{:.17e}", y.x),
                format!("{:.17e}", y.z),
                format!("{:.17e}", self.analytic[i]),
            ];
            row.extend(self.fields.iter().map(|f| format!("{:.17e}", f.values[i])));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Compares the extended, truncated and image solutions of the bump problem
/// with the exact image-charge potential.
pub fn run_bump_experiment(config: &BumpExperimentConfig) -> Result<BumpOutcome> {
    let bench = BumpBenchmark::new(config.h)?;
    let domain = DomainSpec::from_delta(config.r0, config.delta)?;
    let re = domain.re;
    let mesh = make_bump_dip_mesh(Feature::Bump, config.r0, re, config.edge)?;
    let standoff = config.standoff_diameters * mesh.mean_diameter();
    let grid = evaluation_grid(Feature::Bump, config.r0, config.grid_spacing, standoff, &[bench.source()]);
    if grid.is_empty() {
        return Err(Error::Config("the evaluation grid is empty".into()));
    }
    let analytic = grid.iter().map(|&y| bench.potential(y)).collect::<Result<Vec<_>>>()?;
    let source = [PointSource::unit(bench.source())];

    let mut runs = Vec::new();
    let mut fields = Vec::new();
    let extended = extended_config(config.r0, re, config.eps, config.solver)?;
    let (field, summary) = run_method(Method::Extended, mesh.clone(), domain, extended, &source, &grid)?;
    fields.push(field);
    runs.push(summary);

    let (field, summary) = run_method(Method::Truncated, mesh, domain, truncated_config(config.solver), &source, &grid)?;
    fields.push(field);
    runs.push(summary);

    let sphere = make_sphere_mesh(config.edge)?;
    let mirrored = [
        PointSource::unit(bench.source()),
        PointSource {
            position: Point3::new(0.0, 0.0, -config.h),
            strength: -1.0,
        },
    ];
    let (field, summary) = run_method(Method::Image, sphere, domain, truncated_config(config.solver), &mirrored, &grid)?;
    fields.push(field);
    runs.push(summary);

    for (run, field) in runs.iter_mut().zip(&fields) {
        run.eps2 = relative_l2_error(&field.values, &analytic)?;
    }
    Ok(BumpOutcome {
        report: BumpReport {
            config: config.clone(),
            re,
            grid_points: grid.len(),
            runs,
        },
        analytic,
        fields,
    })
}

/// Parameters of the dip benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipExperimentConfig {
    /// Source height; the source sits at `(0, 0, h)` with `|h| < 1`.
    pub h: f64,
    pub r0: f64,
    pub edge: f64,
    pub eps: f64,
    /// Ratios `re / r0` of the sweep.
    pub ratios: Vec<f64>,
    pub reference_ratio: f64,
    pub reference_edge: f64,
    pub reference_eps: f64,
    pub grid_spacing: f64,
    pub standoff_diameters: f64,
    pub solver: SolverKind,
}

impl Default for DipExperimentConfig {
    fn default() -> Self {
        Self {
            h: 0.5,
            r0: 1.0,
            edge: 0.07,
            eps: 1e-4,
            ratios: vec![1.1, 1.124, 1.2, 1.35, 1.5, 1.75, 2.0],
            reference_ratio: 1.5,
            reference_edge: 0.05,
            reference_eps: 1e-6,
            grid_spacing: 0.025,
            standoff_diameters: 2.0,
            solver: SolverKind::DenseDirect,
        }
    }
}

/// One point of the dip sweep.
#[derive(Clone, Debug, Serialize)]
pub struct DipSweepPoint {
    pub ratio: f64,
    pub extended: RunSummary,
    pub truncated: RunSummary,
}

/// Least-squares fit of `eps2 = c ratio^exponent` on log-log axes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
}

/// Fits `y = c x^k` by linear regression of `ln y` on `ln x`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Config("a power-law fit needs at least two matching samples".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("a power-law fit needs positive samples".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("a power-law fit needs distinct abscissae".into()));
    }
    let exponent = sxy / sxx;
    Ok(PowerFit {
        exponent,
        prefactor: (my - exponent * mx).exp(),
    })
}

/// Results of the dip benchmark.
#[derive(Clone, Debug, Serialize)]
pub struct DipReport {
    pub config: DipExperimentConfig,
    pub grid_points: usize,
    pub reference: RunSummary,
    pub sweep: Vec<DipSweepPoint>,
    pub truncated_fit: PowerFit,
    /// Largest over smallest extended-method error across the sweep.
    pub extended_spread: f64,
}

impl DipReport {
    pub fn point(&self, ratio: f64) -> Option<&DipSweepPoint> {
        self.sweep.iter().find(|s| (s.ratio - ratio).abs() < 1e-12)
    }

    /// `ratio,extended,truncated` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["ratio", "eps2_extended", "eps2_truncated", "panels", "p"])?;
        for s in &self.sweep {
            writer.write_record([
                format!("{}", s.ratio),
                format!("{:.6e}", s.extended.eps2),
                format!("{:.6e}", s.truncated.eps2),
                s.extended.panels.to_string(),
                s.extended.p.map(|p| p.to_string()).unwrap_or_default(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Runs the dip sweep against a finely meshed extended-method reference.
pub fn run_dip_experiment(config: &DipExperimentConfig) -> Result<DipReport> {
    if !(config.h.abs() < 1.0) {
        return Err(Error::Config(format!("the dip benchmark needs |h| < 1, got {}", config.h)));
    }
    if config.ratios.len() < 2 || config.ratios.iter().any(|r| !(*r > 1.0)) {
        return Err(Error::Config("the sweep needs at least two ratios above 1".into()));
    }
    let source_point = Point3::new(0.0, 0.0, config.h);
    let source = [PointSource::unit(source_point)];

    // grid standoff follows the coarsest (sweep) mesh
    let probe = make_bump_dip_mesh(Feature::Dip, config.r0, config.r0 * config.ratios[0], config.edge)?;
    let standoff = config.standoff_diameters * probe.mean_diameter();
    let grid = evaluation_grid(Feature::Dip, config.r0, config.grid_spacing, standoff, &[source_point]);
    if grid.is_empty() {
        return Err(Error::Config("the evaluation grid is empty".into()));
    }

    let re = config.r0 * config.reference_ratio;
    let domain = DomainSpec::new(config.r0, re)?;
    let mesh = make_bump_dip_mesh(Feature::Dip, config.r0, re, config.reference_edge)?;
    let reference_config = extended_config(config.r0, re, config.reference_eps, config.solver)?;
    let (reference_field, mut reference) =
        run_method(Method::Extended, mesh, domain, reference_config, &source, &grid)?;
    reference.eps2 = 0.0;
    let reference_values = reference_field.values;

    let mut sweep = Vec::new();
    for &ratio in &config.ratios {
        let re = config.r0 * ratio;
        let domain = DomainSpec::new(config.r0, re)?;
        let mesh = make_bump_dip_mesh(Feature::Dip, config.r0, re, config.edge)?;
        let ext_config = extended_config(config.r0, re, config.eps, config.solver)?;
        let (field, mut extended) =
            run_method(Method::Extended, mesh.clone(), domain, ext_config, &source, &grid)?;
        extended.eps2 = relative_l2_error(&field.values, &reference_values)?;
        let (field, mut truncated) =
            run_method(Method::Truncated, mesh, domain, truncated_config(config.solver), &source, &grid)?;
        truncated.eps2 = relative_l2_error(&field.values, &reference_values)?;
        log::info!(
            "re/r0 = {ratio}: extended {:.3e}, truncated {:.3e}",
            extended.eps2,
            truncated.eps2
        );
        sweep.push(DipSweepPoint {
            ratio,
            extended,
            truncated,
        });
    }
    let ratios: Vec<f64> = sweep.iter().map(|s| s.ratio).collect();
    let truncated_errors: Vec<f64> = sweep.iter().map(|s| s.truncated.eps2).collect();
    let truncated_fit = fit_power_law(&ratios, &truncated_errors)?;
    let ext: Vec<f64> = sweep.iter().map(|s| s.extended.eps2).collect();
    let extended_spread = ext.iter().cloned().fold(0.0, f64::max) / ext.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DipReport {
        config: config.clone(),
        grid_points: grid.len(),
        reference,
        sweep,
        truncated_fit,
        extended_spread,
    })
}
