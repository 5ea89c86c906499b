//! Collocation boundary-element solver with piecewise-constant densities on
//! flat triangles.
//!
//! The boundary operator is the free-space single layer plus, optionally, the
//! ground kernel `K^(D)(y, x; Re)` of the extended domain. The free-space part
//! is a dense matrix; the ground part is held as the product of a receiver
//! factor (Schmidt harmonics of the collocation points) and a source factor
//! (panel-weighted source signatures), and is densified only inside the
//! direct solver's working copy.

mod field;
mod panel_integral;
mod solve;

use std::fs::File;
use std::io::Write;
use std::path::Path;

use faer::{Mat, MatRef};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use field::{evaluate_field, FieldGrid};
pub use panel_integral::triangle_single_layer;
pub use solve::{solve, Solution};

use crate::error::{Error, Result};
use crate::geometry::{free_space_green, Point3};
use crate::harmonics::{fill_schmidt_harmonics, packed_len, SpectralConstants, MAX_TRUNCATION};
use crate::kernel::{
    fill_signature, kernel_integral, KernelConfig, SignatureBranch, SignatureScratch,
};
use crate::mesh::{DomainSpec, PanelMesh, Region};

/// Default near-field radius in units of the mean panel diameter.
pub const NEARFIELD_DIAMETERS: f64 = 5.0;

/// Linear solver used by [`solve`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// LU with partial pivoting of the densified operator.
    DenseDirect,
    /// Restarted GMRES with diagonal preconditioning on the factored
    /// operator, stopped at the given relative residual.
    Iterative {
        tolerance: f64,
        max_iterations: usize,
    },
}

impl SolverKind {
    pub fn iterative(tolerance: f64) -> Self {
        SolverKind::Iterative {
            tolerance,
            max_iterations: 2000,
        }
    }
}

/// Discretization and solver parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BemConfig {
    /// Truncation number of the ground-kernel expansion.
    pub p: usize,
    /// Collocation-to-centroid distance below which panel integrals are
    /// analytic; `None` selects [`NEARFIELD_DIAMETERS`] mean diameters.
    pub nearfield_radius: Option<f64>,
    pub solver: SolverKind,
    /// Target accuracy of the truncated kernel.
    pub prescribed_eps: f64,
    /// Adds the ground kernel to the boundary operator and source terms.
    pub include_ground_kernel: bool,
}

impl BemConfig {
    pub fn new(p: usize, prescribed_eps: f64) -> Result<Self> {
        let config = Self {
            p,
            nearfield_radius: None,
            solver: SolverKind::DenseDirect,
            prescribed_eps,
            include_ground_kernel: true,
        };
        config.validate()?;
        Ok(config)
    }

    /// Plain free-space collocation without the ground kernel.
    pub fn free_space() -> Self {
        Self {
            p: 2,
            nearfield_radius: None,
            solver: SolverKind::DenseDirect,
            prescribed_eps: 0.5,
            include_ground_kernel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.nearfield_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("near-field radius must be positive, got {r}")));
            }
        }
        if !(self.prescribed_eps > 0.0 && self.prescribed_eps < 1.0) {
            return Err(Error::Config(format!(
                "prescribed accuracy must lie in (0, 1), got {}",
                self.prescribed_eps
            )));
        }
        if self.include_ground_kernel && !(2..=MAX_TRUNCATION).contains(&self.p) {
            return Err(Error::Config(format!(
                "truncation number must lie in 2..={MAX_TRUNCATION}, got {}",
                self.p
            )));
        }
        if let SolverKind::Iterative { tolerance, max_iterations } = self.solver {
            if !(tolerance > 0.0 && tolerance < 1.0) || max_iterations == 0 {
                return Err(Error::Config(format!(
                    "iterative solver needs 0 < tolerance < 1 and a positive iteration cap, got {tolerance} and {max_iterations}"
                )));
            }
        }
        Ok(())
    }
}

/// A unit point charge scaled by `strength`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSource {
    pub position: Point3,
    pub strength: f64,
}

impl PointSource {
    pub fn unit(position: Point3) -> Self {
        Self {
            position,
            strength: 1.0,
        }
    }
}

/// Ground-kernel block `R U` in factored form.
///
/// Only harmonics with `n + m` odd contribute, so both factors are stored in
/// the compact odd ordering of [`odd_indices`].
pub struct GroundFactors {
    pub scale_radius: f64,
    pub constants: SpectralConstants,
    /// Collocation rows off the plane `z = 0`; all other rows vanish.
    pub receiver_rows: Vec<usize>,
    /// Row-major `S_n^m(y_i / Re) / Re`, one row per entry of
    /// `receiver_rows`.
    receiver: Vec<f64>,
    /// Column-major `w_j Û_n^m(c_j / Re)`, one column per panel.
    source: Vec<f64>,
    odd: Vec<usize>,
}

impl GroundFactors {
    pub fn rank(&self) -> usize {
        self.odd.len()
    }

    pub fn receiver_factor(&self) -> MatRef<'_, f64> {
        MatRef::from_row_major_slice(&self.receiver, self.receiver_rows.len(), self.rank())
    }

    pub fn source_factor(&self) -> MatRef<'_, f64> {
        let n = self.source.len() / self.rank().max(1);
        MatRef::from_column_major_slice(&self.source, self.rank(), n)
    }

    /// Adds `R (U v)` to `out`.
    pub fn apply_add(&self, v: &[f64], out: &mut [f64]) {
        let moments = self.moments(v);
        let rank = self.rank();
        let rows: Vec<f64> = self
            .receiver
            .par_chunks(rank)
            .map(|row| row.iter().zip(&moments).map(|(a, b)| a * b).sum())
            .collect();
        for (k, &i) in self.receiver_rows.iter().enumerate() {
            out[i] += rows[k];
        }
    }

    /// `U v`, the combined source signature of a density.
    pub fn moments(&self, v: &[f64]) -> Vec<f64> {
        let rank = self.rank();
        let mut moments = vec![0.0; rank];
        for (column, &vj) in self.source.chunks(rank).zip(v) {
            if vj != 0.0 {
                for (m, u) in moments.iter_mut().zip(column) {
                    *m += u * vj;
                }
            }
        }
        moments
    }

    /// Kernel contribution `S(y / Re) / Re . moments` at a point with
    /// `|y| < Re`.
    pub fn contract(&self, y: Point3, moments: &[f64]) -> f64 {
        let p = self.constants.p();
        let mut basis = vec![0.0; packed_len(p)];
        fill_schmidt_harmonics(y / self.scale_radius, p, &mut basis);
        self.odd
            .iter()
            .zip(moments)
            .map(|(&i, m)| basis[i] * m)
            .sum::<f64>()
            / self.scale_radius
    }

    /// Compact signature of a dimensional point source, or `None` when the
    /// source lies too close to the boundary of the extended ball for the
    /// series.
    fn source_moments(&self, x: Point3) -> Result<Option<Vec<f64>>> {
        let scaled = x / self.scale_radius;
        if scaled.norm() > crate::kernel::SERIES_RADIUS_LIMIT {
            return Ok(None);
        }
        let mut scratch = SignatureScratch::new(&self.constants);
        let mut full = vec![0.0; packed_len(self.constants.p())];
        fill_signature(scaled, &self.constants, SignatureBranch::Interior, &mut scratch, &mut full)?;
        Ok(Some(self.odd.iter().map(|&i| full[i]).collect()))
    }
}

/// Packed indices `(n, m)` with `n + m` odd and `n < p`, in increasing order.
pub fn odd_indices(p: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(p * (p.saturating_sub(1)) / 2);
    for n in 1..p {
        let row = n * n;
        let mut i = row + 1;
        while i < row + 2 * n + 1 {
            out.push(i);
            i += 2;
        }
    }
    out
}

/// An assembled boundary-element system.
pub struct BemSystem {
    pub mesh: PanelMesh,
    pub domain: DomainSpec,
    pub config: BemConfig,
    pub nearfield_radius: f64,
    /// Column-major `N x N` free-space block.
    free_space: Vec<f64>,
    pub ground: Option<GroundFactors>,
    pub sources: Vec<PointSource>,
    pub rhs: Vec<f64>,
}

impl BemSystem {
    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    pub fn free_space_block(&self) -> MatRef<'_, f64> {
        let n = self.len();
        MatRef::from_column_major_slice(&self.free_space, n, n)
    }

    /// Applies the full boundary operator `G + R U` to a density.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            let col = &self.free_space[j * n..(j + 1) * n];
            for (o, g) in out.iter_mut().zip(col) {
                *o += g * vj;
            }
        }
        if let Some(ground) = &self.ground {
            ground.apply_add(v, &mut out);
        }
        out
    }

    /// Densified ground block `R U` (`N x N`, zero rows on the plane).
    pub fn densified_ground(&self) -> Option<Mat<f64>> {
        let ground = self.ground.as_ref()?;
        let n = self.len();
        let product = ground.receiver_factor() * ground.source_factor();
        let mut dense = Mat::zeros(n, n);
        for (k, &i) in ground.receiver_rows.iter().enumerate() {
            for j in 0..n {
                dense[(i, j)] = product[(k, j)];
            }
        }
        Some(dense)
    }

    /// Replaces the point sources and recomputes the right-hand side
    /// `-sum_s q_s (G(y_i, x_s) + K^(D)(y_i, x_s; Re))`.
    pub fn set_sources(&mut self, sources: &[PointSource]) -> Result<()> {
        for s in sources {
            if !s.position.is_finite() || !s.strength.is_finite() {
                return Err(Error::Config(format!("non-finite point source at {}", s.position)));
            }
        }
        let incident = incident_field(self, sources, &collocation_points(&self.mesh))?;
        self.rhs = incident.into_iter().map(|v| -v).collect();
        self.sources = sources.to_vec();
        Ok(())
    }

    /// Writes one CSV row per panel with its density.
    pub fn write_solution_csv(&self, solution: &Solution, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["panel", "region", "cx", "cy", "cz", "area", "sigma"])?;
        for (j, panel) in self.mesh.panels.iter().enumerate() {
            let c = panel.centroid;
            writer.write_record([
                j.to_string(),
                self.mesh.tags[j].to_string(),
                format!("{:.17e}", c.x),
                format!("{:.17e}", c.y),
                format!("{:.17e}", c.z),
                format!("{:.17e}", panel.area),
                format!("{:.17e}", solution.sigma[j]),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Writes the configuration, solver statistics and density as JSON.
    pub fn write_solution_json(&self, solution: &Solution, path: &Path) -> Result<()> {
        let report = serde_json::json!({
            "config": self.config,
            "domain": self.domain,
            "feature": self.mesh.feature,
            "panels": self.len(),
            "nearfield_radius": self.nearfield_radius,
            "sources": self.sources,
            "solution": solution,
        });
        let mut file = File::create(path)?;
        serde_json::to_writer_pretty(&mut file, &report)?;
        writeln!(file)?;
        Ok(())
    }
}

fn collocation_points(mesh: &PanelMesh) -> Vec<Point3> {
    mesh.panels.iter().map(|p| p.centroid).collect()
}

/// `sum_s q_s (G(y, x_s) + K^(D)(y, x_s; Re))` at each point, the kernel term
/// only when the system carries it.
pub(crate) fn incident_field(
    system: &BemSystem,
    sources: &[PointSource],
    points: &[Point3],
) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = points
        .par_iter()
        .map(|&y| {
            sources
                .iter()
                .map(|s| s.strength * free_space_green(y, s.position))
                .sum()
        })
        .collect();
    let Some(ground) = &system.ground else {
        return Ok(values);
    };
    let kernel_config = KernelConfig::new(ground.scale_radius, ground.constants.p())?;
    for s in sources {
        let moments = ground.source_moments(s.position)?;
        let terms: Result<Vec<f64>> = points
            .par_iter()
            .map(|&y| {
                if y.z == 0.0 {
                    return Ok(0.0);
                }
                match &moments {
                    Some(m) if y.norm() < ground.scale_radius => Ok(ground.contract(y, m)),
                    _ => kernel_integral(y, s.position, &kernel_config),
                }
            })
            .collect();
        for (v, t) in values.iter_mut().zip(terms?) {
            *v += s.strength * t;
        }
    }
    Ok(values)
}

/// Free-space influence of panel `j` on point `y`: analytic within the near
/// field, centroid rule beyond.
#[inline]
pub(crate) fn panel_influence(mesh: &PanelMesh, j: usize, y: Point3, nearfield_radius: f64) -> f64 {
    let panel = &mesh.panels[j];
    if y.distance(panel.centroid) < nearfield_radius {
        triangle_single_layer(panel, y)
    } else {
        panel.area * free_space_green(y, panel.centroid)
    }
}

/// Assembles the collocation system for `mesh`; call
/// [`BemSystem::set_sources`] to fill the right-hand side.
pub fn assemble(mesh: PanelMesh, domain: DomainSpec, config: BemConfig) -> Result<BemSystem> {
    config.validate()?;
    if mesh.is_empty() {
        return Err(Error::Mesh("cannot assemble an empty mesh".into()));
    }
    let n = mesh.len();
    let nearfield_radius = config
        .nearfield_radius
        .unwrap_or(NEARFIELD_DIAMETERS * mesh.mean_diameter());
    let points = collocation_points(&mesh);

    let mut free_space = vec![0.0; n * n];
    free_space
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(j, column)| {
            for (i, entry) in column.iter_mut().enumerate() {
                *entry = if i == j {
                    triangle_single_layer(&mesh.panels[j], points[i])
                } else {
                    panel_influence(&mesh, j, points[i], nearfield_radius)
                };
            }
        });

    let ground = if config.include_ground_kernel {
        Some(ground_factors(&mesh, &domain, &config, &points)?)
    } else {
        None
    };

    Ok(BemSystem {
        mesh,
        domain,
        config,
        nearfield_radius,
        free_space,
        ground,
        sources: Vec::new(),
        rhs: vec![0.0; n],
    })
}

fn ground_factors(
    mesh: &PanelMesh,
    domain: &DomainSpec,
    config: &BemConfig,
    points: &[Point3],
) -> Result<GroundFactors> {
    let re = domain.re;
    if domain.re <= domain.r0 {
        return Err(Error::Config(format!(
            "the ground kernel needs re > r0, got re = {} and r0 = {}",
            domain.re, domain.r0
        )));
    }
    let implied = (domain.r0 / re).powi(config.p as i32);
    if implied > config.prescribed_eps {
        log::warn!(
            "p = {} gives a kernel accuracy of about {implied:.2e}, coarser than the prescribed {:.2e}",
            config.p,
            config.prescribed_eps
        );
    }
    for (j, c) in points.iter().enumerate() {
        if c.norm() >= re {
            return Err(Error::Mesh(format!(
                "panel {j} has its centroid at |c| = {} outside the extended radius {re}",
                c.norm()
            )));
        }
    }
    let constants = SpectralConstants::new(config.p)?;
    let p = config.p;
    let odd = odd_indices(p);
    let rank = odd.len();
    let n = mesh.len();

    let receiver_rows: Vec<usize> = (0..n).filter(|&i| points[i].z != 0.0).collect();
    let mut receiver = vec![0.0; receiver_rows.len() * rank];
    receiver
        .par_chunks_mut(rank.max(1))
        .zip(receiver_rows.par_iter())
        .for_each_init(
            || vec![0.0; packed_len(p)],
            |basis, (row, &i)| {
                fill_schmidt_harmonics(points[i] / re, p, basis);
                for (v, &k) in row.iter_mut().zip(&odd) {
                    *v = basis[k] / re;
                }
            },
        );

    let mut source = vec![0.0; rank * n];
    source
        .par_chunks_mut(rank.max(1))
        .enumerate()
        .try_for_each_init(
            || (SignatureScratch::new(&constants), vec![0.0; packed_len(p)]),
            |(scratch, full), (j, column)| -> Result<()> {
                let panel = &mesh.panels[j];
                let branch = if mesh.tags[j] == Region::Extension {
                    SignatureBranch::Ground
                } else {
                    SignatureBranch::Interior
                };
                fill_signature(panel.centroid / re, &constants, branch, scratch, full)?;
                for (v, &k) in column.iter_mut().zip(&odd) {
                    *v = panel.area * full[k];
                }
                Ok(())
            },
        )?;

    Ok(GroundFactors {
        scale_radius: re,
        constants,
        receiver_rows,
        receiver,
        source,
        odd,
    })
}
