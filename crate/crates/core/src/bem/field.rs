use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{incident_field, panel_influence, BemSystem, Solution};
use crate::error::{Error, Result};
use crate::geometry::{free_space_green, Point3};

/// Potential sampled at a set of points.
#[derive(Clone, Debug, Serialize)]
pub struct FieldGrid {
    /// Which solution produced the values.
    pub label: String,
    pub points: Vec<Point3>,
    /// Total potential `phi`.
    pub values: Vec<f64>,
    /// Induced potential `phi - sum_s q_s G(y, x_s)`.
    pub induced: Vec<f64>,
    /// False where a point lies on or behind the boundary surface.
    pub in_field: Vec<bool>,
}

impl FieldGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes `x,y,z,phi,phi_induced,in_field` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["x", "y", "z", "phi", "phi_induced", "in_field"])?;
        for i in 0..self.len() {
            let y = self.points[i];
            writer.write_record([
                format!("{:.17e}", y.x),
                format!("{:.17e}", y.y),
                format!("{:.17e}", y.z),
                format!("{:.17e}", self.values[i]),
                format!("{:.17e}", self.induced[i]),
                self.in_field[i].to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut file = File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        writeln!(file)?;
        Ok(())
    }
}

/// Evaluates the potential of a solved system,
/// `phi(y) = sum_s q_s (G + K)(y, x_s) + sum_j sigma_j (L_j(y) + w_j K(y, c_j))`,
/// with the same near/far split as the assembly.
///
/// Points behind the boundary are evaluated anyway and flagged.
pub fn evaluate_field(
    system: &BemSystem,
    solution: &Solution,
    points: &[Point3],
    label: &str,
) -> Result<FieldGrid> {
    if solution.sigma.len() != system.len() {
        return Err(Error::Config(format!(
            "solution has {} densities for {} panels",
            solution.sigma.len(),
            system.len()
        )));
    }
    if let Some(ground) = &system.ground {
        if let Some(y) = points.iter().find(|y| y.norm() >= ground.scale_radius) {
            return Err(Error::Domain(format!(
                "field point {y} lies outside the extended radius {}",
                ground.scale_radius
            )));
        }
    }
    let incident = incident_field(system, &system.sources, points)?;
    let moments = system.ground.as_ref().map(|g| g.moments(&solution.sigma));
    let sigma = &solution.sigma;
    let induced: Vec<f64> = points
        .par_iter()
        .zip(&incident)
        .map(|(&y, &inc)| {
            let direct: f64 = system
                .sources
                .iter()
                .map(|s| s.strength * free_space_green(y, s.position))
                .sum();
            let layer: f64 = (0..system.len())
                .map(|j| sigma[j] * panel_influence(&system.mesh, j, y, system.nearfield_radius))
                .sum();
            let kernel = match (&system.ground, &moments) {
                (Some(g), Some(m)) if y.z != 0.0 => g.contract(y, m),
                _ => 0.0,
            };
            inc - direct + layer + kernel
        })
        .collect();
    let values = points
        .iter()
        .zip(&induced)
        .map(|(&y, ind)| {
            ind + system
                .sources
                .iter()
                .map(|s| s.strength * free_space_green(y, s.position))
                .sum::<f64>()
        })
        .collect();
    Ok(FieldGrid {
        label: label.to_string(),
        points: points.to_vec(),
        values,
        induced,
        in_field: points.iter().map(|&y| system.mesh.feature.in_field(y)).collect(),
    })
}
