//! Validation studies: kernel accuracy maps, the cost model, and the bump and
//! dip boundary-element benchmarks.

mod accuracy;
mod benchmarks;
mod cost;

use serde::{Deserialize, Serialize};

pub use accuracy::{accuracy_map, AccuracyCell, AccuracyMap, AccuracyMapConfig};
pub use cost::{
    cost_bracket, cost_optimizer, fit_kernel_constants, fit_solver_constant, measure_cost_curve,
    CostCurve, CostCurveConfig, CostModel, CostOptimum, KernelPointSets, KernelTiming, ALPHA_STAR,
};
pub use benchmarks::{
    fit_power_law, run_bump_experiment, run_dip_experiment, BumpExperimentConfig, BumpOutcome,
    BumpReport, DipExperimentConfig, DipReport, DipSweepPoint, Method, PowerFit, RunSummary,
};

use crate::error::{Error, Result};
use crate::geometry::{free_space_green, Point3};
use crate::mesh::Feature;

/// Smallest truncation number with `(r0 / re)^p <= eps`, at least 2.
pub fn choose_truncation(r0: f64, re: f64, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("accuracy must lie in (0, 1), got {eps}")));
    }
    if !(r0 > 0.0 && re > r0 && re.is_finite()) {
        return Err(Error::Config(format!(
            "need 0 < r0 < re for a finite truncation, got r0 = {r0}, re = {re}"
        )));
    }
    // the small slack keeps exact ratios such as p = 3 for eps = 1e-3, re/r0 = 10
    let p = (eps.ln() / (r0 / re).ln() - 1e-9).ceil();
    Ok((p as usize).max(2))
}

/// `|f - f_ref|_2 / |f_ref|_2`.
pub fn relative_l2_error(field: &[f64], reference: &[f64]) -> Result<f64> {
    if field.len() != reference.len() {
        return Err(Error::Config(format!(
            "field has {} values, reference {}",
            field.len(),
            reference.len()
        )));
    }
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (f, r) in field.iter().zip(reference) {
        diff += (f - r) * (f - r);
        norm += r * r;
    }
    if norm == 0.0 {
        return Err(Error::Domain("reference field has zero norm".into()));
    }
    Ok((diff / norm).sqrt())
}

/// Source and image charges of a unit charge at `(0, 0, h)` above a grounded
/// plane with a unit hemispherical bump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpBenchmark {
    pub h: f64,
}

impl BumpBenchmark {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 1.0 && h.is_finite()) {
            return Err(Error::Config(format!("the source must sit above the bump, h > 1, got {h}")));
        }
        Ok(Self { h })
    }

    pub fn source(&self) -> Point3 {
        Point3::new(0.0, 0.0, self.h)
    }

    /// Charges `(position, strength)`: the source, its mirror in the plane,
    /// and the Kelvin images of both in the unit sphere.
    pub fn charges(&self) -> [(Point3, f64); 4] {
        let h = self.h;
        [
            (Point3::new(0.0, 0.0, h), 1.0),
            (Point3::new(0.0, 0.0, -h), -1.0),
            (Point3::new(0.0, 0.0, 1.0 / h), -1.0 / h),
            (Point3::new(0.0, 0.0, -1.0 / h), 1.0 / h),
        ]
    }

    pub fn potential(&self, y: Point3) -> Result<f64> {
        let charges = self.charges();
        if charges.iter().any(|(x, _)| *x == y) {
            return Err(Error::SingularPoint(y.to_array()));
        }
        Ok(charges.iter().map(|(x, q)| q * free_space_green(y, *x)).sum())
    }
}

/// Exact potential of the bump benchmark.
pub fn analytic_bump_potential(y: Point3, h: f64) -> Result<f64> {
    BumpBenchmark::new(h)?.potential(y)
}

/// Regular grid in the half plane `y = 0` inside `|y| < r0`, keeping points
/// at least `standoff` away from the boundary surface and from every source.
pub fn evaluation_grid(
    feature: Feature,
    r0: f64,
    spacing: f64,
    standoff: f64,
    sources: &[Point3],
) -> Vec<Point3> {
    let steps = (r0 / spacing).floor() as i64;
    let mut out = Vec::new();
    for iz in -steps..=steps {
        for ix in -steps..=steps {
            let y = Point3::new(ix as f64 * spacing, 0.0, iz as f64 * spacing);
            if y.norm() < r0
                && feature.in_field(y)
                && feature.boundary_distance(y) >= standoff
                && sources.iter().all(|s| s.distance(y) >= standoff)
            {
                out.push(y);
            }
        }
    }
    out
}
