use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cost::KernelPointSets;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::harmonics::{fill_schmidt_harmonics, packed_len, SpectralConstants};
use crate::kernel::{dot_odd, fill_signature, kernel_integral, KernelConfig, SignatureBranch, SignatureScratch};

/// Parameters of the `(re / r0, p)` accuracy map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMapConfig {
    pub points: KernelPointSets,
    pub ratios: Vec<f64>,
    pub truncations: Vec<usize>,
    /// Relative tolerance of the integral reference.
    pub integral_tolerance: f64,
}

impl Default for AccuracyMapConfig {
    fn default() -> Self {
        Self {
            points: KernelPointSets {
                r0: 1.0,
                receivers: 64,
                hemisphere_sources: 128,
                extension_sources: 128,
                seed: 11,
            },
            ratios: vec![1.25, 1.5, 1.75, 2.0, 2.2255, 2.5, 3.0, 3.5, 4.0],
            truncations: (2..=40).step_by(2).collect(),
            integral_tolerance: 1e-12,
        }
    }
}

/// One cell of the map.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AccuracyCell {
    pub ratio: f64,
    pub p: usize,
    /// Relative L2 error of the series over all pairs with a reference.
    pub eps2: f64,
    pub pairs: usize,
    /// Pairs whose reference quadrature did not converge.
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AccuracyMap {
    pub config: AccuracyMapConfig,
    pub cells: Vec<AccuracyCell>,
}

impl AccuracyMap {
    pub fn cell(&self, ratio: f64, p: usize) -> Option<&AccuracyCell> {
        self.cells
            .iter()
            .find(|c| c.p == p && (c.ratio - ratio).abs() < 1e-12)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["ratio", "p", "eps2", "pairs", "failures"])?;
        for c in &self.cells {
            writer.write_record([
                format!("{}", c.ratio),
                c.p.to_string(),
                format!("{:.6e}", c.eps2),
                c.pairs.to_string(),
                c.failures.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Relative L2 error of the truncated series against the integral
/// representation for every `(ratio, p)` cell.
pub fn accuracy_map(config: &AccuracyMapConfig) -> Result<AccuracyMap> {
    if config.ratios.is_empty() || config.truncations.is_empty() {
        return Err(Error::Config("the accuracy map needs ratios and truncation numbers".into()));
    }
    if config.ratios.iter().any(|r| !(*r > 1.0)) {
        return Err(Error::Config("every ratio re / r0 must exceed 1".into()));
    }
    let receivers = config.points.receiver_points();
    let mut cells = Vec::new();
    for &ratio in &config.ratios {
        let re = config.points.r0 * ratio;
        let (hemisphere, ring) = config.points.source_points(re);
        let mut kernel_config = KernelConfig::new(re, 2)?;
        kernel_config.integral_tolerance = config.integral_tolerance;
        let pairs: Vec<(Point3, Point3, SignatureBranch)> = hemisphere
            .iter()
            .map(|&x| (x, SignatureBranch::Interior))
            .chain(ring.iter().map(|&x| (x, SignatureBranch::Ground)))
            .flat_map(|(x, b)| receivers.iter().map(move |&y| (y, x, b)))
            .collect();
        let reference: Vec<Option<f64>> = pairs
            .par_iter()
            .map(|(y, x, _)| kernel_integral(*y, *x, &kernel_config).ok())
            .collect();
        let failures = reference.iter().filter(|r| r.is_none()).count();
        for &p in &config.truncations {
            let constants = SpectralConstants::new(p)?;
            let receiver_basis: Vec<Vec<f64>> = receivers
                .iter()
                .map(|&y| {
                    let mut b = vec![0.0; packed_len(p)];
                    fill_schmidt_harmonics(y / re, p, &mut b);
                    b
                })
                .collect();
            let sources: Vec<(Point3, SignatureBranch)> = hemisphere
                .iter()
                .map(|&x| (x, SignatureBranch::Interior))
                .chain(ring.iter().map(|&x| (x, SignatureBranch::Ground)))
                .collect();
            let series: Vec<Vec<f64>> = sources
                .par_iter()
                .map_init(
                    || SignatureScratch::new(&constants),
                    |scratch, &(x, branch)| -> Result<Vec<f64>> {
                        let mut sig = vec![0.0; packed_len(p)];
                        fill_signature(x / re, &constants, branch, scratch, &mut sig)?;
                        Ok(receiver_basis.iter().map(|b| dot_odd(&sig, b, p) / re).collect())
                    },
                )
                .collect::<Result<_>>()?;
            let mut diff = 0.0;
            let mut norm = 0.0;
            let mut used = 0;
            for (k, value) in series.iter().flatten().enumerate() {
                if let Some(r) = reference[k] {
                    diff += (value - r) * (value - r);
                    norm += r * r;
                    used += 1;
                }
            }
            let eps2 = if norm > 0.0 { (diff / norm).sqrt() } else { f64::NAN };
            cells.push(AccuracyCell {
                ratio,
                p,
                eps2,
                pairs: used,
                failures,
            });
        }
        log::info!("accuracy map: re / r0 = {ratio} done ({failures} reference failures)");
    }
    Ok(AccuracyMap {
        config: config.clone(),
        cells,
    })
}
