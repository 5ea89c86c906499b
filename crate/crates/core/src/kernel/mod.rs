//! The Dirichlet and Neumann ground kernels `K^(D)`, `K^(N)` for a ground
//! plane with a circular hole of radius `R`, evaluated either by quadrature of
//! their integral representation or by the factored harmonic series.

mod coefficients;
mod integral;
mod radial;
mod signature;

use serde::{Deserialize, Serialize};

pub use coefficients::SeriesCoefficients;
pub use integral::{kernel_integral, kernel_integral_truncated};
pub use radial::{radial_table, RadialMethod, RadialTable};
pub use signature::{source_signature, source_signature_with, SignatureBranch, SourceSignature};

pub(crate) use signature::{dot_odd, fill_signature, SignatureScratch};

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::harmonics::{fill_schmidt_harmonics, packed_len, SpectralConstants};

/// Largest scaled radius at which the automatic path still uses the series.
pub const SERIES_RADIUS_LIMIT: f64 = 0.95;

/// Parameters of a kernel evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Hole radius `R`.
    pub scale_radius: f64,
    /// Truncation number of the series path.
    pub p: usize,
    /// Relative tolerance of the quadrature paths.
    pub integral_tolerance: f64,
    /// Cutoff radius of the truncated integral.
    pub tail_radius: f64,
}

impl KernelConfig {
    pub fn new(scale_radius: f64, p: usize) -> Result<Self> {
        let config = Self {
            scale_radius,
            p,
            integral_tolerance: 1e-12,
            tail_radius: 1e3 * scale_radius,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale_radius > 0.0 && self.scale_radius.is_finite()) {
            return Err(Error::Config(format!(
                "scale radius must be positive, got {}",
                self.scale_radius
            )));
        }
        if !(self.tail_radius > self.scale_radius) {
            return Err(Error::Config(format!(
                "tail radius {} must exceed the scale radius {}",
                self.tail_radius, self.scale_radius
            )));
        }
        if self.p < 2 || self.p > crate::harmonics::MAX_TRUNCATION {
            return Err(Error::Config(format!(
                "truncation number must lie in 2..={}, got {}",
                crate::harmonics::MAX_TRUNCATION,
                self.p
            )));
        }
        if !(self.integral_tolerance > 0.0 && self.integral_tolerance < 1.0) {
            return Err(Error::Config(format!(
                "integral tolerance must lie in (0, 1), got {}",
                self.integral_tolerance
            )));
        }
        Ok(())
    }
}

/// Evaluation path for a single kernel value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluationPath {
    Series,
    Integral,
    /// Series when both scaled radii are at most [`SERIES_RADIUS_LIMIT`].
    #[default]
    Auto,
}

/// Kernel evaluator holding the constant tables for one configuration.
#[derive(Clone, Debug)]
pub struct GroundKernel {
    config: KernelConfig,
    constants: SpectralConstants,
}

impl GroundKernel {
    pub fn new(config: KernelConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            constants: SpectralConstants::new(config.p)?,
            config,
        })
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn constants(&self) -> &SpectralConstants {
        &self.constants
    }

    /// Signature of a dimensional source point.
    pub fn signature(&self, x: Point3) -> Result<SourceSignature> {
        source_signature(x / self.config.scale_radius, &self.constants)
    }

    /// `K^(D)(y, x; R)` along the requested path.
    pub fn dirichlet(&self, y: Point3, x: Point3, path: EvaluationPath) -> Result<f64> {
        let r = self.config.scale_radius;
        let use_series = match path {
            EvaluationPath::Series => true,
            EvaluationPath::Integral => false,
            EvaluationPath::Auto => {
                y.norm() / r <= SERIES_RADIUS_LIMIT && x.norm() / r <= SERIES_RADIUS_LIMIT
            }
        };
        if use_series {
            if y.norm() >= r {
                return Err(Error::Domain(format!(
                    "series path needs |y| < R, got |y| = {} with R = {r}",
                    y.norm()
                )));
            }
            let signature = self.signature(x)?;
            Ok(kernel_series(y, &signature, &self.config))
        } else {
            kernel_integral(y, x, &self.config)
        }
    }

    /// `K^(N)(y, x; R) = -K^(D)(x, y; R)`.
    pub fn neumann(&self, y: Point3, x: Point3, path: EvaluationPath) -> Result<f64> {
        Ok(-self.dirichlet(x, y, path)?)
    }
}

/// Contracts the receiver harmonics of `y / R` with a source signature built
/// for the same `R`, returning `K^(D)(y, x; R)`.
pub fn kernel_series(y: Point3, signature: &SourceSignature, config: &KernelConfig) -> f64 {
    let r = config.scale_radius;
    let p = signature.p;
    let mut basis = vec![0.0; packed_len(p)];
    fill_schmidt_harmonics(y / r, p, &mut basis);
    dot_odd(signature.scaled_values(), &basis, p) / r
}

/// `K^(N)(y, x; R) = -K^(D)(x, y; R)` by the automatically chosen path.
pub fn kernel_neumann(y: Point3, x: Point3, config: &KernelConfig) -> Result<f64> {
    GroundKernel::new(*config)?.neumann(y, x, EvaluationPath::Auto)
}

/// `K^(D)(y, x; R)` by the automatically chosen path.
pub fn kernel_dirichlet(y: Point3, x: Point3, config: &KernelConfig) -> Result<f64> {
    GroundKernel::new(*config)?.dirichlet(y, x, EvaluationPath::Auto)
}
