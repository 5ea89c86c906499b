//! Laplace Green's-function analogues for a ground plane with a circular
//! hole, a collocation boundary-element solver built on them, and the
//! benchmark studies that validate both.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bem;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod harmonics;
pub mod kernel;
pub mod mesh;
pub mod quadrature;

pub use error::{Error, Result};
pub use geometry::{free_space_green, Point3};
pub use harmonics::{
    build_spectral_constants, elliptic_ke, solid_harmonics, EllipticPair, SolidHarmonicTable,
    SpectralConstants,
};
pub use kernel::{
    kernel_dirichlet, kernel_integral, kernel_integral_truncated, kernel_neumann, kernel_series,
    radial_table, source_signature, EvaluationPath, GroundKernel, KernelConfig, RadialTable,
    SourceSignature, SERIES_RADIUS_LIMIT,
};
pub use mesh::{
    load_mesh, make_bump_dip_mesh, save_mesh, DomainSpec, Feature, Panel, PanelMesh, Region,
};
pub use bem::{
    assemble, evaluate_field, solve, triangle_single_layer, BemConfig, BemSystem, FieldGrid,
    PointSource, Solution, SolverKind,
};
pub use experiments::{choose_truncation, relative_l2_error};
