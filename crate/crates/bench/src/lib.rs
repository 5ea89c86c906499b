//! Fixtures shared by the criterion benches.

use holeplane::bem::{assemble, BemConfig, BemSystem};
use holeplane::{make_bump_dip_mesh, DomainSpec, Feature, Point3};

/// Deterministic points spread through the ball of radius `r`.
pub fn ball_points(count: usize, r: f64) -> Vec<Point3> {
    // golden-angle spiral over shells, so benches need no random generator
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let t = (k as f64 + 0.5) / count as f64;
            let z = 1.0 - 2.0 * t;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            let shell = r * (0.2 + 0.8 * ((k * 7 % count) as f64 + 0.5) / count as f64);
            Point3::new(s * phi.cos(), s * phi.sin(), z) * shell
        })
        .collect()
}

/// Assembled bump system with `r0 = 2`, `re = ratio * r0`.
pub fn bump_system(edge: f64, ratio: f64, p: usize) -> BemSystem {
    let domain = DomainSpec::new(2.0, 2.0 * ratio).expect("valid radii");
    let mesh = make_bump_dip_mesh(Feature::Bump, domain.r0, domain.re, edge).expect("valid mesh");
    assemble(mesh, domain, BemConfig::new(p, 1e-2).expect("valid config")).expect("assembles")
}
