use std::f64::consts::PI;

use holeplane::bem::{assemble, evaluate_field, solve, BemConfig, PointSource};
use holeplane::experiments::{run_bump_experiment, BumpExperimentConfig, Method};
use holeplane::mesh::make_flat_disc_mesh;
use holeplane::{make_bump_dip_mesh, DomainSpec, Feature, Point3, Region};

#[test]
fn flat_disc_reproduces_image_charge_density() {
    let h = 1.0;
    let mesh = make_flat_disc_mesh(4.0, 0.2).unwrap();
    let domain = mesh.domain.unwrap();
    let mut system = assemble(mesh, domain, BemConfig::free_space()).unwrap();
    system
        .set_sources(&[PointSource::unit(Point3::new(0.0, 0.0, h))])
        .unwrap();
    let solution = solve(&system).unwrap();
    let mut worst: f64 = 0.0;
    for (panel, sigma) in system.mesh.panels.iter().zip(&solution.sigma) {
        let rho = panel.centroid.rho();
        if rho < 2.0 {
            let exact = -h / (2.0 * PI * (rho * rho + h * h).powf(1.5));
            worst = worst.max((sigma - exact).abs() / exact.abs());
        }
    }
    assert!(worst < 0.05, "worst relative deviation {worst}");
}

#[test]
fn potential_vanishes_on_the_ground_and_decays_far_away() {
    let domain = DomainSpec::new(2.0, 2.4).unwrap();
    let mesh = make_bump_dip_mesh(Feature::Bump, domain.r0, domain.re, 0.3).unwrap();
    let mut system = assemble(mesh, domain, BemConfig::new(14, 1e-2).unwrap()).unwrap();
    system
        .set_sources(&[PointSource::unit(Point3::new(0.0, 0.0, 1.6))])
        .unwrap();
    let solution = solve(&system).unwrap();
    let ground: Vec<Point3> = system
        .mesh
        .panels
        .iter()
        .zip(&system.mesh.tags)
        .filter(|(_, t)| **t == Region::Ground)
        .map(|(p, _)| p.centroid)
        .collect();
    let field = evaluate_field(&system, &solution, &ground, "ground").unwrap();
    let scale = 1.0 / (4.0 * PI * 0.6);
    let worst = field.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(worst <= 10.0 * solution.relative_residual.max(1e-12) * scale, "{worst}");

    // the free-space image model is valid everywhere
    let sphere = holeplane::mesh::make_sphere_mesh(0.3).unwrap();
    let mut free = assemble(sphere, DomainSpec::new(1.0, 1.0).unwrap(), BemConfig::free_space()).unwrap();
    free.set_sources(&[
        PointSource::unit(Point3::new(0.0, 0.0, 2.0)),
        PointSource {
            position: Point3::new(0.0, 0.0, -2.0),
            strength: -1.0,
        },
    ])
    .unwrap();
    let sigma = solve(&free).unwrap();
    let direction = Point3::new(0.3, 0.2, 0.9).normalized();
    let far: Vec<Point3> = [10.0, 20.0, 40.0, 80.0].iter().map(|&r| direction * r).collect();
    let values = evaluate_field(&free, &sigma, &far, "far").unwrap().values;
    for pair in values.windows(2) {
        assert!(pair[1].abs() <= 0.5 * pair[0].abs() * 1.001, "{values:?}");
    }
}

#[test]
fn refinement_reduces_the_bump_error() {
    let mut previous = f64::INFINITY;
    for edge in [0.4, 0.2, 0.1] {
        let config = BumpExperimentConfig {
            edge,
            grid_spacing: 0.1,
            ..BumpExperimentConfig::default()
        };
        let eps2 = run_bump_experiment(&config)
            .unwrap()
            .report
            .eps2(Method::Extended)
            .unwrap();
        assert!(eps2 < previous, "edge {edge}: {eps2} after {previous}");
        previous = eps2;
    }
    assert!(previous < 1e-2);
}

#[test]
fn exports_are_complete_and_parseable() {
    let dir = tempfile::tempdir().unwrap();
    let domain = DomainSpec::new(2.0, 2.5).unwrap();
    let mesh = make_bump_dip_mesh(Feature::Bump, domain.r0, domain.re, 0.5).unwrap();
    let mut system = assemble(mesh, domain, BemConfig::new(10, 1e-2).unwrap()).unwrap();
    system
        .set_sources(&[PointSource::unit(Point3::new(0.0, 0.0, 1.5))])
        .unwrap();
    let solution = solve(&system).unwrap();

    let csv_path = dir.path().join("solution.csv");
    system.write_solution_csv(&solution, &csv_path).unwrap();
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["panel", "region", "cx", "cy", "cz", "area", "sigma"]
    );
    let sigma: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap()[6].parse().unwrap())
        .collect();
    assert_eq!(sigma, solution.sigma);

    let json_path = dir.path().join("solution.json");
    system.write_solution_json(&solution, &json_path).unwrap();
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(value["panels"], system.len());
    assert_eq!(value["config"]["p"], 10);

    let points = vec![Point3::new(0.0, 0.0, 1.2), Point3::new(1.5, 0.0, 0.5)];
    let field = evaluate_field(&system, &solution, &points, "probe").unwrap();
    let field_path = dir.path().join("field.csv");
    field.write_csv(&field_path).unwrap();
    let rows = csv::Reader::from_path(&field_path).unwrap().records().count();
    assert_eq!(rows, points.len());
}
