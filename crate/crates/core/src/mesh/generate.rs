use std::f64::consts::{FRAC_PI_2, PI};

use super::{DomainSpec, Feature, PanelMesh, Region};
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Incremental builder that stitches rings of vertices into triangles.
struct Builder {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
    tags: Vec<Region>,
}

/// A closed ring of vertex indices at increasing azimuth starting at `offset`.
struct Ring {
    start: usize,
    len: usize,
    offset: f64,
}

impl Ring {
    fn index(&self, i: usize) -> usize {
        self.start + i % self.len
    }

    fn angle(&self, i: usize) -> f64 {
        self.offset + 2.0 * PI * i as f64 / self.len as f64
    }
}

impl Builder {
    fn new() -> Self {
        Self {
            vertices: Vec::new(),
            faces: Vec::new(),
            tags: Vec::new(),
        }
    }

    fn ring(&mut self, len: usize, offset: f64, at: impl Fn(f64) -> Point3) -> Ring {
        let start = self.vertices.len();
        let ring = Ring { start, len, offset };
        for i in 0..len {
            self.vertices.push(at(ring.angle(i)));
        }
        ring
    }

    fn point(&mut self, p: Point3) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    /// Adds a triangle oriented so that its normal has a positive component
    /// along `toward(centroid)`.
    fn triangle(&mut self, mut f: [usize; 3], tag: Region, toward: &impl Fn(Point3) -> Point3) {
        let [a, b, c] = f.map(|i| self.vertices[i]);
        let normal = (b - a).cross(c - a);
        if normal.dot(toward((a + b + c) / 3.0)) < 0.0 {
            f.swap(1, 2);
        }
        self.faces.push(f);
        self.tags.push(tag);
    }

    /// Triangulates the band between two rings by advancing along whichever
    /// ring has the next vertex at smaller azimuth.
    fn zip(&mut self, inner: &Ring, outer: &Ring, tag: Region, toward: &impl Fn(Point3) -> Point3) {
        let (mut i, mut j) = (0, 0);
        while i < inner.len || j < outer.len {
            let advance_inner =
                j >= outer.len || (i < inner.len && inner.angle(i + 1) <= outer.angle(j + 1));
            if advance_inner {
                self.triangle([inner.index(i), outer.index(j), inner.index(i + 1)], tag, toward);
                i += 1;
            } else {
                self.triangle([inner.index(i), outer.index(j), outer.index(j + 1)], tag, toward);
                j += 1;
            }
        }
    }

    fn fan(&mut self, apex: usize, ring: &Ring, tag: Region, toward: &impl Fn(Point3) -> Point3) {
        for i in 0..ring.len {
            self.triangle([apex, ring.index(i), ring.index(i + 1)], tag, toward);
        }
    }

    fn finish(self, domain: Option<DomainSpec>, feature: Feature) -> Result<PanelMesh> {
        PanelMesh::new(self.vertices, self.faces, self.tags, domain, feature)
    }
}

fn ring_len(circumference: f64, edge: f64) -> usize {
    ((circumference / edge).round() as usize).max(6)
}

fn check_edge(target_edge: f64) -> Result<()> {
    if !(target_edge > 0.0 && target_edge.is_finite()) {
        return Err(Error::Config(format!(
            "target edge length must be positive, got {target_edge}"
        )));
    }
    if target_edge > 1.0 {
        return Err(Error::Config(format!(
            "target edge length {target_edge} is too coarse for a unit feature"
        )));
    }
    Ok(())
}

/// Half-offset staggering between consecutive rings keeps triangles closer
/// to equilateral.
fn stagger(k: usize, len: usize) -> f64 {
    if k % 2 == 1 {
        PI / len as f64
    } else {
        0.0
    }
}

/// Builds the latitude rings of a unit hemisphere from the pole (exclusive)
/// to the equator (inclusive) and returns the pole index and the rings.
fn hemisphere(b: &mut Builder, up: f64, edge: f64, tag: Region) -> (usize, Vec<Ring>) {
    let bands = ((FRAC_PI_2 / edge).ceil() as usize).max(2);
    let pole = b.point(Point3::new(0.0, 0.0, up));
    let mut rings = Vec::with_capacity(bands);
    for k in 1..=bands {
        let theta = FRAC_PI_2 * k as f64 / bands as f64;
        let (s, c) = theta.sin_cos();
        // the equator is exactly z = 0 and rho = 1
        let (s, c) = if k == bands { (1.0, 0.0) } else { (s, c) };
        let len = ring_len(2.0 * PI * s, edge);
        let offset = stagger(k, len);
        rings.push(b.ring(len, offset, |phi| Point3::new(s * phi.cos(), s * phi.sin(), up * c)));
    }
    let toward_field = move |c: Point3| if up > 0.0 { c } else { -c };
    b.fan(pole, &rings[0], tag, &toward_field);
    for k in 1..rings.len() {
        let (lo, hi) = rings.split_at(k);
        b.zip(&lo[k - 1], &hi[0], tag, &toward_field);
    }
    (pole, rings)
}

/// Adds flat rings from the radius of `inner` out to `outer_radius`,
/// returning the outermost ring.
fn flat_annulus(
    b: &mut Builder,
    inner: Ring,
    inner_radius: f64,
    outer_radius: f64,
    edge: f64,
    tag: Region,
    parity: &mut usize,
) -> Ring {
    let steps = (((outer_radius - inner_radius) / edge).round() as usize).max(1);
    let up = |_: Point3| Point3::new(0.0, 0.0, 1.0);
    let mut current = inner;
    for k in 1..=steps {
        let radius = if k == steps {
            outer_radius
        } else {
            inner_radius + (outer_radius - inner_radius) * k as f64 / steps as f64
        };
        *parity += 1;
        let len = ring_len(2.0 * PI * radius, edge);
        let next = b.ring(len, stagger(*parity, len), |phi| {
            Point3::new(radius * phi.cos(), radius * phi.sin(), 0.0)
        });
        b.zip(&current, &next, tag, &up);
        current = next;
    }
    current
}

/// Meshes a unit hemispherical bump (`Feature::Bump`) or dip
/// (`Feature::Dip`) joined at `rho = 1` to flat ground out to `r0` (tag
/// [`Region::Ground`]) and from `r0` to `re` (tag [`Region::Extension`]).
///
/// Edge lengths are close to `target_edge` everywhere; normals point into
/// the field domain.
pub fn make_bump_dip_mesh(feature: Feature, r0: f64, re: f64, target_edge: f64) -> Result<PanelMesh> {
    check_edge(target_edge)?;
    let domain = DomainSpec::new(r0, re)?;
    let up = match feature {
        Feature::Bump => {
            if r0 <= 1.0 {
                return Err(Error::Config(format!(
                    "a bump needs r0 > 1 to enclose the feature, got {r0}"
                )));
            }
            1.0
        }
        Feature::Dip => {
            if r0 < 1.0 {
                return Err(Error::Config(format!("a dip needs r0 >= 1, got {r0}")));
            }
            -1.0
        }
        other => {
            return Err(Error::Config(format!(
                "bump/dip generator cannot build a `{}` surface",
                other.as_str()
            )))
        }
    };
    let mut b = Builder::new();
    let (_, mut rings) = hemisphere(&mut b, up, target_edge, Region::Object);
    let rim = rings.pop().expect("hemisphere has rings");
    let mut parity = rings.len() + 1;
    let ground_edge = if r0 > 1.0 {
        flat_annulus(&mut b, rim, 1.0, r0, target_edge, Region::Ground, &mut parity)
    } else {
        rim
    };
    if re > r0 {
        flat_annulus(&mut b, ground_edge, r0, re, target_edge, Region::Extension, &mut parity);
    }
    b.finish(Some(domain), feature)
}

/// Meshes the closed unit sphere with outward normals, all tagged
/// [`Region::Object`].
pub fn make_sphere_mesh(target_edge: f64) -> Result<PanelMesh> {
    check_edge(target_edge)?;
    let mut b = Builder::new();
    let (_, upper) = hemisphere(&mut b, 1.0, target_edge, Region::Object);
    let equator = upper.last().expect("hemisphere has rings");
    let equator = Ring {
        start: equator.start,
        len: equator.len,
        offset: equator.offset,
    };
    // lower hemisphere, rebuilt from the shared equator downwards
    let bands = upper.len();
    let outward = |c: Point3| c;
    let mut previous = equator;
    for k in (1..bands).rev() {
        let theta = FRAC_PI_2 * k as f64 / bands as f64;
        let (s, c) = theta.sin_cos();
        let len = ring_len(2.0 * PI * s, target_edge);
        let ring = b.ring(len, stagger(k, len), |phi| Point3::new(s * phi.cos(), s * phi.sin(), -c));
        b.zip(&ring, &previous, Region::Object, &outward);
        previous = ring;
    }
    let pole = b.point(Point3::new(0.0, 0.0, -1.0));
    b.fan(pole, &previous, Region::Object, &outward);
    b.finish(None, Feature::Sphere)
}

/// Meshes a flat disc of the given radius in `z = 0`, tagged
/// [`Region::Ground`], with upward normals.
pub fn make_flat_disc_mesh(radius: f64, target_edge: f64) -> Result<PanelMesh> {
    check_edge(target_edge)?;
    if !(radius > 0.0) {
        return Err(Error::Config(format!("disc radius must be positive, got {radius}")));
    }
    let mut b = Builder::new();
    let centre = b.point(Point3::ORIGIN);
    let first_radius = target_edge.min(radius);
    let len = ring_len(2.0 * PI * first_radius, target_edge);
    let first = b.ring(len, 0.0, |phi| {
        Point3::new(first_radius * phi.cos(), first_radius * phi.sin(), 0.0)
    });
    b.fan(centre, &first, Region::Ground, &|_| Point3::new(0.0, 0.0, 1.0));
    if radius > first_radius {
        let mut parity = 0;
        flat_annulus(&mut b, first, first_radius, radius, target_edge, Region::Ground, &mut parity);
    }
    b.finish(Some(DomainSpec::new(radius, radius)?), Feature::Flat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_vertices_on_unit_sphere() {
        let mesh = make_bump_dip_mesh(Feature::Bump, 2.0, 2.2, 0.1).unwrap();
        for (f, t) in mesh.faces.iter().zip(&mesh.tags) {
            if *t == Region::Object {
                for &v in f {
                    let p = mesh.vertices[v];
                    assert!((p.norm_squared() - 1.0).abs() < 1e-12);
                    assert!(p.z >= 0.0);
                }
            }
        }
    }

    #[test]
    fn flat_area_matches_annulus() {
        let (r0, re) = (2.0, 2.3);
        let mesh = make_bump_dip_mesh(Feature::Bump, r0, re, 0.1).unwrap();
        let flat = mesh.total_area(Region::Ground) + mesh.total_area(Region::Extension);
        let exact = PI * (re * re - 1.0);
        assert!((flat / exact - 1.0).abs() < 0.02, "{flat} vs {exact}");
        let ext = mesh.total_area(Region::Extension);
        assert!((ext / (PI * (re * re - r0 * r0)) - 1.0).abs() < 0.02);
    }

    #[test]
    fn watertight_except_outer_rim() {
        for feature in [Feature::Bump, Feature::Dip] {
            let r0 = if feature == Feature::Bump { 1.5 } else { 1.0 };
            let re = 1.7;
            let mesh = make_bump_dip_mesh(feature, r0, re, 0.12).unwrap();
            for [a, b] in mesh.boundary_edges() {
                for v in [a, b] {
                    let p = mesh.vertices[v];
                    assert!((p.rho() - re).abs() < 1e-12 && p.z == 0.0, "open edge at {p}");
                }
            }
        }
    }

    #[test]
    fn normals_point_into_field() {
        let bump = make_bump_dip_mesh(Feature::Bump, 1.6, 1.8, 0.1).unwrap();
        let dip = make_bump_dip_mesh(Feature::Dip, 1.0, 1.3, 0.1).unwrap();
        for (mesh, sign) in [(&bump, 1.0), (&dip, -1.0)] {
            for (p, t) in mesh.panels.iter().zip(&mesh.tags) {
                match t {
                    Region::Object => assert!(sign * p.normal.dot(p.centroid) > 0.0),
                    _ => {
                        assert!(p.normal.z > 0.0);
                        assert_eq!(p.centroid.z, 0.0);
                    }
                }
            }
        }
        let sphere = make_sphere_mesh(0.15).unwrap();
        assert!(sphere.boundary_edges().is_empty());
        for p in &sphere.panels {
            assert!(p.normal.dot(p.centroid) > 0.0);
        }
    }

    #[test]
    fn extension_panels_lie_in_their_band() {
        let mesh = make_bump_dip_mesh(Feature::Bump, 2.0, 2.187, 0.075).unwrap();
        for (p, t) in mesh.panels.iter().zip(&mesh.tags) {
            if *t == Region::Extension {
                let r = p.centroid.rho();
                assert!((2.0..=2.187).contains(&r));
            }
        }
    }

    #[test]
    fn benchmark_scale_panel_counts() {
        // reported coarse bump run: 6401 panels within r0, 7661 within re
        let mesh = make_bump_dip_mesh(Feature::Bump, 2.0, 2.187, 0.075).unwrap();
        let n0 = mesh.count(Region::Object) + mesh.count(Region::Ground);
        let ne = mesh.len();
        assert!(n0 > 6401 / 2 && n0 < 6401 * 2, "n0 = {n0}");
        assert!(ne > 7661 / 2 && ne < 7661 * 2, "ne = {ne}");
    }

    #[test]
    fn edge_frames_are_consistent() {
        let mesh = make_bump_dip_mesh(Feature::Dip, 1.2, 1.4, 0.15).unwrap();
        for p in &mesh.panels {
            assert!((p.normal.norm() - 1.0).abs() < 1e-14);
            assert!(p.area > 0.0);
            for q in 0..3 {
                let e = p.edges[q];
                let expected = e.tangent.cross(p.normal);
                assert!((e.normal - expected).norm() < 1e-14);
                let span = p.vertices[(q + 1) % 3] - p.vertices[q];
                assert!((span - e.tangent * e.length).norm() < 1e-14);
                // the opposite vertex is on the inner side of every edge
                let opposite = p.vertices[(q + 2) % 3] - p.vertices[q];
                assert!(opposite.dot(e.normal) < 0.0);
            }
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(make_bump_dip_mesh(Feature::Bump, 2.0, 2.2, 0.0).is_err());
        assert!(make_bump_dip_mesh(Feature::Bump, 2.0, 1.9, 0.1).is_err());
        assert!(make_bump_dip_mesh(Feature::Bump, 1.0, 1.2, 0.1).is_err());
    }
}
