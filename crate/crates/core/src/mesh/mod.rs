//! Triangulated boundary surfaces: the unit bump or dip joined to flat ground
//! rings, with the per-panel geometry used by the boundary-element solver.

mod generate;
mod io;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use generate::{make_bump_dip_mesh, make_flat_disc_mesh, make_sphere_mesh};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Radii of the detailed region `|y| < r0` and of the extended region
/// `|y| < re` used for the ground kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub r0: f64,
    pub re: f64,
    pub delta: f64,
}

impl DomainSpec {
    pub fn new(r0: f64, re: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::Config(format!("r0 must be positive, got {r0}")));
        }
        if !(re >= r0 && re.is_finite()) {
            return Err(Error::Config(format!("re = {re} must be at least r0 = {r0}")));
        }
        Ok(Self {
            r0,
            re,
            delta: re / r0 - 1.0,
        })
    }

    /// Domain with `re = (1 + delta) r0`.
    pub fn from_delta(r0: f64, delta: f64) -> Result<Self> {
        Self::new(r0, r0 * (1.0 + delta))
    }

    pub fn in_detailed_ball(&self, y: Point3) -> bool {
        y.norm() < self.r0
    }

    pub fn in_extended_ball(&self, y: Point3) -> bool {
        y.norm() < self.re
    }
}

/// Which part of the boundary a panel belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// The detailed object surface (bump, dip or sphere).
    Object,
    /// Flat ground inside the detailed ball.
    Ground,
    /// Flat ground between the detailed and the extended radius.
    Extension,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Object => "object",
            Region::Ground => "ground",
            Region::Extension => "extension",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "object" => Ok(Region::Object),
            "ground" => Ok(Region::Ground),
            "extension" => Ok(Region::Extension),
            other => Err(format!("unknown region tag `{other}`")),
        }
    }
}

/// Shape of the unit-radius surface feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feature {
    /// Upper unit hemisphere above the ground.
    Bump,
    /// Lower unit hemisphere carved into the ground.
    Dip,
    /// Flat ground only.
    Flat,
    /// A closed unit sphere without ground.
    Sphere,
}

impl Feature {
    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Bump => "bump",
            Feature::Dip => "dip",
            Feature::Flat => "flat",
            Feature::Sphere => "sphere",
        }
    }

    /// True when `y` lies strictly on the field side of the boundary.
    pub fn in_field(self, y: Point3) -> bool {
        let rho = y.rho();
        match self {
            Feature::Bump => y.z > 0.0 && y.norm() > 1.0,
            Feature::Dip if rho < 1.0 => y.z > -(1.0 - rho * rho).sqrt(),
            Feature::Dip | Feature::Flat => y.z > 0.0,
            Feature::Sphere => y.norm() > 1.0,
        }
    }

    /// Distance from `y` to the (unbounded) boundary surface.
    pub fn boundary_distance(self, y: Point3) -> f64 {
        let rho = y.rho();
        let to_plane = if rho >= 1.0 {
            y.z.abs()
        } else {
            ((1.0 - rho).powi(2) + y.z * y.z).sqrt()
        };
        let to_rim = ((rho - 1.0).powi(2) + y.z * y.z).sqrt();
        match self {
            Feature::Bump => {
                let to_cap = if y.z >= 0.0 { (y.norm() - 1.0).abs() } else { to_rim };
                to_cap.min(to_plane)
            }
            Feature::Dip => {
                let to_bowl = if y.z <= 0.0 { (y.norm() - 1.0).abs() } else { to_rim };
                to_bowl.min(to_plane)
            }
            Feature::Flat => y.z.abs(),
            Feature::Sphere => (y.norm() - 1.0).abs(),
        }
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bump" => Ok(Feature::Bump),
            "dip" => Ok(Feature::Dip),
            "flat" => Ok(Feature::Flat),
            "sphere" => Ok(Feature::Sphere),
            other => Err(format!("unknown feature `{other}`")),
        }
    }
}

/// Per-edge frame of a panel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdgeFrame {
    /// Unit tangent from vertex `q` to vertex `q + 1`.
    pub tangent: Point3,
    pub length: f64,
    /// In-plane unit normal `tangent x n`, pointing out of the triangle.
    pub normal: Point3,
}

/// A flat triangular panel with its derived geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Panel {
    pub vertices: [Point3; 3],
    pub centroid: Point3,
    pub area: f64,
    /// Unit normal, pointing into the field domain.
    pub normal: Point3,
    pub edges: [EdgeFrame; 3],
}

impl Panel {
    /// Builds the panel geometry; the normal follows the vertex order by the
    /// right-hand rule.
    pub fn new(vertices: [Point3; 3]) -> Result<Self> {
        let [a, b, c] = vertices;
        let cross = (b - a).cross(c - a);
        let double_area = cross.norm();
        let scale = (b - a).norm_squared().max((c - a).norm_squared());
        if !(double_area > 1e-14 * scale) || !double_area.is_finite() {
            return Err(Error::Mesh("degenerate triangle".into()));
        }
        let normal = cross / double_area;
        let mut edges = [EdgeFrame {
            tangent: Point3::ORIGIN,
            length: 0.0,
            normal: Point3::ORIGIN,
        }; 3];
        for q in 0..3 {
            let d = vertices[(q + 1) % 3] - vertices[q];
            let length = d.norm();
            let tangent = d / length;
            edges[q] = EdgeFrame {
                tangent,
                length,
                normal: tangent.cross(normal),
            };
        }
        Ok(Self {
            vertices,
            centroid: (a + b + c) / 3.0,
            area: 0.5 * double_area,
            normal,
            edges,
        })
    }

    /// Longest edge length.
    pub fn diameter(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }
}

/// A triangulated surface with region tags.
#[derive(Clone, Debug, Serialize)]
pub struct PanelMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
    pub tags: Vec<Region>,
    pub panels: Vec<Panel>,
    pub domain: Option<DomainSpec>,
    pub feature: Feature,
}

impl PanelMesh {
    /// Builds a mesh from raw data, rejecting out-of-range indices and
    /// degenerate faces with the offending face index in the message.
    pub fn new(
        vertices: Vec<Point3>,
        faces: Vec<[usize; 3]>,
        tags: Vec<Region>,
        domain: Option<DomainSpec>,
        feature: Feature,
    ) -> Result<Self> {
        if faces.len() != tags.len() {
            return Err(Error::Mesh(format!(
                "{} faces but {} region tags",
                faces.len(),
                tags.len()
            )));
        }
        let mut panels = Vec::with_capacity(faces.len());
        for (i, f) in faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Mesh(format!(
                    "face {i} references vertex {bad}, but only {} vertices exist",
                    vertices.len()
                )));
            }
            let panel = Panel::new([vertices[f[0]], vertices[f[1]], vertices[f[2]]])
                .map_err(|_| Error::Mesh(format!("face {i} has zero area")))?;
            panels.push(panel);
        }
        Ok(Self {
            vertices,
            faces,
            tags,
            panels,
            domain,
            feature,
        })
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    /// Number of panels per region tag.
    pub fn tag_counts(&self) -> HashMap<Region, usize> {
        let mut counts = HashMap::new();
        for &t in &self.tags {
            *counts.entry(t).or_insert(0) += 1;
        }
        counts
    }

    pub fn count(&self, region: Region) -> usize {
        self.tags.iter().filter(|&&t| t == region).count()
    }

    pub fn total_area(&self, region: Region) -> f64 {
        self.panels
            .iter()
            .zip(&self.tags)
            .filter(|(_, &t)| t == region)
            .map(|(p, _)| p.area)
            .sum()
    }

    pub fn mean_diameter(&self) -> f64 {
        if self.panels.is_empty() {
            return 0.0;
        }
        self.panels.iter().map(Panel::diameter).sum::<f64>() / self.panels.len() as f64
    }

    pub fn max_diameter(&self) -> f64 {
        self.panels.iter().map(Panel::diameter).fold(0.0, f64::max)
    }

    /// Edges used by exactly one face, as sorted vertex pairs.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        let mut uses: HashMap<[usize; 2], usize> = HashMap::new();
        for f in &self.faces {
            for q in 0..3 {
                let (a, b) = (f[q], f[(q + 1) % 3]);
                *uses.entry([a.min(b), a.max(b)]).or_insert(0) += 1;
            }
        }
        let mut edges: Vec<_> = uses.into_iter().filter(|&(_, n)| n == 1).map(|(e, _)| e).collect();
        edges.sort_unstable();
        edges
    }

    /// Copy of the mesh restricted to the given regions.
    pub fn select(&self, keep: &[Region]) -> Result<Self> {
        let mut faces = Vec::new();
        let mut tags = Vec::new();
        for (f, t) in self.faces.iter().zip(&self.tags) {
            if keep.contains(t) {
                faces.push(*f);
                tags.push(*t);
            }
        }
        Self::new(self.vertices.clone(), faces, tags, self.domain, self.feature)
    }
}
