use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{DomainSpec, Feature, PanelMesh, Region};
use crate::error::{Error, Result};
use crate::geometry::Point3;

const MAGIC: &str = "holeplane-mesh 1";

/// Serializes a mesh in the line-oriented text format described in
/// `docs/mesh-format.md`. Coordinates use the shortest representation that
/// parses back to the identical `f64`.
pub fn write_mesh(mesh: &PanelMesh) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let _ = writeln!(out, "feature {}", mesh.feature.as_str());
    if let Some(d) = mesh.domain {
        let _ = writeln!(out, "domain {} {}", d.r0, d.re);
    }
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for (f, t) in mesh.faces.iter().zip(&mesh.tags) {
        let _ = writeln!(out, "f {} {} {} {}", f[0], f[1], f[2], t);
    }
    out
}

pub fn save_mesh(mesh: &PanelMesh, path: &Path) -> Result<()> {
    fs::write(path, write_mesh(mesh))?;
    Ok(())
}

pub fn load_mesh(path: &Path) -> Result<PanelMesh> {
    let text = fs::read_to_string(path)?;
    parse_mesh(&text, path)
}

/// Parses the text format; `path` is used only in error messages.
pub fn parse_mesh(text: &str, path: &Path) -> Result<PanelMesh> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        Some((n, l)) => return Err(err(n, format!("expected header `{MAGIC}`, found `{l}`"))),
        None => return Err(err(0, "empty mesh file".into())),
    }

    let mut feature = None;
    let mut domain = None;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut tags = Vec::new();

    let number = |n: usize, s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| err(n, format!("`{s}` is not a number")))
    };
    let index = |n: usize, s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| err(n, format!("`{s}` is not a vertex index")))
    };

    for (n, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "feature" => {
                if fields.len() != 2 {
                    return Err(err(n, "expected `feature <name>`".into()));
                }
                feature = Some(fields[1].parse::<Feature>().map_err(|e| err(n, e))?);
            }
            "domain" => {
                if fields.len() != 3 {
                    return Err(err(n, "expected `domain <r0> <re>`".into()));
                }
                let spec = DomainSpec::new(number(n, fields[1])?, number(n, fields[2])?)
                    .map_err(|e| err(n, e.to_string()))?;
                domain = Some(spec);
            }
            "v" => {
                if fields.len() != 4 {
                    return Err(err(n, format!("vertex needs 3 coordinates, found {}", fields.len() - 1)));
                }
                let p = Point3::new(number(n, fields[1])?, number(n, fields[2])?, number(n, fields[3])?);
                if !p.is_finite() {
                    return Err(err(n, "vertex coordinates must be finite".into()));
                }
                vertices.push(p);
            }
            "f" => match fields.len() {
                5 => {
                    faces.push([index(n, fields[1])?, index(n, fields[2])?, index(n, fields[3])?]);
                    tags.push(fields[4].parse::<Region>().map_err(|e| err(n, e))?);
                }
                4 => return Err(err(n, "face is missing its region tag".into())),
                k => {
                    return Err(err(
                        n,
                        format!("faces must be triangles with a tag, found {} fields", k - 1),
                    ))
                }
            },
            other => return Err(err(n, format!("unknown record `{other}`"))),
        }
    }
    let feature = feature.unwrap_or(Feature::Flat);
    PanelMesh::new(vertices, faces, tags, domain, feature)
}
