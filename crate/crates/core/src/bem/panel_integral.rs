use std::f64::consts::PI;

use crate::geometry::Point3;
use crate::mesh::Panel;

/// Single-layer potential of a flat triangle with unit density,
/// `L(y) = int_panel G(y, x) dS(x)`, in closed form.
///
/// Valid for any `y`, including points on the panel itself.
pub fn triangle_single_layer(panel: &Panel, y: Point3) -> f64 {
    let height = (y - panel.vertices[0]).dot(panel.normal).abs();
    let mut sum = 0.0;
    for (q, edge) in panel.edges.iter().enumerate() {
        let d = y - panel.vertices[q];
        let along = d.dot(edge.tangent);
        let across = d.dot(edge.normal);
        sum += edge_term(edge.length - along, height, across) - edge_term(-along, height, across);
    }
    sum / (4.0 * PI)
}

/// Edge antiderivative `y (atan(x/z) - atan(yx/(zr))) - z ln|r + x|`.
///
/// Both terms vanish in the limit `z -> 0` for `y >= 0`.
fn edge_term(x: f64, y: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let r = (x * x + y * y + z * z).sqrt();
    // r + x loses everything to cancellation for x << 0
    let r_plus_x = if x >= 0.0 { r + x } else { (y * y + z * z) / (r - x) };
    let angle = if y == 0.0 {
        0.0
    } else {
        y * ((x / z).atan() - (y * x / (z * r)).atan())
    };
    angle - z * r_plus_x.ln()
}
