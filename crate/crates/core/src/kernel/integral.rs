use std::f64::consts::PI;

use super::KernelConfig;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::quadrature::{gauss_kronrod, periodic_trapezoid, Tolerance};

const MIN_AZIMUTH_POINTS: usize = 16;
const MAX_AZIMUTH_POINTS: usize = 1 << 15;

/// Cylindrical description of a dimensionless point.
#[derive(Clone, Copy)]
struct Cyl {
    rho: f64,
    phi: f64,
    r2: f64,
}

impl Cyl {
    fn of(p: Point3) -> Self {
        Self {
            rho: p.rho(),
            phi: p.phi(),
            r2: p.norm_squared(),
        }
    }

    /// `Q^2 = r^2 eta^2 - 2 rho eta cos(psi) + 1` at azimuth `phi'`.
    #[inline]
    fn q2(&self, eta: f64, cos_psi: f64) -> f64 {
        self.r2 * eta * eta - 2.0 * self.rho * eta * cos_psi + 1.0
    }

    /// Value of `eta` in `(0, 1)` where `Q` is smallest along a ray, if any.
    fn closest_eta(&self, cos_psi: f64) -> Option<f64> {
        if self.r2 == 0.0 {
            return None;
        }
        let eta = self.rho * cos_psi / self.r2;
        (eta > 1e-6 && eta < 1.0 - 1e-6).then_some(eta)
    }
}

fn quadrature_error(estimate: f64, error_estimate: f64, requested: f64) -> Error {
    Error::Quadrature {
        estimate,
        error_estimate,
        requested,
    }
}

/// Integrates `g(eta, cos_y, cos_x)` over the unit `(eta, phi')` square, with
/// `cos_*` the cosines of `phi' - phi_*`.
fn double_integral(
    y: Cyl,
    x: Cyl,
    tolerance: f64,
    g: impl Fn(f64, f64, f64) -> f64,
) -> Result<f64> {
    let inner_tol = Tolerance::relative(0.1 * tolerance).with_abs(1e-300);
    let mut failure: Option<Error> = None;
    let mut inner = |phi: f64| -> f64 {
        let cy = (phi - y.phi).cos();
        let cx = (phi - x.phi).cos();
        let mut breaks = vec![0.0];
        for e in [y.closest_eta(cy), x.closest_eta(cx)].into_iter().flatten() {
            breaks.push(e);
        }
        breaks.push(1.0);
        breaks.sort_by(f64::total_cmp);
        let est = gauss_kronrod(|eta| g(eta, cy, cx), &breaks, &inner_tol);
        if !est.converged && failure.is_none() {
            failure = Some(quadrature_error(est.value, est.error, inner_tol.rel));
        }
        est.value
    };
    let outer = periodic_trapezoid(
        &mut inner,
        y.phi,
        &Tolerance::relative(tolerance).with_abs(1e-300),
        MIN_AZIMUTH_POINTS,
        MAX_AZIMUTH_POINTS,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    outer.into_result(tolerance)
}

/// Dimensionless kernel `K~(y, x)` from the compact double integral over the
/// unit square in `(eta, phi')`, where the ground point is at radius `1/eta`.
pub(crate) fn dimensionless_integral(y: Point3, x: Point3, tolerance: f64) -> Result<f64> {
    if y.z == 0.0 {
        return Ok(0.0);
    }
    let (cy, cx) = (Cyl::of(y), Cyl::of(x));
    let value = double_integral(cy, cx, tolerance, |eta, cos_y, cos_x| {
        let qy2 = cy.q2(eta, cos_y);
        let qx2 = cx.q2(eta, cos_x);
        eta / (qy2 * qy2.sqrt() * qx2.sqrt())
    })?;
    Ok(-y.z / (8.0 * PI * PI) * value)
}

/// `K^(D)(y, x; R)` by adaptive quadrature of the compact double integral.
///
/// Valid for any pair of points off the ground annulus; accuracy degrades as
/// either point approaches the rim `|r| = R, z = 0`, which is reported as a
/// quadrature error rather than a silently inaccurate value.
pub fn kernel_integral(y: Point3, x: Point3, config: &KernelConfig) -> Result<f64> {
    config.validate()?;
    let r = config.scale_radius;
    Ok(dimensionless_integral(y / r, x / r, config.integral_tolerance)? / r)
}

/// `K^(D)(y, x; R)` from the ground integral truncated at the configured
/// tail radius, plus the leading analytic tail `-z_y / (8 pi R_inf^2)`.
///
/// This path does not use the compact substitution and serves as an
/// independent reference, including for points outside the ball of radius `R`.
pub fn kernel_integral_truncated(y: Point3, x: Point3, config: &KernelConfig) -> Result<f64> {
    config.validate()?;
    if y.z == 0.0 {
        return Ok(0.0);
    }
    let r0 = config.scale_radius;
    let r_inf = config.tail_radius;
    let tol = config.integral_tolerance;
    let (cy, cx) = (Cyl::of(y), Cyl::of(x));

    // geometric breakpoints keep the 1/rho'^3 decay well resolved
    let mut base = vec![r0];
    let mut edge = r0;
    while edge * 2.0 < r_inf {
        edge *= 2.0;
        base.push(edge);
    }
    base.push(r_inf);

    let inner_tol = Tolerance::relative(0.1 * tol).with_abs(1e-300);
    let mut failure: Option<Error> = None;
    let mut inner = |phi: f64| -> f64 {
        let cos_y = (phi - cy.phi).cos();
        let cos_x = (phi - cx.phi).cos();
        let mut breaks = base.clone();
        for (c, cos) in [(cy, cos_y), (cx, cos_x)] {
            let nearest = c.rho * cos;
            if nearest > r0 && nearest < r_inf {
                breaks.push(nearest);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let f = |rho: f64| {
            let dy = rho * rho - 2.0 * cy.rho * rho * cos_y + cy.r2;
            let dx = rho * rho - 2.0 * cx.rho * rho * cos_x + cx.r2;
            rho / (dy * dy.sqrt() * dx.sqrt())
        };
        let est = gauss_kronrod(f, &breaks, &inner_tol);
        if !est.converged && failure.is_none() {
            failure = Some(quadrature_error(est.value, est.error, inner_tol.rel));
        }
        est.value
    };
    let outer = periodic_trapezoid(
        &mut inner,
        cy.phi,
        &Tolerance::relative(tol).with_abs(1e-300),
        MIN_AZIMUTH_POINTS,
        MAX_AZIMUTH_POINTS,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    let truncated = -y.z / (8.0 * PI * PI) * outer.into_result(tol)?;
    Ok(truncated - y.z / (8.0 * PI * r_inf * r_inf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_config() -> KernelConfig {
        KernelConfig::new(1.0, 12).unwrap()
    }

    #[test]
    fn on_axis_reference() {
        let v = kernel_integral(
            Point3::new(0.0, 0.0, 0.3),
            Point3::new(0.0, 0.0, 0.5),
            &unit_config(),
        )
        .unwrap();
        assert!((v / -0.010_576_195_442_168_4 - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn off_axis_reference_and_asymmetry() {
        let y = Point3::new(0.3, 0.0, 0.2);
        let x = Point3::new(0.1, 0.2, 0.4);
        let c = unit_config();
        let forward = kernel_integral(y, x, &c).unwrap();
        let swapped = kernel_integral(x, y, &c).unwrap();
        assert!((forward / -0.008_377_194_050_519_384 - 1.0).abs() < 1e-10);
        assert!((swapped / -0.015_115_614_762_384_006 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn vanishes_on_plane_and_is_odd_in_height() {
        let c = unit_config();
        let x = Point3::new(0.2, -0.1, 0.3);
        assert_eq!(kernel_integral(Point3::new(0.4, 0.1, 0.0), x, &c).unwrap(), 0.0);
        let up = kernel_integral(Point3::new(0.4, 0.1, 0.25), x, &c).unwrap();
        let down = kernel_integral(Point3::new(0.4, 0.1, -0.25), x, &c).unwrap();
        assert_eq!(up, -down);
    }

    #[test]
    fn truncated_form_agrees_with_compact_form() {
        let mut c = unit_config();
        c.tail_radius = 1e3;
        let y = Point3::new(0.5, 0.0, 0.4);
        let x = Point3::new(0.2, 0.1, 0.3);
        let compact = kernel_integral(y, x, &c).unwrap();
        let truncated = kernel_integral_truncated(y, x, &c).unwrap();
        assert!((compact / -0.018_465_700_436_552_16 - 1.0).abs() < 1e-10);
        assert!((truncated / compact - 1.0).abs() < 1e-7);
    }

    #[test]
    fn tail_correction_leaves_fourth_order_remainder() {
        let y = Point3::new(0.5, 0.0, 0.4);
        let x = Point3::new(0.2, 0.1, 0.3);
        let at = |tail: f64| {
            let mut c = unit_config();
            c.tail_radius = tail;
            c.integral_tolerance = 1e-14;
            kernel_integral_truncated(y, x, &c).unwrap()
        };
        let (a, b, c) = (at(1e2), at(2e2), at(4e2));
        let order = ((a - b) / (b - c)).abs().log2();
        assert!(order >= 3.5, "order {order}");
    }
}
