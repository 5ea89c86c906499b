use std::f64::consts::PI;

use serde::Serialize;

use crate::harmonics::SpectralConstants;

/// Expansion coefficients `J_{nn'}^m` of the kernel in the complex solid
/// harmonic basis, for `n, n' < p`.
///
/// The radius-dependent coefficient is `I_{nn'}^m = J_{nn'}^m R^{-n-n'-1}`.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesCoefficients {
    pub p: usize,
    j: Vec<f64>,
}

impl SeriesCoefficients {
    pub fn new(constants: &SpectralConstants) -> Self {
        let p = constants.p();
        let mut j = vec![0.0; p * p * p];
        for n in 0..p {
            for np in 0..p {
                for am in 0..=n.min(np) {
                    let m = am as i32;
                    let value = 4.0 * PI * constants.a(n, m) * constants.big_l(n + 1, m)
                        * constants.big_l(np, m)
                        / (((2 * np + 1) * (n + np + 1)) as f64);
                    j[(n * p + np) * p + am] = value;
                }
            }
        }
        Self { p, j }
    }

    /// `J_{nn'}^m`; zero when `|m|` exceeds either degree.
    pub fn j(&self, n: usize, np: usize, m: i32) -> f64 {
        let am = m.unsigned_abs() as usize;
        if am > n || am > np {
            return 0.0;
        }
        self.j[(n * self.p + np) * self.p + am]
    }

    /// `I_{nn'}^m = J_{nn'}^m R^{-n-n'-1}`.
    pub fn i(&self, n: usize, np: usize, m: i32, radius: f64) -> f64 {
        self.j(n, np, m) * radius.powi(-((n + np + 1) as i32))
    }
}
