use serde::Serialize;

use super::{packed_index, packed_len};
use crate::geometry::Point3;

/// Real regular solid harmonics `R_n^m(r)` for `n < p`, `-n <= m <= n`.
///
/// The convention is `(-1)^{n+m} / (n+|m|)! r^n P_n^{|m|}(cos theta)` times
/// `cos(m phi)` for `m >= 0` and `sin(m phi)` for `m < 0`, with the
/// Condon-Shortley phase included in `P_n^m`.
#[derive(Clone, Debug, Serialize)]
pub struct SolidHarmonicTable {
    pub point: Point3,
    pub p: usize,
    values: Vec<f64>,
}

impl SolidHarmonicTable {
    pub fn get(&self, n: usize, m: i32) -> f64 {
        self.values[packed_index(n, m)]
    }

    /// Packed values in `(n, m)` order, `m` running from `-n` to `n`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Evaluates the real solid harmonics at `point` for all `n < p`.
pub fn solid_harmonics(point: Point3, p: usize) -> SolidHarmonicTable {
    let mut values = vec![0.0; packed_len(p)];
    fill_solid_harmonics(point, p, &mut values);
    SolidHarmonicTable { point, p, values }
}

/// Fills `out[..p*p]` with the real solid harmonics by the diagonal,
/// subdiagonal and three-term vertical recurrences.
pub(crate) fn fill_solid_harmonics(point: Point3, p: usize, out: &mut [f64]) {
    if p == 0 {
        return;
    }
    let Point3 { x, y, z } = point;
    let r2 = point.norm_squared();
    out[0] = 1.0;
    if p == 1 {
        return;
    }
    out[packed_index(1, 1)] = -0.5 * x;
    out[packed_index(1, -1)] = 0.5 * y;
    for m in 2..p {
        let c = out[packed_index(m - 1, m as i32 - 1)];
        let s = out[packed_index(m - 1, -(m as i32 - 1))];
        let f = 1.0 / (2 * m) as f64;
        out[packed_index(m, m as i32)] = -f * (x * c + y * s);
        out[packed_index(m, -(m as i32))] = f * (y * c - x * s);
    }
    for m in 0..p - 1 {
        for sign in signs(m) {
            let mi = sign * m as i32;
            out[packed_index(m + 1, mi)] = -z * out[packed_index(m, mi)];
        }
    }
    for m in 0..p {
        for sign in signs(m) {
            let mi = sign * m as i32;
            for n in m + 1..p.saturating_sub(1) {
                let denom = ((n + 1) * (n + 1) - m * m) as f64;
                out[packed_index(n + 1, mi)] = -((2 * n + 1) as f64 * z
                    * out[packed_index(n, mi)]
                    + r2 * out[packed_index(n - 1, mi)])
                    / denom;
            }
        }
    }
}

/// Fills `out[..p*p]` with Schmidt semi-normalized solid harmonics
/// `S_n^m = (-1)^{n+m} sqrt((n+|m|)! (n-|m|)!) R_n^m`.
///
/// These stay of order `|r|^n` for every degree, so they neither overflow
/// nor underflow where the factorial-scaled basis would.
pub(crate) fn fill_schmidt_harmonics(point: Point3, p: usize, out: &mut [f64]) {
    if p == 0 {
        return;
    }
    let Point3 { x, y, z } = point;
    let r2 = point.norm_squared();
    out[0] = 1.0;
    if p == 1 {
        return;
    }
    out[packed_index(1, 1)] = -x * std::f64::consts::FRAC_1_SQRT_2;
    out[packed_index(1, -1)] = y * std::f64::consts::FRAC_1_SQRT_2;
    for m in 2..p {
        let c = out[packed_index(m - 1, m as i32 - 1)];
        let s = out[packed_index(m - 1, -(m as i32 - 1))];
        let f = ((2 * m - 1) as f64 / (2 * m) as f64).sqrt();
        out[packed_index(m, m as i32)] = -f * (x * c + y * s);
        out[packed_index(m, -(m as i32))] = f * (y * c - x * s);
    }
    for m in 0..p - 1 {
        let f = ((2 * m + 1) as f64).sqrt() * z;
        for sign in signs(m) {
            let mi = sign * m as i32;
            out[packed_index(m + 1, mi)] = f * out[packed_index(m, mi)];
        }
    }
    for m in 0..p {
        for sign in signs(m) {
            let mi = sign * m as i32;
            for n in m + 1..p.saturating_sub(1) {
                let lower = (((n + m) * (n - m)) as f64).sqrt();
                let upper = (((n + 1 + m) * (n + 1 - m)) as f64).sqrt();
                out[packed_index(n + 1, mi)] = ((2 * n + 1) as f64 * z * out[packed_index(n, mi)]
                    - r2 * lower * out[packed_index(n - 1, mi)])
                    / upper;
            }
        }
    }
}

fn signs(m: usize) -> impl Iterator<Item = i32> {
    let both: &'static [i32] = if m == 0 { &[1] } else { &[1, -1] };
    both.iter().copied()
}
