use std::f64::consts::PI;

use serde::Serialize;

use super::radial::{RadialMethod, RadialTable};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::harmonics::{fill_schmidt_harmonics, packed_index, packed_len, SpectralConstants};

/// How the source-side coefficients were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignatureBranch {
    /// Solid-harmonic series in the source position; any `|x| < 1`.
    Interior,
    /// Closed form through the radial functions; sources with `z = 0`.
    Ground,
}

/// Source-side factor of the truncated kernel expansion at one source.
///
/// Coefficients are stored against the Schmidt semi-normalized harmonics
/// `S_n^m = (-1)^{n+m} sqrt((n+|m|)! (n-|m|)!) R_n^m`, which keeps both
/// factors of every term of order one at large `p`; [`Self::coefficient`]
/// converts back to the coefficient `U_n^m` of the `R_n^m` expansion.
#[derive(Clone, Debug, Serialize)]
pub struct SourceSignature {
    pub source: Point3,
    pub p: usize,
    pub branch: SignatureBranch,
    scaled: Vec<f64>,
}

impl SourceSignature {
    /// Coefficient against the Schmidt harmonic `S_n^m`.
    pub fn scaled(&self, n: usize, m: i32) -> f64 {
        self.scaled[packed_index(n, m)]
    }

    pub fn scaled_values(&self) -> &[f64] {
        &self.scaled
    }

    /// `U_n^m` of the expansion `K~(y, x) = sum U_n^m(x) R_n^m(y)`.
    pub fn coefficient(&self, n: usize, m: i32) -> f64 {
        let am = m.unsigned_abs() as usize;
        let ln_scale: f64 = 0.5
            * ((1..=n + am).map(|j| (j as f64).ln()).sum::<f64>()
                + (1..=n - am).map(|j| (j as f64).ln()).sum::<f64>());
        let sign = if (n + am).is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * ln_scale.exp() * self.scaled(n, m)
    }

    /// Contracts the signature with Schmidt harmonics of a dimensionless
    /// receiver point.
    pub fn contract(&self, receiver: Point3) -> f64 {
        let mut basis = vec![0.0; packed_len(self.p)];
        fill_schmidt_harmonics(receiver, self.p, &mut basis);
        dot_odd(&self.scaled, &basis, self.p)
    }
}

/// Sum over `n + m` odd of the packed products; other entries vanish.
pub(crate) fn dot_odd(a: &[f64], b: &[f64], p: usize) -> f64 {
    let mut sum = 0.0;
    for n in 1..p {
        let row = n * n;
        // m = -n+1, -n+3, ..., n-1
        let mut i = row + 1;
        while i < row + 2 * n + 1 {
            sum += a[i] * b[i];
            i += 2;
        }
    }
    sum
}

/// Computes the source signature of a dimensionless source `x`, `|x| < 1`.
///
/// Sources in the plane `z = 0` away from the origin use the ground closed
/// form, all others the interior series.
pub fn source_signature(x: Point3, constants: &SpectralConstants) -> Result<SourceSignature> {
    let branch = if x.z == 0.0 && x.rho() > 0.0 {
        SignatureBranch::Ground
    } else {
        SignatureBranch::Interior
    };
    source_signature_with(x, constants, branch)
}

/// Computes the source signature by an explicitly chosen branch.
pub fn source_signature_with(
    x: Point3,
    constants: &SpectralConstants,
    branch: SignatureBranch,
) -> Result<SourceSignature> {
    let p = constants.p();
    let mut scaled = vec![0.0; packed_len(p)];
    let mut scratch = SignatureScratch::new(constants);
    fill_signature(x, constants, branch, &mut scratch, &mut scaled)?;
    Ok(SourceSignature {
        source: x,
        p,
        branch,
        scaled,
    })
}

/// Reusable buffers for repeated signature evaluation.
pub(crate) struct SignatureScratch {
    basis: Vec<f64>,
    terms: Vec<f64>,
    outer: Vec<f64>,
    inner: Vec<f64>,
}

impl SignatureScratch {
    pub(crate) fn new(constants: &SpectralConstants) -> Self {
        let p = constants.p();
        let cap = constants.n_max() - 1;
        let mut outer = vec![0.0; packed_len(p)];
        let mut inner = vec![0.0; packed_len(cap + 1)];
        for n in 0..p {
            for m in -(n as i32)..=(n as i32) {
                let (sign, ln_nu) = constants.nu_parts(n + 1, m);
                if sign != 0 {
                    let delta = if m == 0 { 1.0 } else { 2.0 };
                    outer[packed_index(n, m)] = delta / (4.0 * PI)
                        * f64::from(sign)
                        * (ln_nu - constants.schmidt_ln_scale(n, m)).exp();
                }
            }
        }
        for n in 0..=cap {
            for m in -(n as i32)..=(n as i32) {
                let am = m.unsigned_abs() as usize;
                if (n + am).is_multiple_of(2) {
                    let half = (n + am) / 2;
                    let sign = if half.is_multiple_of(2) { 1.0 } else { -1.0 };
                    inner[packed_index(n, m)] =
                        sign * (constants.wallis(half) * constants.wallis((n - am) / 2)).sqrt();
                }
            }
        }
        Self {
            basis: vec![0.0; packed_len(cap + 1)],
            terms: Vec::with_capacity(cap + 1),
            outer,
            inner,
        }
    }
}

/// Fills `out[..p*p]` with the scaled coefficients of source `x`.
pub(crate) fn fill_signature(
    x: Point3,
    constants: &SpectralConstants,
    branch: SignatureBranch,
    scratch: &mut SignatureScratch,
    out: &mut [f64],
) -> Result<()> {
    let p = constants.p();
    if !x.is_finite() || x.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "source {x} lies outside the unit ball where the expansion converges"
        )));
    }
    out[..packed_len(p)].fill(0.0);
    match branch {
        SignatureBranch::Interior => fill_interior(x, constants, scratch, out),
        SignatureBranch::Ground => {
            if x.z != 0.0 || x.rho() == 0.0 {
                return Err(Error::Domain(format!(
                    "ground closed form needs z = 0 and rho > 0, got {x}"
                )));
            }
            fill_ground(x, constants, scratch, out)?;
        }
    }
    Ok(())
}

/// Consecutive negligible terms after which the inner series is cut.
const INNER_STOP_RUN: usize = 3;
const INNER_STOP_RATIO: f64 = 1e-16;

fn fill_interior(
    x: Point3,
    constants: &SpectralConstants,
    scratch: &mut SignatureScratch,
    out: &mut [f64],
) {
    let p = constants.p();
    let cap = constants.n_max() - 1;
    fill_schmidt_harmonics(x, cap + 1, &mut scratch.basis);
    for m in -(p as i32 - 2)..=(p as i32 - 2) {
        let am = m.unsigned_abs() as usize;
        scratch.terms.clear();
        let mut np = am;
        while np <= cap {
            let i = packed_index(np, m);
            scratch.terms.push(scratch.inner[i] * scratch.basis[i]);
            np += 2;
        }
        let mut n = am + 1;
        while n < p {
            let mut sum = 0.0;
            let mut quiet = 0;
            for (j, t) in scratch.terms.iter().enumerate() {
                let term = t / (am + 2 * j + n + 1) as f64;
                sum += term;
                if term.abs() < INNER_STOP_RATIO * sum.abs() {
                    quiet += 1;
                    if quiet == INNER_STOP_RUN {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            let i = packed_index(n, m);
            out[i] = scratch.outer[i] * sum;
            n += 2;
        }
    }
}

fn fill_ground(
    x: Point3,
    constants: &SpectralConstants,
    scratch: &SignatureScratch,
    out: &mut [f64],
) -> Result<()> {
    let p = constants.p();
    let xi = x.rho();
    let phi = x.phi();
    let table = RadialTable::build(xi, p, RadialMethod::Auto, p - 1)?;
    for n in 1..p {
        for m in -(n as i32 - 1)..=(n as i32 - 1) {
            if (n as i32 + m) % 2 == 0 {
                continue;
            }
            let u = table.u(n, m).expect("radial table covers n < p");
            let trig = if m >= 0 {
                (m as f64 * phi).cos()
            } else {
                (m as f64 * phi).sin()
            };
            let i = packed_index(n, m);
            out[i] = scratch.outer[i] * u / (2.0 * PI) * trig;
        }
    }
    Ok(())
}
