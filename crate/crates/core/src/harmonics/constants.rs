use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest truncation number accepted by the constant and kernel tables.
///
/// Recurrences and log-form constants stay accurate well beyond this, but the
/// interior series cost grows as `p^3` and nothing in the solver needs more.
pub const MAX_TRUNCATION: usize = 160;

/// Tables of the normalization and plane-value constants of the spherical
/// harmonic expansions, indexed by degree `n <= n_max` and order `|m| <= n`.
///
/// Entries are even in `m`, so only `m >= 0` is stored.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralConstants {
    p: usize,
    n_max: usize,
    a: Vec<f64>,
    big_l: Vec<f64>,
    nu_sign: Vec<i8>,
    nu_ln: Vec<f64>,
    norm: Vec<f64>,
    wallis: Vec<f64>,
    ln_fact: Vec<f64>,
}

#[inline]
fn tri(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

impl SpectralConstants {
    /// Builds the tables for truncation number `p` with rows up to
    /// `max(2p - 2, p)`, which covers the radial recurrences and `nu_{n+1}`.
    pub fn new(p: usize) -> Result<Self> {
        Self::with_extent(p, (2 * p).saturating_sub(2).max(p))
    }

    /// Builds the tables with an explicit highest degree `n_max >= p`.
    pub fn with_extent(p: usize, n_max: usize) -> Result<Self> {
        if p == 0 || p > MAX_TRUNCATION {
            return Err(Error::Config(format!(
                "truncation number must lie in 1..={MAX_TRUNCATION}, got {p}"
            )));
        }
        if n_max < p {
            return Err(Error::Config(format!(
                "table extent {n_max} is below the truncation number {p}"
            )));
        }
        let len = tri(n_max, n_max) + 1;
        let mut a = vec![0.0; len];
        let mut big_l = vec![0.0; len];
        let mut nu_sign = vec![0i8; len];
        let mut nu_ln = vec![f64::NEG_INFINITY; len];
        let mut norm = vec![0.0; len];

        // ln k! and ln k!! as running sums
        let top = 2 * n_max + 2;
        let mut ln_fact = vec![0.0f64; top + 1];
        let mut ln_dfact = vec![0.0f64; top + 1];
        for k in 1..=top {
            let lk = (k as f64).ln();
            ln_fact[k] = ln_fact[k - 1] + lk;
            ln_dfact[k] = lk + if k >= 2 { ln_dfact[k - 2] } else { 0.0 };
        }
        let ln_dfact_m1 = |k: usize| if k == 0 { 0.0 } else { ln_dfact[k - 1] };

        // alpha_k = (2k-1)!!/(2k)!!
        let mut wallis = vec![1.0f64; n_max + 2];
        for k in 1..wallis.len() {
            wallis[k] = wallis[k - 1] * (2 * k - 1) as f64 / (2 * k) as f64;
        }

        for n in 0..=n_max {
            for m in 0..=n {
                let i = tri(n, m);
                let (nf, mf) = (n as f64, m as f64);
                a[i] = ((nf + 1.0 + mf) * (nf + 1.0 - mf) / ((2.0 * nf + 1.0) * (2.0 * nf + 3.0)))
                    .sqrt();
                let ratio = (ln_fact[n - m] - ln_fact[n + m]).exp();
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                norm[i] = sign * ((2.0 * nf + 1.0) / (4.0 * PI) * ratio).sqrt();
                if (n + m) % 2 == 0 {
                    let half = (n + m) / 2;
                    nu_sign[i] = if half % 2 == 0 { 1 } else { -1 };
                    nu_ln[i] = ln_dfact_m1(n - m) + ln_dfact_m1(n + m);
                }
            }
        }

        for m in 0..=n_max {
            let mf = m as f64;
            let mut value = ((2.0 * mf + 1.0) / (4.0 * PI) * wallis[m]).sqrt();
            let mut n = m;
            while n <= n_max {
                big_l[tri(n, m)] = value;
                let nf = n as f64;
                value *= -((2.0 * nf + 5.0) / (2.0 * nf + 1.0)).sqrt()
                    * ((nf - mf + 1.0) * (nf + mf + 1.0) / ((nf + mf + 2.0) * (nf - mf + 2.0)))
                        .sqrt();
                n += 2;
            }
        }

        Ok(Self {
            p,
            n_max,
            a,
            big_l,
            nu_sign,
            nu_ln,
            norm,
            wallis,
            ln_fact,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Highest degree stored.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    fn slot(&self, n: usize, m: i32) -> Option<usize> {
        let am = m.unsigned_abs() as usize;
        (n <= self.n_max && am <= n).then(|| tri(n, am))
    }

    /// `a_n^m`; zero for `|m| > n`.
    pub fn a(&self, n: usize, m: i32) -> f64 {
        self.slot(n, m).map_or(0.0, |i| self.a[i])
    }

    /// `L_n^m = N_n^m P_n^{|m|}(0)`.
    pub fn big_l(&self, n: usize, m: i32) -> f64 {
        self.slot(n, m).map_or(0.0, |i| self.big_l[i])
    }

    /// `l_n^m`: 1 when `n + m` is even, 0 otherwise.
    pub fn parity(&self, n: usize, m: i32) -> u8 {
        u8::from((n as i64 + m as i64) % 2 == 0)
    }

    /// `N_n^m`, including the `(-1)^m` factor.
    pub fn norm(&self, n: usize, m: i32) -> f64 {
        self.slot(n, m).map_or(0.0, |i| self.norm[i])
    }

    /// `nu_n^m` as `(sign, ln|nu|)`; the sign is 0 for odd `n + m`.
    pub fn nu_parts(&self, n: usize, m: i32) -> (i8, f64) {
        self.slot(n, m)
            .map_or((0, f64::NEG_INFINITY), |i| (self.nu_sign[i], self.nu_ln[i]))
    }

    /// `nu_n^m` as a float; may overflow to infinity for large degrees.
    pub fn nu(&self, n: usize, m: i32) -> f64 {
        let (s, l) = self.nu_parts(n, m);
        if s == 0 {
            0.0
        } else {
            f64::from(s) * l.exp()
        }
    }

    /// `(2k-1)!!/(2k)!!` for `k <= n_max + 1`.
    pub fn wallis(&self, k: usize) -> f64 {
        self.wallis[k]
    }

    /// `ln sqrt((n+|m|)! (n-|m|)!)`, the log of the factor relating the
    /// Schmidt-normalized harmonics to the real basis of the expansions.
    pub fn schmidt_ln_scale(&self, n: usize, m: i32) -> f64 {
        let am = m.unsigned_abs() as usize;
        0.5 * (self.ln_fact[n + am] + self.ln_fact[n - am])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double_factorial(k: i64) -> f64 {
        if k <= 0 {
            1.0
        } else {
            k as f64 * double_factorial(k - 2)
        }
    }

    fn legendre_at_zero(n: usize, m: usize) -> f64 {
        // (-1)^m (1-x^2)^{m/2} d^{n+m}/dx^{n+m} (x^2-1)^n / (2^n n!) at x = 0:
        // only the x^{n+m} coefficient of (x^2-1)^n survives
        if (n + m) % 2 == 1 {
            return 0.0;
        }
        let k = (n + m) / 2;
        let binom = (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64);
        let coef = binom * if (n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        let fact = |q: usize| (1..=q).fold(1.0, |acc, j| acc * j as f64);
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * coef * fact(n + m) / (2f64.powi(n as i32) * fact(n))
    }

    #[test]
    fn reference_entries() {
        let c = SpectralConstants::new(4).unwrap();
        assert!((c.a(0, 0) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.big_l(1, 0), 0.0);
        assert!((c.big_l(0, 0) - 0.282_094_791_773_878_14).abs() < 1e-15);
        assert_eq!(c.a(2, 3), 0.0);
        assert_eq!(c.n_max(), 6);
    }

    #[test]
    fn plane_values_match_direct_legendre() {
        let c = SpectralConstants::new(12).unwrap();
        for n in 0..=20 {
            for m in 0..=n {
                let direct = c.norm(n, m as i32) * legendre_at_zero(n, m);
                let stored = c.big_l(n, m as i32);
                assert!(
                    (direct - stored).abs() <= 1e-13 * direct.abs().max(1e-3),
                    "L({n},{m}) {direct} vs {stored}"
                );
            }
        }
    }

    #[test]
    fn nu_matches_double_factorials() {
        let c = SpectralConstants::new(10).unwrap();
        for n in 0..=18usize {
            for m in -(n as i32)..=(n as i32) {
                let am = m.unsigned_abs() as i64;
                let ni = n as i64;
                let expected = if (ni + am) % 2 == 1 {
                    0.0
                } else {
                    let s = if ((ni + am) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                    s * double_factorial(ni - am - 1) * double_factorial(ni + am - 1)
                };
                let got = c.nu(n, m);
                assert!(
                    (got - expected).abs() <= 1e-12 * expected.abs(),
                    "nu({n},{m})"
                );
            }
        }
    }

    #[test]
    fn symmetric_in_order_and_null_product() {
        let c = SpectralConstants::new(30).unwrap();
        for n in 0..c.n_max() {
            for m in 0..=(n as i32) {
                assert_eq!(c.a(n, m), c.a(n, -m));
                assert_eq!(c.big_l(n, m), c.big_l(n, -m));
                assert_eq!(c.big_l(n, m) * c.big_l(n + 1, m), 0.0);
                if (n as i32 + m) % 2 == 1 {
                    assert_eq!(c.big_l(n, m), 0.0);
                    assert_eq!(c.parity(n, m), 0);
                }
            }
        }
    }

    #[test]
    fn large_truncation_stays_finite() {
        let c = SpectralConstants::new(MAX_TRUNCATION).unwrap();
        let (s, l) = c.nu_parts(c.n_max(), 0);
        assert_eq!(s.abs(), 1);
        assert!(l.is_finite() && l > 700.0);
        for n in 0..=c.n_max() {
            assert!(c.big_l(n, 0).is_finite());
            assert!(c.norm(n, n as i32).is_finite());
        }
    }

    #[test]
    fn rejects_bad_truncation() {
        assert!(SpectralConstants::new(0).is_err());
        assert!(SpectralConstants::new(MAX_TRUNCATION + 1).is_err());
        assert!(SpectralConstants::with_extent(10, 9).is_err());
    }
}
