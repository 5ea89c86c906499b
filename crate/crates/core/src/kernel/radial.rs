use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::elliptic_ke;

/// How a [`RadialTable`] is filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RadialMethod {
    /// Recurrences where they are numerically safe, power series otherwise.
    #[default]
    Auto,
    /// Elliptic-integral seeds followed by the forward recurrences.
    Recurrence,
    /// Direct summation of the convergent power series in `xi`.
    Series,
}

/// Forward recurrences lose roughly `(n + 2m) ln(1/xi)` nats of relative
/// accuracy; they are used only while that loss stays below this budget.
const RECURRENCE_LOSS_BUDGET: f64 = 13.0;

/// Relative agreement demanded between the recurrence and the series at the
/// top entries before the recurrence result is accepted.
const VALIDATION_TOLERANCE: f64 = 1e-9;

const SERIES_CUTOFF: f64 = 1e-18;
const SERIES_MAX_TERMS: usize = 2_000_000;

/// The ground-point radial functions `w_m(xi)`, `v_m(xi)` and `u_n^m(xi)`.
///
/// `w_m` and `v_m` are stored for `0 <= m <= p - 1` and `0 <= m <= p - 2`;
/// layer `m` of `u` holds `n = m+1, m+3, ..., 2p-3-m` (only `n + m` odd is
/// ever needed). All three are even in `m`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialTable {
    pub xi: f64,
    pub p: usize,
    w: Vec<f64>,
    v: Vec<f64>,
    u: Vec<Vec<f64>>,
    method: RadialMethod,
    fell_back: bool,
}

impl RadialTable {
    pub fn new(xi: f64, p: usize) -> Result<Self> {
        Self::with_method(xi, p, RadialMethod::Auto)
    }

    pub fn with_method(xi: f64, p: usize, method: RadialMethod) -> Result<Self> {
        Self::build(xi, p, method, (2 * p).saturating_sub(3))
    }

    /// Builds the table; with the series method only `n <= n_limit` is filled.
    pub(crate) fn build(xi: f64, p: usize, method: RadialMethod, n_limit: usize) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::Domain(format!(
                "radial functions need 0 < xi < 1, got {xi}"
            )));
        }
        if p < 2 {
            return Err(Error::Config(format!(
                "radial table needs p >= 2, got {p}"
            )));
        }
        let resolved = match method {
            RadialMethod::Auto if recurrence_is_safe(xi, p) => RadialMethod::Recurrence,
            RadialMethod::Auto => RadialMethod::Series,
            other => other,
        };
        if resolved == RadialMethod::Recurrence {
            let table = Self::by_recurrence(xi, p)?;
            if method == RadialMethod::Recurrence || table.agrees_with_series() {
                return Ok(table);
            }
            log::debug!("radial recurrence failed validation at xi = {xi}, p = {p}");
            let mut table = Self::by_series(xi, p, n_limit);
            table.fell_back = true;
            return Ok(table);
        }
        Ok(Self::by_series(xi, p, n_limit))
    }

    /// Method actually used to fill the table.
    pub fn method(&self) -> RadialMethod {
        self.method
    }

    /// True when the recurrence was attempted but rejected by validation.
    pub fn fell_back(&self) -> bool {
        self.fell_back
    }

    pub fn w(&self, m: i32) -> f64 {
        self.w[m.unsigned_abs() as usize]
    }

    pub fn v(&self, m: i32) -> f64 {
        self.v[m.unsigned_abs() as usize]
    }

    /// Highest `|m|` stored for `w`.
    pub fn w_len(&self) -> usize {
        self.w.len()
    }

    /// `u_n^m`, or `None` outside the stored layers.
    pub fn u(&self, n: usize, m: i32) -> Option<f64> {
        let am = m.unsigned_abs() as usize;
        let layer = self.u.get(am)?;
        if n < am + 1 || !(n - am - 1).is_multiple_of(2) {
            return None;
        }
        layer.get((n - am - 1) / 2).copied()
    }

    fn empty(xi: f64, p: usize, method: RadialMethod) -> Self {
        Self {
            xi,
            p,
            w: vec![0.0; p],
            v: vec![0.0; p - 1],
            u: (0..p - 1).map(|m| vec![0.0; p - 1 - m]).collect(),
            method,
            fell_back: false,
        }
    }

    fn by_recurrence(xi: f64, p: usize) -> Result<Self> {
        let mut t = Self::empty(xi, p, RadialMethod::Recurrence);
        let x2 = xi * xi;
        let ke = elliptic_ke(x2)?;
        let (k, e) = (ke.k_value, ke.e_value);

        t.w[0] = 4.0 * k;
        if p > 1 {
            t.w[1] = 4.0 / xi * (k - e);
        }
        for m in 2..p {
            let mf = m as f64;
            t.w[m] = (1.0 + x2) / xi * (2.0 * mf - 2.0) / (2.0 * mf - 1.0) * t.w[m - 1]
                - (2.0 * mf - 3.0) / (2.0 * mf - 1.0) * t.w[m - 2];
        }
        t.v[0] = 8.0 * e - 4.0 * (1.0 - x2) * k;
        for m in 1..p - 1 {
            t.v[m] = (1.0 + x2) * t.w[m] - xi * (t.w[m + 1] + t.w[m - 1]);
        }

        // layer 0: odd n ascending from n = 1
        let mut prev = 0.0;
        for (i, slot) in t.u[0].iter_mut().enumerate() {
            let n = (2 * i + 1) as f64;
            let value = (4.0 * e - 4.0 * n * (1.0 - x2) * k + (n - 1.0) * (n - 1.0) * prev)
                / (n * n * x2);
            *slot = value;
            prev = value;
        }
        if p > 2 {
            // layer 1 from layer 0
            for i in 0..t.u[1].len() {
                let n = (2 * i + 1) as f64;
                t.u[1][i] = ((n + 1.0) * t.u[0][i] + (n + 2.0) * x2 * t.u[0][i + 1]
                    + 4.0 * (1.0 - x2) * k
                    - 8.0 * e)
                    / ((2.0 * n + 3.0) * xi);
            }
        }
        // layer m+1 from layers m and m-1
        for m in 1..p.saturating_sub(2) {
            for i in 0..t.u[m + 1].len() {
                let n = (m + 1 + 2 * i) as f64;
                // u^{m-1}_{n+1}: layer m-1 starts at n = m, so n+1 sits at index i+1
                let lower = t.u[m - 1][i + 1];
                t.u[m + 1][i] = 2.0 / ((2.0 * n + 3.0) * xi)
                    * ((n + 1.0) * t.u[m][i] + (n + 2.0) * x2 * t.u[m][i + 1] - t.v[m])
                    - lower;
            }
        }
        Ok(t)
    }

    fn by_series(xi: f64, p: usize, n_limit: usize) -> Self {
        let mut t = Self::empty(xi, p, RadialMethod::Series);
        for m in 0..p {
            t.w[m] = w_series(xi, m);
        }
        for m in 0..p - 1 {
            t.v[m] = v_series(xi, m);
        }
        for m in 0..p - 1 {
            let weights = u_weights(xi, m);
            let keep = if n_limit > m { (n_limit - m - 1) / 2 + 1 } else { 0 };
            let len = t.u[m].len().min(keep);
            t.u[m].truncate(len);
            for (i, slot) in t.u[m].iter_mut().enumerate() {
                *slot = u_from_weights(xi, m, m + 1 + 2 * i, &weights);
            }
        }
        t
    }

    fn agrees_with_series(&self) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= VALIDATION_TOLERANCE * b.abs();
        let top_w = self.p - 1;
        if !close(self.w[top_w], w_series(self.xi, top_w)) {
            return false;
        }
        let top_m = self.p - 2;
        for m in [0, top_m / 2, top_m] {
            let layer = &self.u[m];
            let i = layer.len() - 1;
            let n = m + 1 + 2 * i;
            let reference = u_from_weights(self.xi, m, n, &u_weights(self.xi, m));
            if !close(layer[i], reference) {
                return false;
            }
        }
        true
    }
}

/// Builds the radial table for `xi` and truncation number `p`.
pub fn radial_table(xi: f64, p: usize) -> Result<RadialTable> {
    RadialTable::new(xi, p)
}

fn recurrence_is_safe(xi: f64, p: usize) -> bool {
    (3 * p - 5) as f64 * (1.0 / xi).ln() <= RECURRENCE_LOSS_BUDGET
}

/// `(2k-1)!!/(2k)!!` for `k = start, start+1, ...`.
fn wallis_from(start: usize) -> impl Iterator<Item = f64> {
    let mut a = (1..=start).fold(1.0, |acc, k| acc * (2 * k - 1) as f64 / (2 * k) as f64);
    let mut k = start;
    std::iter::from_fn(move || {
        let current = a;
        k += 1;
        a *= (2 * k - 1) as f64 / (2 * k) as f64;
        Some(current)
    })
}

/// Terms `alpha_k alpha_{k+m} xi^{2k}` until they fall below the cutoff.
fn u_weights(xi: f64, m: usize) -> Vec<f64> {
    let x2 = xi * xi;
    let mut out = Vec::new();
    let mut power = 1.0;
    let mut first = None;
    for (a, b) in wallis_from(0).zip(wallis_from(m)).take(SERIES_MAX_TERMS) {
        let term = a * b * power;
        let lead = *first.get_or_insert(term);
        out.push(term);
        if term < SERIES_CUTOFF * lead {
            break;
        }
        power *= x2;
    }
    out
}

fn u_from_weights(xi: f64, m: usize, n: usize, weights: &[f64]) -> f64 {
    let base = (n + m + 1) as f64;
    let sum: f64 = weights
        .iter()
        .enumerate()
        .rev()
        .map(|(k, c)| c / (base + 2.0 * k as f64))
        .sum();
    2.0 * PI * xi.powi(m as i32) * sum
}

/// `w_m(xi) = 2 pi sum_k alpha_k alpha_{k+m} xi^{2k+m}`.
pub(crate) fn w_series(xi: f64, m: usize) -> f64 {
    let sum: f64 = u_weights(xi, m).iter().rev().sum();
    2.0 * PI * xi.powi(m as i32) * sum
}

/// `v_m(xi) = 2 pi sum_k beta_k beta_{k+m} xi^{2k+m}`, with `beta_k` the
/// Taylor coefficients of `sqrt(1 - t)`.
pub(crate) fn v_series(xi: f64, m: usize) -> f64 {
    let beta = |k: usize| -> f64 {
        if k == 0 {
            1.0
        } else {
            // beta_k = -(2k-3)!!/(2k)!! = -alpha_k / (2k-1)
            -(1..=k).fold(1.0, |acc, j| acc * (2 * j - 1) as f64 / (2 * j) as f64)
                / (2 * k - 1) as f64
        }
    };
    let x2 = xi * xi;
    let mut bk = 1.0;
    let mut bkm = beta(m);
    let mut power = 1.0;
    let mut terms = Vec::new();
    for k in 0..SERIES_MAX_TERMS {
        let term = bk * bkm * power;
        terms.push(term);
        if k > 0 && term.abs() < SERIES_CUTOFF * terms[0].abs() {
            break;
        }
        // beta_{k+1} = beta_k (2k-1)/(2k+2)
        bk *= (2.0 * k as f64 - 1.0) / (2.0 * k as f64 + 2.0);
        let km = (k + m) as f64;
        bkm *= (2.0 * km - 1.0) / (2.0 * km + 2.0);
        power *= x2;
    }
    2.0 * PI * xi.powi(m as i32) * terms.iter().rev().sum::<f64>()
}
