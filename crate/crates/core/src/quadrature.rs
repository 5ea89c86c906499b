//! Adaptive Gauss-Kronrod and periodic trapezoid quadrature.
//!
//! These back the reference (integral) evaluation paths of the ground kernel
//! and the singular-panel test oracles. Both routines report whether the
//! requested tolerance was met instead of failing outright, so that nested
//! integrals can propagate non-convergence to the caller.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_479,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Tolerances and limits for adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            abs: 0.0,
            rel,
            max_subdivisions: 2000,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    /// Acceptable error for `value`, never below the roundoff level of the
    /// 21-point rule.
    fn target(&self, value: f64) -> f64 {
        self.abs
            .max(self.rel * value.abs())
            .max(100.0 * f64::EPSILON * value.abs())
    }
}

/// Result of a quadrature together with its error estimate.
#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl Estimate {
    /// Converts a non-converged estimate into [`Error::Quadrature`].
    pub fn into_result(self, requested: f64) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature {
                estimate: self.value,
                error_estimate: self.error,
                requested,
            })
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs_sum = WGK[10] * fc.abs();
    let mut samples = [0.0f64; 21];
    samples[20] = fc;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[2 * j] = f1;
        samples[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((samples[2 * j] - mean).abs() + (samples[2 * j + 1] - mean).abs());
    }
    let value = kronrod * half;
    let abs_sum = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    (value, err)
}

/// Globally adaptive 21-point Gauss-Kronrod quadrature of `f` over the
/// consecutive intervals defined by `breaks` (at least two points).
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: &Tolerance) -> Estimate {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let (v, e) = kronrod21(&mut f, w[0], w[1]);
        evaluations += 21;
        value += v;
        error += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let mut subdivisions = 0;
    while error > tol.target(value) && subdivisions < tol.max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod21(&mut f, worst.a, mid);
        let (v2, e2) = kronrod21(&mut f, mid, worst.b);
        evaluations += 42;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
    }
    // Re-sum to shed the drift of the running updates.
    let value_sum: f64 = heap.iter().map(|s| s.value).sum();
    let error_sum: f64 = heap.iter().map(|s| s.error).sum();
    Estimate {
        value: value_sum,
        error: error_sum,
        evaluations,
        converged: error_sum <= tol.target(value_sum),
    }
}

/// Trapezoid rule for a `2 pi`-periodic integrand over one period starting at
/// `start`, doubling the number of nodes until successive sums agree.
pub fn periodic_trapezoid<F: FnMut(f64) -> f64>(
    mut f: F,
    start: f64,
    tol: &Tolerance,
    min_points: usize,
    max_points: usize,
) -> Estimate {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut n = min_points.max(4);
    let mut h = two_pi / n as f64;
    let mut sum: f64 = (0..n).map(|k| f(start + k as f64 * h)).sum();
    let mut evaluations = n;
    let mut value = sum * h;
    loop {
        if 2 * n > max_points {
            return Estimate {
                value,
                error: f64::INFINITY,
                evaluations,
                converged: false,
            };
        }
        let mids: f64 = (0..n).map(|k| f(start + (k as f64 + 0.5) * h)).sum();
        evaluations += n;
        sum += mids;
        n *= 2;
        h *= 0.5;
        let refined = sum * h;
        let diff = (refined - value).abs();
        value = refined;
        if diff <= tol.target(value) {
            return Estimate {
                value,
                error: diff,
                evaluations,
                converged: true,
            };
        }
    }
}
