use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::choose_truncation;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::harmonics::{fill_schmidt_harmonics, packed_len, SpectralConstants, MAX_TRUNCATION};
use crate::kernel::{fill_signature, SignatureBranch, SignatureScratch};

/// Nonzero root of `e^{2s} (1 - s) = 1`, the value of `ln(1/eps) / p` at
/// which the extension term of the factored-kernel cost is stationary.
pub const ALPHA_STAR: f64 = 0.796_812_13;

/// Asymptotic cost model of the factored kernel and of a BEM solve on the
/// extended domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub alpha_star: f64,
    /// `exp(alpha_star)`, the smallest optimal `re / r0` of the kernel cost.
    pub beta: f64,
    /// Exponent of the BEM cost `D N^alpha`, between 1 and 3.
    pub cost_exponent: f64,
    /// Receiver harmonics constant.
    pub a: Option<f64>,
    /// Interior signature constant.
    pub b: Option<f64>,
    /// Extension signature constant.
    pub c: Option<f64>,
    /// Solver constant.
    pub d: Option<f64>,
}

impl CostModel {
    pub fn new(cost_exponent: f64) -> Result<Self> {
        if !(1.0..=3.0).contains(&cost_exponent) {
            return Err(Error::Config(format!(
                "the BEM cost exponent must lie in [1, 3], got {cost_exponent}"
            )));
        }
        Ok(Self {
            alpha_star: ALPHA_STAR,
            beta: ALPHA_STAR.exp(),
            cost_exponent,
            a: None,
            b: None,
            c: None,
            d: None,
        })
    }

    pub fn with_constants(mut self, a: f64, b: f64, c: f64, d: f64) -> Self {
        self.a = Some(a);
        self.b = Some(b);
        self.c = Some(c);
        self.d = Some(d);
        self
    }

    /// `ln(1/eps) / alpha_star`, above which the kernel cost grows with `p`.
    pub fn p_critical(&self, eps: f64) -> f64 {
        (1.0 / eps).ln() / self.alpha_star
    }

    fn constants(&self) -> Result<(f64, f64, f64, f64)> {
        match (self.a, self.b, self.c, self.d) {
            (Some(a), Some(b), Some(c), Some(d)) => Ok((a, b, c, d)),
            _ => Err(Error::Config("the cost model has no fitted constants".into())),
        }
    }

    /// Kernel cost `A M p^2 + B N p^3 + C pi rho r0^2 (eps^{-2/p} - 1) p^2`
    /// for the truncation that reaches `eps`.
    pub fn kernel_cost(&self, p: f64, receivers: f64, sources: f64, density: f64, r0: f64, eps: f64) -> Result<f64> {
        let (a, b, c, _) = self.constants()?;
        let extension = PI * density * r0 * r0 * (eps.powf(-2.0 / p) - 1.0);
        Ok(a * receivers * p * p + b * sources * p.powi(3) + c * extension * p * p)
    }

    /// BEM cost `C_fact + D N_e^alpha` at `re = (1 + delta) r0`, with
    /// `M = N` and the extension sampled at the density `N / area` of the
    /// detailed surface.
    pub fn bem_cost(&self, delta: f64, panels: f64, area: f64, r0: f64, eps: f64) -> Result<f64> {
        let (_, _, _, d) = self.constants()?;
        let p = (1.0 / eps).ln() / (1.0 + delta).ln();
        let density = panels / area;
        let kernel = self.kernel_cost(p, panels, panels, density, r0, eps)?;
        let extended = panels + PI * density * r0 * r0 * ((1.0 + delta).powi(2) - 1.0);
        Ok(kernel + d * extended.powf(self.cost_exponent))
    }

    /// Stationary point of the small-`delta` BEM cost,
    /// `delta^4 = (3B / (2 alpha D)) (A0 / (pi r0^2)) N^{1-alpha} ln^3(1/eps)`.
    pub fn delta_opt(&self, panels: f64, area: f64, r0: f64, eps: f64) -> Result<f64> {
        let (_, b, _, d) = self.constants()?;
        if !(b > 0.0 && d > 0.0) {
            return Err(Error::Domain(format!(
                "the optimum needs positive signature and solver constants, got B = {b}, D = {d}"
            )));
        }
        let alpha = self.cost_exponent;
        let l = (1.0 / eps).ln();
        let quartic = 3.0 * b / (2.0 * alpha * d) * area / (PI * r0 * r0) * panels.powf(1.0 - alpha) * l.powi(3);
        Ok(quartic.powf(0.25))
    }
}

/// The bracketed factor of `dC_fact/dp`,
/// `(eps^{-2/p} - 1) - eps^{-2/p} ln(1/eps) / p`; it changes sign once, at
/// `p = p_critical(eps)`.
pub fn cost_bracket(p: f64, eps: f64) -> f64 {
    let l = (1.0 / eps).ln();
    let g = (2.0 * l / p).exp();
    (g - 1.0) - g * l / p
}

/// Optimal extension and the cost curves around it.
#[derive(Clone, Debug, Serialize)]
pub struct CostOptimum {
    pub delta_opt: f64,
    pub p_opt: usize,
    /// Lower bound `beta` on the optimal `re / r0` of the kernel cost alone.
    pub kernel_ratio_bound: f64,
    /// `(re / r0, p, cost)` of the kernel cost at the prescribed accuracy.
    pub kernel_curve: Vec<(f64, usize, f64)>,
    /// `(delta, cost)` of the BEM cost.
    pub bem_curve: Vec<(f64, f64)>,
}

/// Evaluates the fitted model for a problem with `panels` unknowns on a
/// detailed surface of area `area` and radius `r0`.
pub fn cost_optimizer(model: &CostModel, receivers: usize, panels: usize, area: f64, r0: f64, eps: f64) -> Result<CostOptimum> {
    model.constants()?;
    if !(eps > 0.0 && eps < 1.0) || !(area > 0.0) || !(r0 > 0.0) || panels == 0 {
        return Err(Error::Config("cost optimizer needs 0 < eps < 1 and positive sizes".into()));
    }
    let n = panels as f64;
    let delta_opt = model.delta_opt(n, area, r0, eps)?;
    let p_opt = choose_truncation(r0, r0 * (1.0 + delta_opt), eps)?;
    let density = n / area;
    let kernel_curve = (1..=60)
        .map(|k| {
            let ratio = 1.0 + 0.05 * k as f64;
            let p = choose_truncation(1.0, ratio, eps)?;
            let cost = model.kernel_cost(p as f64, receivers as f64, n, density, r0, eps)?;
            Ok((ratio, p, cost))
        })
        .collect::<Result<Vec<_>>>()?;
    let bem_curve = (1..=100)
        .map(|k| {
            let delta = 0.01 * k as f64;
            Ok((delta, model.bem_cost(delta, n, area, r0, eps)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CostOptimum {
        delta_opt,
        p_opt,
        kernel_ratio_bound: model.beta,
        kernel_curve,
        bem_curve,
    })
}

/// One timed factorization of the kernel.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KernelTiming {
    pub ratio: f64,
    pub p: usize,
    pub receivers: usize,
    pub sources: usize,
    pub extension_sources: usize,
    pub seconds: f64,
}

/// Least-squares fit of `t = A M p^2 + B N p^3 + C (N_e - N) p^2`; returns
/// `(A, B, C)`.
pub fn fit_kernel_constants(samples: &[KernelTiming]) -> Result<(f64, f64, f64)> {
    if samples.len() < 3 {
        return Err(Error::Config(format!(
            "fitting three constants needs at least three timings, got {}",
            samples.len()
        )));
    }
    // columns are scaled to unit size so the normal problem is well posed
    let raw = Mat::from_fn(samples.len(), 3, |i, j| {
        let s = &samples[i];
        let p = s.p as f64;
        match j {
            0 => s.receivers as f64 * p * p,
            1 => s.sources as f64 * p.powi(3),
            _ => s.extension_sources as f64 * p * p,
        }
    });
    let scales: Vec<f64> = (0..3)
        .map(|j| {
            let m = (0..raw.nrows()).map(|i| raw[(i, j)].abs()).fold(0.0, f64::max);
            if m > 0.0 {
                m
            } else {
                1.0
            }
        })
        .collect();
    let design = Mat::from_fn(raw.nrows(), 3, |i, j| raw[(i, j)] / scales[j]);
    let rhs = Mat::from_fn(samples.len(), 1, |i, _| samples[i].seconds);
    let x = design.qr().solve_lstsq(&rhs);
    Ok((x[(0, 0)] / scales[0], x[(1, 0)] / scales[1], x[(2, 0)] / scales[2]))
}

/// Least-squares fit of `t = D N^alpha` from `(N, seconds)` samples.
pub fn fit_solver_constant(samples: &[(usize, f64)], alpha: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Config("fitting the solver constant needs timings".into()));
    }
    let num: f64 = samples.iter().map(|(n, t)| t * (*n as f64).powf(alpha)).sum();
    let den: f64 = samples.iter().map(|(n, _)| (*n as f64).powf(2.0 * alpha)).sum();
    Ok(num / den)
}

/// Point sets of the kernel accuracy and timing studies: receivers on the
/// arc of the unit hemisphere in the plane `y = 0`, sources on the
/// hemisphere and on the extension ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelPointSets {
    pub r0: f64,
    pub receivers: usize,
    pub hemisphere_sources: usize,
    pub extension_sources: usize,
    pub seed: u64,
}

impl KernelPointSets {
    pub fn receiver_points(&self) -> Vec<Point3> {
        let m = self.receivers;
        (0..m)
            .map(|k| {
                let theta = -PI / 2.0 + PI * (k as f64 + 0.5) / m as f64;
                Point3::new(theta.sin(), 0.0, theta.cos())
            })
            .collect()
    }

    /// Area-uniform random sources for an extended radius `re`; the same seed
    /// yields the same unit samples for every `re`.
    pub fn source_points(&self, re: f64) -> (Vec<Point3>, Vec<Point3>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let hemisphere = (0..self.hemisphere_sources)
            .map(|_| {
                let z: f64 = rng.random();
                let phi = 2.0 * PI * rng.random::<f64>();
                let s = (1.0 - z * z).sqrt();
                Point3::new(s * phi.cos(), s * phi.sin(), z)
            })
            .collect();
        let extension = (0..self.extension_sources)
            .map(|_| {
                let u: f64 = rng.random();
                let phi = 2.0 * PI * rng.random::<f64>();
                let rho = (self.r0 * self.r0 + u * (re * re - self.r0 * self.r0)).sqrt();
                Point3::from_cylindrical(rho, phi, 0.0)
            })
            .collect();
        (hemisphere, extension)
    }
}

/// Parameters of the measured kernel cost curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostCurveConfig {
    pub eps: f64,
    pub ratios: Vec<f64>,
    pub receivers: usize,
    pub hemisphere_sources: usize,
    /// Extension sources per unit area of the ring.
    pub extension_density: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CostCurveConfig {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            ratios: (0..=11).map(|k| 1.25 + 0.25 * k as f64).collect(),
            receivers: 64,
            hemisphere_sources: 256,
            extension_density: 200.0,
            repeats: 3,
            seed: 7,
        }
    }
}

/// Measured factorization times over `re / r0`.
#[derive(Clone, Debug, Serialize)]
pub struct CostCurve {
    pub config: CostCurveConfig,
    pub samples: Vec<KernelTiming>,
    pub minimum_ratio: f64,
    /// True when the fastest ratio is neither end of the sweep.
    pub interior_minimum: bool,
}

impl CostCurve {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["ratio", "p", "receivers", "sources", "extension_sources", "seconds"])?;
        for s in &self.samples {
            writer.write_record([
                format!("{}", s.ratio),
                s.p.to_string(),
                s.receivers.to_string(),
                s.sources.to_string(),
                s.extension_sources.to_string(),
                format!("{:.6e}", s.seconds),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Times the factored kernel (receiver harmonics plus all source
/// signatures) for `r0 = 1` at each ratio, keeping the fastest of
/// `repeats` runs.
pub fn measure_cost_curve(config: &CostCurveConfig) -> Result<CostCurve> {
    if config.ratios.len() < 3 || config.repeats == 0 {
        return Err(Error::Config("a cost curve needs at least three ratios and one repeat".into()));
    }
    let mut samples = Vec::new();
    for &ratio in &config.ratios {
        let p = choose_truncation(1.0, ratio, config.eps)?;
        if p > MAX_TRUNCATION {
            return Err(Error::Config(format!(
                "ratio {ratio} needs p = {p}, beyond the supported {MAX_TRUNCATION}"
            )));
        }
        let extension = (config.extension_density * PI * (ratio * ratio - 1.0)).round() as usize;
        let sets = KernelPointSets {
            r0: 1.0,
            receivers: config.receivers,
            hemisphere_sources: config.hemisphere_sources,
            extension_sources: extension,
            seed: config.seed,
        };
        let receivers = sets.receiver_points();
        let (hemisphere, ring) = sets.source_points(ratio);
        let mut best = f64::INFINITY;
        for _ in 0..config.repeats {
            let start = Instant::now();
            factor_kernel(ratio, p, &receivers, &hemisphere, &ring)?;
            best = best.min(start.elapsed().as_secs_f64());
        }
        samples.push(KernelTiming {
            ratio,
            p,
            receivers: receivers.len(),
            sources: hemisphere.len(),
            extension_sources: ring.len(),
            seconds: best,
        });
    }
    let (k, fastest) = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.seconds.total_cmp(&b.1.seconds))
        .expect("at least three samples");
    Ok(CostCurve {
        config: config.clone(),
        minimum_ratio: fastest.ratio,
        interior_minimum: k > 0 && k + 1 < samples.len(),
        samples,
    })
}

/// Builds both factors of the kernel matrix; returns a checksum so the work
/// cannot be optimized away.
fn factor_kernel(re: f64, p: usize, receivers: &[Point3], hemisphere: &[Point3], ring: &[Point3]) -> Result<f64> {
    let constants = SpectralConstants::new(p)?;
    let mut scratch = SignatureScratch::new(&constants);
    let mut buffer = vec![0.0; packed_len(p)];
    let mut checksum = 0.0;
    for &y in receivers {
        fill_schmidt_harmonics(y / re, p, &mut buffer);
        checksum += buffer[packed_len(p) - 2];
    }
    for &x in hemisphere {
        fill_signature(x / re, &constants, SignatureBranch::Interior, &mut scratch, &mut buffer)?;
        checksum += buffer[1];
    }
    for &x in ring {
        fill_signature(x / re, &constants, SignatureBranch::Ground, &mut scratch, &mut buffer)?;
        checksum += buffer[1];
    }
    Ok(std::hint::black_box(checksum))
}
