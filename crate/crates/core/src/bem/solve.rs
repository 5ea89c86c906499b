use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::{factor, solve as lu_solve};
use faer::perm::PermRef;
use faer::{Mat, Par};
use serde::Serialize;

use super::{BemSystem, SolverKind};
use crate::error::{Error, Result};

/// Pivot ratio beyond which the dense system is reported as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e14;

/// Restart length of GMRES.
const GMRES_RESTART: usize = 100;

/// Charge densities and solver statistics.
#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub sigma: Vec<f64>,
    /// `|A sigma - b| / |b|` recomputed with the factored operator.
    pub relative_residual: f64,
    /// Ratio of extreme LU pivots, a cheap lower bound on the condition
    /// number; only for the direct solver.
    pub pivot_ratio: Option<f64>,
    /// Iterations used by the iterative solver.
    pub iterations: Option<usize>,
}

/// Solves the assembled system for the panel densities.
pub fn solve(system: &BemSystem) -> Result<Solution> {
    let n = system.len();
    let b = &system.rhs;
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(Solution {
            sigma: vec![0.0; n],
            relative_residual: 0.0,
            pivot_ratio: None,
            iterations: None,
        });
    }
    let (sigma, pivot_ratio, iterations) = match system.config.solver {
        SolverKind::DenseDirect => {
            let (sigma, ratio) = dense_solve(system)?;
            (sigma, Some(ratio), None)
        }
        SolverKind::Iterative {
            tolerance,
            max_iterations,
        } => {
            let (sigma, iterations) = gmres(system, tolerance, max_iterations)?;
            (sigma, None, Some(iterations))
        }
    };
    let applied = system.apply(&sigma);
    let residual: Vec<f64> = applied.iter().zip(b).map(|(a, b)| a - b).collect();
    let relative_residual = norm(&residual) / b_norm;
    Ok(Solution {
        sigma,
        relative_residual,
        pivot_ratio,
        iterations,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dense_solve(system: &BemSystem) -> Result<(Vec<f64>, f64)> {
    let n = system.len();
    let mut work = system.free_space_block().to_owned();
    if let Some(ground) = &system.ground {
        let product = ground.receiver_factor() * ground.source_factor();
        for (k, &i) in ground.receiver_rows.iter().enumerate() {
            for j in 0..n {
                work[(i, j)] += product[(k, j)];
            }
        }
    }
    let mut perm = vec![0usize; n];
    let mut perm_inv = vec![0usize; n];
    let par = Par::rayon(0);
    let mut buffer = MemBuffer::new(factor::lu_in_place_scratch::<usize, f64>(n, n, par, Default::default()));
    factor::lu_in_place(
        work.as_mut(),
        &mut perm,
        &mut perm_inv,
        par,
        MemStack::new(&mut buffer),
        Default::default(),
    );

    let pivots: Vec<f64> = (0..n).map(|i| work[(i, i)].abs()).collect();
    let largest = pivots.iter().cloned().fold(0.0, f64::max);
    let smallest = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = largest / smallest;
    if !(ratio.is_finite() && ratio < SINGULAR_PIVOT_RATIO) {
        return Err(Error::Singular {
            condition_estimate: ratio,
        });
    }

    let mut rhs = Mat::from_fn(n, 1, |i, _| system.rhs[i]);
    let row_perm = PermRef::new_checked(&perm, &perm_inv, n);
    let mut buffer = MemBuffer::new(lu_solve::solve_in_place_scratch::<usize, f64>(n, 1, par));
    lu_solve::solve_in_place(
        work.as_ref(),
        work.as_ref(),
        row_perm,
        rhs.as_mut(),
        par,
        MemStack::new(&mut buffer),
    );
    let sigma: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular {
            condition_estimate: ratio,
        });
    }
    Ok((sigma, ratio))
}

/// Restarted GMRES with right diagonal preconditioning on the factored
/// operator.
fn gmres(system: &BemSystem, tolerance: f64, max_iterations: usize) -> Result<(Vec<f64>, usize)> {
    let n = system.len();
    let block = system.free_space_block();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let d = block[(i, i)];
            if d != 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();
    let b = &system.rhs;
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    let mut iterations = 0;
    let restart = GMRES_RESTART.min(n);

    loop {
        let ax = system.apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        if beta <= tolerance * b_norm {
            return Ok((x, iterations));
        }
        if iterations >= max_iterations {
            return Err(Error::NotConverged {
                iterations,
                residual: beta / b_norm,
            });
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        let mut k = 0;
        while k < restart && iterations < max_iterations {
            let z: Vec<f64> = basis[k].iter().zip(&diag).map(|(v, d)| v * d).collect();
            let mut w = system.apply(&z);
            let mut h = vec![0.0; k + 2];
            for (i, v) in basis.iter().enumerate() {
                let dot: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
                h[i] = dot;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= dot * vi;
                }
            }
            let w_norm = norm(&w);
            h[k + 1] = w_norm;
            for i in 0..k {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let denom = h[k].hypot(h[k + 1]);
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[k] / denom, h[k + 1] / denom) };
            cs.push(c);
            sn.push(s);
            h[k] = denom;
            h[k + 1] = 0.0;
            g.push(-s * g[k]);
            g[k] *= c;
            hess.push(h);
            iterations += 1;
            k += 1;
            if g[k].abs() <= 0.5 * tolerance * b_norm || w_norm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / w_norm).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in i + 1..k {
                acc -= hess[j][i] * y[j];
            }
            y[i] = acc / hess[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for ((xi, vi), d) in x.iter_mut().zip(&basis[j]).zip(&diag) {
                *xi += yj * vi * d;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular {
                condition_estimate: f64::INFINITY,
            });
        }
    }
}
