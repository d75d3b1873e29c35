//! Largest adjacency eigenvalue and the epidemic threshold test.
//!
//! Power iteration runs on `A + I`. The shift leaves the eigenvectors
//! alone and moves every eigenvalue up by one, which breaks the
//! `λ_min = -λ_max` tie of bipartite graphs without reordering anything.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub lambda_max: f64,
    pub iterations: usize,
    /// `‖Ax − λx‖∞ / max(1, λ)` for the final unit vector.
    pub residual: f64,
    pub converged: bool,
}

impl SpectralResult {
    /// Turns a non-converged result into [`Error::NonConvergence`].
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                residual: self.residual,
            })
        }
    }
}

/// Start vector: all ones plus a small deterministic ripple, normalized.
pub(crate) fn start_vector(n: usize) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 1e-3 * (((i as f64 + 1.0) * GOLDEN).fract() - 0.5))
        .collect();
    normalize(&mut x);
    x
}

pub(crate) fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Dominant eigenpair state shared with eigenvector centrality.
pub(crate) struct PowerState {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub residual: f64,
    pub step: f64,
    pub iterations: usize,
}

/// Runs shifted power iteration until `done(state)` holds or `max_iter`
/// steps pass. On return `x` is a unit vector and `lambda` its Rayleigh
/// quotient for `A`.
pub(crate) fn shifted_power_iteration(
    g: &Graph,
    max_iter: usize,
    mut done: impl FnMut(&PowerState) -> bool,
) -> (PowerState, bool) {
    let n = g.node_count();
    let mut ax = vec![0.0; n];
    let mut state = PowerState {
        x: start_vector(n),
        lambda: 0.0,
        residual: f64::INFINITY,
        step: f64::INFINITY,
        iterations: 0,
    };
    loop {
        g.adjacency_matvec(&state.x, &mut ax);
        let lambda: f64 = state.x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let residual = state
            .x
            .iter()
            .zip(&ax)
            .map(|(x, a)| (a - lambda * x).abs())
            .fold(0.0, f64::max)
            / lambda.max(1.0);
        state.lambda = lambda;
        state.residual = residual;
        if done(&state) {
            return (state, true);
        }
        if state.iterations >= max_iter {
            return (state, false);
        }
        // x <- (A + I) x, normalized
        for (a, x) in ax.iter_mut().zip(&state.x) {
            *a += x;
        }
        normalize(&mut ax);
        state.step = state
            .x
            .iter()
            .zip(&ax)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut state.x, &mut ax);
        state.iterations += 1;
    }
}

/// Largest eigenvalue of the adjacency matrix. Edgeless graphs give 0.
/// Non-convergence is reported through `converged`, with the best estimate.
pub fn lambda_max(g: &Graph, opts: PowerOptions) -> Result<SpectralResult> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if g.edge_count() == 0 {
        return Ok(SpectralResult {
            lambda_max: 0.0,
            iterations: 0,
            residual: 0.0,
            converged: true,
        });
    }
    let (state, converged) =
        shifted_power_iteration(g, opts.max_iter, |s| s.residual < opts.tol);
    Ok(SpectralResult {
        lambda_max: state.lambda.max(0.0),
        iterations: state.iterations,
        residual: state.residual,
        converged,
    })
}

/// SIR rates: `beta` per contact per day, `delta` recoveries per day.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SirRates {
    pub beta: f64,
    pub delta: f64,
}

impl SirRates {
    /// Rates matching a fixed infectious period: `δ = 1 / recovery_days`.
    pub fn from_recovery_days(beta: f64, recovery_days: f64) -> Self {
        SirRates {
            beta,
            delta: 1.0 / recovery_days,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub ratio: f64,
    pub inverse_lambda: f64,
    pub contained: bool,
    pub margin: f64,
}

/// Checks `β/δ ≤ 1/λ_max`.
pub fn threshold_check(rates: SirRates, lambda: f64) -> Result<ThresholdReport> {
    if !(rates.delta > 0.0) {
        return Err(Error::invalid(format!("recovery rate {} must be positive", rates.delta)));
    }
    if !(rates.beta >= 0.0) {
        return Err(Error::invalid(format!("infection rate {} must be non-negative", rates.beta)));
    }
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("eigenvalue {lambda} must be non-negative")));
    }
    let ratio = rates.beta / rates.delta;
    let inverse_lambda = if lambda == 0.0 { f64::INFINITY } else { 1.0 / lambda };
    Ok(ThresholdReport {
        ratio,
        inverse_lambda,
        contained: ratio <= inverse_lambda,
        margin: inverse_lambda - ratio,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub deg_avg: f64,
    pub lambda_max: f64,
    pub deg_max: usize,
    pub holds: bool,
}

/// `deg_avg ≤ λ_max ≤ deg_max`, with a relative slack of the solver tolerance.
pub fn spectral_bounds_check(g: &Graph, opts: PowerOptions) -> Result<BoundsReport> {
    let stats = g.degree_stats()?;
    let lambda = lambda_max(g, opts)?.lambda_max;
    let slack = 1e-7 * lambda.max(1.0);
    Ok(BoundsReport {
        deg_avg: stats.deg_avg,
        lambda_max: lambda,
        deg_max: stats.deg_max,
        holds: stats.deg_avg <= lambda + slack && lambda <= stats.deg_max as f64 + slack,
    })
}
