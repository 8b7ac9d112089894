use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::qrt::{CorrelationSummary, TwoTimeCorrelation};

/// Below this product of emission probabilities no swap is heralded.
pub const EMISSION_FLOOR: f64 = 1e-12;

/// Outcome of swapping two atom–photon pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapResult {
    pub p_ex_1: f64,
    pub p_ex_2: f64,
    pub j_avg: Complex64,
    pub fidelity: f64,
    pub p_ent: f64,
}

impl SwapResult {
    pub fn new(p_ex_1: f64, p_ex_2: f64, j_avg: Complex64) -> Self {
        Self {
            p_ex_1,
            p_ex_2,
            j_avg,
            fidelity: bell_fidelity(j_avg),
            p_ent: 0.5 * p_ex_1 * p_ex_2,
        }
    }
}

/// Terms of the cooperativity bound on ⟨J⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub cooperativity: f64,
    pub p_ex: f64,
    pub first_term: f64,
    pub term_lambda_diag: f64,
    pub term_derivative: f64,
    pub term_residual: f64,
    pub bound_value: f64,
    pub truncated_bound: f64,
}

fn check_emission(p1: f64, p2: f64) -> Result<()> {
    let prod = p1 * p2;
    if !(prod >= EMISSION_FLOOR) {
        return Err(Error::EmissionZero(prod));
    }
    Ok(())
}

/// ⟨J⟩ = 4κ1κ2 ∬ G1*(t,t') G2(t,t') dt dt' / (p1 p2).
pub fn correlation_j(
    corr1: &TwoTimeCorrelation,
    corr2: &TwoTimeCorrelation,
    p1: f64,
    p2: f64,
) -> Result<Complex64> {
    check_emission(p1, p2)?;
    if corr1.grid != corr2.grid {
        return Err(Error::GridMismatch("correlations use different grids".into()));
    }
    let w = corr1.grid.weights();
    let n = corr1.n();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += corr1.values[i * n + j].conj() * corr2.values[i * n + j] * w[j];
        }
        acc += row * w[i];
    }
    Ok(acc * (4.0 * corr1.kappa * corr2.kappa) / (p1 * p2))
}

/// ⟨J⟩ for two identical sources from a streamed summary.
pub fn identical_j(summary: &CorrelationSummary, kappa: f64, p_ex: f64) -> Result<f64> {
    check_emission(p_ex, p_ex)?;
    Ok(4.0 * kappa * kappa * summary.norm_sq_integral / (p_ex * p_ex))
}

/// F = (1 + Re J) / 2.
pub fn bell_fidelity(j: Complex64) -> f64 {
    0.5 * (1.0 + j.re)
}

/// Heralding probability P_ex² / 2 of the linear-optics Bell measurement.
pub fn entanglement_rate(p_ex: f64) -> f64 {
    0.5 * p_ex * p_ex
}

/// Right-hand side of the cooperativity inequality on ⟨J⟩ for identical
/// sources, with its correction terms. `gamma_u = 0` is handled as the
/// C → ∞ limit.
pub fn analytic_bound(params: &SystemParams, p_ex: f64, summary: &CorrelationSummary) -> Result<BoundReport> {
    check_emission(p_ex, p_ex)?;
    let (c, frac, inv) = match params.cooperativity() {
        Ok(c) => (c, c / (c + 1.0), 1.0 / (c + 1.0)),
        Err(Error::InfiniteCooperativity) => (f64::INFINITY, 1.0, 0.0),
        Err(e) => return Err(e),
    };
    let p2 = p_ex * p_ex;
    let kappa = params.kappa;
    let first_term = 2.0 * frac * (1.0 / p_ex - 0.5);
    let term_lambda_diag = 8.0 * kappa * inv / p2 * summary.diag_sq_integral;
    let term_derivative = 8.0 * inv / p2 * summary.derivative_integral;
    let term_residual = 4.0 * kappa * frac / p2 * summary.residual_integral;
    Ok(BoundReport {
        cooperativity: c,
        p_ex,
        first_term,
        term_lambda_diag,
        term_derivative,
        term_residual,
        bound_value: first_term + term_lambda_diag - term_derivative - term_residual,
        truncated_bound: frac,
    })
}

/// Fidelity ceiling (1 + C/(C+1)) / 2 at unit emission probability.
pub fn fidelity_ceiling(cooperativity: f64) -> f64 {
    if cooperativity.is_infinite() {
        1.0
    } else {
        0.5 * (1.0 + cooperativity / (cooperativity + 1.0))
    }
}
