use serde::{Deserialize, Serialize};

use super::params::SystemParams;
use super::pulse::PulsePolicy;

/// One adiabatic-passage condition: a ratio that should be well below one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub ratio: f64,
    pub satisfied: bool,
}

impl Condition {
    fn new(ratio: f64) -> Self {
        Self {
            ratio,
            satisfied: ratio < 1.0,
        }
    }
}

/// Diagnostics for the three adiabatic-transfer conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityReport {
    /// max_t |2gΩ'/(Ω²+g²)| / (½ min± |Δ ± √(g²+Ω²+Δ²)|)
    pub adiabatic: Condition,
    /// g / max Ω
    pub transfer: Condition,
    /// max(κ, γ_u) / g
    pub strong_coupling: Condition,
}

/// Evaluates the conditions on the sample times in `grid`. The detuning used
/// is the pump detuning `delta_p`.
pub fn adiabaticity_report(params: &SystemParams, policy: &PulsePolicy, grid: &[f64]) -> AdiabaticityReport {
    let g = params.g;
    let delta = params.delta_p();
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for &t in grid {
        let omega = policy.eval(t).norm();
        let dot = policy.derivative(t).norm();
        peak = peak.max(omega);
        let lhs = (2.0 * g * dot / (omega * omega + g * g)).abs();
        let root = (g * g + omega * omega + delta * delta).sqrt();
        let rhs = 0.5 * (delta + root).abs().min((delta - root).abs());
        let ratio = if lhs == 0.0 {
            0.0
        } else if rhs == 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs
        };
        worst = worst.max(ratio);
    }
    let transfer = if peak == 0.0 { f64::INFINITY } else { g / peak };
    let strong = if g == 0.0 {
        f64::INFINITY
    } else {
        params.kappa.max(params.gamma_u) / g
    };
    AdiabaticityReport {
        adiabatic: Condition::new(worst),
        transfer: Condition::new(transfer),
        strong_coupling: Condition::new(strong),
    }
}
