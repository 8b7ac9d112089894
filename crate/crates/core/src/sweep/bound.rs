use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::SolverSettings;
use crate::metrics::{fidelity_ceiling, BoundReport};
use crate::model::SystemParams;

use super::tradeoff::{run_tradeoff_sweep, SigmaRange, TradeoffCurve};

/// Sweep point with the highest fidelity above the emission threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestPoint {
    pub area: f64,
    pub sigma: f64,
    pub p_ex: f64,
    pub fidelity: f64,
    pub bound: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub label: String,
    pub params: SystemParams,
    pub cooperativity: f64,
    /// (1 + C/(C+1)) / 2.
    pub reference_fidelity: f64,
    pub threshold: f64,
    pub best: BestPoint,
    /// best.fidelity - reference_fidelity.
    pub excess: f64,
    /// Converged points checked against the full inequality.
    pub points_checked: usize,
    /// Largest ⟨J⟩ - bound over those points (negative when all satisfy it).
    pub worst_bound_margin: f64,
    pub best_p_ex: f64,
}

/// Sweeps the given areas and compares the best high-emission fidelity with
/// the cooperativity ceiling.
pub fn run_bound_check(
    params: &SystemParams,
    label: &str,
    areas: &[f64],
    range: &SigmaRange,
    threshold: f64,
    settings: &SolverSettings,
) -> Result<BoundCheck> {
    let curves = run_tradeoff_sweep(params, label, areas, range, settings)?;
    bound_check_from_curves(params, label, &curves, threshold)
}

/// Bound check over curves that were already computed.
pub fn bound_check_from_curves(
    params: &SystemParams,
    label: &str,
    curves: &[TradeoffCurve],
    threshold: f64,
) -> Result<BoundCheck> {
    let cooperativity = match params.cooperativity() {
        Ok(c) => c,
        Err(Error::InfiniteCooperativity) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let mut best: Option<BestPoint> = None;
    let mut best_p_ex = 0.0f64;
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0;
    for curve in curves {
        for p in &curve.points {
            best_p_ex = best_p_ex.max(p.p_ex);
            let bound = p.result.bound(params)?;
            worst = worst.max(p.result.swap.j_avg.re - bound.bound_value);
            checked += 1;
            if p.p_ex > threshold && best.as_ref().is_none_or(|b| p.fidelity > b.fidelity) {
                best = Some(BestPoint {
                    area: curve.pulse_area,
                    sigma: p.sigma,
                    p_ex: p.p_ex,
                    fidelity: p.fidelity,
                    bound,
                });
            }
        }
    }
    let best = best.ok_or(Error::NoHighEmissionPoint {
        threshold,
        best_p_ex,
    })?;
    let reference = fidelity_ceiling(cooperativity);
    Ok(BoundCheck {
        label: label.to_string(),
        params: *params,
        cooperativity,
        reference_fidelity: reference,
        threshold,
        excess: best.fidelity - reference,
        best,
        points_checked: checked,
        worst_bound_margin: worst,
        best_p_ex,
    })
}
