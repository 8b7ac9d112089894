use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::SolverSettings;
use crate::model::{PulsePolicy, SystemParams};
use crate::pipeline::{swap_identical, PointResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// Sampled pulse widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl SigmaRange {
    pub fn new(lo: f64, hi: f64, count: usize, spacing: Spacing) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma range [{lo}, {hi}] is invalid")));
        }
        if count == 0 || (count == 1 && hi != lo) {
            return Err(Error::InvalidParameter("sigma range needs at least two samples".into()));
        }
        Ok(Self { lo, hi, count, spacing })
    }

    /// Log-spaced range with the given density.
    pub fn log_density(lo: f64, hi: f64, per_decade: f64) -> Result<Self> {
        Self::new(lo, hi, Self::count_for_density(lo, hi, per_decade), Spacing::Log)
    }

    pub fn count_for_density(lo: f64, hi: f64, per_decade: f64) -> usize {
        if !(hi > lo && lo > 0.0) {
            return 1;
        }
        ((per_decade * (hi / lo).log10()).round() as usize).max(1) + 1
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    return self.hi;
                }
                let s = k as f64 / last;
                match self.spacing {
                    Spacing::Log => self.lo * (self.hi / self.lo).powf(s),
                    Spacing::Linear => self.lo + (self.hi - self.lo) * s,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Clockwise,
    Counterclockwise,
    Undefined,
}

/// Orientation of the closed polygon through `(p_ex, fidelity)` points.
pub fn loop_orientation(points: &[(f64, f64)]) -> Orientation {
    match signed_area(points) {
        Some(a) if a > 1e-6 => Orientation::Counterclockwise,
        Some(a) if a < -1e-6 => Orientation::Clockwise,
        _ => Orientation::Undefined,
    }
}

/// Shoelace area of the closed polygon; `None` for fewer than three points.
pub fn signed_area(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len();
    let mut twice = 0.0;
    for k in 0..n {
        let (x0, y0) = points[k];
        let (x1, y1) = points[(k + 1) % n];
        twice += x0 * y1 - x1 * y0;
    }
    Some(0.5 * twice)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub sigma: f64,
    pub p_ex: f64,
    pub fidelity: f64,
    pub p_pure_ratio: f64,
    /// Wall-clock seconds; excluded from the CSV so outputs stay reproducible.
    pub runtime: f64,
    pub pulse: PulsePolicy,
    pub result: PointResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedPoint {
    pub sigma: f64,
    pub error: String,
}

/// One constant-area sweep over pulse widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub config_label: String,
    pub pulse_area: f64,
    pub points: Vec<TradeoffPoint>,
    pub failures: Vec<FailedPoint>,
    pub orientation: Orientation,
    pub signed_area: f64,
}

impl TradeoffCurve {
    pub fn max_p_ex(&self) -> f64 {
        self.points.iter().map(|p| p.p_ex).fold(0.0, f64::max)
    }

    pub fn polygon(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.p_ex, p.fidelity)).collect()
    }
}

/// Evaluates one symmetric pulse of area `area` and width `sigma`.
pub fn evaluate_point(
    params: &SystemParams,
    pulse: PulsePolicy,
    sigma: f64,
    settings: &SolverSettings,
) -> std::result::Result<TradeoffPoint, FailedPoint> {
    let start = Instant::now();
    match swap_identical(params, &pulse, settings) {
        Ok(result) => Ok(TradeoffPoint {
            sigma,
            p_ex: result.p_ex(),
            fidelity: result.fidelity(),
            p_pure_ratio: result.pure_ratio(),
            runtime: start.elapsed().as_secs_f64(),
            pulse,
            result,
        }),
        Err(e) => {
            log::warn!("sigma = {sigma}: {e}");
            Err(FailedPoint {
                sigma,
                error: e.to_string(),
            })
        }
    }
}

/// Constant-area sweeps, one curve per area. Points run in parallel; results
/// are stored by input index so output order never depends on scheduling.
pub fn run_tradeoff_sweep(
    params: &SystemParams,
    label: &str,
    areas: &[f64],
    range: &SigmaRange,
    settings: &SolverSettings,
) -> Result<Vec<TradeoffCurve>> {
    if areas.is_empty() {
        return Err(Error::InvalidParameter("no pulse areas given".into()));
    }
    params.validate()?;
    let sigmas = range.values();
    let jobs: Vec<(usize, f64)> = (0..areas.len())
        .flat_map(|a| sigmas.iter().map(move |s| (a, *s)))
        .collect();
    let results: Vec<std::result::Result<TradeoffPoint, FailedPoint>> = jobs
        .par_iter()
        .map(|&(a, sigma)| match PulsePolicy::symmetric_with_area(areas[a], sigma) {
            Ok(pulse) => evaluate_point(params, pulse, sigma, settings),
            Err(e) => Err(FailedPoint {
                sigma,
                error: e.to_string(),
            }),
        })
        .collect();

    let mut curves = Vec::with_capacity(areas.len());
    let mut iter = results.into_iter();
    for &area in areas {
        let mut points = Vec::new();
        let mut failures = Vec::new();
        for r in iter.by_ref().take(sigmas.len()) {
            match r {
                Ok(p) => points.push(p),
                Err(f) => failures.push(f),
            }
        }
        let polygon: Vec<(f64, f64)> = points.iter().map(|p| (p.p_ex, p.fidelity)).collect();
        curves.push(TradeoffCurve {
            config_label: label.to_string(),
            pulse_area: area,
            orientation: loop_orientation(&polygon),
            signed_area: signed_area(&polygon).unwrap_or(0.0),
            points,
            failures,
        });
    }
    Ok(curves)
}
