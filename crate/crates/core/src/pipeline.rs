//! End-to-end evaluation of one pump setting: trajectory, correlations, metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::lindblad::{converged_on, converged_trajectory, evolve_pure, DensityTrajectory, SolverSettings};
use crate::metrics::{analytic_bound, correlation_j, identical_j, BoundReport, SwapResult};
use crate::model::{PulsePolicy, SystemParams};
use crate::qrt::{correlation_from, summarize, CorrelationSummary, Propagators, TwoTimeCorrelation};

/// Everything computed for one source driven by one pulse.
#[derive(Debug, Clone)]
pub struct SourceRun {
    pub trajectory: DensityTrajectory,
    pub propagators: Propagators,
    pub p_ex: f64,
}

impl SourceRun {
    pub fn grid(&self) -> TimeGrid {
        self.trajectory.grid
    }

    pub fn correlation(&self) -> Result<TwoTimeCorrelation> {
        correlation_from(&self.propagators, &self.trajectory)
    }

    pub fn summary(&self) -> Result<CorrelationSummary> {
        summarize(&self.propagators, &self.trajectory)
    }
}

/// Integrates one source on a planned, converged window.
pub fn simulate_source(params: &SystemParams, policy: &PulsePolicy, settings: &SolverSettings) -> Result<SourceRun> {
    let trajectory = converged_trajectory(params, policy, settings)?;
    finish_source(params, policy, settings, trajectory)
}

/// Integrates one source on a given starting grid (extended if needed).
pub fn simulate_source_on(
    params: &SystemParams,
    policy: &PulsePolicy,
    settings: &SolverSettings,
    grid: TimeGrid,
) -> Result<SourceRun> {
    let trajectory = converged_on(params, policy, settings, grid)?;
    finish_source(params, policy, settings, trajectory)
}

fn finish_source(
    params: &SystemParams,
    policy: &PulsePolicy,
    settings: &SolverSettings,
    trajectory: DensityTrajectory,
) -> Result<SourceRun> {
    let propagators = Propagators::new(params, policy, &trajectory.grid, settings.tolerances())?;
    let p_ex = trajectory.emission_probability();
    Ok(SourceRun {
        trajectory,
        propagators,
        p_ex,
    })
}

/// Metrics of one sweep point with two identical sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub swap: SwapResult,
    /// Emission probability without re-excitation.
    pub p_pure: f64,
    pub summary: CorrelationSummary,
    pub grid: TimeGrid,
}

impl PointResult {
    pub fn p_ex(&self) -> f64 {
        self.swap.p_ex_1
    }

    pub fn fidelity(&self) -> f64 {
        self.swap.fidelity
    }

    pub fn pure_ratio(&self) -> f64 {
        if self.p_ex() > 0.0 {
            self.p_pure / self.p_ex()
        } else {
            f64::NAN
        }
    }

    pub fn bound(&self, params: &SystemParams) -> Result<BoundReport> {
        analytic_bound(params, self.p_ex(), &self.summary)
    }
}

/// Swap of two identical sources, evaluated without storing the N×N grid.
pub fn swap_identical(params: &SystemParams, policy: &PulsePolicy, settings: &SolverSettings) -> Result<PointResult> {
    let run = simulate_source(params, policy, settings)?;
    point_from_run(params, policy, settings, &run)
}

fn point_from_run(
    params: &SystemParams,
    policy: &PulsePolicy,
    settings: &SolverSettings,
    run: &SourceRun,
) -> Result<PointResult> {
    let summary = run.summary()?;
    let j = identical_j(&summary, params.kappa, run.p_ex)?;
    let pure = evolve_pure(params, policy, &run.grid(), settings.tolerances())?;
    Ok(PointResult {
        swap: SwapResult::new(run.p_ex, run.p_ex, j.into()),
        p_pure: pure.emission_probability(),
        summary,
        grid: run.grid(),
    })
}

/// Swap of two different sources on a shared grid large enough for both.
pub fn swap_pair(
    source1: (&SystemParams, &PulsePolicy),
    source2: (&SystemParams, &PulsePolicy),
    settings: &SolverSettings,
) -> Result<SwapResult> {
    let (run1, run2) = simulate_pair(source1, source2, settings)?;
    let c1 = run1.correlation()?;
    let c2 = run2.correlation()?;
    let j = correlation_j(&c1, &c2, run1.p_ex, run2.p_ex)?;
    Ok(SwapResult::new(run1.p_ex, run2.p_ex, j))
}

/// Runs two sources on one common grid.
pub fn simulate_pair(
    source1: (&SystemParams, &PulsePolicy),
    source2: (&SystemParams, &PulsePolicy),
    settings: &SolverSettings,
) -> Result<(SourceRun, SourceRun)> {
    let g1 = settings.plan(source1.0, source1.1)?;
    let g2 = settings.plan(source2.0, source2.1)?;
    let mut grid = TimeGrid::new(0.0, g1.end.max(g2.end), g1.n.max(g2.n))?;
    for _ in 0..=settings.max_extensions {
        let run1 = simulate_source_on(source1.0, source1.1, settings, grid)?;
        let run2 = simulate_source_on(source2.0, source2.1, settings, grid)?;
        if run1.grid() == run2.grid() {
            return Ok((run1, run2));
        }
        grid = if run1.grid().end > run2.grid().end {
            run1.grid()
        } else {
            run2.grid()
        };
    }
    Err(Error::GridMismatch("sources did not settle on a common window".into()))
}
