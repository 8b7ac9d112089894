//! Reduced master equation on {|u0>, |g1>, |e0>, |g0>}.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integration_breakpoints, plan_points, plan_window, split_interval, stability_step, TimeGrid};
use crate::model::{hamiltonian_with_drive, PulsePolicy, SystemParams};
use crate::ode::{Dopri5, Tolerances};

/// State vector: the 3×3 block row-major followed by ρ44.
pub type DensityState = [Complex64; 10];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Numerical settings shared by every stage of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub rtol: f64,
    pub atol: f64,
    /// Fixed number of reporting samples; planned from the rates when absent.
    pub grid_points: Option<usize>,
    /// Allowed population left in {|g1>, |e0>} at the end of the window.
    pub residual: f64,
    /// How many times the window may grow by half before giving up.
    pub max_extensions: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-9,
            grid_points: None,
            residual: 1e-6,
            max_extensions: 6,
        }
    }
}

impl SolverSettings {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.rtol,
            atol: self.atol,
            ..Tolerances::default()
        }
    }

    /// Window and sample count for one source.
    pub fn plan(&self, params: &SystemParams, policy: &PulsePolicy) -> Result<TimeGrid> {
        let window = plan_window(params, policy);
        let n = self
            .grid_points
            .unwrap_or_else(|| plan_points(params, policy, window));
        TimeGrid::new(0.0, window, n)
    }
}

/// Time samples of ρ(t).
#[derive(Debug, Clone)]
pub struct DensityTrajectory {
    pub grid: TimeGrid,
    pub states: Vec<DensityState>,
    pub kappa: f64,
}

impl DensityTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Full 4×4 matrix at sample `k`.
    pub fn rho(&self, k: usize) -> [[Complex64; 4]; 4] {
        let s = &self.states[k];
        let mut m = [[ZERO; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = s[3 * i + j];
            }
        }
        m[3][3] = s[9];
        m
    }

    /// Element ρ_ij (zero-based) of the 3×3 block at sample `k`.
    pub fn block(&self, k: usize, i: usize, j: usize) -> Complex64 {
        self.states[k][3 * i + j]
    }

    /// Population of |g1>.
    pub fn rho22(&self, k: usize) -> f64 {
        self.states[k][4].re
    }

    pub fn rho44(&self, k: usize) -> f64 {
        self.states[k][9].re
    }

    pub fn trace(&self, k: usize) -> f64 {
        let s = &self.states[k];
        s[0].re + s[4].re + s[8].re + s[9].re
    }

    /// Population in {|g1>, |e0>} at the last sample.
    pub fn final_residual(&self) -> f64 {
        let k = self.len() - 1;
        self.states[k][4].re + self.states[k][8].re
    }

    /// Largest |ρ - ρ†| entry over all samples.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for s in &self.states {
            for i in 0..3 {
                for j in i..3 {
                    worst = worst.max((s[3 * i + j] - s[3 * j + i].conj()).norm());
                }
            }
            worst = worst.max(s[9].im.abs());
        }
        worst
    }

    /// 2κ ∫ρ22 dt by the trapezoid rule on the reporting grid.
    pub fn emission_probability(&self) -> f64 {
        let values: Vec<f64> = (0..self.len()).map(|k| self.rho22(k)).collect();
        2.0 * self.kappa * self.grid.integrate(&values)
    }

    /// ρ44(t), the probability that a photon has left by time `t`.
    pub fn cumulative_emission(&self, t: f64) -> Result<f64> {
        let (a, b) = (self.grid.start, self.grid.end);
        if !(t >= a && t <= b) {
            return Err(Error::OutOfRange { t, start: a, end: b });
        }
        let x = (t - a) / self.grid.step();
        let k = (x.floor() as usize).min(self.len() - 2);
        let s = x - k as f64;
        Ok(self.rho44(k) * (1.0 - s) + self.rho44(k + 1) * s)
    }

    /// Writes `t` and Re/Im of the ten upper-triangle elements of ρ.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let labels = ["11", "12", "13", "14", "22", "23", "24", "33", "34", "44"];
        let mut header = vec!["t".to_string()];
        for l in labels {
            header.push(format!("re_rho{l}"));
            header.push(format!("im_rho{l}"));
        }
        w.write_record(&header)?;
        for k in 0..self.len() {
            let m = self.rho(k);
            let mut row = vec![format!("{:e}", self.grid.time(k))];
            for i in 0..4 {
                for j in i..4 {
                    row.push(format!("{:e}", m[i][j].re));
                    row.push(format!("{:e}", m[i][j].im));
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn density_rhs(params: &SystemParams, policy: &PulsePolicy, recycle: bool, t: f64, y: &DensityState) -> DensityState {
    let h = hamiltonian_with_drive(params, policy.eval(t));
    let mut out = [ZERO; 10];
    let minus_i = Complex64::new(0.0, -1.0);
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = ZERO;
            for k in 0..3 {
                acc += h[i][k] * y[3 * k + j] - y[3 * i + k] * h[j][k].conj();
            }
            out[3 * i + j] = minus_i * acc;
        }
    }
    if recycle {
        out[0] += y[8] * (2.0 * params.gamma_u);
    }
    out[9] = y[4] * (2.0 * params.kappa);
    out
}

fn integrate(
    params: &SystemParams,
    policy: &PulsePolicy,
    grid: &TimeGrid,
    tol: Tolerances,
    recycle: bool,
) -> Result<DensityTrajectory> {
    params.validate()?;
    policy.validate()?;
    let f = |t: f64, y: &DensityState| density_rhs(params, policy, recycle, t, y);
    let breaks = integration_breakpoints(policy);
    let mut y = [ZERO; 10];
    y[0] = Complex64::new(1.0, 0.0);
    let mut states = Vec::with_capacity(grid.len());
    states.push(y);
    let mut ode = Dopri5::new(tol).with_max_step(stability_step(params, policy));
    for k in 0..grid.len() - 1 {
        let cuts = split_interval(grid.time(k), grid.time(k + 1), &breaks);
        for w in cuts.windows(2) {
            ode.advance(&f, w[0], w[1], &mut y)?;
        }
        states.push(y);
    }
    Ok(DensityTrajectory {
        grid: *grid,
        states,
        kappa: params.kappa,
    })
}

/// Integrates the master equation from ρ(0) = |u0><u0| over `grid`.
pub fn evolve_density(
    params: &SystemParams,
    policy: &PulsePolicy,
    grid: &TimeGrid,
    tol: Tolerances,
) -> Result<DensityTrajectory> {
    integrate(params, policy, grid, tol, true)
}

/// Same as [`evolve_density`] without the re-excitation channel, so the state
/// stays pure.
pub fn evolve_pure(
    params: &SystemParams,
    policy: &PulsePolicy,
    grid: &TimeGrid,
    tol: Tolerances,
) -> Result<DensityTrajectory> {
    integrate(params, policy, grid, tol, false)
}

/// 2κ ∫ρ22 dt.
pub fn photon_emission_probability(traj: &DensityTrajectory) -> f64 {
    traj.emission_probability()
}

/// Emission probability of the re-excitation-free evolution.
pub fn pure_photon_probability(
    params: &SystemParams,
    policy: &PulsePolicy,
    grid: &TimeGrid,
    tol: Tolerances,
) -> Result<f64> {
    Ok(evolve_pure(params, policy, grid, tol)?.emission_probability())
}

/// Runs [`evolve_density`] on a planned window, growing it until the excited
/// manifold has emptied and the drive has switched off.
pub fn converged_trajectory(
    params: &SystemParams,
    policy: &PulsePolicy,
    settings: &SolverSettings,
) -> Result<DensityTrajectory> {
    let grid = settings.plan(params, policy)?;
    converged_on(params, policy, settings, grid)
}

/// Like [`converged_trajectory`] but starting from a caller-supplied grid.
pub fn converged_on(
    params: &SystemParams,
    policy: &PulsePolicy,
    settings: &SolverSettings,
    mut grid: TimeGrid,
) -> Result<DensityTrajectory> {
    let peak = policy.peak();
    let mut last = 0.0;
    for attempt in 0..=settings.max_extensions {
        let traj = evolve_density(params, policy, &grid, settings.tolerances())?;
        let residual = traj.final_residual();
        let drive = if peak > 0.0 {
            policy.eval(grid.end).norm() / peak
        } else {
            0.0
        };
        if residual < settings.residual && drive < 1e-6 {
            return Ok(traj);
        }
        last = residual;
        log::debug!(
            "window {} left residual {residual:e}, extending (attempt {attempt})",
            grid.end
        );
        grid = TimeGrid::new(grid.start, grid.end * 1.5, grid.n)?;
    }
    Err(Error::NonConvergence {
        residual: last,
        threshold: settings.residual,
        window: grid.end / 1.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Regime;
    use approx::assert_relative_eq;

    #[test]
    fn undriven_state_is_stationary() {
        let p = Regime::Intermediate.params();
        let pulse = PulsePolicy::SymmetricGaussian { omega0: 0.0, sigma: 1.0, t_c: 5.0 };
        let grid = TimeGrid::new(0.0, 20.0, 101).unwrap();
        let traj = evolve_density(&p, &pulse, &grid, Tolerances::default()).unwrap();
        for k in 0..traj.len() {
            assert_eq!(traj.block(k, 0, 0).re, 1.0);
            assert_eq!(traj.rho22(k), 0.0);
        }
        assert_eq!(traj.emission_probability(), 0.0);
    }

    #[test]
    fn rabi_oscillation_without_cavity() {
        let p = SystemParams::new(0.0, 0.0, 0.0).unwrap();
        let omega = 0.8;
        let pulse = PulsePolicy::Tabulated {
            samples: vec![(0.0, Complex64::new(omega, 0.0)), (20.0, Complex64::new(omega, 0.0))],
        };
        let grid = TimeGrid::new(0.0, 10.0, 201).unwrap();
        let traj = evolve_density(&p, &pulse, &grid, Tolerances::default()).unwrap();
        for k in 0..traj.len() {
            let t = grid.time(k);
            assert!((traj.block(k, 0, 0).re - (omega * t).cos().powi(2)).abs() < 1e-8);
        }
    }

    #[test]
    fn converged_run_meets_residual_and_quadrature_agrees() {
        let p = Regime::Intermediate.params();
        let pulse = PulsePolicy::symmetric_with_area(3.0, 10.0).unwrap();
        let traj = converged_trajectory(&p, &pulse, &SolverSettings::default()).unwrap();
        assert!(traj.final_residual() < 1e-6);
        let last = traj.rho44(traj.len() - 1);
        assert!((traj.emission_probability() - last).abs() < 1e-6);
        assert_relative_eq!(traj.cumulative_emission(traj.grid.end).unwrap(), last);
        assert_eq!(traj.cumulative_emission(0.0).unwrap(), 0.0);
        assert!(traj.cumulative_emission(-1.0).is_err());
    }

    #[test]
    fn pure_probability_equals_emission_without_decay() {
        let p = SystemParams::new(1.0, 1.0, 0.0).unwrap();
        let pulse = PulsePolicy::symmetric_with_area(2.0, 3.0).unwrap();
        let grid = SolverSettings::default().plan(&p, &pulse).unwrap();
        let tol = Tolerances::default();
        let full = evolve_density(&p, &pulse, &grid, tol).unwrap().emission_probability();
        let pure = pure_photon_probability(&p, &pulse, &grid, tol).unwrap();
        assert_eq!(full, pure);
    }

    #[test]
    fn window_extension_gives_up() {
        let p = SystemParams::new(1.0, 0.0, 0.0).unwrap();
        let pulse = PulsePolicy::symmetric_with_area(1.0, 1.0).unwrap();
        let settings = SolverSettings {
            max_extensions: 1,
            ..SolverSettings::default()
        };
        let grid = TimeGrid::new(0.0, 20.0, 200).unwrap();
        assert!(matches!(
            converged_on(&p, &pulse, &settings, grid),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn csv_export_has_twenty_one_columns() {
        let p = Regime::Intermediate.params();
        let pulse = PulsePolicy::symmetric_with_area(1.0, 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 15.0, 31).unwrap();
        let traj = evolve_density(&p, &pulse, &grid, Tolerances::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rho.csv");
        traj.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), 21);
        assert_eq!(lines.count(), 31);
    }
}
