//! Two-time field correlation G(t, t') = <a†(t) a(t')> by the regression theorem.
//!
//! For fixed t the vector λ(t, t') = (ρ12, ρ22, ρ32)(t) evolves in t' under
//! dλ/dt' = -i H λ. The non-Hermitian evolution over each grid interval is
//! linear, so it is integrated once as a 3×3 propagator and reused for every
//! outer time.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integration_breakpoints, split_interval, stability_step, TimeGrid};
use crate::lindblad::DensityTrajectory;
use crate::model::hamiltonian::{mat_vec, Mat3, Vec3};
use crate::model::{hamiltonian_with_drive, PulsePolicy, SystemParams};
use crate::ode::{Dopri5, Tolerances};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Interval propagators of dλ/dt' = -i H(t') λ on a grid.
#[derive(Debug, Clone)]
pub struct Propagators {
    pub grid: TimeGrid,
    steps: Vec<Mat3>,
    kappa: f64,
    g: f64,
}

impl Propagators {
    pub fn new(params: &SystemParams, policy: &PulsePolicy, grid: &TimeGrid, tol: Tolerances) -> Result<Self> {
        let breaks = integration_breakpoints(policy);
        let max_step = stability_step(params, policy);
        let minus_i = Complex64::new(0.0, -1.0);
        let f = |t: f64, y: &[Complex64; 9]| {
            let h = hamiltonian_with_drive(params, policy.eval(t));
            let mut out = [ZERO; 9];
            for i in 0..3 {
                for j in 0..3 {
                    out[3 * i + j] =
                        minus_i * (h[i][0] * y[j] + h[i][1] * y[3 + j] + h[i][2] * y[6 + j]);
                }
            }
            out
        };
        let steps = (0..grid.len() - 1)
            .into_par_iter()
            .map(|k| {
                let mut y = [ZERO; 9];
                y[0] = Complex64::new(1.0, 0.0);
                y[4] = y[0];
                y[8] = y[0];
                let mut ode = Dopri5::new(tol).with_max_step(max_step);
                let cuts = split_interval(grid.time(k), grid.time(k + 1), &breaks);
                for w in cuts.windows(2) {
                    ode.advance(&f, w[0], w[1], &mut y)?;
                }
                Ok([[y[0], y[1], y[2]], [y[3], y[4], y[5]], [y[6], y[7], y[8]]])
            })
            .collect::<Result<Vec<Mat3>>>()?;
        Ok(Self {
            grid: *grid,
            steps,
            kappa: params.kappa,
            g: params.g,
        })
    }

    /// Propagator from sample `k` to `k + 1`.
    pub fn step(&self, k: usize) -> &Mat3 {
        &self.steps[k]
    }

    /// Amplitudes of the drive-only pure evolution ψ(t_k) from |u0>.
    pub fn pure_amplitudes(&self) -> Vec<Vec3> {
        let mut psi = [Complex64::new(1.0, 0.0), ZERO, ZERO];
        let mut out = Vec::with_capacity(self.grid.len());
        out.push(psi);
        for m in &self.steps {
            psi = mat_vec(m, &psi);
            out.push(psi);
        }
        out
    }

    /// Visits λ(t_i, t_j) for j = i..N.
    pub fn walk_row<F: FnMut(usize, &Vec3)>(&self, i: usize, start: Vec3, mut visit: F) {
        let mut v = start;
        visit(i, &v);
        for j in i..self.steps.len() {
            v = mat_vec(&self.steps[j], &v);
            visit(j + 1, &v);
        }
    }

    /// dλ2/dt' = -κ λ2 - i g λ3, exact from the equation of motion.
    pub fn lambda2_derivative(&self, v: &Vec3) -> Complex64 {
        -v[1] * self.kappa - Complex64::new(0.0, self.g) * v[2]
    }
}

/// λ(t, t) = (ρ12, ρ22, ρ32)(t).
pub fn initial_lambda(traj: &DensityTrajectory, k: usize) -> Vec3 {
    [traj.block(k, 0, 1), traj.block(k, 1, 1), traj.block(k, 2, 1)]
}

fn check_grid(traj: &DensityTrajectory, prop: &Propagators) -> Result<()> {
    if traj.grid != prop.grid {
        return Err(Error::GridMismatch(
            "trajectory and propagators use different grids".into(),
        ));
    }
    Ok(())
}

/// G on the full grid together with the auxiliary λ data needed by the bound.
#[derive(Debug, Clone)]
pub struct TwoTimeCorrelation {
    pub grid: TimeGrid,
    /// Row-major N×N, `values[i * n + j] = G(t_i, t_j)`.
    pub values: Vec<Complex64>,
    /// Row-major N×N, dλ2(t_i, t_j)/dt_j for j ≥ i; zero below the diagonal.
    pub lambda2_derivative: Vec<Complex64>,
    /// λ1(t_i, t_end).
    pub lambda_final: Vec<Complex64>,
    pub kappa: f64,
}

impl TwoTimeCorrelation {
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n() + j]
    }

    /// G(t, t) = ρ22(t).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, i).re).collect()
    }

    /// ∫G(t,t) dt.
    pub fn trace_integral(&self) -> f64 {
        self.grid.integrate(&self.diagonal())
    }

    /// Writes the grid as little-endian f64 (re, im) pairs, row-major, plus a
    /// JSON sidecar `<path>.json` describing it.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.values.len() * 16);
        for z in &self.values {
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
        std::fs::write(path, bytes)?;
        let meta = serde_json::json!({
            "rows": self.n(),
            "cols": self.n(),
            "t_start": self.grid.start,
            "t_end": self.grid.end,
            "dtype": "complex128",
            "layout": "row-major (re, im) little-endian f64",
            "kappa": self.kappa,
        });
        let mut side = std::fs::File::create(path.with_extension("json"))?;
        side.write_all(serde_json::to_string_pretty(&meta)?.as_bytes())?;
        Ok(())
    }
}

/// Builds G(t_i, t_j) row by row; rows are independent and run in parallel.
pub fn two_time_correlation(
    params: &SystemParams,
    policy: &PulsePolicy,
    traj: &DensityTrajectory,
    tol: Tolerances,
) -> Result<TwoTimeCorrelation> {
    let prop = Propagators::new(params, policy, &traj.grid, tol)?;
    correlation_from(&prop, traj)
}

/// [`two_time_correlation`] with precomputed propagators.
pub fn correlation_from(prop: &Propagators, traj: &DensityTrajectory) -> Result<TwoTimeCorrelation> {
    check_grid(traj, prop)?;
    let n = traj.len();
    let mut values = vec![ZERO; n * n];
    let mut deriv = vec![ZERO; n * n];
    let mut lambda_final = vec![ZERO; n];
    values
        .par_chunks_mut(n)
        .zip(deriv.par_chunks_mut(n))
        .zip(lambda_final.par_iter_mut())
        .enumerate()
        .for_each(|(i, ((row, drow), last))| {
            prop.walk_row(i, initial_lambda(traj, i), |j, v| {
                row[j] = v[1];
                drow[j] = prop.lambda2_derivative(v);
                if j + 1 == n {
                    *last = v[0];
                }
            });
        });
    for i in 0..n {
        for j in 0..i {
            values[i * n + j] = values[j * n + i].conj();
        }
    }
    Ok(TwoTimeCorrelation {
        grid: traj.grid,
        values,
        lambda2_derivative: deriv,
        lambda_final,
        kappa: traj.kappa,
    })
}

/// ∬|G|² dt dt' by the 2-D trapezoid rule.
pub fn norm_squared_double_integral(corr: &TwoTimeCorrelation) -> f64 {
    let w = corr.grid.weights();
    let n = corr.n();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += w[j] * corr.values[i * n + j].norm_sqr();
        }
        total += w[i] * row;
    }
    total
}

/// The integrals entering the swap fidelity and its bound, accumulated row by
/// row without storing the N×N grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationSummary {
    /// ∫G(t,t) dt = ∫ρ22 dt.
    pub trace_integral: f64,
    /// ∬|G(t,t')|² dt dt'.
    pub norm_sq_integral: f64,
    /// ∫ρ22(t)² dt.
    pub diag_sq_integral: f64,
    /// ∫∫_{t'>t} |dλ2/dt'|² dt' dt.
    pub derivative_integral: f64,
    /// ∫|λ1(t, t_end)|² dt.
    pub residual_integral: f64,
}

#[derive(Default, Clone, Copy)]
struct RowSums {
    diag: f64,
    off: f64,
    deriv: f64,
    last: f64,
}

/// Streams every row of the correlation grid into a [`CorrelationSummary`].
/// Row partial sums are combined in index order, so the result does not
/// depend on scheduling.
pub fn summarize(prop: &Propagators, traj: &DensityTrajectory) -> Result<CorrelationSummary> {
    check_grid(traj, prop)?;
    let grid = traj.grid;
    let n = grid.len();
    let w = grid.weights();
    let rows: Vec<RowSums> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = RowSums::default();
            prop.walk_row(i, initial_lambda(traj, i), |j, v| {
                let g2 = v[1].norm_sqr();
                if j == i {
                    s.diag = g2;
                } else {
                    s.off += w[j] * g2;
                }
                s.deriv += grid.tail_weight(i, j) * prop.lambda2_derivative(v).norm_sqr();
                if j + 1 == n {
                    s.last = v[0].norm_sqr();
                }
            });
            s
        })
        .collect();
    let mut out = CorrelationSummary::default();
    for (i, s) in rows.iter().enumerate() {
        out.trace_integral += w[i] * traj.rho22(i);
        out.norm_sq_integral += w[i] * (w[i] * s.diag + 2.0 * s.off);
        out.diag_sq_integral += w[i] * s.diag;
        out.derivative_integral += w[i] * s.deriv;
        out.residual_integral += w[i] * s.last;
    }
    Ok(out)
}

impl CorrelationSummary {
    /// Same integrals from a stored correlation grid.
    pub fn from_correlation(corr: &TwoTimeCorrelation) -> Self {
        let grid = corr.grid;
        let n = corr.n();
        let w = grid.weights();
        let mut out = CorrelationSummary::default();
        for i in 0..n {
            let d = corr.get(i, i).re;
            let mut off = 0.0;
            let mut deriv = 0.0;
            for j in i..n {
                if j > i {
                    off += w[j] * corr.get(i, j).norm_sqr();
                }
                deriv += grid.tail_weight(i, j) * corr.lambda2_derivative[i * n + j].norm_sqr();
            }
            out.trace_integral += w[i] * d;
            out.norm_sq_integral += w[i] * (w[i] * corr.get(i, i).norm_sqr() + 2.0 * off);
            out.diag_sq_integral += w[i] * corr.get(i, i).norm_sqr();
            out.derivative_integral += w[i] * deriv;
            out.residual_integral += w[i] * corr.lambda_final[i].norm_sqr();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{converged_trajectory, evolve_density, SolverSettings};
    use crate::model::Regime;
    use approx::assert_relative_eq;

    fn setup(params: SystemParams, area: f64, sigma: f64) -> (PulsePolicy, DensityTrajectory, TwoTimeCorrelation) {
        let pulse = PulsePolicy::symmetric_with_area(area, sigma).unwrap();
        let settings = SolverSettings { grid_points: Some(300), ..SolverSettings::default() };
        let traj = converged_trajectory(&params, &pulse, &settings).unwrap();
        let corr = two_time_correlation(&params, &pulse, &traj, Tolerances::default()).unwrap();
        (pulse, traj, corr)
    }

    #[test]
    fn diagonal_is_population() {
        let (_, traj, corr) = setup(Regime::Intermediate.params(), 2.0, 2.0);
        for k in 0..traj.len() {
            assert_eq!(corr.get(k, k), traj.block(k, 1, 1));
        }
    }

    #[test]
    fn conjugate_symmetry_is_exact() {
        let (_, _, corr) = setup(Regime::Purcell.params(), 1.0, 0.5);
        let n = corr.n();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(corr.get(i, j), corr.get(j, i).conj());
            }
        }
    }

    #[test]
    fn undriven_correlation_vanishes() {
        let p = Regime::Intermediate.params();
        let pulse = PulsePolicy::SymmetricGaussian { omega0: 0.0, sigma: 1.0, t_c: 5.0 };
        let grid = TimeGrid::new(0.0, 20.0, 50).unwrap();
        let traj = evolve_density(&p, &pulse, &grid, Tolerances::default()).unwrap();
        let corr = two_time_correlation(&p, &pulse, &traj, Tolerances::default()).unwrap();
        assert!(corr.values.iter().all(|z| *z == ZERO));
        assert_eq!(norm_squared_double_integral(&corr), 0.0);
    }

    #[test]
    fn streaming_summary_matches_stored_grid() {
        let p = Regime::Strong.params();
        let (pulse, traj, corr) = setup(p, 3.0, 4.0);
        let prop = Propagators::new(&p, &pulse, &traj.grid, Tolerances::default()).unwrap();
        let a = summarize(&prop, &traj).unwrap();
        let b = CorrelationSummary::from_correlation(&corr);
        assert_relative_eq!(a.norm_sq_integral, b.norm_sq_integral, max_relative = 1e-12);
        assert_relative_eq!(a.norm_sq_integral, norm_squared_double_integral(&corr), max_relative = 1e-12);
        assert_relative_eq!(a.derivative_integral, b.derivative_integral, max_relative = 1e-12);
        assert_relative_eq!(a.residual_integral, b.residual_integral, max_relative = 1e-12);
        assert_relative_eq!(a.diag_sq_integral, b.diag_sq_integral, max_relative = 1e-12);
        assert_relative_eq!(a.trace_integral, corr.trace_integral(), max_relative = 1e-12);
    }

    #[test]
    fn cauchy_schwarz_holds_on_grid() {
        let (_, _, corr) = setup(Regime::LossyAtom.params(), 1.5, 3.0);
        let tr = corr.trace_integral();
        assert!(norm_squared_double_integral(&corr) <= tr * tr * (1.0 + 1e-12));
    }

    #[test]
    fn pure_amplitudes_match_pure_density() {
        let p = Regime::Intermediate.params();
        let pulse = PulsePolicy::symmetric_with_area(2.0, 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 30.0, 200).unwrap();
        let pure = crate::lindblad::evolve_pure(&p, &pulse, &grid, Tolerances::default()).unwrap();
        let prop = Propagators::new(&p, &pulse, &grid, Tolerances::default()).unwrap();
        for (k, psi) in prop.pure_amplitudes().iter().enumerate() {
            assert!((psi[1].norm_sqr() - pure.rho22(k)).abs() < 1e-8);
        }
    }

    #[test]
    fn dump_writes_grid_and_sidecar() {
        let (_, _, corr) = setup(Regime::Intermediate.params(), 1.0, 1.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.bin");
        corr.dump(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), corr.n() * corr.n() * 16);
        let re = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
        assert_eq!(re, corr.get(0, 1).re);
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap()).unwrap();
        assert_eq!(meta["rows"], corr.n());
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let p = Regime::Intermediate.params();
        let pulse = PulsePolicy::symmetric_with_area(1.0, 1.0).unwrap();
        let g1 = TimeGrid::new(0.0, 20.0, 50).unwrap();
        let g2 = TimeGrid::new(0.0, 20.0, 60).unwrap();
        let traj = evolve_density(&p, &pulse, &g1, Tolerances::default()).unwrap();
        let prop = Propagators::new(&p, &pulse, &g2, Tolerances::default()).unwrap();
        assert!(matches!(summarize(&prop, &traj), Err(Error::GridMismatch(_))));
    }
}
