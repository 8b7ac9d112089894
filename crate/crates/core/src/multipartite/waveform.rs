use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::qrt::TwoTimeCorrelation;

const HERMITIAN_TOL: f64 = 1e-10;
const DIAG_TOL: f64 = 1e-8;

/// Pure single-photon waveforms indexed by id, with the overlap cache
/// `gram[a][b] = ∫φ_a(t) φ_b*(t) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformTable {
    grid: Option<TimeGrid>,
    samples: Vec<Vec<Complex64>>,
    gram: Vec<Vec<Complex64>>,
}

impl WaveformTable {
    /// Normalizes every waveform on `grid` and caches the overlaps.
    pub fn new(grid: TimeGrid, waveforms: Vec<Vec<Complex64>>) -> Result<Self> {
        let w = grid.weights();
        let mut samples = Vec::with_capacity(waveforms.len());
        for (id, mut phi) in waveforms.into_iter().enumerate() {
            if phi.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "waveform {id} has {} samples, grid has {}",
                    phi.len(),
                    grid.len()
                )));
            }
            let norm: f64 = phi.iter().zip(&w).map(|(z, w)| z.norm_sqr() * w).sum();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::InvalidParameter(format!("waveform {id} has zero norm")));
            }
            let s = norm.sqrt().recip();
            phi.iter_mut().for_each(|z| *z *= s);
            samples.push(phi);
        }
        let gram = samples
            .iter()
            .map(|a| {
                samples
                    .iter()
                    .map(|b| a.iter().zip(b).zip(&w).map(|((x, y), w)| x * y.conj() * w).sum())
                    .collect()
            })
            .collect();
        Ok(Self {
            grid: Some(grid),
            samples,
            gram,
        })
    }

    /// Table defined only through its overlap matrix.
    pub fn from_gram(gram: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = gram.len();
        for (a, row) in gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter("overlap matrix is not square".into()));
            }
            let d = row[a];
            if d.im.abs() > HERMITIAN_TOL || !(d.re >= -DIAG_TOL && d.re <= 1.0 + DIAG_TOL) {
                return Err(Error::InvalidParameter(format!("overlap diagonal {a} = {d} is not in [0, 1]")));
            }
            for b in 0..n {
                if (row[b] - gram[b][a].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidParameter("overlap matrix is not Hermitian".into()));
                }
            }
        }
        Ok(Self {
            grid: None,
            samples: Vec::new(),
            gram,
        })
    }

    /// `n` perfectly indistinguishable waveforms.
    pub fn identical(n: usize) -> Self {
        Self {
            grid: None,
            samples: Vec::new(),
            gram: vec![vec![Complex64::new(1.0, 0.0); n]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.gram.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gram.is_empty()
    }

    pub fn grid(&self) -> Option<&TimeGrid> {
        self.grid.as_ref()
    }

    pub fn samples(&self, id: usize) -> Option<&[Complex64]> {
        self.samples.get(id).map(|v| v.as_slice())
    }

    pub fn gram(&self) -> &[Vec<Complex64>] {
        &self.gram
    }

    pub fn overlap(&self, a: usize, b: usize) -> Complex64 {
        self.gram[a][b]
    }
}

/// Normalized first-order kernels `K_s(t, t') = G_s(t', t) / ∫G_s(u, u) du`,
/// which replace `φ_s(t) φ_s*(t')` for sources that are not in a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    grid: TimeGrid,
    kernels: Vec<Vec<Complex64>>,
}

impl KernelTable {
    pub fn from_correlations(correlations: &[&TwoTimeCorrelation]) -> Result<Self> {
        let grid = correlations
            .first()
            .map(|c| c.grid)
            .ok_or_else(|| Error::InvalidParameter("no correlations given".into()))?;
        let n = grid.len();
        let mut kernels = Vec::with_capacity(correlations.len());
        for (id, c) in correlations.iter().enumerate() {
            if c.grid != grid {
                return Err(Error::GridMismatch(format!("correlation {id} uses a different grid")));
            }
            let norm = c.trace_integral();
            if !(norm > 0.0) {
                return Err(Error::EmissionZero(norm));
            }
            let mut k = vec![Complex64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in 0..n {
                    k[i * n + j] = c.values[j * n + i] / norm;
                }
            }
            kernels.push(k);
        }
        Ok(Self { grid, kernels })
    }

    /// Rank-one kernels of pure waveforms.
    pub fn from_pure(grid: TimeGrid, waveforms: &[Vec<Complex64>]) -> Result<Self> {
        let n = grid.len();
        let w = grid.weights();
        let mut kernels = Vec::with_capacity(waveforms.len());
        for (id, phi) in waveforms.iter().enumerate() {
            if phi.len() != n {
                return Err(Error::GridMismatch(format!("waveform {id} has {} samples", phi.len())));
            }
            let norm: f64 = phi.iter().zip(&w).map(|(z, w)| z.norm_sqr() * w).sum();
            if !(norm > 0.0) {
                return Err(Error::InvalidParameter(format!("waveform {id} has zero norm")));
            }
            let mut k = vec![Complex64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in 0..n {
                    k[i * n + j] = phi[i] * phi[j].conj() / norm;
                }
            }
            kernels.push(k);
        }
        Ok(Self { grid, kernels })
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn kernel(&self, id: usize) -> &[Complex64] {
        &self.kernels[id]
    }

    /// `∫…∫ K_{s1}(t1,t2) K_{s2}(t2,t3) … K_{sk}(tk,t1)` with trapezoid weights.
    pub fn cycle_integral(&self, sources: &[usize]) -> Complex64 {
        let n = self.grid.len();
        let w = self.grid.weights();
        match sources {
            [] => Complex64::new(1.0, 0.0),
            [s] => {
                let k = &self.kernels[*s];
                (0..n).map(|i| k[i * n + i] * w[i]).sum()
            }
            [a, b] => {
                let (ka, kb) = (&self.kernels[*a], &self.kernels[*b]);
                (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let row: Complex64 = (0..n).map(|j| ka[i * n + j] * kb[j * n + i] * w[j]).sum();
                        row * w[i]
                    })
                    .sum()
            }
            _ => {
                let mut acc = weighted(&self.kernels[sources[0]], &w, n);
                for &s in &sources[1..] {
                    acc = mat_mul(&acc, &weighted(&self.kernels[s], &w, n), n);
                }
                (0..n).map(|i| acc[i * n + i]).sum()
            }
        }
    }
}

/// `K W` with `W = diag(w)`.
fn weighted(k: &[Complex64], w: &[f64], n: usize) -> Vec<Complex64> {
    let mut out = k.to_vec();
    for row in out.chunks_mut(n) {
        for (z, w) in row.iter_mut().zip(w) {
            *z *= w;
        }
    }
    out
}

fn mat_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for k in 0..n {
            let aik = a[i * n + k];
            for (o, bkj) in row.iter_mut().zip(&b[k * n..(k + 1) * n]) {
                *o += aik * bkj;
            }
        }
    });
    out
}
