use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::scheme::{overlap_matrix, surviving_terms, PostSelectedScheme, SchemeTerm};
use super::waveform::{KernelTable, WaveformTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub surviving: Vec<usize>,
    /// Time-averaged fidelity normalized by the heralding probability.
    pub fidelity: f64,
    /// `Σ I_mm'`, the squared norm of the ideal post-selected state.
    pub ideal_norm: f64,
    /// Squared norm of the real post-selected state integrated over click times.
    pub herald_norm: f64,
}

/// Time-averaged fidelity for pure waveforms given by their overlaps.
pub fn averaged_fidelity(scheme: &PostSelectedScheme, table: &WaveformTable) -> Result<f64> {
    fidelity_report(scheme, table).map(|r| r.fidelity)
}

pub fn fidelity_report(scheme: &PostSelectedScheme, table: &WaveformTable) -> Result<FidelityReport> {
    let surviving = surviving_terms(scheme)?;
    for &m in &surviving {
        if let Some(&id) = scheme.terms[m].waveforms.iter().find(|&&id| id >= table.len()) {
            return Err(Error::Config(format!("term {m} uses waveform {id}, table has {}", table.len())));
        }
    }
    let terms: Vec<&SchemeTerm> = surviving.iter().map(|&m| &scheme.terms[m]).collect();
    let pair = |a: usize, b: usize| -> Result<Complex64> {
        Ok(scheme
            .detected_modes
            .iter()
            .map(|&n| {
                let (wa, wb) = (terms[a].waveform_in(n).unwrap(), terms[b].waveform_in(n).unwrap());
                table.overlap(wa, wb)
            })
            .product())
    };
    combine(scheme, surviving, pair)
}

/// Time-averaged fidelity with first-order kernels in place of pure
/// waveforms. Waveform ids name sources; every source must emit exactly one
/// detected photon in each surviving term.
pub fn averaged_fidelity_with_kernels(scheme: &PostSelectedScheme, kernels: &KernelTable) -> Result<f64> {
    kernel_fidelity_report(scheme, kernels).map(|r| r.fidelity)
}

pub fn kernel_fidelity_report(scheme: &PostSelectedScheme, kernels: &KernelTable) -> Result<FidelityReport> {
    let surviving = surviving_terms(scheme)?;
    let terms: Vec<&SchemeTerm> = surviving.iter().map(|&m| &scheme.terms[m]).collect();
    let mut sources: Vec<usize> = terms[0].waveforms.clone();
    sources.sort_unstable();
    for (t, &m) in terms.iter().zip(&surviving) {
        let mut s = t.waveforms.clone();
        s.sort_unstable();
        if s != sources || s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config(format!(
                "term {m}: kernels need every source to emit exactly once in each heralded term"
            )));
        }
        if let Some(&id) = s.iter().find(|&&id| id >= kernels.len()) {
            return Err(Error::Config(format!("term {m} uses kernel {id}, table has {}", kernels.len())));
        }
    }
    let modes = &scheme.detected_modes;
    let pair = |a: usize, b: usize| -> Result<Complex64> {
        // Follow mode -> source in term a -> that source's mode in term b.
        let next: Vec<usize> = modes
            .iter()
            .map(|&n| {
                let s = terms[a].waveform_in(n).unwrap();
                let nb = modes.iter().position(|&l| terms[b].waveform_in(l) == Some(s)).unwrap();
                nb
            })
            .collect();
        let mut seen = vec![false; modes.len()];
        let mut value = Complex64::new(1.0, 0.0);
        for start in 0..modes.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                cycle.push(terms[a].waveform_in(modes[k]).unwrap());
                k = next[k];
            }
            value *= kernels.cycle_integral(&cycle);
        }
        Ok(value)
    };
    combine(scheme, surviving, pair)
}

/// `F = Σ I*_{mm'} I_{pp'} T(m', p') / (Σ I · Σ I_{mm'} T(m, m'))` with
/// `T(a, b) = Π_n ∫ φ_an φ_bn*`.
fn combine<F>(scheme: &PostSelectedScheme, surviving: Vec<usize>, pair: F) -> Result<FidelityReport>
where
    F: Fn(usize, usize) -> Result<Complex64>,
{
    let k = surviving.len();
    let i = overlap_matrix(scheme, &surviving);
    let mut t = vec![vec![Complex64::new(0.0, 0.0); k]; k];
    for a in 0..k {
        for b in 0..k {
            t[a][b] = pair(a, b)?;
        }
    }
    let u: Vec<Complex64> = (0..k).map(|mp| (0..k).map(|m| i[m][mp]).sum()).collect();
    let mut numerator = Complex64::new(0.0, 0.0);
    let mut herald = Complex64::new(0.0, 0.0);
    let mut ideal = Complex64::new(0.0, 0.0);
    for a in 0..k {
        for b in 0..k {
            numerator += u[a].conj() * u[b] * t[a][b];
            herald += i[a][b] * t[a][b];
            ideal += i[a][b];
        }
    }
    if !(ideal.re > 0.0) {
        return Err(Error::PostSelectionImpossible);
    }
    if !(herald.re > 0.0) {
        return Err(Error::EmissionZero(herald.re));
    }
    Ok(FidelityReport {
        surviving,
        fidelity: numerator.re / (ideal.re * herald.re),
        ideal_norm: ideal.re,
        herald_norm: herald.re,
    })
}
