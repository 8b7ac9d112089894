use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-8;

/// One term `c_m ⊗_n (A_mn†)^s_mn (σ_n†)^t_mn` of the pre-detection state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeTerm {
    /// `[re, im]`.
    #[serde(with = "complex_pair")]
    pub amplitude: Complex64,
    pub photons: Vec<u8>,
    pub atoms: Vec<u8>,
    /// Waveform ids of the occupied photon modes, in ascending mode order.
    pub waveforms: Vec<usize>,
}

impl SchemeTerm {
    pub fn occupied_modes(&self) -> Vec<usize> {
        self.photons
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .map(|(n, _)| n)
            .collect()
    }

    /// Waveform id of the photon in `mode`, if occupied.
    pub fn waveform_in(&self, mode: usize) -> Option<usize> {
        if self.photons.get(mode) != Some(&1) {
            return None;
        }
        let rank = self.photons[..mode].iter().filter(|&&s| s == 1).count();
        self.waveforms.get(rank).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostSelectedScheme {
    pub n_modes: usize,
    pub terms: Vec<SchemeTerm>,
    pub detected_modes: Vec<usize>,
    /// Squared norm of branches removed during construction (multi-photon
    /// collisions); zero for hand-written schemes.
    #[serde(default)]
    pub discarded_norm: f64,
}

impl PostSelectedScheme {
    pub fn new(n_modes: usize, terms: Vec<SchemeTerm>, detected_modes: Vec<usize>) -> Result<Self> {
        let s = Self {
            n_modes,
            terms,
            detected_modes,
            discarded_norm: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("scheme: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_modes == 0 {
            return bad("scheme has no modes".into());
        }
        if self.terms.is_empty() {
            return bad("scheme has no terms".into());
        }
        let mut seen = vec![false; self.n_modes];
        for &l in &self.detected_modes {
            if l >= self.n_modes {
                return bad(format!("detected mode {l} out of range"));
            }
            if std::mem::replace(&mut seen[l], true) {
                return bad(format!("detected mode {l} listed twice"));
            }
        }
        for (m, t) in self.terms.iter().enumerate() {
            if t.photons.len() != self.n_modes || t.atoms.len() != self.n_modes {
                return bad(format!("term {m}: occupation vectors must have length {}", self.n_modes));
            }
            if t.photons.iter().chain(&t.atoms).any(|&v| v > 1) {
                return bad(format!("term {m}: occupations must be 0 or 1"));
            }
            let occupied = t.photons.iter().filter(|&&s| s == 1).count();
            if t.waveforms.len() != occupied {
                return bad(format!(
                    "term {m}: {} waveform ids for {occupied} occupied modes",
                    t.waveforms.len()
                ));
            }
            if !(t.amplitude.re.is_finite() && t.amplitude.im.is_finite()) {
                return bad(format!("term {m}: amplitude is not finite"));
            }
        }
        if !(self.discarded_norm >= 0.0) {
            return bad("discarded_norm must be non-negative".into());
        }
        let total = self.norm_sq() + self.discarded_norm;
        if (total - 1.0).abs() > NORM_TOL {
            return bad(format!("pre-detection state has squared norm {total}, expected 1"));
        }
        Ok(())
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.norm_sqr()).sum()
    }

    fn detected_pattern(&self) -> Vec<u8> {
        let mut p = vec![0u8; self.n_modes];
        for &l in &self.detected_modes {
            p[l] = 1;
        }
        p
    }
}

/// Terms whose photon occupation equals the click pattern exactly.
pub fn surviving_terms(scheme: &PostSelectedScheme) -> Result<Vec<usize>> {
    let pattern = scheme.detected_pattern();
    let k: Vec<usize> = scheme
        .terms
        .iter()
        .enumerate()
        .filter(|(_, t)| t.photons == pattern)
        .map(|(m, _)| m)
        .collect();
    if k.is_empty() {
        return Err(Error::PostSelectionImpossible);
    }
    Ok(k)
}

/// `I_mm' = c_m* c_m' ⟨ψ_m|ψ_m'⟩` over the surviving terms. Atomic states are
/// basis products, so the inner product is 1 for equal patterns and 0 otherwise.
pub fn overlap_matrix(scheme: &PostSelectedScheme, surviving: &[usize]) -> Vec<Vec<Complex64>> {
    surviving
        .iter()
        .map(|&m| {
            let a = &scheme.terms[m];
            surviving
                .iter()
                .map(|&mp| {
                    let b = &scheme.terms[mp];
                    if a.atoms == b.atoms {
                        a.amplitude.conj() * b.amplitude
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect()
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq([z.re, z.im])
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}
