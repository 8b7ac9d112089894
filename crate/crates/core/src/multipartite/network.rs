use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::scheme::{PostSelectedScheme, SchemeTerm};

pub const MAX_MODES: usize = 8;
const UNITARY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-8;
const NEGLIGIBLE: f64 = 1e-14;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Linear optical network acting on creation operators:
/// `a_in† → Σ_out matrix[out][in] a_out†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub matrix: Vec<Vec<Complex64>>,
}

impl Network {
    pub fn new(matrix: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || n > MAX_MODES {
            return Err(Error::Config(format!("networks need 1..={MAX_MODES} modes, got {n}")));
        }
        if matrix.iter().any(|r| r.len() != n) {
            return Err(Error::Config("network matrix is not square".into()));
        }
        let net = Self { matrix };
        let dev = net.unitarity_deviation();
        if !(dev < UNITARY_TOL) {
            return Err(Error::NonUnitary(dev));
        }
        Ok(net)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect()).collect())
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.len()
    }

    /// Largest entry of `|U†U - 1|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.matrix.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dot: Complex64 = (0..n).map(|k| self.matrix[k][i].conj() * self.matrix[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    /// Network that applies `self` first, then `next`.
    pub fn then(&self, next: &Network) -> Result<Self> {
        let n = self.n_modes();
        if next.n_modes() != n {
            return Err(Error::Config("cannot chain networks of different size".into()));
        }
        let m = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| next.matrix[i][k] * self.matrix[k][j]).sum()).collect())
            .collect();
        Self::new(m)
    }

    fn from_block(n: usize, entries: &[(usize, usize, Complex64)], touched: &[usize]) -> Result<Self> {
        let mut m: Vec<Vec<Complex64>> =
            (0..n).map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect()).collect();
        for &k in touched {
            if k >= n {
                return Err(Error::Config(format!("mode {k} out of range")));
            }
            m[k][k] = c(0.0);
        }
        for &(out, inp, v) in entries {
            m[out][inp] = v;
        }
        Self::new(m)
    }

    /// 50/50 splitter: `a† → (a† - b†)/√2`, `b† → (a† + b†)/√2`.
    pub fn beamsplitter(n: usize, a: usize, b: usize) -> Result<Self> {
        let h = FRAC_1_SQRT_2;
        Self::from_block(n, &[(a, a, c(h)), (b, a, c(-h)), (a, b, c(h)), (b, b, c(h))], &[a, b])
    }

    /// Polarizing splitter between spatial modes with `(H, V)` mode pairs
    /// `a` and `b`: H is transmitted, V changes spatial mode.
    pub fn polarizing_beamsplitter(n: usize, a: (usize, usize), b: (usize, usize)) -> Result<Self> {
        Self::from_block(n, &[(b.1, a.1, c(1.0)), (a.1, b.1, c(1.0))], &[a.1, b.1])
    }

    /// Half-wave plate at 22.5°: `H → (H + V)/√2`, `V → (H - V)/√2`.
    pub fn half_wave_plate(n: usize, h: usize, v: usize) -> Result<Self> {
        let s = FRAC_1_SQRT_2;
        Self::from_block(n, &[(h, h, c(s)), (v, h, c(s)), (h, v, c(s)), (v, v, c(-s))], &[h, v])
    }

    /// Symmetric multiport `U[j][k] = exp(2πi jk/n)/√n`.
    pub fn fourier(n: usize) -> Result<Self> {
        let s = (n as f64).sqrt().recip();
        Self::new(
            (0..n)
                .map(|j| (0..n).map(|k| Complex64::from_polar(s, 2.0 * PI * (j * k) as f64 / n as f64)).collect())
                .collect(),
        )
    }
}

/// One branch of a source: amplitude, atomic excitation and optional photon
/// input mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceBranch {
    pub amplitude: Complex64,
    pub excited: bool,
    pub mode: Option<usize>,
}

/// An atom-photon source. Atom excitations are listed per mode, so `atom`
/// must be below the mode count; `waveform` tags the photon in the scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub atom: usize,
    pub waveform: usize,
    pub branches: Vec<SourceBranch>,
}

impl Source {
    pub fn new(atom: usize, waveform: usize, branches: Vec<SourceBranch>) -> Self {
        Self {
            atom,
            waveform,
            branches,
        }
    }
}

/// Term of the expanded output state before collisions are removed.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTerm {
    pub amplitude: Complex64,
    pub atoms: Vec<u8>,
    /// `(output mode, source index)` per photon.
    pub photons: Vec<(usize, usize)>,
}

impl RawTerm {
    pub fn has_collision(&self) -> bool {
        let mut modes: Vec<usize> = self.photons.iter().map(|p| p.0).collect();
        modes.sort_unstable();
        modes.windows(2).any(|w| w[0] == w[1])
    }
}

fn check_sources(sources: &[Source], n: usize) -> Result<()> {
    if sources.is_empty() {
        return Err(Error::Config("no sources given".into()));
    }
    let mut atoms = vec![false; n];
    for (k, s) in sources.iter().enumerate() {
        if s.atom >= n {
            return Err(Error::Config(format!("source {k}: atom index {} out of range", s.atom)));
        }
        if std::mem::replace(&mut atoms[s.atom], true) {
            return Err(Error::Config(format!("source {k}: atom {} already used", s.atom)));
        }
        if s.branches.is_empty() {
            return Err(Error::Config(format!("source {k} has no branches")));
        }
        if s.branches.iter().any(|b| b.mode.is_some_and(|m| m >= n)) {
            return Err(Error::Config(format!("source {k}: photon mode out of range")));
        }
        let norm: f64 = s.branches.iter().map(|b| b.amplitude.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Config(format!("source {k}: branch weights sum to {norm}, expected 1")));
        }
    }
    Ok(())
}

/// Expands the product of source states through the network, one raw term
/// per choice of branches and output modes.
pub fn expand_network(sources: &[Source], network: &Network) -> Result<Vec<RawTerm>> {
    let n = network.n_modes();
    check_sources(sources, n)?;
    let mut partial = vec![RawTerm {
        amplitude: c(1.0),
        atoms: vec![0; n],
        photons: Vec::new(),
    }];
    for (k, s) in sources.iter().enumerate() {
        let mut next = Vec::new();
        for term in &partial {
            for b in &s.branches {
                let mut base = term.clone();
                base.amplitude *= b.amplitude;
                base.atoms[s.atom] = u8::from(b.excited);
                match b.mode {
                    None => next.push(base),
                    Some(input) => {
                        for out in 0..n {
                            let u = network.matrix[out][input];
                            if u.norm() < NEGLIGIBLE {
                                continue;
                            }
                            let mut t = base.clone();
                            t.amplitude *= u;
                            t.photons.push((out, k));
                            next.push(t);
                        }
                    }
                }
            }
        }
        partial = next;
    }
    Ok(partial)
}

/// Builds the post-selected scheme of `sources` sent through `network` and
/// detected on `clicks`. Terms with two photons in one mode are dropped.
pub fn build_network_scheme(sources: &[Source], network: &Network, clicks: &[usize]) -> Result<PostSelectedScheme> {
    let n = network.n_modes();
    let raw = expand_network(sources, network)?;
    type Key = (Vec<u8>, Vec<Option<usize>>);
    let mut kept: BTreeMap<Key, Complex64> = BTreeMap::new();
    let mut dropped: BTreeMap<(Vec<u8>, Vec<Vec<usize>>), Complex64> = BTreeMap::new();
    let mut collisions = 0usize;
    for t in raw {
        if t.has_collision() {
            collisions += 1;
            let mut occ = vec![Vec::new(); n];
            for &(m, s) in &t.photons {
                occ[m].push(s);
            }
            occ.iter_mut().for_each(|v| v.sort_unstable());
            *dropped.entry((t.atoms, occ)).or_default() += t.amplitude;
        } else {
            let mut occ = vec![None; n];
            for &(m, s) in &t.photons {
                occ[m] = Some(s);
            }
            *kept.entry((t.atoms, occ)).or_default() += t.amplitude;
        }
    }
    if collisions > 0 {
        log::warn!("dropped {collisions} expansion terms with more than one photon in a mode");
    }
    let terms: Vec<SchemeTerm> = kept
        .into_iter()
        .filter(|(_, a)| a.norm() > NEGLIGIBLE)
        .map(|((atoms, occ), amplitude)| SchemeTerm {
            amplitude,
            photons: occ.iter().map(|o| u8::from(o.is_some())).collect(),
            atoms,
            waveforms: occ.iter().flatten().map(|&s| sources[s].waveform).collect(),
        })
        .collect();
    let scheme = PostSelectedScheme {
        n_modes: n,
        terms,
        detected_modes: clicks.to_vec(),
        discarded_norm: dropped.values().map(|a| a.norm_sqr()).sum(),
    };
    scheme.validate()?;
    Ok(scheme)
}

/// Sources, network and click pattern of a heralding setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSetup {
    pub sources: Vec<Source>,
    pub network: Network,
    pub clicks: Vec<usize>,
}

impl NetworkSetup {
    pub fn scheme(&self) -> Result<PostSelectedScheme> {
        build_network_scheme(&self.sources, &self.network, &self.clicks)
    }

    pub fn n_waveforms(&self) -> usize {
        self.sources.iter().map(|s| s.waveform + 1).max().unwrap_or(0)
    }
}

/// Two-source swap. Modes 0/1 are H/V of the first splitter port, 2/3 of the
/// second; each source emits `(H|↑⟩ - V|↓⟩)/√2`. Clicks on both polarizations
/// of the first output port.
pub fn bell() -> NetworkSetup {
    let h = FRAC_1_SQRT_2;
    let source = |k: usize| {
        Source::new(
            k,
            k,
            vec![
                SourceBranch {
                    amplitude: c(h),
                    excited: true,
                    mode: Some(2 * k),
                },
                SourceBranch {
                    amplitude: c(-h),
                    excited: false,
                    mode: Some(2 * k + 1),
                },
            ],
        )
    };
    let network = Network::beamsplitter(4, 0, 2)
        .and_then(|b| b.then(&Network::beamsplitter(4, 1, 3)?))
        .expect("splitter is unitary");
    NetworkSetup {
        sources: vec![source(0), source(1)],
        network,
        clicks: vec![0, 1],
    }
}

/// Three sources `(H|↑⟩ + V|↓⟩)/√2` on spatial modes 0..3 (mode `2k + pol`),
/// two polarizing splitters in a chain and a diagonal-basis H click in every
/// spatial mode.
pub fn ghz() -> NetworkSetup {
    let h = FRAC_1_SQRT_2;
    let n = 6;
    let sources = (0..3)
        .map(|k| {
            Source::new(
                k,
                k,
                vec![
                    SourceBranch {
                        amplitude: c(h),
                        excited: true,
                        mode: Some(2 * k),
                    },
                    SourceBranch {
                        amplitude: c(h),
                        excited: false,
                        mode: Some(2 * k + 1),
                    },
                ],
            )
        })
        .collect();
    let build = || -> Result<Network> {
        let mut net = Network::polarizing_beamsplitter(n, (0, 1), (2, 3))?;
        net = net.then(&Network::polarizing_beamsplitter(n, (2, 3), (4, 5))?)?;
        for k in 0..3 {
            net = net.then(&Network::half_wave_plate(n, 2 * k, 2 * k + 1)?)?;
        }
        Ok(net)
    };
    NetworkSetup {
        sources,
        network: build().expect("GHZ network is unitary"),
        clicks: vec![0, 2, 4],
    }
}

/// `n` sources `√(1-p)|↓,0⟩ + √p|↑,1⟩` feeding a symmetric multiport; one
/// click in output 0 heralds a W state.
pub fn w_state(n: usize, p: f64) -> Result<NetworkSetup> {
    if !(2..=MAX_MODES).contains(&n) {
        return Err(Error::Config(format!("W preset needs 2..={MAX_MODES} sources")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Config(format!("excitation probability {p} must lie in (0, 1)")));
    }
    let sources = (0..n)
        .map(|k| {
            Source::new(
                k,
                k,
                vec![
                    SourceBranch {
                        amplitude: c((1.0 - p).sqrt()),
                        excited: false,
                        mode: None,
                    },
                    SourceBranch {
                        amplitude: c(p.sqrt()),
                        excited: true,
                        mode: Some(k),
                    },
                ],
            )
        })
        .collect();
    Ok(NetworkSetup {
        sources,
        network: Network::fourier(n)?,
        clicks: vec![0],
    })
}
