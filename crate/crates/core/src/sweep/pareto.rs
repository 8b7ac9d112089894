use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::SolverSettings;
use crate::model::{PulsePolicy, SystemParams};
use crate::pipeline::swap_identical;

use super::tradeoff::{SigmaRange, Spacing};

pub const BIN_WIDTH: f64 = 0.01;
pub const BIN_COUNT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Symmetric,
    /// σ1 > σ2: slow rise, fast fall.
    FastFall,
    /// σ1 < σ2: fast rise, slow fall.
    FastRise,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Symmetric => "symmetric",
            Family::FastFall => "fast_fall",
            Family::FastRise => "fast_rise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub area: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub p_ex: f64,
    pub fidelity: f64,
    pub family: Family,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierEntry {
    pub bin: usize,
    pub fidelity: f64,
    pub p_ex: f64,
    /// Index into [`ParetoScan::samples`].
    pub sample: usize,
}

/// Best fidelity per emission-probability bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub bins: Vec<Option<FrontierEntry>>,
}

impl Frontier {
    pub fn from_samples<'a, I>(samples: I) -> Self
    where
        I: IntoIterator<Item = (usize, &'a ScanSample)>,
    {
        let mut bins: Vec<Option<FrontierEntry>> = vec![None; BIN_COUNT];
        for (idx, s) in samples {
            if !(s.p_ex.is_finite() && s.fidelity.is_finite()) {
                continue;
            }
            let b = bin_of(s.p_ex);
            let better = match &bins[b] {
                None => true,
                Some(e) => s.fidelity > e.fidelity,
            };
            if better {
                bins[b] = Some(FrontierEntry {
                    bin: b,
                    fidelity: s.fidelity,
                    p_ex: s.p_ex,
                    sample: idx,
                });
            }
        }
        Self { bins }
    }

    pub fn get(&self, bin: usize) -> Option<&FrontierEntry> {
        self.bins.get(bin).and_then(|e| e.as_ref())
    }
}

pub fn bin_of(p_ex: f64) -> usize {
    ((p_ex / BIN_WIDTH).floor().max(0.0) as usize).min(BIN_COUNT - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoScan {
    pub samples: Vec<ScanSample>,
    pub failures: usize,
    pub symmetric: Frontier,
    pub fast_fall: Frontier,
    pub fast_rise: Frontier,
    pub combined: Frontier,
}

/// Largest per-bin advantage of one family over another.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinGain {
    pub bin: usize,
    pub gain: f64,
    pub sample: usize,
}

impl ParetoScan {
    pub fn frontier(&self, family: Family) -> &Frontier {
        match family {
            Family::Symmetric => &self.symmetric,
            Family::FastFall => &self.fast_fall,
            Family::FastRise => &self.fast_rise,
        }
    }

    /// Per-bin `F(family) - F(symmetric)` over bins where both have samples.
    pub fn gains(&self, family: Family) -> Vec<BinGain> {
        let other = self.frontier(family);
        (0..BIN_COUNT)
            .filter_map(|b| match (other.get(b), self.symmetric.get(b)) {
                (Some(a), Some(s)) => Some(BinGain {
                    bin: b,
                    gain: a.fidelity - s.fidelity,
                    sample: a.sample,
                }),
                _ => None,
            })
            .collect()
    }

    /// Median σ2/σ1 of the frontier samples that beat the symmetric family.
    pub fn median_ratio_of_improvements(&self, family: Family) -> Option<f64> {
        let mut ratios: Vec<f64> = self
            .gains(family)
            .iter()
            .filter(|g| g.gain > 0.0)
            .map(|g| {
                let s = &self.samples[g.sample];
                s.sigma2 / s.sigma1
            })
            .collect();
        if ratios.is_empty() {
            return None;
        }
        ratios.sort_by(|a, b| a.total_cmp(b));
        let m = ratios.len();
        Some(if m % 2 == 1 {
            ratios[m / 2]
        } else {
            0.5 * (ratios[m / 2 - 1] + ratios[m / 2])
        })
    }
}

/// Scan layout: areas, rising widths, fall/rise ratios, symmetric density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPlan {
    pub areas: Vec<f64>,
    pub sigma1: SigmaRange,
    pub ratio: SigmaRange,
    pub symmetric: SigmaRange,
}

impl ScanPlan {
    pub fn new(areas: Vec<f64>, sigma1: SigmaRange, ratio: SigmaRange, symmetric: SigmaRange) -> Result<Self> {
        if areas.is_empty() {
            return Err(Error::InvalidParameter("no pulse areas given".into()));
        }
        if ratio.hi > 1.0 {
            return Err(Error::InvalidParameter("width ratios must not exceed 1".into()));
        }
        Ok(Self {
            areas,
            sigma1,
            ratio,
            symmetric,
        })
    }

    /// Widths `σ1 ∈ [0.01, 20]`, ratios `[0.01, 1]`, `n × n` log grid.
    pub fn standard(areas: Vec<f64>, n: usize, symmetric_per_decade: f64) -> Result<Self> {
        Self::new(
            areas,
            SigmaRange::new(0.01, 20.0, n, Spacing::Log)?,
            SigmaRange::new(0.01, 1.0, n, Spacing::Log)?,
            SigmaRange::log_density(0.01, 20.0, symmetric_per_decade)?,
        )
    }

    fn jobs(&self) -> Vec<(f64, f64, f64, Family)> {
        let mut jobs = Vec::new();
        for &area in &self.areas {
            for s in self.symmetric.values() {
                jobs.push((area, s, s, Family::Symmetric));
            }
            for s1 in self.sigma1.values() {
                for r in self.ratio.values() {
                    jobs.push((area, s1, r * s1, Family::FastFall));
                }
            }
            for s1 in self.sigma1.values() {
                for r in self.ratio.values() {
                    jobs.push((area, r * s1, s1, Family::FastRise));
                }
            }
        }
        jobs
    }
}

/// Evaluates symmetric and both asymmetric families and bins the frontiers.
pub fn run_asymmetric_scan(params: &SystemParams, plan: &ScanPlan, settings: &SolverSettings) -> Result<ParetoScan> {
    params.validate()?;
    let jobs = plan.jobs();
    let results: Vec<Option<ScanSample>> = jobs
        .par_iter()
        .map(|&(area, sigma1, sigma2, family)| {
            let pulse = match family {
                Family::Symmetric => PulsePolicy::symmetric_with_area(area, sigma1),
                _ => PulsePolicy::asymmetric_with_area(area, sigma1, sigma2),
            };
            let outcome = pulse.and_then(|p| swap_identical(params, &p, settings));
            match outcome {
                Ok(r) => Some(ScanSample {
                    area,
                    sigma1,
                    sigma2,
                    p_ex: r.p_ex(),
                    fidelity: r.fidelity(),
                    family,
                }),
                Err(e) => {
                    log::warn!("scan point S={area} sigma1={sigma1} sigma2={sigma2}: {e}");
                    None
                }
            }
        })
        .collect();
    let failures = results.iter().filter(|r| r.is_none()).count();
    let samples: Vec<ScanSample> = results.into_iter().flatten().collect();
    let of = |f: Family| Frontier::from_samples(samples.iter().enumerate().filter(|(_, s)| s.family == f));
    Ok(ParetoScan {
        symmetric: of(Family::Symmetric),
        fast_fall: of(Family::FastFall),
        fast_rise: of(Family::FastRise),
        combined: Frontier::from_samples(samples.iter().enumerate()),
        samples,
        failures,
    })
}
