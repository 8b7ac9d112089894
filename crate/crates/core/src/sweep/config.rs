use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::SolverSettings;
use crate::model::{PulsePolicy, Regime, SystemParams};

use super::tradeoff::{SigmaRange, Spacing};

/// Pulse description as written in config files. Either `omega0` or `area`
/// fixes the amplitude; `t_c` defaults to five times the largest width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub shape: String,
    #[serde(default)]
    pub omega0: Option<f64>,
    #[serde(default)]
    pub area: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub sigma1: Option<f64>,
    #[serde(default)]
    pub sigma2: Option<f64>,
    #[serde(default)]
    pub t_c: Option<f64>,
    #[serde(default)]
    pub samples: Option<Vec<(f64, Complex64)>>,
}

impl PulseConfig {
    pub fn to_policy(&self) -> Result<PulsePolicy> {
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::Config(format!("pulse.{name} is required for shape '{}'", self.shape)))
        };
        let amplitude = |width: f64| match (self.omega0, self.area) {
            (Some(o), None) => Ok(o),
            (None, Some(s)) => Ok(s / width),
            (Some(_), Some(_)) => Err(Error::Config("give either pulse.omega0 or pulse.area, not both".into())),
            (None, None) => Err(Error::Config("pulse.omega0 or pulse.area is required".into())),
        };
        let policy = match self.shape.as_str() {
            "symmetric_gaussian" | "symmetric" | "gaussian" => {
                let sigma = need("sigma", self.sigma)?;
                PulsePolicy::SymmetricGaussian {
                    omega0: amplitude(sigma)?,
                    sigma,
                    t_c: self.t_c.unwrap_or(5.0 * sigma),
                }
            }
            "asymmetric_gaussian" | "asymmetric" => {
                let sigma1 = need("sigma1", self.sigma1)?;
                let sigma2 = need("sigma2", self.sigma2)?;
                PulsePolicy::AsymmetricGaussian {
                    omega0: amplitude(sigma1)?,
                    sigma1,
                    sigma2,
                    t_c: self.t_c.unwrap_or(5.0 * sigma1.max(sigma2)),
                }
            }
            "tabulated" => {
                let samples = self
                    .samples
                    .clone()
                    .ok_or_else(|| Error::Config("pulse.samples is required for shape 'tabulated'".into()))?;
                let base = PulsePolicy::Tabulated { samples };
                base.validate()?;
                match (self.omega0, self.area) {
                    (None, None) => base,
                    (None, Some(s)) => base.with_area(s),
                    _ => return Err(Error::Config("tabulated pulses accept only pulse.area".into())),
                }
            }
            other => return Err(Error::Config(format!("unknown pulse shape '{other}'"))),
        };
        policy.validate()?;
        Ok(policy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_areas")]
    pub areas: Vec<f64>,
    #[serde(default = "default_sigma_min")]
    pub sigma_min: f64,
    #[serde(default = "default_sigma_max")]
    pub sigma_max: f64,
    /// Total samples; derived from `points_per_decade` when absent.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default = "default_per_decade")]
    pub points_per_decade: f64,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            areas: default_areas(),
            sigma_min: default_sigma_min(),
            sigma_max: default_sigma_max(),
            count: None,
            points_per_decade: default_per_decade(),
            spacing: Spacing::Log,
        }
    }
}

impl SweepSection {
    pub fn range(&self) -> Result<SigmaRange> {
        let count = match self.count {
            Some(c) => c,
            None => SigmaRange::count_for_density(self.sigma_min, self.sigma_max, self.points_per_decade),
        };
        SigmaRange::new(self.sigma_min, self.sigma_max, count, self.spacing)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(default = "default_scan_areas")]
    pub areas: Vec<f64>,
    #[serde(default = "default_sigma_min")]
    pub sigma1_min: f64,
    #[serde(default = "default_sigma1_max")]
    pub sigma1_max: f64,
    #[serde(default = "default_scan_count")]
    pub sigma1_count: usize,
    #[serde(default = "default_sigma_min")]
    pub ratio_min: f64,
    #[serde(default = "default_ratio_max")]
    pub ratio_max: f64,
    #[serde(default = "default_scan_count")]
    pub ratio_count: usize,
    /// Density of the symmetric reference family over `[sigma1_min, sigma1_max]`.
    #[serde(default = "default_per_decade")]
    pub symmetric_points_per_decade: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            areas: default_scan_areas(),
            sigma1_min: default_sigma_min(),
            sigma1_max: default_sigma1_max(),
            sigma1_count: default_scan_count(),
            ratio_min: default_sigma_min(),
            ratio_max: default_ratio_max(),
            ratio_count: default_scan_count(),
            symmetric_points_per_decade: default_per_decade(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSection {
    #[serde(default = "default_bound_areas")]
    pub areas: Vec<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for BoundSection {
    fn default() -> Self {
        Self {
            areas: default_bound_areas(),
            threshold: default_threshold(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_tol")]
    pub rtol: f64,
    #[serde(default = "default_tol")]
    pub atol: f64,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default = "default_residual")]
    pub residual: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            rtol: default_tol(),
            atol: default_tol(),
            grid_points: None,
            residual: default_residual(),
        }
    }
}

/// Top-level JSON configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub label: Option<String>,
    /// Reference regime letter `a`–`e`; explicit rates below override it.
    #[serde(default)]
    pub regime: Option<Regime>,
    #[serde(default)]
    pub g: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub gamma_u: Option<f64>,
    #[serde(default)]
    pub gamma_g: Option<f64>,
    #[serde(default)]
    pub delta_u: Option<f64>,
    #[serde(default)]
    pub delta_e: Option<f64>,
    #[serde(default)]
    pub pulse: Option<PulseConfig>,
    /// Second source for `single`; identical sources when absent.
    #[serde(default)]
    pub pulse2: Option<PulseConfig>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub bound: BoundSection,
    #[serde(default)]
    pub solver: SolverSection,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn for_regime(regime: Regime) -> Self {
        Self {
            label: None,
            regime: Some(regime),
            g: None,
            kappa: None,
            gamma_u: None,
            gamma_g: None,
            delta_u: None,
            delta_e: None,
            pulse: None,
            pulse2: None,
            sweep: SweepSection::default(),
            scan: ScanSection::default(),
            bound: BoundSection::default(),
            solver: SolverSection::default(),
        }
    }

    pub fn params(&self) -> Result<SystemParams> {
        let base = self.regime.map(Regime::params);
        let pick = |name: &str, v: Option<f64>, from: Option<f64>| {
            v.or(from)
                .ok_or_else(|| Error::Config(format!("'{name}' is required when no regime is given")))
        };
        let params = SystemParams {
            g: pick("g", self.g, base.map(|b| b.g))?,
            kappa: pick("kappa", self.kappa, base.map(|b| b.kappa))?,
            gamma_u: pick("gamma_u", self.gamma_u, base.map(|b| b.gamma_u))?,
            gamma_g: self.gamma_g.unwrap_or(0.0),
            delta_u: self.delta_u.unwrap_or(0.0),
            delta_e: self.delta_e.unwrap_or(0.0),
        };
        params.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(params)
    }

    pub fn label(&self) -> String {
        match (&self.label, self.regime) {
            (Some(l), _) => l.clone(),
            (None, Some(r)) => r.label().to_string(),
            (None, None) => "custom".to_string(),
        }
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            rtol: self.solver.rtol,
            atol: self.solver.atol,
            grid_points: self.solver.grid_points,
            residual: self.solver.residual,
            ..SolverSettings::default()
        }
    }

    pub fn pulse(&self) -> Result<PulsePolicy> {
        self.pulse
            .as_ref()
            .ok_or_else(|| Error::Config("a 'pulse' section is required".into()))?
            .to_policy()
    }

    /// Checks every section for values the harness cannot run with.
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive")))
            }
        };
        for a in self.sweep.areas.iter().chain(&self.scan.areas).chain(&self.bound.areas) {
            positive("pulse area", *a)?;
        }
        self.sweep.range().map_err(|e| Error::Config(e.to_string()))?;
        positive("scan.sigma1_min", self.scan.sigma1_min)?;
        positive("scan.ratio_min", self.scan.ratio_min)?;
        if self.scan.ratio_max > 1.0 || self.scan.ratio_min > self.scan.ratio_max {
            return Err(Error::Config("scan ratios must satisfy 0 < ratio_min <= ratio_max <= 1".into()));
        }
        if !(self.bound.threshold > 0.0 && self.bound.threshold < 1.0) {
            return Err(Error::Config("bound.threshold must lie in (0, 1)".into()));
        }
        positive("solver.rtol", self.solver.rtol)?;
        positive("solver.atol", self.solver.atol)?;
        if let Some(n) = self.solver.grid_points {
            if n < 3 {
                return Err(Error::Config("solver.grid_points must be at least 3".into()));
            }
        }
        Ok(())
    }
}

fn default_areas() -> Vec<f64> {
    vec![0.3, 0.5, 0.7, 0.9, 1.0, 1.5, 2.0, 3.0, 5.0]
}

fn default_scan_areas() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 5.0]
}

fn default_bound_areas() -> Vec<f64> {
    vec![0.3, 0.5, 0.7, 0.9, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 40.0]
}

fn default_sigma_min() -> f64 {
    0.01
}

fn default_sigma_max() -> f64 {
    50.0
}

fn default_sigma1_max() -> f64 {
    20.0
}

fn default_ratio_max() -> f64 {
    1.0
}

fn default_scan_count() -> usize {
    20
}

fn default_per_decade() -> f64 {
    60.0
}

fn default_threshold() -> f64 {
    0.97
}

fn default_tol() -> f64 {
    1e-9
}

fn default_residual() -> f64 {
    1e-6
}
