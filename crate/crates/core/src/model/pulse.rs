use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pump waveform Ω(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PulsePolicy {
    SymmetricGaussian {
        omega0: f64,
        sigma: f64,
        t_c: f64,
    },
    /// Gaussian with rising width `sigma1` and falling width `sigma2`. The
    /// peak is rescaled to `2 omega0 / (1 + sigma2 / sigma1)` so the area
    /// stays `omega0 sigma1`.
    AsymmetricGaussian {
        omega0: f64,
        sigma1: f64,
        sigma2: f64,
        t_c: f64,
    },
    /// Samples `(t, Ω)` joined by straight lines; zero outside the range.
    Tabulated { samples: Vec<(f64, Complex64)> },
}

impl PulsePolicy {
    /// Symmetric Gaussian of area `area` centred at five widths.
    pub fn symmetric_with_area(area: f64, sigma: f64) -> Result<Self> {
        let policy = PulsePolicy::SymmetricGaussian {
            omega0: area / sigma,
            sigma,
            t_c: 5.0 * sigma,
        };
        policy.validate()?;
        Ok(policy)
    }

    /// Asymmetric Gaussian of area `area`, centred at five times the larger width.
    pub fn asymmetric_with_area(area: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        let policy = PulsePolicy::AsymmetricGaussian {
            omega0: area / sigma1,
            sigma1,
            sigma2,
            t_c: 5.0 * sigma1.max(sigma2),
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite")))
            }
        };
        match self {
            PulsePolicy::SymmetricGaussian { omega0, sigma, t_c } => {
                finite("omega0", *omega0)?;
                positive("sigma", *sigma)?;
                finite("t_c", *t_c)
            }
            PulsePolicy::AsymmetricGaussian {
                omega0,
                sigma1,
                sigma2,
                t_c,
            } => {
                finite("omega0", *omega0)?;
                positive("sigma1", *sigma1)?;
                positive("sigma2", *sigma2)?;
                finite("t_c", *t_c)
            }
            PulsePolicy::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::InvalidParameter(
                        "tabulated pulse needs at least two samples".into(),
                    ));
                }
                for (t, w) in samples {
                    if !t.is_finite() || !w.re.is_finite() || !w.im.is_finite() {
                        return Err(Error::InvalidParameter(
                            "tabulated pulse samples must be finite".into(),
                        ));
                    }
                }
                if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::InvalidParameter(
                        "tabulated pulse times must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Ω(t).
    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            PulsePolicy::SymmetricGaussian { omega0, sigma, t_c } => {
                let x = (t - t_c) / sigma;
                Complex64::new(omega0 * (-0.5 * x * x).exp(), 0.0)
            }
            PulsePolicy::AsymmetricGaussian {
                omega0,
                sigma1,
                sigma2,
                t_c,
            } => {
                let peak = asymmetric_peak(*omega0, *sigma1, *sigma2);
                let width = if t <= *t_c { sigma1 } else { sigma2 };
                let x = (t - t_c) / width;
                Complex64::new(peak * (-0.5 * x * x).exp(), 0.0)
            }
            PulsePolicy::Tabulated { samples } => interpolate(samples, t),
        }
    }

    /// dΩ/dt, one-sided at branch points and sample knots.
    pub fn derivative(&self, t: f64) -> Complex64 {
        match self {
            PulsePolicy::SymmetricGaussian { sigma, t_c, .. } => {
                self.eval(t) * (-(t - t_c) / (sigma * sigma))
            }
            PulsePolicy::AsymmetricGaussian {
                sigma1, sigma2, t_c, ..
            } => {
                let width = if t <= *t_c { sigma1 } else { sigma2 };
                self.eval(t) * (-(t - t_c) / (width * width))
            }
            PulsePolicy::Tabulated { samples } => {
                let first = samples[0].0;
                let last = samples[samples.len() - 1].0;
                if t < first || t > last {
                    return Complex64::new(0.0, 0.0);
                }
                let k = segment(samples, t);
                let (t0, w0) = samples[k];
                let (t1, w1) = samples[k + 1];
                (w1 - w0) / (t1 - t0)
            }
        }
    }

    /// S = (1/√2π) ∫Ω dt. Tabulated pulses use the trapezoid rule on |Ω|.
    pub fn area(&self) -> f64 {
        match self {
            PulsePolicy::SymmetricGaussian { omega0, sigma, .. } => omega0 * sigma,
            PulsePolicy::AsymmetricGaussian {
                omega0,
                sigma1,
                sigma2,
                ..
            } => asymmetric_peak(*omega0, *sigma1, *sigma2) * 0.5 * (sigma1 + sigma2),
            PulsePolicy::Tabulated { samples } => {
                let integral: f64 = samples
                    .windows(2)
                    .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1.norm() + w[1].1.norm()))
                    .sum();
                integral / (2.0 * PI).sqrt()
            }
        }
    }

    /// Largest |Ω(t)|.
    pub fn peak(&self) -> f64 {
        match self {
            PulsePolicy::SymmetricGaussian { omega0, .. } => omega0.abs(),
            PulsePolicy::AsymmetricGaussian {
                omega0,
                sigma1,
                sigma2,
                ..
            } => asymmetric_peak(*omega0, *sigma1, *sigma2).abs(),
            PulsePolicy::Tabulated { samples } => {
                samples.iter().map(|(_, w)| w.norm()).fold(0.0, f64::max)
            }
        }
    }

    /// Time of the pulse maximum (or last sample for tabulated pulses).
    pub fn center(&self) -> f64 {
        match self {
            PulsePolicy::SymmetricGaussian { t_c, .. } => *t_c,
            PulsePolicy::AsymmetricGaussian { t_c, .. } => *t_c,
            PulsePolicy::Tabulated { samples } => samples[samples.len() - 1].0,
        }
    }

    /// Width of the trailing edge.
    pub fn fall_width(&self) -> f64 {
        match self {
            PulsePolicy::SymmetricGaussian { sigma, .. } => *sigma,
            PulsePolicy::AsymmetricGaussian { sigma2, .. } => *sigma2,
            PulsePolicy::Tabulated { .. } => 0.0,
        }
    }

    /// Largest width parameter; zero for tabulated pulses.
    pub fn max_width(&self) -> f64 {
        match self {
            PulsePolicy::SymmetricGaussian { sigma, .. } => *sigma,
            PulsePolicy::AsymmetricGaussian { sigma1, sigma2, .. } => sigma1.max(*sigma2),
            PulsePolicy::Tabulated { .. } => 0.0,
        }
    }

    /// Times where Ω has a kink; the integrator stops on them.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PulsePolicy::SymmetricGaussian { .. } => Vec::new(),
            PulsePolicy::AsymmetricGaussian { t_c, .. } => vec![*t_c],
            PulsePolicy::Tabulated { samples } => samples.iter().map(|(t, _)| *t).collect(),
        }
    }

    /// Same pulse with the area rescaled.
    pub fn with_area(&self, area: f64) -> Self {
        let current = self.area();
        let scale = if current == 0.0 { 0.0 } else { area / current };
        match self {
            PulsePolicy::SymmetricGaussian { omega0, sigma, t_c } => PulsePolicy::SymmetricGaussian {
                omega0: omega0 * scale,
                sigma: *sigma,
                t_c: *t_c,
            },
            PulsePolicy::AsymmetricGaussian {
                omega0,
                sigma1,
                sigma2,
                t_c,
            } => PulsePolicy::AsymmetricGaussian {
                omega0: omega0 * scale,
                sigma1: *sigma1,
                sigma2: *sigma2,
                t_c: *t_c,
            },
            PulsePolicy::Tabulated { samples } => PulsePolicy::Tabulated {
                samples: samples.iter().map(|(t, w)| (*t, w * scale)).collect(),
            },
        }
    }

    /// Same pulse delayed by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        match self {
            PulsePolicy::SymmetricGaussian { omega0, sigma, t_c } => PulsePolicy::SymmetricGaussian {
                omega0: *omega0,
                sigma: *sigma,
                t_c: t_c + dt,
            },
            PulsePolicy::AsymmetricGaussian {
                omega0,
                sigma1,
                sigma2,
                t_c,
            } => PulsePolicy::AsymmetricGaussian {
                omega0: *omega0,
                sigma1: *sigma1,
                sigma2: *sigma2,
                t_c: t_c + dt,
            },
            PulsePolicy::Tabulated { samples } => PulsePolicy::Tabulated {
                samples: samples.iter().map(|(t, w)| (t + dt, *w)).collect(),
            },
        }
    }
}

fn asymmetric_peak(omega0: f64, sigma1: f64, sigma2: f64) -> f64 {
    2.0 * omega0 / (1.0 + sigma2 / sigma1)
}

fn segment(samples: &[(f64, Complex64)], t: f64) -> usize {
    let idx = samples.partition_point(|(ts, _)| *ts <= t);
    idx.clamp(1, samples.len() - 1) - 1
}

fn interpolate(samples: &[(f64, Complex64)], t: f64) -> Complex64 {
    let first = samples[0].0;
    let last = samples[samples.len() - 1].0;
    if t < first || t > last {
        return Complex64::new(0.0, 0.0);
    }
    let k = segment(samples, t);
    let (t0, w0) = samples[k];
    let (t1, w1) = samples[k + 1];
    let s = (t - t0) / (t1 - t0);
    w0 + (w1 - w0) * s
}
