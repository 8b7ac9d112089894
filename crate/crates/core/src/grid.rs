use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PulsePolicy, SystemParams};

/// Default bounds on the number of reporting samples.
pub const MIN_POINTS: usize = 600;
pub const MAX_POINTS: usize = 1200;

/// Uniform samples `t_k = start + k h`, `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("grid needs at least two points".into()));
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidParameter(format!(
                "grid range [{start}, {end}] is empty"
            )));
        }
        Ok(Self { start, end, n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.n - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.n {
            self.end
        } else {
            self.start + self.step() * k as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.time(k)).collect()
    }

    /// Trapezoid weights over the whole grid.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        let mut w = vec![h; self.n];
        w[0] = 0.5 * h;
        w[self.n - 1] = 0.5 * h;
        w
    }

    /// Trapezoid weight of sample `k` in the sub-range starting at sample `from`.
    pub fn tail_weight(&self, from: usize, k: usize) -> f64 {
        let h = self.step();
        if from + 1 == self.n {
            0.0
        } else if k == from || k + 1 == self.n {
            0.5 * h
        } else {
            h
        }
    }

    /// Trapezoid integral of sampled values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let h = self.step();
        let inner: f64 = values[1..self.n - 1].iter().sum();
        h * (inner + 0.5 * (values[0] + values[self.n - 1]))
    }

    /// Index of the sample equal to `t` (within rounding), if any.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.start) / self.step();
        let k = x.round();
        if (x - k).abs() < 1e-9 && k >= 0.0 && (k as usize) < self.n {
            Some(k as usize)
        } else {
            None
        }
    }
}

/// Integration window `[0, t_c + max(10 width_fall, 10 / kappa_eff)]`.
pub fn plan_window(params: &SystemParams, policy: &PulsePolicy) -> f64 {
    let decay = params.slowest_decay_rate();
    let tail = if decay > 0.0 { 10.0 / decay } else { 0.0 };
    let end = policy.center() + (10.0 * policy.fall_width()).max(tail);
    if end > 0.0 {
        end
    } else {
        1.0
    }
}

/// Number of samples for a window: 40 per fastest time scale (system rate or
/// pulse width), clamped to `[MIN_POINTS, MAX_POINTS]`.
pub fn plan_points(params: &SystemParams, policy: &PulsePolicy, window: f64) -> usize {
    let rate = params.fastest_rate();
    let mut tau = if rate > 0.0 { 1.0 / rate } else { window };
    let width = match policy {
        PulsePolicy::SymmetricGaussian { sigma, .. } => *sigma,
        PulsePolicy::AsymmetricGaussian { sigma1, sigma2, .. } => sigma1.min(*sigma2),
        PulsePolicy::Tabulated { .. } => tau,
    };
    tau = tau.min(width);
    let wanted = (40.0 * window / tau).ceil();
    if wanted.is_finite() {
        (wanted as usize).clamp(MIN_POINTS, MAX_POINTS)
    } else {
        MAX_POINTS
    }
}

/// Sub-interval boundaries for `[a, b]` that contain the given breakpoints.
pub(crate) fn split_interval(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let mut cuts = vec![a];
    let eps = 1e-9 * (b - a);
    for &t in breaks {
        if t > a + eps && t < b - eps {
            cuts.push(t);
        }
    }
    cuts.push(b);
    cuts
}

/// Largest integrator step that keeps `h` times the fastest rate at one.
pub(crate) fn stability_step(params: &SystemParams, policy: &PulsePolicy) -> f64 {
    let rate = params.fastest_rate().max(policy.peak());
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

/// Points where the integrator is forced to stop: pulse kinks and a ladder of
/// width-spaced stations through the pulse, so narrow pulses are never skipped.
pub(crate) fn integration_breakpoints(policy: &PulsePolicy) -> Vec<f64> {
    let mut out = policy.breakpoints();
    match policy {
        PulsePolicy::SymmetricGaussian { sigma, t_c, .. } => {
            out.extend((-6..=6).map(|k| t_c + *sigma * k as f64));
        }
        PulsePolicy::AsymmetricGaussian {
            sigma1, sigma2, t_c, ..
        } => {
            out.extend((-6..0).map(|k| t_c + *sigma1 * k as f64));
            out.extend((1..=6).map(|k| t_c + *sigma2 * k as f64));
        }
        PulsePolicy::Tabulated { .. } => {}
    }
    out.retain(|t| *t > 0.0);
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup();
    out
}
