//! Adaptive Dormand–Prince 5(4) integrator for small complex systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-9,
            max_steps: 2_000_000,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrator state that persists between calls: the last accepted step size
/// and the derivative at the current point.
#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    tol: Tolerances,
    h: Option<f64>,
    fsal: Option<(f64, [Complex64; N])>,
    steps: usize,
    max_step: f64,
}

impl<const N: usize> Dopri5<N> {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            h: None,
            fsal: None,
            steps: 0,
            max_step: f64::INFINITY,
        }
    }

    /// Upper limit on the step size. Keeping `h · rate` of order one holds
    /// the method inside its stability region, so decayed components stay at
    /// round-off level instead of ringing at the tolerance.
    pub fn with_max_step(mut self, h: f64) -> Self {
        if h > 0.0 {
            self.max_step = h;
        }
        self
    }

    /// Accepted plus rejected steps so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Drops the cached derivative, e.g. after the state was modified externally.
    pub fn reset_derivative(&mut self) {
        self.fsal = None;
    }

    /// Integrates `y` from `t0` to exactly `t1`.
    pub fn advance<F>(&mut self, f: &F, t0: f64, t1: f64, y: &mut [Complex64; N]) -> Result<()>
    where
        F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let mut t = t0;
        let mut k1 = match self.fsal {
            Some((tf, k)) if tf == t0 => k,
            _ => f(t0, y),
        };
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(f, t0, y, &k1, span),
        }
        .min(self.max_step);
        let mut steps_here = 0usize;
        let mut rejected_last = false;

        while t < t1 {
            if steps_here >= self.tol.max_steps {
                return Err(Error::StepRejection { t, step: h });
            }
            let remaining = t1 - t;
            let landing = h >= remaining * (1.0 - 1e-12);
            let step = if landing { remaining } else { h };
            if !landing && step < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepRejection { t, step });
            }
            steps_here += 1;
            self.steps += 1;

            let (y_new, k7, err) = self.stage(f, t, y, &k1, step);
            if err <= 1.0 {
                t = if landing { t1 } else { t + step };
                *y = y_new;
                k1 = k7;
                let mut fac = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
                fac = fac.clamp(0.2, 5.0);
                if rejected_last {
                    fac = fac.min(1.0);
                }
                rejected_last = false;
                // A step shortened to land on t1 should not shrink the carried size.
                let base = if landing { h.max(step) } else { step };
                h = (base * fac).min(10.0 * span).min(self.max_step);
            } else {
                rejected_last = true;
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                h = step * fac;
            }
            if !h.is_finite() {
                return Err(Error::StepRejection { t, step: h });
            }
        }
        self.h = Some(h);
        self.fsal = Some((t1, k1));
        Ok(())
    }

    fn stage<F>(
        &self,
        f: &F,
        t: f64,
        y: &[Complex64; N],
        k1: &[Complex64; N],
        h: f64,
    ) -> ([Complex64; N], [Complex64; N], f64)
    where
        F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
    {
        let comb = |coef: &[(f64, &[Complex64; N])]| {
            let mut out = *y;
            for (c, k) in coef {
                let s = h * c;
                for i in 0..N {
                    out[i] += k[i] * s;
                }
            }
            out
        };
        let k2 = f(t + C2 * h, &comb(&[(A21, k1)]));
        let k3 = f(t + C3 * h, &comb(&[(A31, k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &comb(&[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &comb(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &comb(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = comb(&[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y_new);

        let mut acc = 0.0;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = self.tol.atol + self.tol.rtol * y[i].norm().max(y_new[i].norm());
            let r = e.norm() / sc;
            acc += r * r;
        }
        let err = (acc / N as f64).sqrt();
        (y_new, k7, if err.is_nan() { f64::INFINITY } else { err })
    }

    fn initial_step<F>(&self, f: &F, t0: f64, y: &[Complex64; N], k1: &[Complex64; N], span: f64) -> f64
    where
        F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
    {
        let scale = |i: usize| self.tol.atol + self.tol.rtol * y[i].norm();
        let rms = |v: &dyn Fn(usize) -> f64| ((0..N).map(|i| v(i).powi(2)).sum::<f64>() / N as f64).sqrt();
        let d0 = rms(&|i| y[i].norm() / scale(i));
        let d1 = rms(&|i| k1[i].norm() / scale(i));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let mut y1 = *y;
        for i in 0..N {
            y1[i] += k1[i] * h0;
        }
        let k2 = f(t0 + h0, &y1);
        let d2 = rms(&|i| (k2[i] - k1[i]).norm() / scale(i)) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }
}
