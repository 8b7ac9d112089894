use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical rates of one atom–cavity node.
///
/// All quantities share one unit (by convention `gamma_u = 1`). `kappa` and
/// `gamma_u` are amplitude decay rates: the corresponding populations decay at
/// `2 kappa` and `2 gamma_u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub g: f64,
    pub kappa: f64,
    pub gamma_u: f64,
    #[serde(default)]
    pub gamma_g: f64,
    #[serde(default)]
    pub delta_u: f64,
    #[serde(default)]
    pub delta_e: f64,
}

impl SystemParams {
    pub fn new(g: f64, kappa: f64, gamma_u: f64) -> Result<Self> {
        let params = Self {
            g,
            kappa,
            gamma_u,
            gamma_g: 0.0,
            delta_u: 0.0,
            delta_e: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_detunings(mut self, delta_u: f64, delta_e: f64) -> Self {
        self.delta_u = delta_u;
        self.delta_e = delta_e;
        self
    }

    pub fn with_gamma_g(mut self, gamma_g: f64) -> Self {
        self.gamma_g = gamma_g;
        self
    }

    /// Rates must be finite and non-negative. Zero coupling or zero cavity
    /// decay is accepted so closed-system limits can be integrated on an
    /// explicit grid.
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma_u", self.gamma_u),
            ("gamma_g", self.gamma_g),
        ];
        for (name, value) in rates {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        for (name, value) in [("delta_u", self.delta_u), ("delta_e", self.delta_e)] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Pump detuning `delta_e - delta_u`.
    pub fn delta_p(&self) -> f64 {
        self.delta_e - self.delta_u
    }

    /// Cavity detuning, equal to the two-photon detuning.
    pub fn delta_c(&self) -> f64 {
        self.delta_e
    }

    /// `g² / (kappa gamma_u)`.
    pub fn cooperativity(&self) -> Result<f64> {
        if self.gamma_u == 0.0 {
            return Err(Error::InfiniteCooperativity);
        }
        if self.kappa == 0.0 {
            return Err(Error::InvalidParameter(
                "cooperativity undefined for kappa = 0".into(),
            ));
        }
        Ok(self.g * self.g / (self.kappa * self.gamma_u))
    }

    /// Total amplitude decay rate of the excited state.
    pub fn excited_decay(&self) -> f64 {
        self.gamma_u + self.gamma_g
    }

    /// Slowest amplitude decay rate of the undriven {|g1>, |e0>} manifold.
    ///
    /// This sets how long the cavity keeps leaking after the pump is off.
    pub fn slowest_decay_rate(&self) -> f64 {
        let (a, b) = self.undriven_eigenvalues();
        (-a.im).min(-b.im)
    }

    /// Largest rate in the problem, used to size the reporting grid.
    pub fn fastest_rate(&self) -> f64 {
        [
            self.g,
            self.kappa,
            self.excited_decay(),
            self.delta_u.abs(),
            self.delta_e.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    fn undriven_eigenvalues(&self) -> (Complex64, Complex64) {
        let a = Complex64::new(0.0, -self.kappa);
        let d = Complex64::new(self.delta_e, -self.excited_decay());
        let mean = (a + d) * 0.5;
        let half = (a - d) * 0.5;
        let root = (half * half + self.g * self.g).sqrt();
        (mean + root, mean - root)
    }

    /// Parameter sets of the five reference regimes, in units of `gamma_u`.
    pub fn regime(regime: Regime) -> Self {
        let (g, kappa) = match regime {
            Regime::Intermediate => (1.0, 1.0),
            Regime::Strong => (10f64.sqrt(), 1.0),
            Regime::Weak => (1.0 / 10f64.sqrt(), 1.0),
            Regime::Purcell => (5.0, 25.0),
            Regime::LossyAtom => (0.2, 0.04),
        };
        Self {
            g,
            kappa,
            gamma_u: 1.0,
            gamma_g: 0.0,
            delta_u: 0.0,
            delta_e: 0.0,
        }
    }
}

/// The five coupling regimes used throughout the sweeps, labelled `a`–`e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Regime {
    Intermediate,
    Strong,
    Weak,
    Purcell,
    LossyAtom,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::Intermediate,
        Regime::Strong,
        Regime::Weak,
        Regime::Purcell,
        Regime::LossyAtom,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Regime::Intermediate => "a",
            Regime::Strong => "b",
            Regime::Weak => "c",
            Regime::Purcell => "d",
            Regime::LossyAtom => "e",
        }
    }

    pub fn params(self) -> SystemParams {
        SystemParams::regime(self)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "intermediate" => Ok(Regime::Intermediate),
            "b" | "strong" => Ok(Regime::Strong),
            "c" | "weak" => Ok(Regime::Weak),
            "d" | "purcell" => Ok(Regime::Purcell),
            "e" | "lossy" | "lossy_atom" => Ok(Regime::LossyAtom),
            other => Err(Error::Config(format!("unknown regime '{other}'"))),
        }
    }
}

impl TryFrom<String> for Regime {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Regime> for String {
    fn from(r: Regime) -> String {
        r.label().to_string()
    }
}
