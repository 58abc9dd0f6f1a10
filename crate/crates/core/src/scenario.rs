//! Comparison baselines: passive surface, no surface, single port.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::params::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// The configured active surface with port selection.
    FasAris,
    /// Unit-gain surface: amplitude 1, noise `σ_k² + σ_r²`.
    FasRis,
    /// Reflected path removed; the direct link is seen through a single port.
    NoRis,
    /// One port.
    NoFas,
    NoFasNoRis,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::FasAris,
        Scenario::FasRis,
        Scenario::NoRis,
        Scenario::NoFas,
        Scenario::NoFasNoRis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::FasAris => "fas_aris",
            Scenario::FasRis => "fas_ris",
            Scenario::NoRis => "no_ris",
            Scenario::NoFas => "no_fas",
            Scenario::NoFasNoRis => "no_fas_no_ris",
        }
    }

    pub fn has_surface(self) -> bool {
        !matches!(self, Scenario::NoRis | Scenario::NoFasNoRis)
    }

    /// The configuration this scenario actually runs.
    pub fn configure(self, cfg: &SystemConfig) -> SystemConfig {
        let mut out = cfg.clone();
        match self {
            Scenario::FasAris | Scenario::NoRis => {}
            Scenario::FasRis => out.omega_db = 0.0,
            Scenario::NoFas | Scenario::NoFasNoRis => out.ports = 1,
        }
        out
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "scenario",
                    format!("unknown scenario `{s}` (fas_aris, fas_ris, no_ris, no_fas, no_fas_no_ris)"),
                )
            })
    }
}
