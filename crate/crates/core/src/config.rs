//! Flat `key = value` run configuration.
//!
//! The file is TOML restricted to top-level scalars and two-element arrays.
//! Every physical key is required; the numerical keys (`u`, `h_gauss`,
//! `h_chi`, `trials`, `seed`, `shards`, `mu`, `lambda_th`) fall back to their
//! defaults. Command-line `--set key=value` overrides are applied on top of
//! the file, and dedicated flags on top of those.
//!
//! ```toml
//! P_dBm = 10.0          # dBm
//! omega_dB = 5.0        # dB
//! M = 64
//! bs_pos = [0.0, 0.0]   # meters
//! ```

use std::fmt::Write as _;
use std::path::Path;

use toml::{Table, Value};

use crate::analytic::FitSpec;
use crate::error::{Error, Result};
use crate::params::{GainConvention, SystemConfig};
use crate::quadrature::QuadratureSpec;
use crate::simulator::McSpec;

/// Recognised keys and the unit each one is expressed in.
pub const KEYS: &[(&str, &str)] = &[
    ("P_dBm", "dBm"),
    ("omega_dB", "dB"),
    ("M", "count of surface elements"),
    ("N", "count of ports"),
    ("W", "wavelengths"),
    ("R", "bit/s/Hz"),
    ("alpha", "path-loss exponent"),
    ("eps1", "linear power"),
    ("eps2", "linear power"),
    ("eps3", "linear power"),
    ("sigma_k2_dBm", "dBm"),
    ("sigma_r2_dBm", "dBm"),
    ("d0", "meters"),
    ("bs_pos", "meters, [x, y]"),
    ("ris_pos", "meters, [x, y]"),
    ("rx_pos", "meters, [x, y]"),
    ("gain_convention", "\"amplitude\" or \"power\""),
    ("u", "quadrature nodes"),
    ("h_gauss", "standard deviations"),
    ("h_chi", "multiples of sqrt(eps3)"),
    ("trials", "count"),
    ("seed", "unsigned integer"),
    ("shards", "count"),
    ("mu", "intra-block correlation"),
    ("lambda_th", "eigenvalue threshold"),
];

const REQUIRED: usize = 16;

pub fn unit_of(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, u)| *u)
}

/// Everything a run needs: physics, quadrature, Monte Carlo and block fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub quad: QuadratureSpec,
    pub mc: McSpec,
    pub fit: FitSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::reference()
    }
}

fn expected(key: &str, what: &str, got: &Value) -> Error {
    let unit = unit_of(key).unwrap_or("");
    Error::config(key, format!("expected {what} ({unit}), got `{got}`"))
}

fn real(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(expected(key, "a number", v)),
    }
}

fn count(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(expected(key, "a non-negative integer", v)),
    }
}

fn position(key: &str, v: &Value) -> Result<[f64; 2]> {
    match v {
        Value::Array(items) if items.len() == 2 => Ok([real(key, &items[0])?, real(key, &items[1])?]),
        _ => Err(expected(key, "a two-element array", v)),
    }
}

impl RunConfig {
    pub fn reference() -> Self {
        RunConfig {
            system: SystemConfig::reference(),
            quad: QuadratureSpec::default(),
            mc: McSpec::default(),
            fit: FitSpec::default(),
        }
    }

    /// Parses a config document. All physical keys must be present.
    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
        if let Some((key, _)) = KEYS[..REQUIRED].iter().find(|(k, _)| !table.contains_key(*k)) {
            let unit = unit_of(key).unwrap_or("");
            return Err(Error::config(*key, format!("missing ({unit})")));
        }
        let mut cfg = RunConfig::reference();
        for (key, value) in &table {
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Input {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Sets one key from an already-parsed value.
    pub fn set(&mut self, key: &str, value: &Value) -> Result<()> {
        let s = &mut self.system;
        match key {
            "P_dBm" => s.p_dbm = real(key, value)?,
            "omega_dB" => s.omega_db = real(key, value)?,
            "M" => s.elements = count(key, value)? as usize,
            "N" => s.ports = count(key, value)? as usize,
            "W" => s.aperture = real(key, value)?,
            "R" => s.rate = real(key, value)?,
            "alpha" => s.alpha = real(key, value)?,
            "eps1" => s.eps1 = real(key, value)?,
            "eps2" => s.eps2 = real(key, value)?,
            "eps3" => s.eps3 = real(key, value)?,
            "sigma_k2_dBm" => s.sigma_k2_dbm = real(key, value)?,
            "sigma_r2_dBm" => s.sigma_r2_dbm = real(key, value)?,
            "d0" => s.d0 = real(key, value)?,
            "bs_pos" => s.bs_pos = position(key, value)?,
            "ris_pos" => s.ris_pos = position(key, value)?,
            "rx_pos" => s.rx_pos = position(key, value)?,
            "gain_convention" => {
                s.gain_convention = match value.as_str() {
                    Some("amplitude") => GainConvention::Amplitude,
                    Some("power") => GainConvention::Power,
                    _ => return Err(expected(key, "a convention name", value)),
                }
            }
            "u" => self.quad.u = count(key, value)? as usize,
            "h_gauss" => self.quad.h_gauss = real(key, value)?,
            "h_chi" => self.quad.h_chi = real(key, value)?,
            "trials" => self.mc.trials = count(key, value)?,
            "seed" => self.mc.seed = count(key, value)?,
            "shards" => self.mc.shards = count(key, value)? as usize,
            "mu" => self.fit.mu = real(key, value)?,
            "lambda_th" => self.fit.lambda_th = real(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies a `key=value` assignment. The right-hand side is read as a
    /// TOML value, and as a bare string if that fails.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "override must have the form key=value"))?;
        let (key, raw) = (key.trim(), raw.trim());
        let value = format!("v = {raw}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        self.set(key, &value)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.quad.validate()?;
        self.mc.validate()?;
        self.fit.validate()
    }

    /// Renders a complete config file that parses back to `self`.
    pub fn to_toml_string(&self) -> String {
        let s = &self.system;
        let convention = match s.gain_convention {
            GainConvention::Amplitude => "\"amplitude\"",
            GainConvention::Power => "\"power\"",
        };
        let pos = |p: [f64; 2]| format!("[{:?}, {:?}]", p[0], p[1]);
        let values = [
            format!("{:?}", s.p_dbm),
            format!("{:?}", s.omega_db),
            s.elements.to_string(),
            s.ports.to_string(),
            format!("{:?}", s.aperture),
            format!("{:?}", s.rate),
            format!("{:?}", s.alpha),
            format!("{:?}", s.eps1),
            format!("{:?}", s.eps2),
            format!("{:?}", s.eps3),
            format!("{:?}", s.sigma_k2_dbm),
            format!("{:?}", s.sigma_r2_dbm),
            format!("{:?}", s.d0),
            pos(s.bs_pos),
            pos(s.ris_pos),
            pos(s.rx_pos),
            convention.to_string(),
            self.quad.u.to_string(),
            format!("{:?}", self.quad.h_gauss),
            format!("{:?}", self.quad.h_chi),
            self.mc.trials.to_string(),
            self.mc.seed.to_string(),
            self.mc.shards.to_string(),
            format!("{:?}", self.fit.mu),
            format!("{:?}", self.fit.lambda_th),
        ];
        let mut out = String::new();
        for ((key, unit), value) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{key} = {value}  # {unit}");
        }
        out
    }
}
