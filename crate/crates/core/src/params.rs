//! Physical link parameters and the derived link budget.
//!
//! Powers are given in dBm and converted to watts with `10^((x - 30) / 10)`.
//! The surface amplification `omega_db` is read as an amplitude gain by
//! default, so `0 dB` means a unit-gain (passive-equivalent) surface.

use crate::error::{Error, Result};

/// How `omega_db` maps to the linear amplitude factor applied to the
/// reflected signal and the port noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainConvention {
    /// `10^(dB / 20)`
    #[default]
    Amplitude,
    /// The figure is `10 log10(ω)`: amplitude `10^(dB / 10)`.
    Power,
}

impl GainConvention {
    pub fn amplitude(self, db: f64) -> f64 {
        match self {
            GainConvention::Amplitude => 10f64.powf(db / 20.0),
            GainConvention::Power => 10f64.powf(db / 10.0),
        }
    }
}

/// All physical parameters of a single BS -> (ARIS, direct) -> FAS link.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Transmit power, dBm.
    pub p_dbm: f64,
    /// Per-element surface amplification, dB.
    pub omega_db: f64,
    /// Number of surface elements.
    pub elements: usize,
    /// Number of fluid-antenna ports.
    pub ports: usize,
    /// Fluid-antenna aperture in wavelengths.
    pub aperture: f64,
    /// Target rate, bit/s/Hz.
    pub rate: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// E|h_m|^2 (BS to surface).
    pub eps1: f64,
    /// E|v_mk|^2 (surface to port).
    pub eps2: f64,
    /// E|chi|^2 (direct link).
    pub eps3: f64,
    pub sigma_k2_dbm: f64,
    pub sigma_r2_dbm: f64,
    /// Reference distance, meters.
    pub d0: f64,
    pub bs_pos: [f64; 2],
    pub ris_pos: [f64; 2],
    pub rx_pos: [f64; 2],
    pub gain_convention: GainConvention,
}

impl SystemConfig {
    /// The layout used throughout the reference study: BS at the origin,
    /// surface at (40, 40) m, receiver at (100, 0) m, P = 10 dBm, 5 dB gain,
    /// 64 elements and 20 ports.
    pub fn reference() -> Self {
        SystemConfig {
            p_dbm: 10.0,
            omega_db: 5.0,
            elements: 64,
            ports: 20,
            aperture: 5.0,
            rate: 10.0,
            alpha: 3.9,
            eps1: 1.0,
            eps2: 1.0,
            eps3: 0.5,
            sigma_k2_dbm: -40.0,
            sigma_r2_dbm: -40.0,
            d0: 10.0,
            bs_pos: [0.0, 0.0],
            ris_pos: [40.0, 40.0],
            rx_pos: [100.0, 0.0],
            gain_convention: GainConvention::Amplitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements < 1 {
            return Err(Error::config("M", "must be a positive integer (count of surface elements)"));
        }
        if self.ports < 1 {
            return Err(Error::config("N", "must be a positive integer (count of ports)"));
        }
        let positive = [
            ("W", self.aperture, "wavelengths"),
            ("R", self.rate, "bit/s/Hz"),
            ("alpha", self.alpha, "dimensionless"),
            ("eps1", self.eps1, "linear power"),
            ("eps2", self.eps2, "linear power"),
            ("eps3", self.eps3, "linear power"),
            ("d0", self.d0, "meters"),
        ];
        for (key, value, unit) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be a positive finite number ({unit}), got {value}")));
            }
        }
        let finite = [
            ("P_dBm", self.p_dbm),
            ("omega_dB", self.omega_db),
            ("sigma_k2_dBm", self.sigma_k2_dbm),
            ("sigma_r2_dBm", self.sigma_r2_dbm),
        ];
        for (key, value) in finite {
            if !value.is_finite() {
                return Err(Error::config(key, format!("must be finite, got {value}")));
            }
        }
        derive_distances(self).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distances {
    pub d_sr: f64,
    pub d_rd: f64,
    pub d_sd: f64,
}

/// Amplitude scales, effective noise and outage threshold of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Scale of the reflected path. Zero when the surface is switched off.
    pub omega1: f64,
    /// Scale of the direct path.
    pub omega2: f64,
    /// Effective noise power, watts.
    pub sigma2_w: f64,
    /// SNR outage threshold `2^R - 1`.
    pub beta: f64,
    pub distances: Distances,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn derive_distances(cfg: &SystemConfig) -> Result<Distances> {
    let d = Distances {
        d_sr: distance(cfg.bs_pos, cfg.ris_pos),
        d_rd: distance(cfg.ris_pos, cfg.rx_pos),
        d_sd: distance(cfg.bs_pos, cfg.rx_pos),
    };
    for (name, v) in [("BS-RIS", d.d_sr), ("RIS-RX", d.d_rd), ("BS-RX", d.d_sd)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Geometry(format!("{name} distance is {v}; node positions must be distinct")));
        }
    }
    Ok(d)
}

/// `2^R - 1`.
pub fn outage_threshold(rate: f64) -> f64 {
    rate.exp2() - 1.0
}

pub fn link_budget(cfg: &SystemConfig) -> Result<LinkBudget> {
    cfg.validate()?;
    let distances = derive_distances(cfg)?;
    let gain = cfg.gain_convention.amplitude(cfg.omega_db);
    let p = dbm_to_watts(cfg.p_dbm);
    let sigma2_w = gain * gain * dbm_to_watts(cfg.sigma_k2_dbm) + dbm_to_watts(cfg.sigma_r2_dbm);
    let snr_amp = (p / sigma2_w).sqrt();
    let half_alpha = -cfg.alpha / 2.0;
    let omega1 = gain * snr_amp * (distances.d_sr * distances.d_rd / cfg.d0).powf(half_alpha);
    let omega2 = snr_amp * (distances.d_sd / cfg.d0).powf(half_alpha);
    let beta = outage_threshold(cfg.rate);
    for (name, v) in [("omega1", omega1), ("omega2", omega2), ("sigma2", sigma2_w), ("beta", beta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Numerical(format!("derived {name} = {v} is not a positive finite number")));
        }
    }
    Ok(LinkBudget {
        omega1,
        omega2,
        sigma2_w,
        beta,
        distances,
    })
}
