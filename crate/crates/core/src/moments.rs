//! CLT surrogate statistics of the per-port cascade gain
//! `γ_k = Σ_m |h_m| |v_mk|`.
//!
//! `η(μ)` is the Pearson correlation between two port gains whose
//! surface-to-port coefficients have power correlation `μ`. Because every
//! port sees the same `h_m`, `η(0) = π / (4 + π)` rather than zero.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use crate::correlation::BlockPartition;
use crate::error::{Error, Result};
use crate::params::SystemConfig;
use crate::quadrature::adaptive_kronrod;
use crate::special::bessel_i0e;

const PI2_16: f64 = PI * PI / 16.0;

/// Mean and variance of a single port's cascade gain summed over `elements`
/// surface elements. These are exact, not asymptotic.
pub fn cascade_moments(elements: usize, eps1: f64, eps2: f64) -> (f64, f64) {
    let m = elements as f64;
    (m * PI * (eps1 * eps2).sqrt() / 4.0, m * eps1 * eps2 * (1.0 - PI2_16))
}

/// Joint density of two Rayleigh envelopes with common power `eps` and
/// power correlation `mu < 1`.
pub fn bivariate_rayleigh_pdf(x: f64, y: f64, mu: f64, eps: f64) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    let s = eps * (1.0 - mu);
    let z = 2.0 * mu.sqrt() * x * y / s;
    4.0 * x * y / (eps * s) * ((-(x * x + y * y) / s) + z).exp() * bessel_i0e(z)
}

/// `E[|v_k| |v_l|]` for a bivariate Rayleigh pair, by nested adaptive
/// Gauss–Kronrod over `[0, 6 sqrt(eps)]²`.
pub fn envelope_cross_moment(mu: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("power correlation mu must lie in [0, 1], got {mu}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if mu == 0.0 {
        return Ok(PI * eps / 4.0);
    }
    if mu == 1.0 {
        return Ok(eps);
    }
    let upper = 6.0 * eps.sqrt();
    let mut inner_error: Option<Error> = None;
    let outer = adaptive_kronrod(
        |x| {
            if x <= 0.0 {
                return 0.0;
            }
            match adaptive_kronrod(
                |y| x * y * bivariate_rayleigh_pdf(x, y, mu, eps),
                0.0,
                upper,
                1e-15,
                1e-12,
                4000,
            ) {
                Ok(e) => e.value,
                Err(e) => {
                    inner_error.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        upper,
        1e-14,
        1e-10,
        4000,
    );
    if let Some(e) = inner_error {
        return Err(e);
    }
    Ok(outer?.value)
}

fn eta_from_moment(cross: f64, eps1: f64, eps2: f64) -> f64 {
    (eps1 * cross - PI2_16 * eps1 * eps2) / (eps1 * eps2 * (1.0 - PI2_16))
}

fn eta_cache() -> &'static RwLock<HashMap<[u64; 3], f64>> {
    static CACHE: OnceLock<RwLock<HashMap<[u64; 3], f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Pearson correlation of two surrogate port gains at power correlation
/// `mu`. Memoised per `(mu, eps1, eps2)` in a process-wide map.
pub fn eta(mu: f64, eps1: f64, eps2: f64) -> Result<f64> {
    let key = [mu.to_bits(), eps1.to_bits(), eps2.to_bits()];
    if let Some(&v) = eta_cache().read().expect("eta cache poisoned").get(&key) {
        return Ok(v);
    }
    let v = eta_uncached(mu, eps1, eps2)?;
    eta_cache().write().expect("eta cache poisoned").insert(key, v);
    Ok(v)
}

pub fn eta_uncached(mu: f64, eps1: f64, eps2: f64) -> Result<f64> {
    if mu == 1.0 {
        return Ok(1.0);
    }
    let cross = envelope_cross_moment(mu, eps2)?;
    Ok(eta_from_moment(cross, eps1, eps2))
}

/// The un-reduced form `(M ε1 E[|v_k||v_l|] - E_γ² / M) / V_γ`, kept to
/// check that the element count cancels.
pub fn eta_with_elements(mu: f64, eps1: f64, eps2: f64, elements: usize) -> Result<f64> {
    let cross = envelope_cross_moment(mu, eps2)?;
    let (e, v) = cascade_moments(elements, eps1, eps2);
    let m = elements as f64;
    Ok((m * eps1 * cross - e * e / m) / v)
}

/// Gaussian stand-in for the port-gain vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSurrogate {
    pub e_gamma: f64,
    pub v_gamma: f64,
    /// Correlation between two ports of the same block.
    pub rho1: f64,
    /// Correlation between ports of different blocks.
    pub rho0: f64,
}

impl GaussianSurrogate {
    pub fn sd(&self) -> f64 {
        self.v_gamma.sqrt()
    }
}

/// Intra-block correlation uses `eta(mu²)`: the block constant `mu` mirrors
/// the coefficient correlation of the Clarke matrix, and envelopes see its
/// square.
pub fn build_surrogate(cfg: &SystemConfig, partition: &BlockPartition) -> Result<GaussianSurrogate> {
    let (e_gamma, v_gamma) = cascade_moments(cfg.elements, cfg.eps1, cfg.eps2);
    let rho1 = eta(partition.mu * partition.mu, cfg.eps1, cfg.eps2)?;
    let rho0 = eta(0.0, cfg.eps1, cfg.eps2)?;
    if !(rho0 > 0.0 && rho0 <= rho1 && rho1 <= 1.0 + 1e-12) {
        return Err(Error::Numerical(format!("surrogate correlations out of order: rho0 {rho0}, rho1 {rho1}")));
    }
    Ok(GaussianSurrogate {
        e_gamma,
        v_gamma,
        rho1: rho1.min(1.0),
        rho0,
    })
}
