//! Reduced-scale self checks for a configuration.
//!
//! Each check is independent: a failure in one (say the block fit) is
//! reported and the remaining checks still run where they can.

use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analytic::{cdf_gamma_star_bc, outage_probability, prepare, Method};
use crate::config::RunConfig;
use crate::correlation::{build_sigma, fit_block_partition};
use crate::error::Result;
use crate::exec::Execution;
use crate::moments::{cascade_moments, envelope_cross_moment, eta, eta_uncached};
use crate::params::link_budget;
use crate::simulator::{simulate_op_with, McSpec, PortSampler};

/// Largest allowed change in any outage or CDF value when `u` doubles.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Trials used by the Monte Carlo probes.
pub const PROBE_TRIALS: u64 = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:<22} {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &'static str, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
        self.checks.push(Check { name, passed, detail });
    }
}

/// `E[R1 R2] / eps` for Rayleigh envelopes with power correlation `mu`,
/// from the Gauss hypergeometric series `(π/4) 2F1(-1/2, -1/2; 1; mu)`.
pub fn cross_moment_series(mu: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..10_000 {
        let k = k as f64;
        term *= (k - 0.5) * (k - 0.5) / ((k + 1.0) * (k + 1.0)) * mu;
        sum += term;
        if term.abs() < 1e-17 * sum {
            break;
        }
    }
    PI / 4.0 * sum
}

fn check_link(cfg: &RunConfig) -> Result<(bool, String)> {
    cfg.validate()?;
    let lb = link_budget(&cfg.system)?;
    Ok((
        true,
        format!(
            "omega1 {:.6e}, omega2 {:.6e}, sigma2 {:.6e} W, beta {}",
            lb.omega1, lb.omega2, lb.sigma2_w, lb.beta
        ),
    ))
}

fn check_fit(cfg: &RunConfig) -> Result<(bool, String)> {
    let sigma = build_sigma(cfg.system.ports, cfg.system.aperture)?;
    let p = fit_block_partition(&sigma, cfg.fit.lambda_th, cfg.fit.mu)?;
    let ok = p.ports() == cfg.system.ports;
    Ok((ok, format!("B = {}, sizes {:?}, distance {:.4e}", p.block_count(), p.block_sizes, p.fit_distance)))
}

fn check_eta(cfg: &RunConfig) -> Result<(bool, String)> {
    let (e1, e2) = (cfg.system.eps1, cfg.system.eps2);
    let at_zero = (eta(0.0, e1, e2)? - PI / (4.0 + PI)).abs();
    let near_zero = (eta_uncached(1e-10, e1, e2)? - PI / (4.0 + PI)).abs();
    let at_one = (eta(1.0, e1, e2)? - 1.0).abs();
    let series = (envelope_cross_moment(0.5, e2)? / e2 - cross_moment_series(0.5)).abs();
    let ok = at_zero < 1e-6 && near_zero < 1e-6 && at_one < 1e-9 && series < 1e-6;
    Ok((
        ok,
        format!("|eta(0) - pi/(4+pi)| {at_zero:.1e} (integrated {near_zero:.1e}), |eta(1) - 1| {at_one:.1e}, series {series:.1e}"),
    ))
}

fn check_convergence(cfg: &RunConfig) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for method in [Method::BcAnalytic, Method::IidAnalytic] {
        let r = outage_probability(&cfg.system, method, &cfg.quad, &cfg.fit)?;
        worst = worst.max(r.residual);
    }
    let model = prepare(&cfg.system, &cfg.fit)?;
    let s = model.surrogate;
    let fine = cfg.quad.refined();
    for k in -4..=4 {
        let y = s.e_gamma + k as f64 * s.sd();
        let a = cdf_gamma_star_bc(y, &s, &model.partition, &cfg.quad)?;
        let b = cdf_gamma_star_bc(y, &s, &model.partition, &fine)?;
        worst = worst.max((a - b).abs());
    }
    Ok((
        worst < CONVERGENCE_TOL,
        format!("max change {worst:.2e} doubling u = {} (limit {CONVERGENCE_TOL:e})", cfg.quad.u),
    ))
}

fn check_monotone(cfg: &RunConfig) -> Result<(bool, String)> {
    let model = prepare(&cfg.system, &cfg.fit)?;
    let s = model.surrogate;
    let mut prev = 0.0;
    let mut ok = true;
    for k in 0..=80 {
        let y = s.e_gamma + (k as f64 / 10.0 - 4.0) * s.sd();
        let f = cdf_gamma_star_bc(y, &s, &model.partition, &cfg.quad)?;
        ok &= (0.0..=1.0).contains(&f) && f >= prev - 1e-12;
        prev = f;
    }
    Ok((ok, format!("81-point grid over E +- 4 sd, last value {prev:.6}")))
}

fn check_mc(cfg: &RunConfig) -> Result<(bool, String)> {
    let mc = McSpec {
        trials: cfg.mc.trials.min(PROBE_TRIALS),
        ..cfg.mc
    };
    let bc = outage_probability(&cfg.system, Method::BcAnalytic, &cfg.quad, &cfg.fit)?;
    let est = simulate_op_with(&cfg.system, &mc, Execution::default())?;
    let gap = (bc.op - est.op_hat).abs();
    let tol = (0.15 * est.op_hat).max(0.02) + est.ci_half_width;
    Ok((
        gap <= tol,
        format!("bc {:.5e} vs mc {:.5e} +- {:.1e} ({} trials)", bc.op, est.op_hat, est.ci_half_width, mc.trials),
    ))
}

fn check_moments(cfg: &RunConfig) -> Result<(bool, String)> {
    let single = crate::params::SystemConfig {
        ports: 1,
        ..cfg.system.clone()
    };
    let mut sampler = PortSampler::new(&single, &nalgebra::DMatrix::identity(1, 1))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.mc.seed);
    let n = PROBE_TRIALS;
    let mut g = [0.0];
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        sampler.sample_into(&mut rng, &mut g);
        sum += g[0];
        sum2 += g[0] * g[0];
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum2 - nf * mean * mean) / (nf - 1.0);
    let (e, v) = cascade_moments(single.elements, single.eps1, single.eps2);
    let mean_z = (mean - e) / (v / nf).sqrt();
    // Variance of the sample variance, with the Gaussian kurtosis.
    let var_z = (var - v) / (v * (2.0 / (nf - 1.0)).sqrt());
    Ok((
        mean_z.abs() < 4.0 && var_z.abs() < 4.0,
        format!("mean {mean:.4} vs {e:.4} ({mean_z:+.2} se), variance {var:.4} vs {v:.4} ({var_z:+.2} se)"),
    ))
}

/// Runs every check against `cfg`.
pub fn run_checks(cfg: &RunConfig) -> Report {
    let mut report = Report::default();
    report.push("config", check_link(cfg));
    report.push("block_fit", check_fit(cfg));
    report.push("eta_identities", check_eta(cfg));
    report.push("quadrature_convergence", check_convergence(cfg));
    report.push("cdf_monotone", check_monotone(cfg));
    report.push("surrogate_vs_mc", check_mc(cfg));
    report.push("port_gain_moments", check_moments(cfg));
    report
}
