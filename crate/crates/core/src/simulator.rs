//! Monte Carlo ground truth for the full channel model.
//!
//! Each trial draws `h_m ~ CN(0, ε1)` and, per element, an `N`-port vector
//! `v_m ~ CN(0, ε2 Σ)` by applying a factor of `Σ` to independent real and
//! imaginary parts. The coherently combined gain of port `k` is
//! `γ_k = Σ_m |h_m| |v_mk|`; the receiver keeps the best port, and the
//! direct-link envelope `|χ|` is drawn independently of that choice.
//!
//! Trials are split into shards. Shard `s` uses `ChaCha8Rng` seeded from
//! `seed` with stream number `s`, which gives non-overlapping streams; the
//! last shard absorbs the remainder of `trials / shards`. Shard counts are
//! summed in shard order, so a fixed `(seed, shards)` reproduces the
//! estimate exactly whatever the worker count.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::correlation::{build_sigma, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::params::{link_budget, SystemConfig};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSpec {
    pub trials: u64,
    pub seed: u64,
    pub shards: usize,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec {
            trials: 100_000,
            seed: 0x5eed,
            shards: 16,
        }
    }
}

impl McSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.shards < 1 {
            return Err(Error::config("shards", "must be at least 1"));
        }
        Ok(())
    }

    /// Trials assigned to shard `s`.
    pub fn shard_trials(&self, s: usize) -> u64 {
        let base = self.trials / self.shards as u64;
        if s + 1 == self.shards {
            base + self.trials % self.shards as u64
        } else {
            base
        }
    }

    /// The generator for shard `s`.
    pub fn shard_rng(&self, s: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(s as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub op_hat: f64,
    /// `1.96 sqrt(p (1 - p) / n)`
    pub ci_half_width: f64,
    pub trials: u64,
}

impl McEstimate {
    pub fn from_counts(events: u64, trials: u64) -> Self {
        let p = events as f64 / trials as f64;
        McEstimate {
            op_hat: p,
            ci_half_width: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }
}

/// Draws port-gain vectors for a fixed correlation factor.
#[derive(Debug, Clone)]
pub struct PortSampler {
    elements: usize,
    ports: usize,
    rank: usize,
    /// Row-major `ports × rank`, pre-scaled by `sqrt(ε2 / 2)`.
    factor: Vec<f64>,
    eps1: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl PortSampler {
    /// `root` must satisfy `root rootᵀ = Σ` to `1e-9`.
    pub fn new(cfg: &SystemConfig, root: &DMatrix<f64>) -> Result<Self> {
        let ports = root.nrows();
        let rank = root.ncols();
        if ports != cfg.ports {
            return Err(Error::Domain(format!("factor has {ports} rows, config has {} ports", cfg.ports)));
        }
        let scale = (cfg.eps2 / 2.0).sqrt();
        let factor = (0..ports)
            .flat_map(|r| (0..rank).map(move |c| (r, c)))
            .map(|(r, c)| root[(r, c)] * scale)
            .collect();
        Ok(PortSampler {
            elements: cfg.elements,
            ports,
            rank,
            factor,
            eps1: cfg.eps1,
            re: vec![0.0; rank],
            im: vec![0.0; rank],
        })
    }

    pub fn from_sigma(cfg: &SystemConfig, sigma: &CorrelationMatrix) -> Result<Self> {
        let root = sigma.root();
        let err = (&root * root.transpose() - sigma.entries()).abs().max();
        if err > 1e-9 {
            return Err(Error::Numerical(format!("correlation factor reconstructs Σ only to {err:e}")));
        }
        Self::new(cfg, &root)
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    /// Overwrites `gains[k]` with `γ_k` for one channel realisation.
    pub fn sample_into<R: Rng + ?Sized>(&mut self, rng: &mut R, gains: &mut [f64]) {
        gains.fill(0.0);
        for _ in 0..self.elements {
            let e: f64 = rng.sample(Exp1);
            let h_abs = (self.eps1 * e).sqrt();
            for c in 0..self.rank {
                self.re[c] = rng.sample(StandardNormal);
                self.im[c] = rng.sample(StandardNormal);
            }
            for (k, row) in self.factor.chunks_exact(self.rank).enumerate() {
                let mut vr = 0.0;
                let mut vi = 0.0;
                for ((&f, &a), &b) in row.iter().zip(&self.re).zip(&self.im) {
                    vr += f * a;
                    vi += f * b;
                }
                gains[k] += h_abs * (vr * vr + vi * vi).sqrt();
            }
        }
    }
}

/// One realisation of `[γ_1, …, γ_N]`.
pub fn sample_port_gains<R: Rng + ?Sized>(cfg: &SystemConfig, sigma_root: &DMatrix<f64>, rng: &mut R) -> Result<Vec<f64>> {
    let mut sampler = PortSampler::new(cfg, sigma_root)?;
    let mut gains = vec![0.0; sampler.ports()];
    sampler.sample_into(rng, &mut gains);
    Ok(gains)
}

/// Everything a shard needs to run trials of one scenario.
#[derive(Debug, Clone)]
struct TrialModel {
    sampler: Option<PortSampler>,
    omega1: f64,
    omega2: f64,
    beta: f64,
    eps3: f64,
}

impl TrialModel {
    fn new(cfg: &SystemConfig, scenario: Scenario) -> Result<Self> {
        let run = scenario.configure(cfg);
        let lb = link_budget(&run)?;
        let sampler = if scenario.has_surface() {
            let sigma = build_sigma(run.ports, run.aperture)?;
            Some(PortSampler::from_sigma(&run, &sigma)?)
        } else {
            None
        };
        Ok(TrialModel {
            sampler,
            omega1: lb.omega1,
            omega2: lb.omega2,
            beta: lb.beta,
            eps3: run.eps3,
        })
    }

    fn count_outages(&self, trials: u64, rng: &mut ChaCha8Rng) -> u64 {
        let mut sampler = self.sampler.clone();
        let mut gains = vec![0.0; sampler.as_ref().map_or(0, PortSampler::ports)];
        let mut events = 0;
        for _ in 0..trials {
            let reflected = match sampler.as_mut() {
                Some(s) => {
                    s.sample_into(rng, &mut gains);
                    self.omega1 * gains.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                }
                None => 0.0,
            };
            let e: f64 = rng.sample(Exp1);
            let chi = (self.eps3 * e).sqrt();
            let amp = reflected + self.omega2 * chi;
            if amp * amp < self.beta {
                events += 1;
            }
        }
        events
    }
}

pub fn simulate_scenario_with(cfg: &SystemConfig, mc: &McSpec, scenario: Scenario, exec: Execution) -> Result<McEstimate> {
    mc.validate()?;
    let model = TrialModel::new(cfg, scenario)?;
    let counts = exec.map(mc.shards, |s| model.count_outages(mc.shard_trials(s), &mut mc.shard_rng(s)));
    let events = counts.into_iter().sum();
    Ok(McEstimate::from_counts(events, mc.trials))
}

/// Empirical outage probability of the configured system.
pub fn simulate_op(cfg: &SystemConfig, mc: &McSpec) -> Result<McEstimate> {
    simulate_scenario_with(cfg, mc, Scenario::FasAris, Execution::default())
}

pub fn simulate_op_with(cfg: &SystemConfig, mc: &McSpec, exec: Execution) -> Result<McEstimate> {
    simulate_scenario_with(cfg, mc, Scenario::FasAris, exec)
}

pub fn simulate_baselines(cfg: &SystemConfig, mc: &McSpec, scenario: Scenario) -> Result<McEstimate> {
    simulate_scenario_with(cfg, mc, scenario, Execution::default())
}
