//! Reference computations shared by the integration tests. Nothing here
//! calls into the analytic pipeline it is used to check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `E[R1 R2] / eps` for two Rayleigh envelopes of power correlation `mu`:
/// `(π/4) 2F1(-1/2, -1/2; 1; mu)` summed term by term.
pub fn rayleigh_cross_moment(mu: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 0.0f64;
    while k < 1e6 {
        term *= (k - 0.5).powi(2) / (k + 1.0).powi(2) * mu;
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
        k += 1.0;
    }
    std::f64::consts::PI / 4.0 * sum
}

/// Block-model spectrum distance computed from scratch.
pub fn model_distance(target: &[f64], sizes: &[usize], mu: f64) -> f64 {
    let mut model = vec![1.0 - mu; target.len()];
    for (slot, &l) in model.iter_mut().zip(sizes) {
        *slot = 1.0 + mu * (l as f64 - 1.0);
    }
    model.sort_by(|a, b| b.partial_cmp(a).unwrap());
    target.iter().zip(model).map(|(t, m)| (t - m).powi(2)).sum()
}

/// Minimum distance over every composition of `n` into `blocks` positive
/// parts, and one minimiser.
pub fn exhaustive_block_fit(target: &[f64], blocks: usize, mu: f64) -> (f64, Vec<usize>) {
    fn walk(left: usize, parts: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if parts == 1 {
            cur.push(left);
            visit(cur);
            cur.pop();
            return;
        }
        for first in 1..=left - (parts - 1) {
            cur.push(first);
            walk(left - first, parts - 1, cur, visit);
            cur.pop();
        }
    }
    let mut best = (f64::INFINITY, Vec::new());
    walk(target.len(), blocks, &mut Vec::new(), &mut |sizes| {
        let d = model_distance(target, sizes, mu);
        if d < best.0 {
            best = (d, sizes.to_vec());
        }
    });
    best
}

/// Empirical CDF of the maximum of the block-correlated Gaussian
/// decomposition
/// `Y_k = E + sd (sqrt(ρ0) z0 + sqrt(ρ1 - ρ0) z_b + sqrt(1 - ρ1) e_k)`
/// at each point of `ys`.
pub fn block_gaussian_max_cdf(
    e: f64,
    sd: f64,
    rho1: f64,
    rho0: f64,
    sizes: &[usize],
    ys: &[f64],
    trials: u64,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; ys.len()];
    let (a0, a1, a2) = (rho0.sqrt(), (rho1 - rho0).max(0.0).sqrt(), (1.0 - rho1).max(0.0).sqrt());
    for _ in 0..trials {
        let z0: f64 = rng.sample(StandardNormal);
        let mut best = f64::NEG_INFINITY;
        for &l in sizes {
            let zb: f64 = rng.sample(StandardNormal);
            for _ in 0..l {
                let ek: f64 = rng.sample(StandardNormal);
                best = best.max(a0 * z0 + a1 * zb + a2 * ek);
            }
        }
        let y = e + sd * best;
        for (c, &t) in counts.iter_mut().zip(ys) {
            if y <= t {
                *c += 1;
            }
        }
    }
    counts.into_iter().map(|c| c as f64 / trials as f64).collect()
}

/// Same for `B` exchangeable effective antennas
/// `Y_b = E + sd (sqrt(ρ0) d0 + sqrt(1 - ρ0) e_b)`.
pub fn iid_gaussian_max_cdf(e: f64, sd: f64, rho0: f64, blocks: usize, ys: &[f64], trials: u64, seed: u64) -> Vec<f64> {
    block_gaussian_max_cdf(e, sd, 1.0, rho0, &vec![1; blocks], ys, trials, seed)
}

/// Outage of a Rayleigh link with mean SNR `snr_bar` at threshold `beta`.
pub fn rayleigh_outage(beta: f64, snr_bar: f64) -> f64 {
    1.0 - (-beta / snr_bar).exp()
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Mean, variance and their standard errors from raw samples.
pub struct MomentStats {
    pub mean: f64,
    pub var: f64,
    pub mean_se: f64,
    pub var_se: f64,
}

pub fn moment_stats(samples: impl Iterator<Item = f64>) -> MomentStats {
    let v: Vec<f64> = samples.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in &v {
        let d = (x - mean).powi(2);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    MomentStats {
        mean,
        var: m2 * n / (n - 1.0),
        mean_se: (m2 / n).sqrt(),
        var_se: ((m4 - m2 * m2) / n).sqrt(),
    }
}
