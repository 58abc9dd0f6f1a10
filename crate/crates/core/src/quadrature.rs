//! Gauss–Chebyshev rules used by the analytic pipeline, plus an adaptive
//! Gauss–Kronrod integrator for the bivariate envelope moment.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Truncation radii and node count shared by every one-dimensional integral
/// of the analytic outage pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Nodes per axis.
    pub u: usize,
    /// Gaussian integrals run over `±h_gauss` standard deviations.
    pub h_gauss: f64,
    /// Direct-link envelope integral stops at `h_chi * sqrt(eps3)`.
    pub h_chi: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            u: 64,
            h_gauss: 6.0,
            h_chi: 6.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.u < 4 {
            return Err(Error::config("u", format!("node count must be at least 4, got {}", self.u)));
        }
        if !(self.h_gauss >= 4.0) {
            return Err(Error::config("h_gauss", format!("must be >= 4 standard deviations, got {}", self.h_gauss)));
        }
        if !(self.h_chi >= 4.0) {
            return Err(Error::config("h_chi", format!("must be >= 4 (units of sqrt(eps3)), got {}", self.h_chi)));
        }
        Ok(())
    }

    /// Same truncation, twice the nodes.
    pub fn refined(&self) -> Self {
        QuadratureSpec { u: 2 * self.u, ..*self }
    }
}

/// Nodes `cos((2t-1)pi/(2u))`, `t = 1..=u`, and their `sqrt(1 - p^2)` factors.
pub fn chebyshev_nodes(u: usize) -> (Vec<f64>, Vec<f64>) {
    (1..=u)
        .map(|t| {
            let theta = (2 * t - 1) as f64 * PI / (2 * u) as f64;
            (theta.cos(), theta.sin())
        })
        .unzip()
}

/// `∫_a^b f ≈ ((b-a)π/(2u)) Σ sqrt(1-p_t²) f(((b-a)p_t + a + b)/2)`.
#[derive(Debug, Clone)]
pub struct ChebyshevRule {
    nodes: Vec<f64>,
    root_weights: Vec<f64>,
}

impl ChebyshevRule {
    pub fn new(u: usize) -> Self {
        let (nodes, root_weights) = chebyshev_nodes(u.max(1));
        ChebyshevRule { nodes, root_weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let scale = (b - a) * PI / (2 * self.len()) as f64;
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.root_weights)
            .map(|(&p, &w)| w * f(half * p + mid))
            .sum();
        scale * sum
    }

    /// The same rule applied after the substitution
    /// `p -> (15p - 10p³ + 3p⁵)/8`, whose Jacobian `15(1-p²)²/8` vanishes at
    /// both ends. Integrands that do not vanish at `a` or `b` then converge
    /// at high order instead of `O(u^-2)`.
    pub fn integrate_tapered<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let scale = (b - a) * PI / (2 * self.len()) as f64;
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.root_weights)
            .map(|(&p, &w)| {
                let p2 = p * p;
                let mapped = p * (15.0 - 10.0 * p2 + 3.0 * p2 * p2) / 8.0;
                let jac = 15.0 / 8.0 * (1.0 - p2) * (1.0 - p2);
                w * jac * f(half * mapped + mid)
            })
            .sum();
        scale * sum
    }

    /// Abscissae and weights for `E[g(Z)]`, `Z ~ N(0, variance)`, truncated to
    /// `±h` standard deviations. The Gaussian density is folded into the
    /// weights.
    pub fn gaussian_nodes(&self, variance: f64, h: f64) -> GaussianNodes {
        let sd = variance.sqrt();
        let radius = h * sd;
        let scale = 2.0 * radius * PI / (2 * self.len()) as f64;
        let norm = 1.0 / (2.0 * PI * variance).sqrt();
        let (points, weights) = self
            .nodes
            .iter()
            .zip(&self.root_weights)
            .map(|(&p, &w)| {
                let z = radius * p;
                (z, scale * w * norm * (-0.5 * z * z / variance).exp())
            })
            .unzip();
        GaussianNodes { points, weights }
    }
}

#[derive(Debug, Clone)]
pub struct GaussianNodes {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussianNodes {
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&z, &w)| w * g(z)).sum()
    }
}

// Gauss–Kronrod 7/15 (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of an adaptive integration: value and estimated absolute error.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive G7K15 on `[a, b]`: always splits the segment with the
/// largest error estimate until the total error meets
/// `max(abs_tol, rel_tol * |value|)`.
pub fn adaptive_kronrod<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<Estimate> {
    let (value, error) = kronrod15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    while total_err > abs_tol.max(rel_tol * total.abs()) || !total.is_finite() {
        if heap.len() >= max_segments || !total_err.is_finite() {
            return Err(Error::Numerical(format!(
                "adaptive quadrature on [{a}, {b}] did not converge: residual {total_err:e} after {max_segments} segments"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = kronrod15(&mut f, worst.a, mid);
        let (rv, re) = kronrod15(&mut f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
    }
    // Re-sum to shed the drift of the running updates.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Estimate { value, error })
}
