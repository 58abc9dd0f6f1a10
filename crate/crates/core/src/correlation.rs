//! Port correlation under Clarke's isotropic-scattering model and its
//! block-correlation approximation.
//!
//! The block model replaces the Toeplitz matrix by `B` diagonal blocks, each
//! an `L_b × L_b` matrix with unit diagonal and constant off-diagonal `mu`.
//! Such a block has eigenvalues `1 + (L_b - 1) mu` (once) and `1 - mu`
//! (`L_b - 1` times), so the full model spectrum is
//! `{1 + (L_b - 1) mu}_b ∪ {1 - mu}^(N - B)`.
//!
//! `B` is the number of eigenvalues of the true matrix at or above
//! `lambda_th`. The sizes minimise the squared distance between the two
//! descending-sorted spectra. Starting from
//! `round((λ_b - (1 - mu)) / mu)` the sum is repaired one port at a time,
//! always taking the step that raises the distance least. The objective is
//! separable and convex in each `L_b`, so this marginal allocation reaches
//! the integer optimum.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub const DEFAULT_MU: f64 = 0.97;
pub const DEFAULT_LAMBDA_TH: f64 = 0.1;

/// `sinc(2π (i - j) W / (N - 1))` with `sinc(0) = 1`; identically 1 when
/// `N = 1`. Indices are 1-based port labels but only their difference
/// matters.
pub fn clarke_coefficient(port_i: usize, port_j: usize, aperture: f64, ports: usize) -> f64 {
    if ports < 2 || port_i == port_j {
        return 1.0;
    }
    let lag = port_i as f64 - port_j as f64;
    sinc(2.0 * std::f64::consts::PI * lag * aperture / (ports - 1) as f64)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// A validated correlation matrix together with its spectrum.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
    /// Eigenvalues, descending.
    eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    eigenvectors: DMatrix<f64>,
}

impl CorrelationMatrix {
    /// Checks symmetry, unit diagonal, entries in [-1, 1] and numerical
    /// positive semidefiniteness (`λ_min >= -1e-9 N`).
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::Domain(format!(
                "correlation matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for i in 0..n {
            if (entries[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!("diagonal entry {i} is {}, expected 1", entries[(i, i)])));
            }
            for j in 0..i {
                let v = entries[(i, j)];
                if (v - entries[(j, i)]).abs() > 1e-12 {
                    return Err(Error::Domain(format!("matrix is not symmetric at ({i}, {j})")));
                }
                if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&v) {
                    return Err(Error::Domain(format!("entry ({i}, {j}) = {v} outside [-1, 1]")));
                }
            }
        }
        let eig = SymmetricEigen::new(entries.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        let floor = -1e-9 * n as f64;
        if eigenvalues[n - 1] < floor {
            return Err(Error::Numerical(format!(
                "correlation matrix is not positive semidefinite: min eigenvalue {:e}",
                eigenvalues[n - 1]
            )));
        }
        Ok(CorrelationMatrix {
            entries,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_matrix(DMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `N × r` factor `F` with `F Fᵀ = Σ`, dropping eigen-directions whose
    /// eigenvalue is below `1e-13 N` (negative round-off included).
    pub fn root(&self) -> DMatrix<f64> {
        let n = self.n();
        let cutoff = 1e-13 * n as f64;
        let rank = self.eigenvalues.iter().take_while(|&&l| l > cutoff).count().max(1);
        DMatrix::from_fn(n, rank, |r, c| self.eigenvectors[(r, c)] * self.eigenvalues[c].max(0.0).sqrt())
    }
}

/// Clarke-model Toeplitz correlation matrix of `ports` ports spread over
/// `aperture` wavelengths.
pub fn build_sigma(ports: usize, aperture: f64) -> Result<CorrelationMatrix> {
    if ports == 0 {
        return Err(Error::config("N", "must be a positive integer (count of ports)"));
    }
    if !(aperture > 0.0 && aperture.is_finite()) {
        return Err(Error::config("W", format!("must be a positive number of wavelengths, got {aperture}")));
    }
    let first_row: Vec<f64> = (0..ports).map(|k| clarke_coefficient(1, 1 + k, aperture, ports)).collect();
    let entries = DMatrix::from_fn(ports, ports, |i, j| first_row[i.abs_diff(j)]);
    CorrelationMatrix::from_matrix(entries)
}

/// Fitted block-correlation structure.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub mu: f64,
    /// `L_1..L_B` in descending order of the eigenvalue each block matches.
    pub block_sizes: Vec<usize>,
    pub lambda_th: f64,
    /// Squared eigenvalue distance reached by `block_sizes`.
    pub fit_distance: f64,
}

impl BlockPartition {
    pub fn block_count(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn ports(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Distinct block sizes with their multiplicities, ascending by size.
    pub fn size_histogram(&self) -> Vec<(usize, usize)> {
        let mut sizes = self.block_sizes.clone();
        sizes.sort_unstable();
        let mut out: Vec<(usize, usize)> = Vec::new();
        for s in sizes {
            match out.last_mut() {
                Some((size, count)) if *size == s => *count += 1,
                _ => out.push((s, 1)),
            }
        }
        out
    }
}

/// Squared distance between the descending spectrum `target` and the
/// spectrum of the block model with the given sizes.
pub fn spectrum_distance(target: &[f64], block_sizes: &[usize], mu: f64) -> f64 {
    let n = target.len();
    let mut model: Vec<f64> = block_sizes.iter().map(|&l| 1.0 + (l as f64 - 1.0) * mu).collect();
    model.resize(n, 1.0 - mu);
    model.sort_by(|a, b| b.total_cmp(a));
    target.iter().zip(&model).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn fit_block_partition(sigma: &CorrelationMatrix, lambda_th: f64, mu: f64) -> Result<BlockPartition> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Domain(format!("mu must lie in (0, 1], got {mu}")));
    }
    if !(lambda_th > 0.0 && lambda_th.is_finite()) {
        return Err(Error::Domain(format!("lambda_th must be positive, got {lambda_th}")));
    }
    let eig = sigma.eigenvalues();
    let n = eig.len();
    let blocks = eig.iter().filter(|&&l| l >= lambda_th).count();
    if blocks == 0 {
        return Err(Error::BlockFit(format!(
            "no eigenvalue reaches lambda_th = {lambda_th} (largest is {:.4}); use a smaller lambda_th",
            eig[0]
        )));
    }

    let mut sizes: Vec<usize> = eig[..blocks]
        .iter()
        .map(|&l| ((l - (1.0 - mu)) / mu).round().max(1.0) as usize)
        .collect();

    let mut total: usize = sizes.iter().sum();
    while total != n {
        let grow = total < n;
        let mut best: Option<(usize, f64)> = None;
        for b in 0..blocks {
            if !grow && sizes[b] == 1 {
                continue;
            }
            let old = sizes[b];
            sizes[b] = if grow { old + 1 } else { old - 1 };
            let d = spectrum_distance(eig, &sizes, mu);
            sizes[b] = old;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((b, d));
            }
        }
        // blocks <= n guarantees a shrinkable block whenever total > n.
        let (b, _) = best.expect("a feasible step always exists");
        if grow {
            sizes[b] += 1;
            total += 1;
        } else {
            sizes[b] -= 1;
            total -= 1;
        }
    }

    let fit_distance = spectrum_distance(eig, &sizes, mu);
    Ok(BlockPartition {
        mu,
        block_sizes: sizes,
        lambda_th,
        fit_distance,
    })
}
