//! Classical Euclidean SOMs on the same toroidal grid, for comparison.
//!
//! Neither variant keeps its weights on the sphere.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::dataset::Dataset;
use crate::kernel::{ring_distance, GridCoord};
use crate::linalg::{squared_distance, Matrix, ShapeError};
use crate::rng::{stream_rng, Stream};

/// Batch-SOM nodes whose weighted count falls below this keep their weights.
pub const EMPTY_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("dataset is empty")]
    EmptyData,
    #[error("dimension mismatch: data has {data} features, codebook has {codebook}")]
    Dimension { data: usize, codebook: usize },
    #[error("codebook has {rows} rows, expected {side}x{side}")]
    NotSquare { rows: usize, side: usize },
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

/// Distance the Gaussian neighborhood is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborhoodMetric {
    /// Toroidal Euclidean distance between grid positions.
    #[default]
    GridTorus,
    /// Euclidean distance between the winner's and the node's weights.
    WeightSpace,
}

/// `exp(−dist² / 2σ²)` with `dist` the toroidal Euclidean distance between
/// two grid cells.
pub fn gaussian_neighborhood(winner: GridCoord, node: GridCoord, sigma: f64, side: usize) -> f64 {
    let di = ring_distance(winner.i, node.i, side) as f64;
    let dj = ring_distance(winner.j, node.j, side) as f64;
    gaussian(di * di + dj * dj, sigma)
}

#[inline]
fn gaussian(dist_sq: f64, sigma: f64) -> f64 {
    libm::exp(-dist_sq / (2.0 * sigma * sigma))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineSomConfig {
    pub alpha0: f64,
    pub sigma0: f64,
    pub theta_alpha: f64,
    pub theta_sigma: f64,
    /// Stop once the root-mean weight change of a step is at or below this.
    pub epsilon: f64,
    pub seed: u64,
    pub max_steps: usize,
    pub metric: NeighborhoodMetric,
}

impl OnlineSomConfig {
    pub fn new(side: usize) -> Self {
        OnlineSomConfig {
            alpha0: 0.5,
            sigma0: side as f64 / 2.0,
            theta_alpha: 0.999,
            theta_sigma: 0.999,
            epsilon: 1e-7,
            seed: 0,
            max_steps: 10_000,
            metric: NeighborhoodMetric::GridTorus,
        }
    }

    fn validate(&self) -> Result<(), BaselineError> {
        if !(self.alpha0 > 0.0) {
            return Err(BaselineError::Config("alpha0 must be positive"));
        }
        if !(self.sigma0 > 0.0) {
            return Err(BaselineError::Config("sigma0 must be positive"));
        }
        if !(self.theta_alpha > 0.0 && self.theta_alpha < 1.0) {
            return Err(BaselineError::Config("theta_alpha must lie in (0, 1)"));
        }
        if !(self.theta_sigma > 0.0 && self.theta_sigma < 1.0) {
            return Err(BaselineError::Config("theta_sigma must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineSomReport {
    pub steps: usize,
    /// Learning rate after the last annealing step.
    pub alpha: f64,
    /// Neighborhood width after the last annealing step.
    pub sigma: f64,
    /// `(1/K) sqrt(Σ_k ‖Δu_k‖²)` for every step taken.
    pub changes: Vec<f64>,
    pub converged: bool,
}

fn check_shapes(x: &Dataset, side: usize, u: &Matrix) -> Result<(), BaselineError> {
    if x.is_empty() {
        return Err(BaselineError::EmptyData);
    }
    if u.rows() != side * side {
        return Err(BaselineError::NotSquare { rows: u.rows(), side });
    }
    if u.cols() != x.dim() {
        return Err(BaselineError::Dimension { data: x.dim(), codebook: u.cols() });
    }
    Ok(())
}

fn nearest(row: &[f32], u: &Matrix) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, w) in u.iter_rows().enumerate() {
        let d = squared_distance(row, w);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

/// Online SOM: one random sample per step, Euclidean winner, Gaussian pull
/// on every node, geometric annealing of `α` and `σ`.
pub fn online_som_train(
    x: &Dataset,
    side: usize,
    init: &Matrix,
    cfg: &OnlineSomConfig,
) -> Result<(Matrix, OnlineSomReport), BaselineError> {
    check_shapes(x, side, init)?;
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, Stream::OnlineSampling);
    let mut u = init.clone();
    let k_count = u.rows();
    let mut alpha = cfg.alpha0;
    let mut sigma = cfg.sigma0;
    let mut changes = Vec::new();
    let mut converged = false;
    let mut weights = vec![0.0f64; k_count];

    for _ in 0..cfg.max_steps {
        let n = rng.random_range(0..x.len());
        let sample = x.samples().row(n);
        let winner = nearest(sample, &u);
        let wc = GridCoord::new(winner / side, winner % side);
        match cfg.metric {
            NeighborhoodMetric::GridTorus => {
                for (k, w) in weights.iter_mut().enumerate() {
                    *w = gaussian_neighborhood(wc, GridCoord::new(k / side, k % side), sigma, side);
                }
            }
            NeighborhoodMetric::WeightSpace => {
                let uw = u.row(winner).to_vec();
                for (k, w) in weights.iter_mut().enumerate() {
                    *w = gaussian(squared_distance(&uw, u.row(k)), sigma);
                }
            }
        }
        let mut change_sq = 0.0f64;
        for (k, row) in u.iter_rows_mut().enumerate() {
            let w = alpha * weights[k];
            if w == 0.0 {
                continue;
            }
            for (v, s) in row.iter_mut().zip(sample) {
                let old = *v;
                // (1 − w)·u + w·x lands exactly on x when w = 1.
                let new = ((1.0 - w) * old as f64 + w * *s as f64) as f32;
                let diff = new as f64 - old as f64;
                change_sq += diff * diff;
                *v = new;
            }
        }
        alpha *= cfg.theta_alpha;
        sigma *= cfg.theta_sigma;
        let change = libm::sqrt(change_sq) / k_count as f64;
        changes.push(change);
        if change <= cfg.epsilon {
            converged = true;
            break;
        }
    }
    Ok((u, OnlineSomReport { steps: changes.len(), alpha, sigma, changes, converged }))
}

/// Per-node winner counts and mean of the samples each node won.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchStats {
    pub counts: Vec<usize>,
    /// Rows of nodes with a zero count are all zeros and carry no meaning.
    pub means: Matrix,
    pub winners: Vec<usize>,
}

impl BatchStats {
    pub fn is_empty_node(&self, j: usize) -> bool {
        self.counts[j] == 0
    }
}

/// Assigns every sample to its Euclidean-nearest node.
pub fn batch_stats(x: &Dataset, u: &Matrix) -> Result<BatchStats, BaselineError> {
    if u.cols() != x.dim() {
        return Err(BaselineError::Dimension { data: x.dim(), codebook: u.cols() });
    }
    let (k_count, d) = u.shape();
    let mut sums = vec![0.0f64; k_count * d];
    let mut counts = vec![0usize; k_count];
    let mut winners = Vec::with_capacity(x.len());
    for row in x.samples().iter_rows() {
        let j = nearest(row, u);
        winners.push(j);
        counts[j] += 1;
        for (acc, v) in sums[j * d..(j + 1) * d].iter_mut().zip(row) {
            *acc += *v as f64;
        }
    }
    let mut means = Matrix::zeros(k_count, d)?;
    for j in 0..k_count {
        if counts[j] > 0 {
            let c = counts[j] as f64;
            for (m, s) in means.row_mut(j).iter_mut().zip(&sums[j * d..(j + 1) * d]) {
                *m = (s / c) as f32;
            }
        }
    }
    Ok(BatchStats { counts, means, winners })
}

/// One batch SOM update:
/// `u_k = Σ_j n_j h_jk x̄_j / Σ_j n_j h_jk` with a toroidal Gaussian `h`.
pub fn batch_som_epoch(x: &Dataset, side: usize, u: &Matrix, sigma: f64) -> Result<(Matrix, BatchStats), BaselineError> {
    check_shapes(x, side, u)?;
    if !(sigma > 0.0) {
        return Err(BaselineError::Config("sigma must be positive"));
    }
    let stats = batch_stats(x, u)?;
    let (k_count, d) = u.shape();
    // h depends only on the wrapped offset between two cells.
    let mut offsets = vec![0.0f64; side * side];
    for di in 0..side {
        for dj in 0..side {
            offsets[di * side + dj] = gaussian_neighborhood(GridCoord::new(0, 0), GridCoord::new(di, dj), sigma, side);
        }
    }
    let mut next = u.clone();
    let mut num = vec![0.0f64; d];
    for k in 0..k_count {
        let (ki, kj) = (k / side, k % side);
        num.fill(0.0);
        let mut den = 0.0f64;
        for j in 0..k_count {
            if stats.counts[j] == 0 {
                continue;
            }
            let (ji, jj) = (j / side, j % side);
            let h = offsets[((ki + side - ji) % side) * side + (kj + side - jj) % side];
            if h == 0.0 {
                continue;
            }
            let w = stats.counts[j] as f64 * h;
            den += w;
            for (acc, m) in num.iter_mut().zip(stats.means.row(j)) {
                *acc += w * *m as f64;
            }
        }
        if den < EMPTY_DENOMINATOR {
            continue;
        }
        for (dst, a) in next.row_mut(k).iter_mut().zip(&num) {
            *dst = (a / den) as f32;
        }
    }
    Ok((next, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic_blobs;

    fn grid(i: usize, j: usize) -> GridCoord {
        GridCoord::new(i, j)
    }

    #[test]
    fn neighborhood_values() {
        assert_eq!(gaussian_neighborhood(grid(2, 3), grid(2, 3), 0.7, 5), 1.0);
        let h1 = gaussian_neighborhood(grid(0, 0), grid(0, 1), 1.0, 5);
        assert!((h1 - 0.606_530_659_7).abs() < 1e-9);
        // wraps: (0,0) and (0,4) are neighbours on a 5-torus
        assert_eq!(gaussian_neighborhood(grid(0, 0), grid(0, 4), 1.0, 5), h1);
        for sigma in [0.3, 1.0, 4.0] {
            let a = gaussian_neighborhood(grid(0, 0), grid(0, 1), sigma, 9);
            let b = gaussian_neighborhood(grid(0, 0), grid(0, 2), sigma, 9);
            assert!(b < a);
        }
    }

    fn single_sample() -> Dataset {
        Dataset::raw(Matrix::from_rows(&[[0.3, -1.7, 2.2]]).unwrap(), None).unwrap()
    }

    #[test]
    fn online_winner_lands_on_sample() {
        let x = single_sample();
        let u = Matrix::from_rows(&[[0.0, 0.0, 0.0], [5.0, 5.0, 5.0], [9.0, 1.0, 0.0], [-3.0, 2.0, 1.0]]).unwrap();
        let cfg = OnlineSomConfig {
            alpha0: 1.0,
            sigma0: 1e-6,
            max_steps: 1,
            ..OnlineSomConfig::new(2)
        };
        let (out, report) = online_som_train(&x, 2, &u, &cfg).unwrap();
        assert_eq!(out.row(0), x.samples().row(0));
        for k in 1..4 {
            assert_eq!(out.row(k), u.row(k));
        }
        assert_eq!(report.steps, 1);
    }

    #[test]
    fn online_annealing_is_geometric() {
        let x = synthetic_blobs(2, 5, 3, 3.0, 1).unwrap();
        let u = Matrix::new(4, 3, vec![0.1; 12]).unwrap();
        let cfg = OnlineSomConfig {
            alpha0: 0.8,
            sigma0: 2.0,
            theta_alpha: 0.5,
            theta_sigma: 0.9,
            epsilon: 1e-300,
            max_steps: 3,
            ..OnlineSomConfig::new(2)
        };
        let (_, report) = online_som_train(&x, 2, &u, &cfg).unwrap();
        assert_eq!(report.steps, 3);
        assert_eq!(report.alpha, 0.8 / 8.0);
        assert!((report.sigma - 2.0 * 0.729).abs() < 1e-12);
    }

    #[test]
    fn online_is_deterministic() {
        let x = synthetic_blobs(3, 10, 4, 3.0, 2).unwrap();
        let u = Matrix::new(9, 4, (0..36).map(|i| (i as f32 * 0.37).sin()).collect()).unwrap();
        let cfg = OnlineSomConfig { seed: 5, max_steps: 200, ..OnlineSomConfig::new(3) };
        let a = online_som_train(&x, 3, &u, &cfg).unwrap();
        let b = online_som_train(&x, 3, &u, &cfg).unwrap();
        assert_eq!(a, b);
        let w = OnlineSomConfig { metric: NeighborhoodMetric::WeightSpace, ..cfg };
        assert!(online_som_train(&x, 3, &u, &w).is_ok());
    }

    #[test]
    fn online_change_is_zero_without_movement() {
        let x = single_sample();
        // Every node already sits on the only sample.
        let u = Matrix::new(4, 3, x.samples().as_slice().repeat(4)).unwrap();
        let cfg = OnlineSomConfig { max_steps: 5, ..OnlineSomConfig::new(2) };
        let (_, report) = online_som_train(&x, 2, &u, &cfg).unwrap();
        assert_eq!(report.changes, vec![0.0]);
        assert!(report.converged);
    }

    #[test]
    fn online_rejects_bad_input() {
        let x = single_sample();
        let u = Matrix::zeros(4, 2).unwrap();
        assert!(matches!(online_som_train(&x, 2, &u, &OnlineSomConfig::new(2)), Err(BaselineError::Dimension { .. })));
        let u = Matrix::zeros(4, 3).unwrap();
        let bad = OnlineSomConfig { theta_alpha: 1.0, ..OnlineSomConfig::new(2) };
        assert!(online_som_train(&x, 2, &u, &bad).is_err());
    }

    #[test]
    fn batch_single_sample_pulls_reachable_nodes() {
        let x = single_sample();
        let u = Matrix::from_rows(&[[0.0, 0.0, 0.0], [5.0, 5.0, 5.0], [9.0, 1.0, 0.0], [-3.0, 2.0, 1.0]]).unwrap();
        let (out, stats) = batch_som_epoch(&x, 2, &u, 1.0).unwrap();
        assert_eq!(stats.counts.iter().sum::<usize>(), 1);
        for k in 0..4 {
            for (a, b) in out.row(k).iter().zip(x.samples().row(0)) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn batch_stats_flag_empty_nodes() {
        let x = single_sample();
        let u = Matrix::from_rows(&[[0.0, 0.0, 0.0], [5.0, 5.0, 5.0], [9.0, 1.0, 0.0], [-3.0, 2.0, 1.0]]).unwrap();
        let stats = batch_stats(&x, &u).unwrap();
        assert!(!stats.is_empty_node(0));
        assert!((1..4).all(|j| stats.is_empty_node(j)));
    }

    #[test]
    fn batch_tiny_sigma_keeps_unreached_nodes() {
        let x = single_sample();
        let u = Matrix::from_rows(&[[0.0, 0.0, 0.0], [5.0, 5.0, 5.0], [9.0, 1.0, 0.0], [-3.0, 2.0, 1.0]]).unwrap();
        let (out, _) = batch_som_epoch(&x, 2, &u, 1e-6).unwrap();
        assert_eq!(out.row(0), x.samples().row(0));
        for k in 1..4 {
            assert_eq!(out.row(k), u.row(k));
        }
    }
}
