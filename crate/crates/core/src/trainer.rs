//! Batch D-SOM training.
//!
//! One epoch, for data `x` (`N x d`) and codebook `u` (`K x d`, `K = L²`):
//!
//! 1. keep `v = u`;
//! 2. similarities `r = x uᵀ`;
//! 3. winners `c[n] = argmax_k r[n][k]`;
//! 4. overwrite row `n` of `r` with the diffusion kernel recentred on the
//!    grid cell of `c[n]`;
//! 5. `u = rᵀ x`, then normalize every row;
//! 6. `δ = 1 − mean_k u_k · v_k`.
//!
//! [`train`] repeats epochs for each entry of a shrinking schedule of
//! diffusion step counts. With the delta kernel (`T = 0`) an epoch is exactly
//! one spherical K-means step; [`spherical_kmeans`] implements that algorithm
//! on its own, without sharing any of the epoch code, so the two can be
//! checked against each other.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::dataset::Dataset;
use crate::kernel::{compute_kernel, winner_to_grid, DiffusionKernel, KernelError, DEFAULT_DIFF_COEFF};
use crate::linalg::{self, IndexVector, Matrix, ShapeError, DEGENERATE_NORM_FLOOR};
use crate::rng::{stream_rng, Stream};

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_MAX_INNER_ITERS: usize = 500;

/// Pipeline stage reported when a non-finite value shows up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Similarity,
    Update,
    Alignment,
}

impl core::fmt::Display for Stage {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Stage::Similarity => "similarity product",
            Stage::Update => "codebook update",
            Stage::Alignment => "alignment error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error("non-finite values in the {0}")]
    NonFinite(Stage),
    #[error("need at least {needed} samples to draw the codebook, have {available}")]
    NotEnoughSamples { needed: usize, available: usize },
    #[error("codebook has {rows} rows, expected {side}x{side}")]
    NotSquare { rows: usize, side: usize },
    #[error("dimension mismatch: data has {data} features, codebook has {codebook}")]
    Dimension { data: usize, codebook: usize },
    #[error("kernel side {kernel} does not match codebook side {codebook}")]
    KernelSide { kernel: usize, codebook: usize },
}

/// How the initial codebook is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitStrategy {
    /// I.i.d. standard normal entries, rows normalized.
    #[default]
    RandomGaussian,
    /// `K` distinct samples drawn without replacement.
    SampleDraw,
}

/// Neurons on an `L x L` torus, one unit-norm weight row each.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    side: usize,
    weights: Matrix,
}

impl Codebook {
    pub fn new(side: usize, weights: Matrix) -> Result<Self, TrainError> {
        if weights.rows() != side * side {
            return Err(TrainError::NotSquare { rows: weights.rows(), side });
        }
        Ok(Codebook { side, weights })
    }

    /// Normalizes `weights` before wrapping them. Degenerate rows are an error.
    pub fn from_raw(side: usize, mut weights: Matrix) -> Result<Self, TrainError> {
        if !linalg::normalize_rows(&mut weights, DEGENERATE_NORM_FLOOR).is_empty() {
            return Err(TrainError::Config("codebook contains a zero row"));
        }
        Codebook::new(side, weights)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of neurons, `L²`.
    pub fn len(&self) -> usize {
        self.weights.rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn neuron(&self, k: usize) -> &[f32] {
        self.weights.row(k)
    }

    pub fn into_weights(self) -> Matrix {
        self.weights
    }
}

/// Default annealing schedule: `L/2, L/2 − 1, …, 2`.
///
/// Grids with `L < 4` have no entry in that range and get `[L/2]` instead.
pub fn default_schedule(side: usize) -> Vec<usize> {
    let top = side / 2;
    if top < 2 {
        return vec![top];
    }
    (2..=top).rev().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub grid_side: usize,
    pub diff_coeff: f32,
    /// Phase ends once `δ ≤ epsilon`.
    pub epsilon: f64,
    /// Safety cap on epochs per schedule entry.
    pub max_inner_iters: usize,
    pub seed: u64,
    pub init: InitStrategy,
    /// Diffusion step counts, strictly decreasing.
    pub schedule: Vec<usize>,
}

impl TrainConfig {
    pub fn new(grid_side: usize) -> Self {
        TrainConfig {
            grid_side,
            diff_coeff: DEFAULT_DIFF_COEFF,
            epsilon: DEFAULT_EPSILON,
            max_inner_iters: DEFAULT_MAX_INNER_ITERS,
            seed: 0,
            init: InitStrategy::RandomGaussian,
            schedule: default_schedule(grid_side),
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.grid_side < 2 {
            return Err(TrainError::Config("grid side must be at least 2"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(TrainError::Config("epsilon must be positive"));
        }
        if self.max_inner_iters == 0 {
            return Err(TrainError::Config("max_inner_iters must be at least 1"));
        }
        if self.schedule.is_empty() {
            return Err(TrainError::Config("schedule is empty"));
        }
        if self.schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(TrainError::Config("schedule must be strictly decreasing"));
        }
        if !(self.diff_coeff > 0.0 && self.diff_coeff <= crate::kernel::MAX_STABLE_COEFF) {
            return Err(KernelError::Unstable(self.diff_coeff).into());
        }
        Ok(())
    }
}

/// Draws the initial codebook. Deterministic in `seed`.
pub fn init_codebook(
    side: usize,
    dim: usize,
    strategy: InitStrategy,
    seed: u64,
    data: Option<&Dataset>,
) -> Result<Codebook, TrainError> {
    let k = side * side;
    let mut rng = stream_rng(seed, Stream::CodebookInit);
    match strategy {
        InitStrategy::RandomGaussian => {
            let mut w = Matrix::zeros(k, dim)?;
            for v in w.as_mut_slice() {
                *v = rng.sample::<f64, _>(StandardNormal) as f32;
            }
            Codebook::from_raw(side, w)
        }
        InitStrategy::SampleDraw => {
            let data = data.ok_or(TrainError::Config("sample draw needs a dataset"))?;
            if data.len() < k {
                return Err(TrainError::NotEnoughSamples { needed: k, available: data.len() });
            }
            if data.dim() != dim {
                return Err(TrainError::Dimension { data: data.dim(), codebook: dim });
            }
            let picks = rand::seq::index::sample(&mut rng, data.len(), k).into_vec();
            Codebook::new(side, data.samples().select_rows(&picks)?)
        }
    }
}

/// Output of one [`dsom_epoch`].
#[derive(Debug, Clone)]
pub struct EpochOutcome {
    pub codebook: Codebook,
    /// Alignment error against the input codebook, rounded to `f32`.
    pub delta: f32,
    pub winners: IndexVector,
    /// Neurons that received no update and kept their previous weights.
    pub degenerate: Vec<usize>,
}

/// Buffers reused across epochs on the same data.
pub struct EpochWorkspace {
    /// `N x K` responsibilities.
    resp: Matrix,
}

impl EpochWorkspace {
    pub fn new(x: &Dataset, neurons: usize) -> Result<Self, TrainError> {
        Ok(EpochWorkspace { resp: Matrix::zeros(x.len(), neurons)? })
    }

    /// The responsibility matrix left by the last epoch.
    pub fn responsibilities(&self) -> &Matrix {
        &self.resp
    }
}

/// One batch D-SOM update; see the module docs for the steps.
pub fn dsom_epoch(x: &Dataset, u: &Codebook, kernel: &DiffusionKernel) -> Result<EpochOutcome, TrainError> {
    let mut ws = EpochWorkspace::new(x, u.len())?;
    run_epoch(&mut ws, x, u, kernel)
}

/// [`dsom_epoch`] with caller-owned buffers.
pub fn run_epoch(
    ws: &mut EpochWorkspace,
    x: &Dataset,
    u: &Codebook,
    kernel: &DiffusionKernel,
) -> Result<EpochOutcome, TrainError> {
    if x.dim() != u.dim() {
        return Err(TrainError::Dimension { data: x.dim(), codebook: u.dim() });
    }
    if kernel.side() != u.side() {
        return Err(TrainError::KernelSide { kernel: kernel.side(), codebook: u.side() });
    }
    if ws.resp.shape() != (x.len(), u.len()) {
        *ws = EpochWorkspace::new(x, u.len())?;
    }

    linalg::matmul_nt_into(x.samples(), u.weights(), &mut ws.resp)?;
    if !ws.resp.is_finite() {
        return Err(TrainError::NonFinite(Stage::Similarity));
    }
    let winners = linalg::argmax_rows(&ws.resp);
    spread_kernel(&mut ws.resp, winners.as_slice(), kernel)?;

    let mut next = linalg::matmul_tn(&ws.resp, x.samples())?;
    if !next.is_finite() {
        return Err(TrainError::NonFinite(Stage::Update));
    }
    let degenerate = linalg::normalize_rows(&mut next, DEGENERATE_NORM_FLOOR);
    for &k in &degenerate {
        next.row_mut(k).copy_from_slice(u.neuron(k));
    }
    let delta = linalg::mean_alignment_error(&next, u.weights())?;
    if !delta.is_finite() {
        return Err(TrainError::NonFinite(Stage::Alignment));
    }
    Ok(EpochOutcome {
        codebook: Codebook { side: u.side(), weights: next },
        delta: delta as f32,
        winners,
        degenerate,
    })
}

/// Overwrites row `n` of `resp` with the kernel centred on `winners[n]`.
fn spread_kernel(resp: &mut Matrix, winners: &[usize], kernel: &DiffusionKernel) -> Result<(), TrainError> {
    let side = kernel.side();
    for &c in winners {
        winner_to_grid(c, side)?;
    }
    let cols = resp.cols();
    let write = |(row, &c): (&mut [f32], &usize)| {
        kernel.write_shifted(crate::kernel::GridCoord { i: c / side, j: c % side }, row);
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        resp.as_mut_slice().par_chunks_mut(cols).zip(winners.par_iter()).for_each(write);
    }
    #[cfg(not(feature = "parallel"))]
    {
        resp.as_mut_slice().chunks_mut(cols).zip(winners.iter()).for_each(write);
    }
    Ok(())
}

/// Why a schedule entry stopped iterating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `δ ≤ ε`.
    Converged,
    /// `δ` repeated the previous epoch's value exactly.
    Stalled,
    /// `max_inner_iters` epochs ran without either of the above.
    IterationCap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRecord {
    pub steps: usize,
    /// 0-based epoch index within the schedule entry.
    pub iteration: usize,
    pub delta: f32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSummary {
    pub steps: usize,
    pub epochs: usize,
    pub final_delta: f32,
    pub stop: StopReason,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub records: Vec<HistoryRecord>,
    pub phases: Vec<PhaseSummary>,
}

/// Handed to the observer after every epoch of [`train_from`].
pub struct EpochEvent<'a> {
    pub steps: usize,
    pub iteration: usize,
    pub delta: f32,
    pub codebook: &'a Codebook,
    pub previous: &'a Codebook,
    pub winners: &'a IndexVector,
    pub degenerate: &'a [usize],
}

/// Draws the initial codebook per `cfg` and trains it.
pub fn train(x: &Dataset, cfg: &TrainConfig) -> Result<(Codebook, TrainHistory), TrainError> {
    cfg.validate()?;
    let init = init_codebook(cfg.grid_side, x.dim(), cfg.init, cfg.seed, Some(x))?;
    train_from(x, init, cfg, |_| {})
}

/// Trains `init` through every schedule entry, calling `observe` after each
/// epoch.
pub fn train_from<F>(x: &Dataset, init: Codebook, cfg: &TrainConfig, mut observe: F) -> Result<(Codebook, TrainHistory), TrainError>
where
    F: FnMut(&EpochEvent<'_>),
{
    cfg.validate()?;
    if init.side() != cfg.grid_side {
        return Err(TrainError::NotSquare { rows: init.len(), side: cfg.grid_side });
    }
    let mut ws = EpochWorkspace::new(x, init.len())?;
    let mut u = init;
    let mut history = TrainHistory::default();
    for &steps in &cfg.schedule {
        let kernel = compute_kernel(cfg.grid_side, cfg.diff_coeff, steps)?;
        let mut previous: Option<f32> = None;
        let mut summary = PhaseSummary { steps, epochs: 0, final_delta: 1.0, stop: StopReason::IterationCap };
        for iteration in 0..cfg.max_inner_iters {
            let out = run_epoch(&mut ws, x, &u, &kernel)?;
            observe(&EpochEvent {
                steps,
                iteration,
                delta: out.delta,
                codebook: &out.codebook,
                previous: &u,
                winners: &out.winners,
                degenerate: &out.degenerate,
            });
            history.records.push(HistoryRecord { steps, iteration, delta: out.delta });
            u = out.codebook;
            summary.epochs = iteration + 1;
            summary.final_delta = out.delta;
            if (out.delta as f64) <= cfg.epsilon {
                summary.stop = StopReason::Converged;
                break;
            }
            if previous == Some(out.delta) {
                summary.stop = StopReason::Stalled;
                break;
            }
            previous = Some(out.delta);
        }
        history.phases.push(summary);
    }
    Ok((u, history))
}

/// Centroids and assignments from [`spherical_kmeans`].
#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub centroids: Matrix,
    /// Assignment that produced `centroids`.
    pub winners: Vec<usize>,
    pub iterations: usize,
}

/// Spherical K-means from `k` distinct samples drawn with `seed`.
pub fn spherical_kmeans(x: &Dataset, k: usize, seed: u64, max_iters: usize) -> Result<KMeansResult, TrainError> {
    if k == 0 || k > x.len() {
        return Err(TrainError::NotEnoughSamples { needed: k.max(1), available: x.len() });
    }
    let mut rng = stream_rng(seed, Stream::KMeansInit);
    let picks = rand::seq::index::sample(&mut rng, x.len(), k).into_vec();
    spherical_kmeans_from(x, x.samples().select_rows(&picks)?, max_iters)
}

/// Lloyd iterations with dot-product assignment and renormalized-mean
/// centroids, until the assignment repeats or `max_iters` updates ran.
/// Empty clusters keep their previous centroid.
pub fn spherical_kmeans_from(x: &Dataset, init: Matrix, max_iters: usize) -> Result<KMeansResult, TrainError> {
    let (n, d) = (x.len(), x.dim());
    if init.cols() != d {
        return Err(TrainError::Dimension { data: d, codebook: init.cols() });
    }
    let k = init.rows();
    let data = x.samples().as_slice();
    let mut centroids = init.into_vec();
    let mut assignment: Vec<usize> = Vec::new();
    let mut iterations = 0;
    while iterations < max_iters {
        let mut next = Vec::with_capacity(n);
        for s in 0..n {
            let xs = &data[s * d..(s + 1) * d];
            let mut best = 0;
            let mut best_sim = f32::NEG_INFINITY;
            for c in 0..k {
                let mut sim = 0.0f64;
                for (a, b) in xs.iter().zip(&centroids[c * d..(c + 1) * d]) {
                    sim += *a as f64 * *b as f64;
                }
                let sim = sim as f32;
                if sim > best_sim {
                    best_sim = sim;
                    best = c;
                }
            }
            next.push(best);
        }
        if next == assignment {
            break;
        }
        let mut sums = vec![0.0f64; k * d];
        let mut counts = vec![0usize; k];
        for (s, &c) in next.iter().enumerate() {
            counts[c] += 1;
            for (acc, v) in sums[c * d..(c + 1) * d].iter_mut().zip(&data[s * d..(s + 1) * d]) {
                *acc += *v as f64;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let sum = &sums[c * d..(c + 1) * d];
            let norm = libm::sqrt(sum.iter().map(|v| v * v).sum::<f64>());
            if norm <= DEGENERATE_NORM_FLOOR {
                continue;
            }
            for (dst, v) in centroids[c * d..(c + 1) * d].iter_mut().zip(sum) {
                *dst = (v / norm) as f32;
            }
        }
        assignment = next;
        iterations += 1;
    }
    Ok(KMeansResult { centroids: Matrix::new(k, d, centroids)?, winners: assignment, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic_blobs;

    fn unit_dataset(rows: &[&[f32]]) -> Dataset {
        let mut m = Matrix::from_rows(rows).unwrap();
        linalg::normalize_rows(&mut m, DEGENERATE_NORM_FLOOR);
        Dataset::unit(m, None).unwrap()
    }

    #[test]
    fn default_schedule_bounds() {
        assert_eq!(default_schedule(10), vec![5, 4, 3, 2]);
        assert_eq!(default_schedule(20), (2..=10).rev().collect::<Vec<_>>());
        assert_eq!(default_schedule(4), vec![2]);
        assert_eq!(default_schedule(5), vec![2]);
        assert_eq!(default_schedule(3), vec![1]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = TrainConfig::new(4);
        assert!(cfg.validate().is_ok());
        cfg.schedule = vec![2, 2];
        assert!(cfg.validate().is_err());
        cfg.schedule = vec![];
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::new(4);
        cfg.epsilon = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::new(4);
        cfg.diff_coeff = 0.3;
        assert!(matches!(cfg.validate(), Err(TrainError::Kernel(KernelError::Unstable(_)))));
        assert!(TrainConfig::new(1).validate().is_err());
    }

    #[test]
    fn gaussian_init_is_unit_and_deterministic() {
        let a = init_codebook(2, 3, InitStrategy::RandomGaussian, 42, None).unwrap();
        let b = init_codebook(2, 3, InitStrategy::RandomGaussian, 42, None).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a.weights().as_slice(), b.weights().as_slice());
        for n in a.weights().row_norms() {
            assert!((n - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sample_draw_rows_come_from_data() {
        let ds = synthetic_blobs(3, 10, 5, 4.0, 1).unwrap();
        let cb = init_codebook(3, 5, InitStrategy::SampleDraw, 8, Some(&ds)).unwrap();
        let mut seen = Vec::new();
        for k in 0..cb.len() {
            let pos = ds.samples().iter_rows().position(|r| r == cb.neuron(k));
            assert!(pos.is_some());
            seen.push(pos.unwrap());
        }
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 9, "draw must be without replacement");
    }

    #[test]
    fn sample_draw_needs_enough_rows() {
        let ds = synthetic_blobs(2, 3, 4, 4.0, 1).unwrap();
        assert_eq!(
            init_codebook(3, 4, InitStrategy::SampleDraw, 0, Some(&ds)).unwrap_err(),
            TrainError::NotEnoughSamples { needed: 9, available: 6 }
        );
    }

    #[test]
    fn gaussian_init_is_nearly_orthogonal_in_high_dimension() {
        let cb = init_codebook(20, 784, InitStrategy::RandomGaussian, 5, None).unwrap();
        let gram = linalg::matmul_nt(cb.weights(), cb.weights()).unwrap();
        let k = cb.len();
        let mut sum = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    sum += gram.get(i, j) as f64;
                }
            }
        }
        let mean = sum / (k * (k - 1)) as f64;
        assert!(mean.abs() < 0.05, "{mean}");
    }

    #[test]
    fn delta_kernel_fixed_point_when_data_is_codebook() {
        let cb = init_codebook(3, 6, InitStrategy::RandomGaussian, 2, None).unwrap();
        let ds = Dataset::unit(cb.weights().clone(), None).unwrap();
        let kernel = compute_kernel(3, 0.25, 0).unwrap();
        let out = dsom_epoch(&ds, &cb, &kernel).unwrap();
        assert!(out.delta <= 1e-6);
        assert_eq!(out.winners.as_slice(), &(0..9).collect::<Vec<_>>()[..]);
        for (a, b) in out.codebook.weights().as_slice().iter().zip(cb.weights().as_slice()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn single_sample_pulls_every_neuron_onto_it() {
        let ds = unit_dataset(&[&[0.3, -0.2, 0.9, 0.1]]);
        let cb = init_codebook(4, 4, InitStrategy::RandomGaussian, 3, None).unwrap();
        // T = 4 on a 4x4 torus reaches every cell.
        let kernel = compute_kernel(4, 0.25, 4).unwrap();
        let out = dsom_epoch(&ds, &cb, &kernel).unwrap();
        assert!(out.degenerate.is_empty());
        let x = ds.samples().row(0);
        for k in 0..16 {
            for (a, b) in out.codebook.neuron(k).iter().zip(x) {
                assert!((a - b).abs() < 1e-6);
            }
        }
        // δ = 1 − mean_k u_k · x
        let expected = 1.0 - (0..16).map(|k| linalg::dot(cb.neuron(k), x)).sum::<f64>() / 16.0;
        assert!((out.delta as f64 - expected).abs() < 1e-6);
    }

    #[test]
    fn unreached_neurons_keep_their_weights() {
        let ds = unit_dataset(&[&[1.0, 0.0, 0.0]]);
        let cb = init_codebook(4, 3, InitStrategy::RandomGaussian, 4, None).unwrap();
        let kernel = compute_kernel(4, 0.25, 0).unwrap();
        let out = dsom_epoch(&ds, &cb, &kernel).unwrap();
        assert_eq!(out.degenerate.len(), 15);
        for &k in &out.degenerate {
            assert_eq!(out.codebook.neuron(k), cb.neuron(k));
        }
        let w = out.winners[0];
        assert!(!out.degenerate.contains(&w));
        assert_eq!(out.codebook.neuron(w), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn delta_kernel_epoch_is_one_kmeans_step() {
        let ds = synthetic_blobs(3, 20, 8, 2.0, 9).unwrap();
        let cb = init_codebook(2, 8, InitStrategy::RandomGaussian, 10, None).unwrap();
        let kernel = compute_kernel(2, 0.25, 0).unwrap();
        let out = dsom_epoch(&ds, &cb, &kernel).unwrap();
        let km = spherical_kmeans_from(&ds, cb.weights().clone(), 1).unwrap();
        assert_eq!(out.winners.as_slice(), &km.winners[..]);
        for (a, b) in out.codebook.weights().as_slice().iter().zip(km.centroids.as_slice()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn dimension_and_side_mismatch() {
        let ds = unit_dataset(&[&[1.0, 0.0]]);
        let cb = init_codebook(2, 3, InitStrategy::RandomGaussian, 0, None).unwrap();
        let kernel = compute_kernel(2, 0.25, 1).unwrap();
        assert!(matches!(dsom_epoch(&ds, &cb, &kernel), Err(TrainError::Dimension { .. })));
        let cb = init_codebook(2, 2, InitStrategy::RandomGaussian, 0, None).unwrap();
        let kernel = compute_kernel(3, 0.25, 1).unwrap();
        assert!(matches!(dsom_epoch(&ds, &cb, &kernel), Err(TrainError::KernelSide { .. })));
    }

    #[test]
    fn non_finite_input_is_reported() {
        let m = Matrix::from_rows(&[[f32::NAN, 0.0]]).unwrap();
        let ds = Dataset::raw(m, None).unwrap();
        let cb = init_codebook(2, 2, InitStrategy::RandomGaussian, 0, None).unwrap();
        let kernel = compute_kernel(2, 0.25, 1).unwrap();
        assert_eq!(dsom_epoch(&ds, &cb, &kernel).unwrap_err(), TrainError::NonFinite(Stage::Similarity));
    }

    #[test]
    fn huge_epsilon_runs_one_epoch_per_entry() {
        let ds = synthetic_blobs(4, 10, 6, 3.0, 2).unwrap();
        let mut cfg = TrainConfig::new(6);
        cfg.epsilon = 2.0;
        let (_, hist) = train(&ds, &cfg).unwrap();
        assert_eq!(hist.records.len(), cfg.schedule.len());
        assert!(hist.phases.iter().all(|p| p.epochs == 1 && p.stop == StopReason::Converged));
    }

    #[test]
    fn kmeans_trivial_cases() {
        let ds = unit_dataset(&[&[1.0, 0.1], &[1.0, -0.1], &[-1.0, 0.1], &[-1.0, -0.1]]);
        let init = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0]]).unwrap();
        let km = spherical_kmeans_from(&ds, init, 10).unwrap();
        assert_eq!(km.winners, vec![0, 0, 1, 1]);
        assert!((km.centroids.get(0, 0) - 1.0).abs() < 1e-6);
        assert!((km.centroids.get(1, 0) + 1.0).abs() < 1e-6);

        let ds = unit_dataset(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let km = spherical_kmeans(&ds, 1, 0, 1).unwrap();
        let s = core::f32::consts::FRAC_1_SQRT_2;
        assert!((km.centroids.get(0, 0) - s).abs() < 1e-6 && (km.centroids.get(0, 1) - s).abs() < 1e-6);
        assert!(spherical_kmeans(&ds, 3, 0, 1).is_err());
    }
}
