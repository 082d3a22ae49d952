//! Sample matrices on the unit hypersphere.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, Matrix, ShapeError, DEGENERATE_NORM_FLOOR};
use crate::rng::{stream_rng, Stream};

/// Class id attached to a sample.
pub type Label = u32;

/// `N x d` samples with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Matrix,
    labels: Option<Vec<Label>>,
    normalized: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("{labels} labels for {samples} samples")]
    LabelCount { samples: usize, labels: usize },
    #[error("every sample was degenerate after centering")]
    AllDegenerate,
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

impl Dataset {
    /// Wraps samples that are not yet on the sphere.
    pub fn raw(samples: Matrix, labels: Option<Vec<Label>>) -> Result<Self, DatasetError> {
        Self::build(samples, labels, false)
    }

    /// Wraps samples that the caller guarantees are unit rows.
    pub fn unit(samples: Matrix, labels: Option<Vec<Label>>) -> Result<Self, DatasetError> {
        debug_assert!(samples.row_norms().iter().all(|n| (n - 1.0).abs() < 1e-5));
        Self::build(samples, labels, true)
    }

    fn build(samples: Matrix, labels: Option<Vec<Label>>, normalized: bool) -> Result<Self, DatasetError> {
        if let Some(l) = &labels {
            if l.len() != samples.rows() {
                return Err(DatasetError::LabelCount { samples: samples.rows(), labels: l.len() });
            }
        }
        Ok(Dataset { samples, labels, normalized })
    }

    pub fn len(&self) -> usize {
        self.samples.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.samples.cols()
    }

    pub fn samples(&self) -> &Matrix {
        &self.samples
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// The first `n` samples (or all of them if there are fewer).
    pub fn head(&self, n: usize) -> Dataset {
        let n = n.clamp(1, self.len());
        Dataset {
            samples: self.samples.slice_rows(0, n).expect("non-empty prefix"),
            labels: self.labels.as_ref().map(|l| l[..n].to_vec()),
            normalized: self.normalized,
        }
    }
}

/// Result of [`normalize_dataset`].
#[derive(Debug, Clone)]
pub struct Normalized {
    pub dataset: Dataset,
    /// Per-feature mean that was subtracted.
    pub mean: Vec<f32>,
    /// Indices (into the raw input) of rows that vanished after centering.
    pub dropped: Vec<usize>,
}

/// Per-feature mean across samples.
pub fn column_mean(raw: &Matrix) -> Vec<f32> {
    let mut acc = vec![0.0f64; raw.cols()];
    for row in raw.iter_rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += *v as f64;
        }
    }
    let n = raw.rows() as f64;
    acc.into_iter().map(|a| (a / n) as f32).collect()
}

/// Centres every feature on its mean across samples, then scales each row to
/// unit length. Rows whose centred norm is at or below `1e-12` are dropped
/// along with their labels.
pub fn normalize_dataset(raw: &Matrix, labels: Option<&[Label]>) -> Result<Normalized, DatasetError> {
    let mean = column_mean(raw);
    normalize_with_mean(raw, labels, &mean)
}

/// [`normalize_dataset`] with a mean computed elsewhere, e.g. the training
/// mean applied to a held-out set.
pub fn normalize_with_mean(raw: &Matrix, labels: Option<&[Label]>, mean: &[f32]) -> Result<Normalized, DatasetError> {
    if let Some(l) = labels {
        if l.len() != raw.rows() {
            return Err(DatasetError::LabelCount { samples: raw.rows(), labels: l.len() });
        }
    }
    if mean.len() != raw.cols() {
        return Err(ShapeError::DataLength { rows: 1, cols: raw.cols(), len: mean.len() }.into());
    }
    let mut centered = raw.clone();
    for row in centered.iter_rows_mut() {
        for (v, m) in row.iter_mut().zip(mean) {
            *v = (*v as f64 - *m as f64) as f32;
        }
    }
    let dropped = linalg::normalize_rows(&mut centered, DEGENERATE_NORM_FLOOR);
    let mean = mean.to_vec();
    if dropped.is_empty() {
        let dataset = Dataset::build(centered, labels.map(<[Label]>::to_vec), true)?;
        return Ok(Normalized { dataset, mean, dropped });
    }
    let keep: Vec<usize> = (0..raw.rows()).filter(|i| dropped.binary_search(i).is_err()).collect();
    if keep.is_empty() {
        return Err(DatasetError::AllDegenerate);
    }
    let samples = centered.select_rows(&keep)?;
    let labels = labels.map(|l| keep.iter().map(|&i| l[i]).collect());
    let dataset = Dataset::build(samples, labels, true)?;
    Ok(Normalized { dataset, mean, dropped })
}

/// Labelled clusters on the unit sphere.
///
/// Cluster directions are uniform on the sphere; each point is its cluster
/// direction plus isotropic Gaussian noise of scale `1 / concentration`,
/// renormalized. An infinite concentration gives noise-free points.
pub fn synthetic_blobs(
    clusters: usize,
    per_cluster: usize,
    dim: usize,
    concentration: f64,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    assert!(dim >= 2, "synthetic blobs need at least two dimensions");
    let mut rng = stream_rng(seed, Stream::SyntheticData);
    let mut directions = Matrix::zeros(clusters.max(1), dim)?;
    for v in directions.as_mut_slice() {
        *v = rng.sample::<f64, _>(StandardNormal) as f32;
    }
    linalg::normalize_rows(&mut directions, DEGENERATE_NORM_FLOOR);
    let scale = if concentration.is_infinite() { 0.0 } else { 1.0 / concentration };
    let mut samples = Matrix::zeros(clusters * per_cluster, dim)?;
    let mut labels = Vec::with_capacity(clusters * per_cluster);
    for c in 0..clusters {
        for p in 0..per_cluster {
            let row = samples.row_mut(c * per_cluster + p);
            for (v, d) in row.iter_mut().zip(directions.row(c)) {
                let noise: f64 = rng.sample(StandardNormal);
                *v = (*d as f64 + scale * noise) as f32;
            }
            labels.push(c as Label);
        }
    }
    let degenerate = linalg::normalize_rows(&mut samples, DEGENERATE_NORM_FLOOR);
    debug_assert!(degenerate.is_empty());
    Dataset::build(samples, Some(labels), true)
}
