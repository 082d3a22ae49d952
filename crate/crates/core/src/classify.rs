//! Labels neurons from a labelled dataset and classifies by nearest
//! correlation.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dataset::{Dataset, Label};
use crate::linalg::{self, Matrix, ShapeError};
use crate::trainer::Codebook;

/// Samples per block when correlating a codebook with a large dataset.
const SAMPLE_BLOCK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("dataset has no labels")]
    Unlabeled,
    #[error("dimension mismatch: query has {query} features, codebook has {codebook}")]
    Dimension { query: usize, codebook: usize },
    #[error("{labels} neuron labels for a codebook of {neurons} neurons")]
    LabelCount { labels: usize, neurons: usize },
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

/// How a neuron picks its class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelStrategy {
    /// Label of the single sample with the highest dot product.
    #[default]
    MaxCorrelation,
    /// Most frequent label among the samples the neuron wins; neurons that
    /// win nothing fall back to [`LabelStrategy::MaxCorrelation`].
    MajorityVote,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuronLabels {
    pub labels: Vec<Label>,
    /// Highest dot product between the neuron and any labelling sample.
    pub confidences: Vec<f32>,
}

impl NeuronLabels {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn check_dim(x: &Dataset, u: &Codebook) -> Result<(), ClassifyError> {
    if x.dim() != u.dim() {
        return Err(ClassifyError::Dimension { query: x.dim(), codebook: u.dim() });
    }
    Ok(())
}

/// Gives every neuron the label of its best-correlated sample (lowest sample
/// index on ties).
pub fn label_neurons(x: &Dataset, u: &Codebook) -> Result<NeuronLabels, ClassifyError> {
    label_neurons_with(x, u, LabelStrategy::MaxCorrelation)
}

pub fn label_neurons_with(x: &Dataset, u: &Codebook, strategy: LabelStrategy) -> Result<NeuronLabels, ClassifyError> {
    let labels = x.labels().ok_or(ClassifyError::Unlabeled)?;
    check_dim(x, u)?;
    let k_count = u.len();
    let mut best = vec![f32::NEG_INFINITY; k_count];
    let mut best_sample = vec![0usize; k_count];
    let mut start = 0;
    while start < x.len() {
        let block = x.samples().slice_rows(start, start + SAMPLE_BLOCK)?;
        let sims = linalg::matmul_nt(u.weights(), &block)?;
        for (k, row) in sims.iter_rows().enumerate() {
            let local = linalg::argmax(row);
            if row[local] > best[k] {
                best[k] = row[local];
                best_sample[k] = start + local;
            }
        }
        start += block.rows();
    }
    let mut out = NeuronLabels {
        labels: best_sample.iter().map(|&n| labels[n]).collect(),
        confidences: best,
    };
    if strategy == LabelStrategy::MajorityVote {
        let winners = winners_of(u, x.samples())?;
        let mut votes: Vec<BTreeMap<Label, usize>> = vec![BTreeMap::new(); k_count];
        for (&w, &l) in winners.iter().zip(labels) {
            *votes[w].entry(l).or_default() += 1;
        }
        for (k, v) in votes.iter().enumerate() {
            // max_by_key keeps the last maximum; iterate in reverse so the
            // smallest label wins ties.
            if let Some((&label, _)) = v.iter().rev().max_by_key(|(_, &count)| count) {
                out.labels[k] = label;
            }
        }
    }
    Ok(out)
}

/// Best-matching neuron for every row of `queries`.
pub fn winners_of(u: &Codebook, queries: &Matrix) -> Result<Vec<usize>, ClassifyError> {
    if queries.cols() != u.dim() {
        return Err(ClassifyError::Dimension { query: queries.cols(), codebook: u.dim() });
    }
    let mut out = Vec::with_capacity(queries.rows());
    let mut start = 0;
    while start < queries.rows() {
        let block = queries.slice_rows(start, start + SAMPLE_BLOCK)?;
        out.extend_from_slice(linalg::argmax_rows(&linalg::matmul_nt(&block, u.weights())?).as_slice());
        start += block.rows();
    }
    Ok(out)
}

fn check_labels(u: &Codebook, nl: &NeuronLabels) -> Result<(), ClassifyError> {
    if nl.len() != u.len() {
        return Err(ClassifyError::LabelCount { labels: nl.len(), neurons: u.len() });
    }
    Ok(())
}

/// Class of the neuron with the highest dot product with `q`.
pub fn predict(u: &Codebook, nl: &NeuronLabels, q: &[f32]) -> Result<Label, ClassifyError> {
    check_labels(u, nl)?;
    if q.len() != u.dim() {
        return Err(ClassifyError::Dimension { query: q.len(), codebook: u.dim() });
    }
    let mut best = 0;
    let mut best_sim = f32::NEG_INFINITY;
    for k in 0..u.len() {
        // Rounded like the entries of a batched product, so both paths agree.
        let s = linalg::dot(u.neuron(k), q) as f32;
        if s > best_sim {
            best_sim = s;
            best = k;
        }
    }
    Ok(nl.labels[best])
}

/// [`predict`] for every row of `queries`.
pub fn predict_batch(u: &Codebook, nl: &NeuronLabels, queries: &Matrix) -> Result<Vec<Label>, ClassifyError> {
    check_labels(u, nl)?;
    Ok(winners_of(u, queries)?.into_iter().map(|k| nl.labels[k]).collect())
}

/// Correct and total counts for one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassScore {
    pub class: Label,
    pub total: usize,
    pub correct: usize,
}

impl ClassScore {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub total: usize,
    pub correct: usize,
    /// One entry per class present in the test labels, ascending.
    pub per_class: Vec<ClassScore>,
}

impl AccuracyReport {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

pub fn evaluate(u: &Codebook, nl: &NeuronLabels, test: &Dataset) -> Result<AccuracyReport, ClassifyError> {
    let truth = test.labels().ok_or(ClassifyError::Unlabeled)?;
    let predicted = predict_batch(u, nl, test.samples())?;
    let mut per: BTreeMap<Label, (usize, usize)> = BTreeMap::new();
    let mut correct = 0;
    for (p, t) in predicted.iter().zip(truth) {
        let e = per.entry(*t).or_default();
        e.0 += 1;
        if p == t {
            e.1 += 1;
            correct += 1;
        }
    }
    Ok(AccuracyReport {
        total: truth.len(),
        correct,
        per_class: per.into_iter().map(|(class, (total, correct))| ClassScore { class, total, correct }).collect(),
    })
}

/// Fraction of `test` whose predicted class matches its label.
pub fn accuracy(u: &Codebook, nl: &NeuronLabels, test: &Dataset) -> Result<f64, ClassifyError> {
    Ok(evaluate(u, nl, test)?.accuracy())
}
