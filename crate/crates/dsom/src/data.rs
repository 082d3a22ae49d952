//! Where training and evaluation samples come from.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use dsom_core::dataset::{normalize_dataset, normalize_with_mean, synthetic_blobs, Dataset};

use crate::idx;
use crate::manifest::{DataSummary, InputFile};

/// `blobs:CxPxD[:CONC]`: `C` clusters of `P` points in `D` dimensions with
/// noise scale `1/CONC` (default 20).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub clusters: usize,
    pub per_cluster: usize,
    pub dim: usize,
    pub concentration: f64,
}

pub const DEFAULT_CONCENTRATION: f64 = 20.0;

impl FromStr for SyntheticSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let Some(rest) = s.strip_prefix("blobs:") else {
            bail!("unknown synthetic spec {s:?}, expected blobs:CxPxD[:CONC]");
        };
        let (shape, conc) = match rest.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (rest, None),
        };
        let parts: Vec<&str> = shape.split('x').collect();
        let [c, p, d] = parts.as_slice() else {
            bail!("synthetic shape {shape:?} must be CxPxD");
        };
        let num = |v: &str, what: &str| -> Result<usize> {
            v.parse::<usize>().with_context(|| format!("bad {what} {v:?} in {s:?}"))
        };
        let spec = SyntheticSpec {
            clusters: num(c, "cluster count")?,
            per_cluster: num(p, "points per cluster")?,
            dim: num(d, "dimension")?,
            concentration: match conc {
                Some(v) => v.parse().with_context(|| format!("bad concentration {v:?}"))?,
                None => DEFAULT_CONCENTRATION,
            },
        };
        if spec.clusters == 0 || spec.per_cluster == 0 {
            bail!("synthetic spec {s:?} has no points");
        }
        if spec.dim < 2 {
            bail!("synthetic spec {s:?} needs at least two dimensions");
        }
        if !(spec.concentration > 0.0) {
            bail!("concentration must be positive");
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
pub enum Source {
    Idx { images: PathBuf, labels: Option<PathBuf>, limit: Option<usize> },
    Synthetic(SyntheticSpec),
}

/// A normalized dataset together with what is needed to normalize more data
/// the same way and to describe it in a manifest.
pub struct Loaded {
    pub dataset: Dataset,
    pub mean: Option<Vec<f32>>,
    pub inputs: Vec<InputFile>,
    pub summary: DataSummary,
}

pub fn load(source: &Source, seed: u64) -> Result<Loaded> {
    match source {
        Source::Synthetic(spec) => {
            let dataset = synthetic_blobs(spec.clusters, spec.per_cluster, spec.dim, spec.concentration, seed)?;
            let summary = DataSummary {
                source: format!("blobs:{}x{}x{}:{}", spec.clusters, spec.per_cluster, spec.dim, spec.concentration),
                samples: dataset.len(),
                dim: dataset.dim(),
                dropped: 0,
            };
            Ok(Loaded { dataset, mean: None, inputs: Vec::new(), summary })
        }
        Source::Idx { images, labels, limit } => {
            let mut inputs = vec![InputFile::hash(images)?];
            if let Some(l) = labels {
                inputs.push(InputFile::hash(l)?);
            }
            let (raw, labs) = idx::read_pair(images, labels.as_deref(), *limit)?;
            let norm = normalize_dataset(&raw, labs.as_deref())?;
            let summary = DataSummary {
                source: images.display().to_string(),
                samples: norm.dataset.len(),
                dim: norm.dataset.dim(),
                dropped: norm.dropped.len(),
            };
            Ok(Loaded { dataset: norm.dataset, mean: Some(norm.mean), inputs, summary })
        }
    }
}

/// Loads held-out IDX data centred with the training mean.
pub fn load_heldout(images: &Path, labels: &Path, limit: Option<usize>, mean: &[f32]) -> Result<(Dataset, Vec<InputFile>)> {
    let inputs = vec![InputFile::hash(images)?, InputFile::hash(labels)?];
    let (raw, labs) = idx::read_pair(images, Some(labels), limit)?;
    let norm = normalize_with_mean(&raw, labs.as_deref(), mean)?;
    Ok((norm.dataset, inputs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_spec_parsing() {
        let s: SyntheticSpec = "blobs:4x50x16".parse().unwrap();
        assert_eq!((s.clusters, s.per_cluster, s.dim, s.concentration), (4, 50, 16, DEFAULT_CONCENTRATION));
        let s: SyntheticSpec = "blobs:2x3x8:100".parse().unwrap();
        assert_eq!(s.concentration, 100.0);
        let s: SyntheticSpec = "blobs:2x3x8:inf".parse().unwrap();
        assert!(s.concentration.is_infinite());
        for bad in ["gauss:1x2x3", "blobs:4x50", "blobs:0x5x4", "blobs:2x2x1", "blobs:2x2x4:-1", "blobs:axbxc"] {
            assert!(bad.parse::<SyntheticSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn idx_source_is_centred_and_hashed() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = (dir.path().join("i"), dir.path().join("l"));
        let img = idx::IdxImages { count: 3, rows: 1, cols: 2, pixels: vec![0, 10, 10, 0, 5, 5] };
        idx::write_images(&ip, &img).unwrap();
        idx::write_labels(&lp, &[1, 2, 3]).unwrap();
        let src = Source::Idx { images: ip, labels: Some(lp), limit: None };
        let loaded = load(&src, 0).unwrap();
        // The third row sits exactly on the mean and is dropped.
        assert_eq!(loaded.summary.dropped, 1);
        assert_eq!(loaded.dataset.labels().unwrap(), &[1, 2]);
        assert_eq!(loaded.inputs.len(), 2);
        assert_eq!(loaded.mean.unwrap(), vec![5.0, 5.0]);
    }
}
