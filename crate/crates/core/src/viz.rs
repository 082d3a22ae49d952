//! Grid-shaped views of a codebook: neighbour-correlation maps, per-class
//! masks and neuron tile montages. Encoding to files happens in the `dsom`
//! crate; [`to_gray_levels`] gives the shared 8-bit mapping.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::classify::NeuronLabels;
use crate::dataset::Label;
use crate::linalg;
use crate::trainer::Codebook;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VizError {
    #[error("neuron dimension {dim} is not a {side}x{side} tile")]
    TileShape { dim: usize, side: usize },
    #[error("neuron index {index} out of range for {neurons} neurons")]
    Pick { index: usize, neurons: usize },
    #[error("no neurons picked")]
    NoPicks,
}

/// Real-valued `side x side` image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayscaleMap {
    pub side: usize,
    pub values: Vec<f32>,
}

impl GrayscaleMap {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.values[i * self.side + j]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum::<f64>() / self.values.len() as f64
    }
}

/// Mean dot product between each neuron and its four toroidal neighbours.
pub fn correlation_map(u: &Codebook) -> GrayscaleMap {
    let l = u.side();
    let mut values = vec![0.0f32; l * l];
    for i in 0..l {
        for j in 0..l {
            let me = u.neuron(i * l + j);
            let up = ((i + l - 1) % l) * l + j;
            let down = ((i + 1) % l) * l + j;
            let left = i * l + (j + l - 1) % l;
            let right = i * l + (j + 1) % l;
            let s = linalg::dot(me, u.neuron(up))
                + linalg::dot(me, u.neuron(left))
                + linalg::dot(me, u.neuron(right))
                + linalg::dot(me, u.neuron(down));
            values[i * l + j] = (s / 4.0) as f32;
        }
    }
    GrayscaleMap { side: l, values }
}

/// 1 where the neuron carries `class`, 0 elsewhere.
pub fn class_region_map(nl: &NeuronLabels, side: usize, class: Label) -> GrayscaleMap {
    let values = nl.labels.iter().map(|&l| if l == class { 1.0 } else { 0.0 }).collect();
    GrayscaleMap { side, values }
}

/// 8-bit image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

/// Affine map of `[min, max]` onto `[0, 255]`, rounded to nearest.
/// A constant input maps to 128 everywhere.
pub fn to_gray_levels(values: &[f32]) -> Vec<u8> {
    let (lo, hi) = values.iter().fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return vec![128; values.len()];
    }
    let (lo, span) = (lo as f64, hi as f64 - lo as f64);
    values
        .iter()
        .map(|&v| libm::round((v as f64 - lo) / span * 255.0).clamp(0.0, 255.0) as u8)
        .collect()
}

impl GrayscaleMap {
    pub fn to_image(&self) -> GrayImage {
        GrayImage { width: self.side, height: self.side, pixels: to_gray_levels(&self.values) }
    }
}

/// Columns and rows of a near-square grid holding `n` tiles.
pub fn montage_layout(n: usize) -> (usize, usize) {
    let mut cols = 1;
    while cols * cols < n {
        cols += 1;
    }
    let rows = n.div_ceil(cols);
    (cols, rows)
}

/// Renders the picked neurons as `tile_side x tile_side` tiles, each rescaled
/// to `[0, 255]` on its own, laid out row by row. Unused slots stay black.
pub fn neuron_tiles(u: &Codebook, picks: &[usize], tile_side: usize) -> Result<GrayImage, VizError> {
    if tile_side * tile_side != u.dim() {
        return Err(VizError::TileShape { dim: u.dim(), side: tile_side });
    }
    if picks.is_empty() {
        return Err(VizError::NoPicks);
    }
    if let Some(&bad) = picks.iter().find(|&&k| k >= u.len()) {
        return Err(VizError::Pick { index: bad, neurons: u.len() });
    }
    let (cols, rows) = montage_layout(picks.len());
    let width = cols * tile_side;
    let height = rows * tile_side;
    let mut pixels = vec![0u8; width * height];
    for (slot, &k) in picks.iter().enumerate() {
        let tile = to_gray_levels(u.neuron(k));
        let (ty, tx) = (slot / cols, slot % cols);
        for r in 0..tile_side {
            let dst = (ty * tile_side + r) * width + tx * tile_side;
            pixels[dst..dst + tile_side].copy_from_slice(&tile[r * tile_side..(r + 1) * tile_side]);
        }
    }
    Ok(GrayImage { width, height, pixels })
}
