//! Diffusion neighborhood kernel on an `L x L` torus.
//!
//! The kernel starts as a unit point source at cell `(0, 0)` and is advanced
//! `T` steps with the explicit five-point scheme (`Δτ = Δx = 1`)
//!
//! ```text
//! h(i,j) <- h(i,j) + D [h(i+1,j) + h(i-1,j) + h(i,j+1) + h(i,j-1) - 4 h(i,j)]
//! ```
//!
//! with indices taken mod `L`. The source cell is reset to 1 after each step.
//! A kernel for any other winner is the same matrix circularly shifted, see
//! [`DiffusionKernel::shifted_flat_row`].

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// Largest coefficient for which the explicit scheme is stable.
pub const MAX_STABLE_COEFF: f32 = 0.25;

pub const DEFAULT_DIFF_COEFF: f32 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("grid side must be at least 2, got {0}")]
    SideTooSmall(usize),
    #[error("diffusion coefficient {0} is outside the stable range (0, 0.25]")]
    Unstable(f32),
    #[error("winner index {index} is outside a {side}x{side} grid")]
    IndexOutOfRange { index: usize, side: usize },
    #[error("output buffer has length {len}, expected {expected}")]
    BufferLength { len: usize, expected: usize },
}

/// Position of a neuron on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridCoord {
    pub i: usize,
    pub j: usize,
}

impl GridCoord {
    pub fn new(i: usize, j: usize) -> Self {
        GridCoord { i, j }
    }

    /// Row-major flat index on a grid of the given side.
    #[inline]
    pub fn flat(self, side: usize) -> usize {
        self.i * side + self.j
    }
}

/// Row-major grid coordinate of flat neuron index `c`.
pub fn winner_to_grid(c: usize, side: usize) -> Result<GridCoord, KernelError> {
    if c >= side * side {
        return Err(KernelError::IndexOutOfRange { index: c, side });
    }
    Ok(GridCoord { i: c / side, j: c % side })
}

/// Clamped-source diffusion solution centred on `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionKernel {
    side: usize,
    steps: usize,
    coeff: f32,
    values: Vec<f32>,
}

/// Runs the clamped diffusion recurrence for `steps` steps.
pub fn compute_kernel(side: usize, coeff: f32, steps: usize) -> Result<DiffusionKernel, KernelError> {
    if side < 2 {
        return Err(KernelError::SideTooSmall(side));
    }
    if !(coeff > 0.0 && coeff <= MAX_STABLE_COEFF) {
        return Err(KernelError::Unstable(coeff));
    }
    let l = side;
    let d = coeff as f64;
    let mut h = vec![0.0f64; l * l];
    let mut next = vec![0.0f64; l * l];
    h[0] = 1.0;
    for _ in 0..steps {
        for i in 0..l {
            let up = (i + l - 1) % l;
            let down = (i + 1) % l;
            for j in 0..l {
                let left = (j + l - 1) % l;
                let right = (j + 1) % l;
                let c = h[i * l + j];
                // Pairing opposite neighbours keeps the result exactly
                // symmetric under reflections and transposition.
                let vertical = h[up * l + j] + h[down * l + j];
                let horizontal = h[i * l + left] + h[i * l + right];
                next[i * l + j] = c + d * ((vertical + horizontal) - 4.0 * c);
            }
        }
        next[0] = 1.0;
        core::mem::swap(&mut h, &mut next);
    }
    Ok(DiffusionKernel {
        side,
        steps,
        coeff,
        values: h.into_iter().map(|v| v as f32).collect(),
    })
}

impl DiffusionKernel {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn coeff(&self) -> f32 {
        self.coeff
    }

    /// Row-major `L x L` values.
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f32 {
        self.values[i * self.side + j]
    }

    /// Writes the kernel recentred on `center`, flattened row-major:
    /// `out[i*L + j] = h[(i - ci) mod L][(j - cj) mod L]`.
    pub fn shifted_flat_row(&self, center: GridCoord, out: &mut [f32]) -> Result<(), KernelError> {
        let l = self.side;
        if out.len() != l * l {
            return Err(KernelError::BufferLength { len: out.len(), expected: l * l });
        }
        if center.i >= l || center.j >= l {
            return Err(KernelError::IndexOutOfRange { index: center.i * l + center.j, side: l });
        }
        self.write_shifted(center, out);
        Ok(())
    }

    /// Unchecked core of [`shifted_flat_row`](Self::shifted_flat_row).
    #[inline]
    pub(crate) fn write_shifted(&self, center: GridCoord, out: &mut [f32]) {
        let l = self.side;
        let cj = center.j;
        for (i, dst) in out.chunks_exact_mut(l).enumerate() {
            let si = (i + l - center.i) % l;
            let src = &self.values[si * l..(si + 1) * l];
            dst[cj..].copy_from_slice(&src[..l - cj]);
            dst[..cj].copy_from_slice(&src[l - cj..]);
        }
    }

    /// The whole kernel as a `side x side` map.
    pub fn shifted(&self, center: GridCoord) -> Result<Vec<f32>, KernelError> {
        let mut out = vec![0.0; self.side * self.side];
        self.shifted_flat_row(center, &mut out)?;
        Ok(out)
    }
}

/// Shortest wrap-around offset between two positions on a ring of length `side`.
#[inline]
pub fn ring_distance(a: usize, b: usize, side: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(side - d)
}

/// Manhattan distance on the torus.
#[inline]
pub fn torus_manhattan(a: GridCoord, b: GridCoord, side: usize) -> usize {
    ring_distance(a.i, b.i, side) + ring_distance(a.j, b.j, side)
}
