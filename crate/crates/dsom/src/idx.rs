//! IDX containers as used by MNIST: a big-endian magic number, one `u32`
//! per dimension, then raw unsigned bytes.

use std::fs;
use std::path::Path;

use dsom_core::linalg::Matrix;
use dsom_core::Label;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, thiserror::Error)]
pub enum IdxError {
    #[error("bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("file holds {found} bytes, header promises {expected}")]
    Truncated { expected: usize, found: usize },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("empty image set")]
    Empty,
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// A stack of `count` images, each `rows x cols` bytes, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    /// Raw pixel values as an `count x (rows*cols)` matrix.
    pub fn to_matrix(&self) -> Result<Matrix, IdxError> {
        if self.count == 0 || self.pixels_per_image() == 0 {
            return Err(IdxError::Empty);
        }
        let data = self.pixels.iter().map(|&p| p as f32).collect();
        Ok(Matrix::new(self.count, self.pixels_per_image(), data).expect("sizes checked at parse time"))
    }

    /// The first `n` images (all of them if there are fewer).
    pub fn truncate(&mut self, n: usize) {
        self.count = self.count.min(n);
        self.pixels.truncate(self.count * self.pixels_per_image());
    }
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32, IdxError> {
    let b = bytes
        .get(at..at + 4)
        .ok_or(IdxError::Truncated { expected: at + 4, found: bytes.len() })?;
    Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), IdxError> {
    let found = read_u32(bytes, 0)?;
    if found != expected {
        return Err(IdxError::BadMagic { expected, found });
    }
    Ok(())
}

fn payload(bytes: &[u8], header: usize, len: usize) -> Result<&[u8], IdxError> {
    let expected = header + len;
    if bytes.len() != expected {
        return Err(IdxError::Truncated { expected, found: bytes.len() });
    }
    Ok(&bytes[header..])
}

pub fn parse_images(bytes: &[u8]) -> Result<IdxImages, IdxError> {
    check_magic(bytes, IMAGES_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let pixels = payload(bytes, 16, count * rows * cols)?.to_vec();
    Ok(IdxImages { count, rows, cols, pixels })
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>, IdxError> {
    check_magic(bytes, LABELS_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    Ok(payload(bytes, 8, count)?.to_vec())
}

pub fn encode_images(images: &IdxImages) -> Vec<u8> {
    assert_eq!(images.pixels.len(), images.count * images.pixels_per_image());
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for word in [IMAGES_MAGIC, images.count as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn read_file(path: &Path) -> Result<Vec<u8>, IdxError> {
    fs::read(path).map_err(|source| IdxError::Io { path: path.display().to_string(), source })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), IdxError> {
    fs::write(path, bytes).map_err(|source| IdxError::Io { path: path.display().to_string(), source })
}

pub fn read_images(path: &Path) -> Result<IdxImages, IdxError> {
    parse_images(&read_file(path)?)
}

pub fn read_labels(path: &Path) -> Result<Vec<u8>, IdxError> {
    parse_labels(&read_file(path)?)
}

pub fn write_images(path: &Path, images: &IdxImages) -> Result<(), IdxError> {
    write_file(path, &encode_images(images))
}

pub fn write_labels(path: &Path, labels: &[u8]) -> Result<(), IdxError> {
    write_file(path, &encode_labels(labels))
}

/// Reads an image file and, optionally, its label file, keeping the first
/// `limit` entries.
pub fn read_pair(images: &Path, labels: Option<&Path>, limit: Option<usize>) -> Result<(Matrix, Option<Vec<Label>>), IdxError> {
    let mut imgs = read_images(images)?;
    let mut labs = labels.map(read_labels).transpose()?;
    if let Some(l) = &labs {
        if l.len() != imgs.count {
            return Err(IdxError::CountMismatch { images: imgs.count, labels: l.len() });
        }
    }
    if let Some(n) = limit {
        imgs.truncate(n);
        if let Some(l) = labs.as_mut() {
            l.truncate(n);
        }
    }
    let labels = labs.map(|l| l.into_iter().map(Label::from).collect());
    Ok((imgs.to_matrix()?, labels))
}
