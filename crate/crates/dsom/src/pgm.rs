//! Binary greyscale PGM (`P5`, maxval 255).

use std::fs;
use std::path::Path;

use dsom_core::viz::{GrayImage, GrayscaleMap};

pub fn encode(img: &GrayImage) -> Vec<u8> {
    assert_eq!(img.pixels.len(), img.width * img.height);
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn write(path: &Path, img: &GrayImage) -> std::io::Result<()> {
    fs::write(path, encode(img))
}

/// Min-max scales `map` to 8 bits and writes it.
pub fn write_map(path: &Path, map: &GrayscaleMap) -> std::io::Result<()> {
    write(path, &map.to_image())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_map() {
        let map = GrayscaleMap { side: 2, values: vec![-1.0, 1.0, 1.0, -1.0] };
        let bytes = encode(&map.to_image());
        assert_eq!(&bytes[..11], b"P5\n2 2\n255\n");
        assert_eq!(&bytes[11..], &[0, 255, 255, 0]);
    }

    #[test]
    fn constant_map_is_mid_gray() {
        let map = GrayscaleMap { side: 3, values: vec![0.25; 9] };
        assert_eq!(&encode(&map.to_image())[11..], &[128; 9]);
    }

    #[test]
    fn rectangular_header() {
        let img = GrayImage { width: 3, height: 1, pixels: vec![1, 2, 3] };
        assert_eq!(encode(&img), b"P5\n3 1\n255\n\x01\x02\x03");
    }
}
