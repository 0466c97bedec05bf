//! Gray levels ↔ residues.

use lrmf_core::{Algebra, Matrix};

use crate::error::{CliError, Result};
use crate::io::GrayImage;

/// Distinct gray levels in ascending order; level `levels[v]` is residue `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizationMap {
    levels: Vec<u8>,
}

impl QuantizationMap {
    pub fn from_image(img: &GrayImage, p: u32) -> Result<Self> {
        let mut seen = [false; 256];
        for &v in &img.pixels {
            seen[v as usize] = true;
        }
        let levels: Vec<u8> = (0..=255u8).filter(|&v| seen[v as usize]).collect();
        if levels.len() > p as usize {
            return Err(CliError::TooManyLevels {
                levels: levels.len(),
                p,
            });
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    pub fn residue(&self, level: u8) -> Option<u8> {
        self.levels.binary_search(&level).ok().map(|i| i as u8)
    }

    /// Residues past the last level map to the brightest level.
    pub fn level(&self, residue: u8) -> u8 {
        self.levels[(residue as usize).min(self.levels.len() - 1)]
    }
}

/// Image as an `height × width` matrix over `algebra`.
pub fn quantize(img: &GrayImage, algebra: Algebra) -> Result<(Matrix, QuantizationMap)> {
    let map = QuantizationMap::from_image(img, algebra.modulus() as u32)?;
    let data = img
        .pixels
        .iter()
        .map(|&v| map.residue(v).expect("level collected from this image"))
        .collect();
    Ok((Matrix::new(img.height, img.width, algebra, data)?, map))
}

pub fn dequantize(m: &Matrix, map: &QuantizationMap, maxval: u8) -> Result<GrayImage> {
    let pixels = m.as_slice().iter().map(|&r| map.level(r)).collect();
    GrayImage::new(m.cols(), m.rows(), maxval, pixels)
}

/// Replaces each pixel with the midpoint of its bin among `p` equal-width
/// bins over `0..=maxval`.
pub fn bucket(img: &GrayImage, p: u32) -> GrayImage {
    let span = img.maxval as u32 + 1;
    let lo = |b: u32| (b * span).div_ceil(p);
    let pixels = img
        .pixels
        .iter()
        .map(|&v| {
            let b = v as u32 * p / span;
            let hi = lo(b + 1) - 1;
            ((lo(b) + hi) / 2) as u8
        })
        .collect();
    GrayImage {
        pixels,
        ..img.clone()
    }
}

/// Sum of absolute pixel differences.
pub fn l1_error(a: &GrayImage, b: &GrayImage) -> u64 {
    a.pixels
        .iter()
        .zip(&b.pixels)
        .map(|(&x, &y)| x.abs_diff(y) as u64)
        .sum()
}
