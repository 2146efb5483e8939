//! Pixel-domain luminance DC coefficients of 8x8 blocks.

use crate::error::Result;
use crate::image::{PixelImage, BLOCK};

pub const DC_MIN: i32 = -1024;
pub const DC_MAX: i32 = 1016;

/// Per-block luminance DC values in block raster order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcVector(Vec<i32>);

impl DcVector {
    pub fn values(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<i32> {
        self.0
    }
}

/// BT.601 full-range luma, `round(0.299 R + 0.587 G + 0.114 B)` with ties up.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// `sum(I - 128)` over a block of 64 luma samples, i.e. eight times the
/// exact (unrounded) DC coefficient.
pub fn block_level_sum(block: &[u8; 64]) -> i32 {
    block.iter().map(|&v| v as i32).sum::<i32>() - 64 * 128
}

/// Luma samples of block (`bx`, `by`), row-major.
pub(crate) fn luma_block(img: &PixelImage, bx: usize, by: usize) -> [u8; 64] {
    let mut out = [0u8; 64];
    let ch = img.channels();
    let samples = img.samples();
    for y in 0..BLOCK {
        let row = ((by * BLOCK + y) * img.width() + bx * BLOCK) * ch;
        for x in 0..BLOCK {
            let p = &samples[row + x * ch..row + x * ch + ch];
            out[y * BLOCK + x] = if ch == 1 { p[0] } else { luma(p[0], p[1], p[2]) };
        }
    }
    out
}

/// DC of every block: `sum(Y - 128) / 8`, truncated toward zero.
pub fn extract_dc_luma(img: &PixelImage) -> Result<DcVector> {
    extract_dc_prefix(img, img.block_count())
}

/// First `count` DC values in raster order; avoids touching the rest of the image.
pub(crate) fn extract_dc_prefix(img: &PixelImage, count: usize) -> Result<DcVector> {
    img.require_block_aligned()?;
    let grid_w = img.width() / BLOCK;
    let count = count.min(img.block_count());
    let values = (0..count)
        .map(|m| block_level_sum(&luma_block(img, m % grid_w, m / grid_w)) / 8)
        .collect();
    Ok(DcVector(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn uniform_blocks_hit_the_range_ends() {
        let dc = |v| extract_dc_luma(&PixelImage::filled(8, 8, 3, v).unwrap()).unwrap().values()[0];
        assert_eq!(dc(128), 0);
        assert_eq!(dc(0), DC_MIN);
        assert_eq!(dc(255), DC_MAX);
    }

    #[test]
    fn truncates_toward_zero() {
        // sum = -1 -> -1/8 truncates to 0; sum = 9 -> 1
        let mut s = vec![128u8; 64];
        s[0] = 127;
        let img = PixelImage::new(8, 8, 1, s.clone()).unwrap();
        assert_eq!(extract_dc_luma(&img).unwrap().values(), &[0]);
        s[0] = 137;
        let img = PixelImage::new(8, 8, 1, s).unwrap();
        assert_eq!(extract_dc_luma(&img).unwrap().values(), &[1]);
    }

    #[test]
    fn luma_of_primaries() {
        assert_eq!(luma(255, 255, 255), 255);
        assert_eq!(luma(0, 0, 0), 0);
        assert_eq!(luma(255, 0, 0), 76);
        assert_eq!(luma(0, 255, 0), 150);
        assert_eq!(luma(0, 0, 255), 29);
    }

    #[test]
    fn raster_order_and_length() {
        let mut img = PixelImage::filled(24, 16, 1, 128).unwrap();
        // block (2, 1) -> m = 1*3 + 2 = 5
        for y in 8..16 {
            for x in 16..24 {
                img.samples_mut()[y * 24 + x] = 0;
            }
        }
        let dc = extract_dc_luma(&img).unwrap();
        assert_eq!(dc.len(), 6);
        assert_eq!(dc.values()[5], DC_MIN);
        assert!(dc.values()[..5].iter().all(|&v| v == 0));
    }

    #[test]
    fn rejects_unaligned() {
        let img = PixelImage::filled(12, 8, 1, 0).unwrap();
        assert!(matches!(
            extract_dc_luma(&img),
            Err(Error::NotBlockAligned { .. })
        ));
    }
}
