//! Baseline JPEG codec and luminance DC extraction.

pub(crate) mod dc;
mod dct;
mod decoder;
mod encoder;
pub mod tables;

pub use dc::{block_level_sum, extract_dc_luma, luma, DcVector, DC_MAX, DC_MIN};

use crate::error::{Error, Result};
use crate::image::PixelImage;

/// JPEG quality factor in `1..=100`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QualityFactor(u8);

impl QualityFactor {
    pub fn new(qf: i32) -> Result<Self> {
        if (1..=100).contains(&qf) {
            Ok(Self(qf as u8))
        } else {
            Err(Error::QualityOutOfRange(qf))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl std::fmt::Display for QualityFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<i32> for QualityFactor {
    type Error = Error;
    fn try_from(v: i32) -> Result<Self> {
        Self::new(v)
    }
}

/// Luminance and chrominance quantization tables, natural order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantTables {
    pub luma: [u16; 64],
    pub chroma: [u16; 64],
}

impl QuantTables {
    /// Scales the Annex K tables with the IJG quality rule.
    pub fn for_quality(qf: QualityFactor) -> Self {
        let q = qf.get() as u32;
        let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
        let scaled = |base: &[u16; 64]| {
            let mut t = [0u16; 64];
            for (dst, &b) in t.iter_mut().zip(base.iter()) {
                *dst = ((b as u32 * scale + 50) / 100).clamp(1, 255) as u16;
            }
            t
        };
        Self {
            luma: scaled(&tables::LUMA_QUANT),
            chroma: scaled(&tables::CHROMA_QUANT),
        }
    }
}

/// Encodes a baseline sequential JPEG with 4:4:4 sampling.
pub fn encode_jpeg(img: &PixelImage, qf: QualityFactor) -> Vec<u8> {
    encoder::encode(img, qf)
}

/// Decodes a baseline JPEG produced by [`encode_jpeg`] or any other
/// non-subsampled baseline encoder. Output keeps the stream's channel count.
pub fn decode_jpeg(bytes: &[u8]) -> Result<PixelImage> {
    decoder::decode(bytes, true)
}

/// Decodes without the color transform: a YCbCr stream yields Y, Cb, Cr
/// samples in place of R, G, B.
pub fn decode_jpeg_components(bytes: &[u8]) -> Result<PixelImage> {
    decoder::decode(bytes, false)
}

/// Decode, then re-encode at a new quality.
pub fn recompress(bytes: &[u8], qf: QualityFactor) -> Result<Vec<u8>> {
    Ok(encode_jpeg(&decode_jpeg(bytes)?, qf))
}
