//! Interleaved 8-bit pixel buffers.

use std::path::Path;

use crate::error::{Error, Result};

/// Side length of the square blocks every operation works on.
pub const BLOCK: usize = 8;

/// An 8-bit image with 1 (grayscale) or 3 (RGB) interleaved channels,
/// stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct PixelImage {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<u8>,
}

impl std::fmt::Debug for PixelImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PixelImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl PixelImage {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!(
                "{channels} channels; expected 1 or 3"
            )));
        }
        if width < BLOCK || height < BLOCK {
            return Err(Error::TooSmall { width, height });
        }
        if samples.len() != width * height * channels {
            return Err(Error::InvalidImage(format!(
                "{} samples for a {width}x{height}x{channels} image",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let at = (y * self.width + x) * self.channels;
        &self.samples[at..at + self.channels]
    }

    /// Number of complete 8x8 blocks, `floor(X/8) * floor(Y/8)`.
    pub fn block_count(&self) -> usize {
        (self.width / BLOCK) * (self.height / BLOCK)
    }

    pub fn is_block_aligned(&self) -> bool {
        self.width.is_multiple_of(BLOCK) && self.height.is_multiple_of(BLOCK)
    }

    pub(crate) fn require_block_aligned(&self) -> Result<()> {
        if self.is_block_aligned() {
            Ok(())
        } else {
            Err(Error::NotBlockAligned {
                width: self.width,
                height: self.height,
            })
        }
    }

    /// Crops the right and bottom edges down to the nearest multiple of 8.
    pub fn crop_to_blocks(&self) -> PixelImage {
        if self.is_block_aligned() {
            return self.clone();
        }
        let w = self.width / BLOCK * BLOCK;
        let h = self.height / BLOCK * BLOCK;
        let row = self.width * self.channels;
        let mut samples = Vec::with_capacity(w * h * self.channels);
        for y in 0..h {
            samples.extend_from_slice(&self.samples[y * row..y * row + w * self.channels]);
        }
        PixelImage {
            width: w,
            height: h,
            channels: self.channels,
            samples,
        }
    }

    /// Expands grayscale to RGB; RGB images are returned unchanged.
    pub fn to_rgb(&self) -> PixelImage {
        if self.channels == 3 {
            return self.clone();
        }
        PixelImage {
            width: self.width,
            height: self.height,
            channels: 3,
            samples: self.samples.iter().flat_map(|&v| [v, v, v]).collect(),
        }
    }

    /// Loads any format the `image` crate understands, flattening to RGB
    /// (or grayscale for single-channel sources).
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_encoded(&bytes)
    }

    pub fn from_encoded(bytes: &[u8]) -> Result<Self> {
        let decoded = image::load_from_memory(bytes)?;
        Self::from_dynamic(decoded)
    }

    pub fn from_dynamic(img: image::DynamicImage) -> Result<Self> {
        use image::ColorType;
        let (w, h) = (img.width() as usize, img.height() as usize);
        match img.color() {
            ColorType::L8 | ColorType::L16 | ColorType::La8 | ColorType::La16 => {
                Self::new(w, h, 1, img.into_luma8().into_raw())
            }
            _ => Self::new(w, h, 3, img.into_rgb8().into_raw()),
        }
    }

    /// Writes the image as PNG (lossless), used for decrypted output.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let color = if self.channels == 1 {
            image::ExtendedColorType::L8
        } else {
            image::ExtendedColorType::Rgb8
        };
        image::save_buffer_with_format(
            path.as_ref(),
            &self.samples,
            self.width as u32,
            self.height as u32,
            color,
            image::ImageFormat::Png,
        )?;
        Ok(())
    }
}
