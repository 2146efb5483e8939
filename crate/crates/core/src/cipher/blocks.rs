//! Block grids and per-block transforms.

use crate::error::Result;
use crate::image::{PixelImage, BLOCK};

const BLOCK_AREA: usize = BLOCK * BLOCK;

/// An image split into non-overlapping 8x8 blocks in raster order. Each
/// block stores its 64 pixels row-major with channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockImage {
    grid_w: usize,
    grid_h: usize,
    channels: usize,
    data: Vec<u8>,
}

impl BlockImage {
    pub fn from_pixels(img: &PixelImage) -> Result<Self> {
        img.require_block_aligned()?;
        let ch = img.channels();
        let (grid_w, grid_h) = (img.width() / BLOCK, img.height() / BLOCK);
        let stride = BLOCK_AREA * ch;
        let mut data = vec![0u8; grid_w * grid_h * stride];
        let src = img.samples();
        let row_len = BLOCK * ch;
        for (m, block) in data.chunks_exact_mut(stride).enumerate() {
            let (bx, by) = (m % grid_w, m / grid_w);
            for y in 0..BLOCK {
                let at = ((by * BLOCK + y) * img.width() + bx * BLOCK) * ch;
                block[y * row_len..(y + 1) * row_len].copy_from_slice(&src[at..at + row_len]);
            }
        }
        Ok(Self {
            grid_w,
            grid_h,
            channels: ch,
            data,
        })
    }

    pub fn to_pixels(&self) -> PixelImage {
        let ch = self.channels;
        let width = self.grid_w * BLOCK;
        let height = self.grid_h * BLOCK;
        let row_len = BLOCK * ch;
        let mut samples = vec![0u8; width * height * ch];
        for (m, block) in self.blocks().enumerate() {
            let (bx, by) = (m % self.grid_w, m / self.grid_w);
            for y in 0..BLOCK {
                let at = ((by * BLOCK + y) * width + bx * BLOCK) * ch;
                samples[at..at + row_len].copy_from_slice(&block[y * row_len..(y + 1) * row_len]);
            }
        }
        PixelImage::new(width, height, ch, samples).expect("block grid is at least one block")
    }

    pub fn grid_w(&self) -> usize {
        self.grid_w
    }

    pub fn grid_h(&self) -> usize {
        self.grid_h
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Number of blocks, M.
    pub fn len(&self) -> usize {
        self.grid_w * self.grid_h
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn stride(&self) -> usize {
        BLOCK_AREA * self.channels
    }

    pub fn block(&self, m: usize) -> &[u8] {
        let s = self.stride();
        &self.data[m * s..(m + 1) * s]
    }

    pub fn block_mut(&mut self, m: usize) -> &mut [u8] {
        let s = self.stride();
        &mut self.data[m * s..(m + 1) * s]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[u8]> {
        self.data.chunks_exact(self.stride())
    }

    /// Output block `p` takes input block `sources[p]`.
    pub fn gather(&self, sources: &[usize]) -> BlockImage {
        debug_assert_eq!(sources.len(), self.len());
        let mut data = Vec::with_capacity(self.data.len());
        for &src in sources {
            data.extend_from_slice(self.block(src));
        }
        BlockImage { data, ..*self }
    }

    /// Inverse of [`gather`](Self::gather): input block `p` goes to `sources[p]`.
    pub fn scatter(&self, sources: &[usize]) -> BlockImage {
        debug_assert_eq!(sources.len(), self.len());
        let mut out = BlockImage {
            data: vec![0; self.data.len()],
            ..*self
        };
        for (p, &dst) in sources.iter().enumerate() {
            out.block_mut(dst).copy_from_slice(self.block(p));
        }
        out
    }
}

/// One of the eight symmetries of the square: an optional horizontal
/// mirror followed by `index % 4` clockwise quarter turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dihedral(u8);

impl Dihedral {
    pub const IDENTITY: Dihedral = Dihedral(0);

    pub fn new(index: u8) -> Option<Self> {
        (index < 8).then_some(Self(index))
    }

    pub fn all() -> impl Iterator<Item = Dihedral> {
        (0..8).map(Dihedral)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Where the pixel at `(x, y)` ends up.
    pub fn map(self, mut x: usize, mut y: usize) -> (usize, usize) {
        if self.0 >= 4 {
            x = BLOCK - 1 - x;
        }
        for _ in 0..self.0 % 4 {
            (x, y) = (BLOCK - 1 - y, x);
        }
        (x, y)
    }

    /// `table[i]` is the destination index of source pixel `i`.
    fn table(self) -> [usize; BLOCK_AREA] {
        let mut t = [0; BLOCK_AREA];
        for (i, slot) in t.iter_mut().enumerate() {
            let (x, y) = self.map(i % BLOCK, i / BLOCK);
            *slot = y * BLOCK + x;
        }
        t
    }

    pub fn apply(self, block: &mut [u8], channels: usize) {
        if self.0 == 0 {
            return;
        }
        let src = block.to_vec();
        for (i, &dst) in self.table().iter().enumerate() {
            block[dst * channels..(dst + 1) * channels]
                .copy_from_slice(&src[i * channels..(i + 1) * channels]);
        }
    }

    pub fn invert(self, block: &mut [u8], channels: usize) {
        if self.0 == 0 {
            return;
        }
        let src = block.to_vec();
        for (i, &dst) in self.table().iter().enumerate() {
            block[i * channels..(i + 1) * channels]
                .copy_from_slice(&src[dst * channels..(dst + 1) * channels]);
        }
    }
}

/// `I -> 255 - I` on every sample; its own inverse.
pub fn negative_positive(block: &mut [u8]) {
    for v in block {
        *v = 255 - *v;
    }
}

/// The per-block rotation/flip and negative-positive bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockTransform {
    pub dihedral: Dihedral,
    pub negpos: bool,
}

impl BlockTransform {
    pub const IDENTITY: BlockTransform = BlockTransform {
        dihedral: Dihedral::IDENTITY,
        negpos: false,
    };

    pub fn apply(self, block: &mut [u8], channels: usize) {
        self.dihedral.apply(block, channels);
        if self.negpos {
            negative_positive(block);
        }
    }

    pub fn invert(self, block: &mut [u8], channels: usize) {
        if self.negpos {
            negative_positive(block);
        }
        self.dihedral.invert(block, channels);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numbered() -> Vec<u8> {
        (0..64).collect()
    }

    #[test]
    fn dihedral_elements_are_distinct_bijections() {
        let mut seen = std::collections::HashSet::new();
        for d in Dihedral::all() {
            let mut b = numbered();
            d.apply(&mut b, 1);
            let mut sorted = b.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, numbered());
            assert!(seen.insert(b));
            let mut back = {
                let mut b = numbered();
                d.apply(&mut b, 1);
                b
            };
            d.invert(&mut back, 1);
            assert_eq!(back, numbered());
        }
    }

    #[test]
    fn quarter_turn_is_clockwise() {
        let mut b = numbered();
        Dihedral::new(1).unwrap().apply(&mut b, 1);
        // top-left pixel moves to top-right
        assert_eq!(b[7], 0);
        // bottom-left moves to top-left
        assert_eq!(b[0], 56);
    }

    #[test]
    fn rgb_pixels_move_together() {
        let mut b: Vec<u8> = (0..64).flat_map(|i| [i, i, i]).collect();
        Dihedral::new(6).unwrap().apply(&mut b, 3);
        for px in b.chunks_exact(3) {
            assert!(px[0] == px[1] && px[1] == px[2]);
        }
    }

    #[test]
    fn negpos_examples() {
        let mut b = vec![0u8; 64];
        negative_positive(&mut b);
        assert!(b.iter().all(|&v| v == 255));
        negative_positive(&mut b);
        assert!(b.iter().all(|&v| v == 0));
    }

    #[test]
    fn identity_transform_is_noop() {
        let mut b = numbered();
        BlockTransform::IDENTITY.apply(&mut b, 1);
        assert_eq!(b, numbered());
    }

    #[test]
    fn gather_scatter_round_trip() {
        let img = PixelImage::new(24, 8, 1, (0..192).map(|v| v as u8).collect()).unwrap();
        let blocks = BlockImage::from_pixels(&img).unwrap();
        let order = [2, 0, 1];
        let g = blocks.gather(&order);
        assert_eq!(g.block(0), blocks.block(2));
        assert_eq!(g.scatter(&order), blocks);
        assert_eq!(blocks.to_pixels(), img);
    }
}
