//! Two-layer block-scrambling encryption.
//!
//! Encryption runs, in order:
//!
//! 1. a keyed shuffle of all M blocks (K0, shared layer),
//! 2. a keyed shuffle of blocks `N..M` only (K1, changeable layer),
//! 3. a random rotation/flip of every block (K2),
//! 4. a random negative-positive transform of every block (K3).
//!
//! Because step 2 never moves the first N blocks, two encryptions that share
//! `k0` but differ in `k` put the same source blocks at positions `0..N`.
//! Every transform is applied identically to all channels of a block.

mod blocks;
mod keyfile;
mod keys;

pub use blocks::{negative_positive, BlockImage, BlockTransform, Dihedral};
pub use keyfile::KeyFile;
pub use keys::{derive_keys, splitmix64, KeySet, KeyStream, Seeds};

use crate::error::{Error, Result};
use crate::image::PixelImage;

/// Number of leading blocks the second permutation layer leaves in place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EncryptionParams {
    pub n_fixed: usize,
}

impl EncryptionParams {
    pub fn new(n_fixed: usize) -> Self {
        Self { n_fixed }
    }

    /// 10% of the blocks, at least one.
    pub fn default_for_blocks(m: usize) -> Self {
        Self {
            n_fixed: (m / 10).max(1),
        }
    }

    fn check(&self, m: usize) -> Result<()> {
        if self.n_fixed > m {
            Err(Error::TooManyFixedBlocks {
                n: self.n_fixed,
                available: m,
            })
        } else {
            Ok(())
        }
    }
}

/// Fisher-Yates over `0..len`, swapping from the end: for `i = len-1 .. 1`,
/// `j = below(i + 1)`, swap `i` and `j`.
pub fn keyed_permutation(len: usize, stream: &mut KeyStream) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = stream.below(i as u64 + 1) as usize;
        perm.swap(i, j);
    }
    perm
}

pub fn layer1_order(m: usize, keys: &KeySet) -> Vec<usize> {
    keyed_permutation(m, &mut keys.layer1())
}

/// Identity on `0..N`, keyed shuffle on `N..M`.
pub fn layer2_order(m: usize, keys: &KeySet, params: EncryptionParams) -> Result<Vec<usize>> {
    params.check(m)?;
    let n = params.n_fixed;
    let tail = keyed_permutation(m - n, &mut keys.layer2());
    Ok((0..n).chain(tail.into_iter().map(|t| n + t)).collect())
}

/// Source block index for every encrypted position (both layers composed).
pub fn block_sources(m: usize, keys: &KeySet, params: EncryptionParams) -> Result<Vec<usize>> {
    let l1 = layer1_order(m, keys);
    let l2 = layer2_order(m, keys, params)?;
    Ok(l2.iter().map(|&p| l1[p]).collect())
}

/// Per-block transforms for positions `0..m`: dihedral indices drawn from K2
/// and negative-positive bits from K3, both in raster order.
pub fn block_transforms(m: usize, keys: &KeySet) -> Vec<BlockTransform> {
    let mut dihedral = keys.dihedral();
    let mut negpos = keys.negpos();
    let dihedrals: Vec<Dihedral> = (0..m)
        .map(|_| Dihedral::new(dihedral.below(8) as u8).expect("below(8) < 8"))
        .collect();
    dihedrals
        .into_iter()
        .map(|d| BlockTransform {
            dihedral: d,
            negpos: negpos.bit(),
        })
        .collect()
}

pub fn permute_layer1(img: &BlockImage, keys: &KeySet) -> BlockImage {
    img.gather(&layer1_order(img.len(), keys))
}

pub fn unpermute_layer1(img: &BlockImage, keys: &KeySet) -> BlockImage {
    img.scatter(&layer1_order(img.len(), keys))
}

pub fn permute_layer2(
    img: &BlockImage,
    keys: &KeySet,
    params: EncryptionParams,
) -> Result<BlockImage> {
    Ok(img.gather(&layer2_order(img.len(), keys, params)?))
}

pub fn unpermute_layer2(
    img: &BlockImage,
    keys: &KeySet,
    params: EncryptionParams,
) -> Result<BlockImage> {
    Ok(img.scatter(&layer2_order(img.len(), keys, params)?))
}

pub fn apply_block_transforms(img: &BlockImage, keys: &KeySet) -> BlockImage {
    let mut out = img.clone();
    let ch = img.channels();
    for (m, t) in block_transforms(img.len(), keys).into_iter().enumerate() {
        t.apply(out.block_mut(m), ch);
    }
    out
}

pub fn invert_block_transforms(img: &BlockImage, keys: &KeySet) -> BlockImage {
    let mut out = img.clone();
    let ch = img.channels();
    for (m, t) in block_transforms(img.len(), keys).into_iter().enumerate() {
        t.invert(out.block_mut(m), ch);
    }
    out
}

pub fn encrypt(img: &PixelImage, keys: &KeySet, params: EncryptionParams) -> Result<PixelImage> {
    let blocks = BlockImage::from_pixels(img)?;
    params.check(blocks.len())?;
    let shuffled = permute_layer2(&permute_layer1(&blocks, keys), keys, params)?;
    Ok(apply_block_transforms(&shuffled, keys).to_pixels())
}

pub fn decrypt(img: &PixelImage, keys: &KeySet, params: EncryptionParams) -> Result<PixelImage> {
    let blocks = BlockImage::from_pixels(img)?;
    params.check(blocks.len())?;
    let untransformed = invert_block_transforms(&blocks, keys);
    let unshuffled = unpermute_layer1(&unpermute_layer2(&untransformed, keys, params)?, keys);
    Ok(unshuffled.to_pixels())
}

/// Decrypts with the old key set and encrypts with the new one. Both sets
/// must share `k0` so the first N positions keep their source blocks.
pub fn re_encrypt(
    img: &PixelImage,
    old: &KeySet,
    new: &KeySet,
    params: EncryptionParams,
) -> Result<PixelImage> {
    if old.k0() != new.k0() {
        return Err(Error::SeedMismatch {
            old: old.k0(),
            new: new.k0(),
        });
    }
    encrypt(&decrypt(img, old, params)?, new, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numbered_image(grid_w: usize, grid_h: usize) -> PixelImage {
        // every block uniform with value = its index
        let (w, h) = (grid_w * 8, grid_h * 8);
        let mut s = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                s[y * w + x] = ((y / 8) * grid_w + x / 8) as u8;
            }
        }
        PixelImage::new(w, h, 1, s).unwrap()
    }

    /// Step-by-step Fisher-Yates trace kept separate from `keyed_permutation`:
    /// draws `j` with a plain modulo-free rejection loop on the raw stream.
    fn trace_shuffle(len: usize, mut g: KeyStream) -> Vec<usize> {
        let mut items: Vec<usize> = (0..len).collect();
        let mut i = len;
        while i > 1 {
            i -= 1;
            let bound = (i + 1) as u128;
            let j = loop {
                let prod = g.next_u64() as u128 * bound;
                let low = prod as u64;
                let threshold = (u64::MAX as u128 + 1 - bound) % bound;
                if low as u128 >= threshold {
                    break (prod >> 64) as usize;
                }
            };
            items.swap(i, j);
        }
        items
    }

    #[test]
    fn layer1_matches_independent_trace() {
        let keys = derive_keys(42, 7);
        let order = layer1_order(16, &keys);
        assert_eq!(order, trace_shuffle(16, keys.layer1()));
        let mut sorted = order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..16).collect::<Vec<_>>());
        assert_ne!(order, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn single_block_is_unchanged_by_permutation() {
        let img = BlockImage::from_pixels(&numbered_image(1, 1)).unwrap();
        assert_eq!(permute_layer1(&img, &derive_keys(3, 4)), img);
    }

    #[test]
    fn layer2_keeps_first_n_blocks() {
        let img = BlockImage::from_pixels(&numbered_image(4, 4)).unwrap();
        let p = EncryptionParams::new(4);
        let a = permute_layer2(&img, &derive_keys(1, 10), p).unwrap();
        let b = permute_layer2(&img, &derive_keys(1, 11), p).unwrap();
        for m in 0..4 {
            assert_eq!(a.block(m), img.block(m));
            assert_eq!(b.block(m), img.block(m));
        }
        assert_ne!(a, b);
        assert_ne!(a, img);
    }

    #[test]
    fn layer2_full_n_is_identity() {
        let img = BlockImage::from_pixels(&numbered_image(4, 4)).unwrap();
        let out = permute_layer2(&img, &derive_keys(1, 2), EncryptionParams::new(16)).unwrap();
        assert_eq!(out, img);
        assert!(permute_layer2(&img, &derive_keys(1, 2), EncryptionParams::new(17)).is_err());
    }

    #[test]
    fn round_trip_rgb() {
        let (w, h) = (40, 24);
        let s: Vec<u8> = (0..w * h * 3).map(|i| (i * 7 % 251) as u8).collect();
        let img = PixelImage::new(w, h, 3, s).unwrap();
        let keys = derive_keys(11, 22);
        let p = EncryptionParams::new(3);
        let enc = encrypt(&img, &keys, p).unwrap();
        assert_ne!(enc, img);
        assert_eq!(decrypt(&enc, &keys, p).unwrap(), img);
    }

    #[test]
    fn block_sources_describe_encryption() {
        let img = numbered_image(5, 3);
        let keys = derive_keys(8, 9);
        let p = EncryptionParams::new(2);
        let enc = BlockImage::from_pixels(&encrypt(&img, &keys, p).unwrap()).unwrap();
        let sources = block_sources(15, &keys, p).unwrap();
        let transforms = block_transforms(15, &keys);
        for (m, (&src, t)) in sources.iter().zip(&transforms).enumerate() {
            let v = enc.block(m)[0];
            let expected = if t.negpos { 255 - src as u8 } else { src as u8 };
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn re_encrypt_same_keys_is_identity() {
        let img = numbered_image(4, 2);
        let keys = derive_keys(1, 2);
        let p = EncryptionParams::new(1);
        let enc = encrypt(&img, &keys, p).unwrap();
        assert_eq!(re_encrypt(&enc, &keys, &keys, p).unwrap(), enc);
    }

    #[test]
    fn re_encrypt_matches_fresh_encryption() {
        let img = numbered_image(4, 2);
        let (old, new) = (derive_keys(1, 2), derive_keys(1, 3));
        let p = EncryptionParams::new(2);
        let enc = encrypt(&img, &old, p).unwrap();
        assert_eq!(
            re_encrypt(&enc, &old, &new, p).unwrap(),
            encrypt(&img, &new, p).unwrap()
        );
    }

    #[test]
    fn re_encrypt_rejects_new_k0() {
        let img = numbered_image(2, 2);
        let r = re_encrypt(
            &img,
            &derive_keys(1, 2),
            &derive_keys(5, 2),
            EncryptionParams::new(1),
        );
        assert!(matches!(r, Err(Error::SeedMismatch { .. })));
    }

    #[test]
    fn unaligned_input_is_rejected() {
        let img = PixelImage::filled(12, 16, 3, 0).unwrap();
        let r = encrypt(&img, &derive_keys(1, 1), EncryptionParams::new(1));
        assert!(matches!(r, Err(Error::NotBlockAligned { .. })));
    }

    #[test]
    fn default_n_is_ten_percent() {
        assert_eq!(EncryptionParams::default_for_blocks(4800).n_fixed, 480);
        assert_eq!(EncryptionParams::default_for_blocks(4).n_fixed, 1);
    }
}
