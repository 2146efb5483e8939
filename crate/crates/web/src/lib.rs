//! Canvas-facing wrappers around `etcident`.
//!
//! Everything takes and returns RGBA bytes as read from / written to an
//! `ImageData`. Alpha is dropped on the way in and set to 255 on the way out.
//! The plain functions are usable (and tested) natively; the `#[wasm_bindgen]`
//! exports only convert errors.

use etcident::cipher::{self, EncryptionParams};
use etcident::feature::{self, IdentificationParams};
use etcident::jpeg::{decode_jpeg, encode_jpeg, QualityFactor};
use etcident::PixelImage;
use wasm_bindgen::prelude::*;

fn from_rgba(rgba: &[u8], width: usize, height: usize) -> Result<PixelImage, String> {
    if rgba.len() != width * height * 4 {
        return Err(format!(
            "expected {} RGBA bytes for {width}x{height}, got {}",
            width * height * 4,
            rgba.len()
        ));
    }
    let rgb = rgba
        .chunks_exact(4)
        .flat_map(|p| [p[0], p[1], p[2]])
        .collect();
    PixelImage::new(width, height, 3, rgb).map_err(|e| e.to_string())
}

fn to_rgba(img: &PixelImage) -> Vec<u8> {
    let rgb = img.to_rgb();
    rgb.samples()
        .chunks_exact(3)
        .flat_map(|p| [p[0], p[1], p[2], 255])
        .collect()
}

fn params(n: u32, img: &PixelImage) -> EncryptionParams {
    if n == 0 {
        EncryptionParams::default_for_blocks(img.block_count())
    } else {
        EncryptionParams::new(n as usize)
    }
}

/// Scrambles an RGBA buffer. `n == 0` picks 10% of the blocks.
pub fn encrypt_rgba(rgba: &[u8], width: usize, height: usize, k0: u64, k: u64, n: u32) -> Result<Vec<u8>, String> {
    let img = from_rgba(rgba, width, height)?;
    let p = params(n, &img);
    let out = cipher::encrypt(&img, &cipher::derive_keys(k0, k), p).map_err(|e| e.to_string())?;
    Ok(to_rgba(&out))
}

pub fn decrypt_rgba(rgba: &[u8], width: usize, height: usize, k0: u64, k: u64, n: u32) -> Result<Vec<u8>, String> {
    let img = from_rgba(rgba, width, height)?;
    let p = params(n, &img);
    let out = cipher::decrypt(&img, &cipher::derive_keys(k0, k), p).map_err(|e| e.to_string())?;
    Ok(to_rgba(&out))
}

/// JPEG round trip at `qf`; returns the decoded RGBA and the stream size.
pub fn recompress_rgba(rgba: &[u8], width: usize, height: usize, qf: i32) -> Result<(Vec<u8>, usize), String> {
    let img = from_rgba(rgba, width, height)?;
    let qf = QualityFactor::new(qf).map_err(|e| e.to_string())?;
    let bytes = encode_jpeg(&img, qf);
    let out = decode_jpeg(&bytes).map_err(|e| e.to_string())?;
    Ok((to_rgba(&out), bytes.len()))
}

/// `|DC|` features of two same-sized images and the matcher's verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureComparison {
    pub query: Vec<u16>,
    pub candidate: Vec<u16>,
    pub max_diff: u16,
    pub accepted: bool,
}

pub fn compare_rgba(
    query: &[u8],
    candidate: &[u8],
    width: usize,
    height: usize,
    n: u32,
    d: u32,
) -> Result<FeatureComparison, String> {
    let q = from_rgba(query, width, height)?;
    let c = from_rgba(candidate, width, height)?;
    let n = params(n, &q).n_fixed;
    let fq = feature::feature_from_pixels(&q, n).map_err(|e| e.to_string())?;
    let fc = feature::feature_from_pixels(&c, n).map_err(|e| e.to_string())?;
    let max_diff = fq.iter().zip(&fc).map(|(a, b)| a.abs_diff(*b)).max().unwrap_or(0);
    let verdict = feature::compare_values(&fq, &fc, IdentificationParams::new(n, d)).map_err(|e| e.to_string())?;
    Ok(FeatureComparison {
        query: fq,
        candidate: fc,
        max_diff,
        accepted: verdict.accepted,
    })
}

#[wasm_bindgen]
pub fn encrypt(rgba: &[u8], width: usize, height: usize, k0: u64, k: u64, n: u32) -> Result<Vec<u8>, JsError> {
    encrypt_rgba(rgba, width, height, k0, k, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn decrypt(rgba: &[u8], width: usize, height: usize, k0: u64, k: u64, n: u32) -> Result<Vec<u8>, JsError> {
    decrypt_rgba(rgba, width, height, k0, k, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub struct Recompressed {
    rgba: Vec<u8>,
    bytes: usize,
}

#[wasm_bindgen]
impl Recompressed {
    #[wasm_bindgen(getter)]
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn bytes(&self) -> usize {
        self.bytes
    }
}

#[wasm_bindgen]
pub fn recompress(rgba: &[u8], width: usize, height: usize, qf: i32) -> Result<Recompressed, JsError> {
    let (rgba, bytes) = recompress_rgba(rgba, width, height, qf).map_err(|e| JsError::new(&e))?;
    Ok(Recompressed { rgba, bytes })
}

#[wasm_bindgen]
pub struct Comparison(FeatureComparison);

#[wasm_bindgen]
impl Comparison {
    #[wasm_bindgen(getter)]
    pub fn query(&self) -> Vec<u16> {
        self.0.query.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn candidate(&self) -> Vec<u16> {
        self.0.candidate.clone()
    }

    #[wasm_bindgen(getter, js_name = maxDiff)]
    pub fn max_diff(&self) -> u16 {
        self.0.max_diff
    }

    #[wasm_bindgen(getter)]
    pub fn accepted(&self) -> bool {
        self.0.accepted
    }
}

#[wasm_bindgen]
pub fn compare(query: &[u8], candidate: &[u8], width: usize, height: usize, n: u32, d: u32) -> Result<Comparison, JsError> {
    compare_rgba(query, candidate, width, height, n, d)
        .map(Comparison)
        .map_err(|e| JsError::new(&e))
}
