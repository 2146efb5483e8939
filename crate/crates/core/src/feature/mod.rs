//! Feature extraction from encrypted JPEG images and threshold identification.
//!
//! The feature of an image is the absolute luminance DC value of each of its
//! first N blocks. Two features match when every element differs by at most
//! `d`. Because rotation/flip keeps a block's DC and the negative-positive
//! transform maps DC to `-DC - 8`, the absolute value survives re-keying of
//! the second layer; recompression only perturbs it slightly.

pub mod format;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::PixelImage;
use crate::jpeg::{self, dc};

/// Largest possible `|DC|`.
pub const FEATURE_MAX: u16 = 1024;

/// Default acceptance threshold `d`.
pub const DEFAULT_THRESHOLD: u32 = 150;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub image_id: String,
    values: Vec<u16>,
}

impl FeatureVector {
    pub fn new(image_id: impl Into<String>, values: Vec<u16>) -> Self {
        debug_assert!(values.iter().all(|&v| v <= FEATURE_MAX));
        Self {
            image_id: image_id.into(),
            values,
        }
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `n` values as a new vector.
    pub fn truncated(&self, n: usize) -> Result<FeatureVector> {
        if n > self.len() {
            return Err(Error::LengthMismatch {
                needed: n,
                got: self.len(),
            });
        }
        Ok(FeatureVector::new(self.image_id.clone(), self.values[..n].to_vec()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentificationParams {
    pub n_fixed: usize,
    pub threshold: u32,
}

impl IdentificationParams {
    pub fn new(n_fixed: usize, threshold: u32) -> Self {
        Self { n_fixed, threshold }
    }
}

fn dc_prefix(img: &PixelImage, n: usize) -> Result<Vec<i32>> {
    img.require_block_aligned()?;
    let m = img.block_count();
    if n > m {
        return Err(Error::TooManyFixedBlocks { n, available: m });
    }
    Ok(dc::extract_dc_prefix(img, n)?.into_inner())
}

/// `|DC|` of the first `n` luminance blocks of a decoded image.
pub fn feature_from_pixels(img: &PixelImage, n: usize) -> Result<Vec<u16>> {
    Ok(dc_prefix(img, n)?
        .into_iter()
        .map(|v| v.unsigned_abs() as u16)
        .collect())
}

/// Decodes `jpeg` and takes `|DC|` of its first `n` luminance blocks.
pub fn extract_feature(jpeg: &[u8], n: usize) -> Result<FeatureVector> {
    extract_feature_with_id(jpeg, n, "")
}

pub fn extract_feature_with_id(
    jpeg: &[u8],
    n: usize,
    image_id: impl Into<String>,
) -> Result<FeatureVector> {
    let img = jpeg::decode_jpeg(jpeg)?;
    Ok(FeatureVector::new(image_id, feature_from_pixels(&img, n)?))
}

/// Outcome of one query/candidate comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Comparison {
    pub accepted: bool,
    /// Elements examined before deciding (stops at the first violation).
    pub checked: usize,
}

fn require_len(v: &[u16], n: usize) -> Result<()> {
    if v.len() < n {
        Err(Error::LengthMismatch {
            needed: n,
            got: v.len(),
        })
    } else {
        Ok(())
    }
}

pub fn compare_values(query: &[u16], candidate: &[u16], params: IdentificationParams) -> Result<Comparison> {
    let n = params.n_fixed;
    require_len(query, n)?;
    require_len(candidate, n)?;
    for (i, (&a, &b)) in query[..n].iter().zip(&candidate[..n]).enumerate() {
        if a.abs_diff(b) as u32 > params.threshold {
            return Ok(Comparison {
                accepted: false,
                checked: i + 1,
            });
        }
    }
    Ok(Comparison {
        accepted: true,
        checked: n,
    })
}

/// Accepts iff `|query(n) - candidate(n)| <= d` for every `n < N`.
pub fn compare(
    query: &FeatureVector,
    candidate: &FeatureVector,
    params: IdentificationParams,
) -> Result<Comparison> {
    compare_values(&query.values, &candidate.values, params)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchVerdict {
    pub query_id: String,
    /// Database indices of accepted candidates, in scan order.
    pub matched: Vec<usize>,
    pub matched_ids: Vec<String>,
    /// Accept/reject for every database entry, in scan order.
    pub decisions: Vec<bool>,
}

impl MatchVerdict {
    /// The candidate a halting scan would report.
    pub fn first_match(&self) -> Option<&str> {
        self.matched_ids.first().map(String::as_str)
    }

    pub fn is_match(&self) -> bool {
        !self.matched.is_empty()
    }

    fn from_decisions(query: &FeatureVector, db: &[FeatureVector], decisions: Vec<bool>) -> Self {
        let matched: Vec<usize> = decisions
            .iter()
            .enumerate()
            .filter_map(|(i, &ok)| ok.then_some(i))
            .collect();
        MatchVerdict {
            query_id: query.image_id.clone(),
            matched_ids: matched.iter().map(|&i| db[i].image_id.clone()).collect(),
            matched,
            decisions,
        }
    }
}

/// Compares `query` against every database entry in order and records all
/// accepting candidates.
pub fn identify(
    query: &FeatureVector,
    db: &[FeatureVector],
    params: IdentificationParams,
) -> Result<MatchVerdict> {
    let decisions = db
        .iter()
        .map(|c| compare(query, c, params).map(|r| r.accepted))
        .collect::<Result<Vec<_>>>()?;
    Ok(MatchVerdict::from_decisions(query, db, decisions))
}

/// [`identify`] with candidates checked in parallel; same verdict.
pub fn identify_parallel(
    query: &FeatureVector,
    db: &[FeatureVector],
    params: IdentificationParams,
) -> Result<MatchVerdict> {
    let decisions = db
        .par_iter()
        .map(|c| compare(query, c, params).map(|r| r.accepted))
        .collect::<Result<Vec<_>>>()?;
    Ok(MatchVerdict::from_decisions(query, db, decisions))
}

/// Sign bits of the first N luminance DC values (1 for negative), the
/// feature of the DC-sign baseline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    pub image_id: String,
    bits: Vec<bool>,
}

impl SignVector {
    pub fn new(image_id: impl Into<String>, bits: Vec<bool>) -> Self {
        Self {
            image_id: image_id.into(),
            bits,
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn hamming(&self, other: &SignVector) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }
}

pub fn sign_feature_from_pixels(img: &PixelImage, n: usize) -> Result<Vec<bool>> {
    Ok(dc_prefix(img, n)?.into_iter().map(|v| v < 0).collect())
}

pub fn extract_sign_feature(jpeg: &[u8], n: usize) -> Result<SignVector> {
    let img = jpeg::decode_jpeg(jpeg)?;
    Ok(SignVector::new("", sign_feature_from_pixels(&img, n)?))
}

/// Baseline rule: all first `n` sign bits equal.
pub fn compare_signs(query: &[bool], candidate: &[bool], n: usize) -> Result<bool> {
    for v in [query, candidate] {
        if v.len() < n {
            return Err(Error::LengthMismatch {
                needed: n,
                got: v.len(),
            });
        }
    }
    Ok(query[..n] == candidate[..n])
}
