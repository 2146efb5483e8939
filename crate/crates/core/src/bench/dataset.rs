//! Generation of original, single- and double-compressed encrypted images.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::SourceImage;
use crate::cipher::{derive_keys, encrypt, EncryptionParams};
use crate::error::{Error, Result};
use crate::feature::{feature_from_pixels, format, sign_feature_from_pixels};
use crate::jpeg::{decode_jpeg, encode_jpeg, QualityFactor};

/// Quality factors for the original, first and second compressions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionGrid {
    pub name: String,
    pub qf_original: u8,
    pub qf_first: u8,
    pub qf_second: Vec<u8>,
}

impl ConditionGrid {
    pub fn new(name: impl Into<String>, qf_original: u8, qf_first: u8, qf_second: Vec<u8>) -> Result<Self> {
        for &q in [qf_original, qf_first].iter().chain(&qf_second) {
            QualityFactor::new(q as i32)?;
        }
        Ok(Self {
            name: name.into(),
            qf_original,
            qf_first,
            qf_second,
        })
    }

    /// Conditions (1)-(3): originals and first compressions at 95, 85 or
    /// 75, recompressed at 85, 80, 75 and 70.
    pub fn standard(condition: u8) -> Option<Self> {
        let qf = match condition {
            1 => 95,
            2 => 85,
            3 => 75,
            _ => return None,
        };
        Some(Self {
            name: format!("({condition})"),
            qf_original: qf,
            qf_first: qf,
            qf_second: vec![85, 80, 75, 70],
        })
    }

    fn qf(v: u8) -> QualityFactor {
        QualityFactor::new(v as i32).expect("validated on construction")
    }
}

/// Which second-layer seed an image was encrypted with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyLabel {
    /// The seed `k` used for queries.
    K,
    /// The replacement seed `k'` (same `k0`).
    KPrime,
}

impl KeyLabel {
    fn tag(self) -> &'static str {
        match self {
            KeyLabel::K => "k",
            KeyLabel::KPrime => "kp",
        }
    }
}

/// Where one encrypted JPEG came from: source index, compression count and
/// the keys and quality factors used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub id: String,
    pub origin: usize,
    pub origin_name: String,
    /// Number of compressions after encryption (1 or 2).
    pub j: u8,
    pub k0: u64,
    pub k: u64,
    pub key: KeyLabel,
    pub n_fixed: usize,
    /// Original, first and (for j = 2) second quality factors.
    pub qf_chain: Vec<u8>,
}

/// Seeds for the dataset: `k0` shared, `k` for queries, `k_prime` for the
/// re-keyed variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSeeds {
    pub k0: u64,
    pub k: u64,
    pub k_prime: u64,
}

impl Default for DatasetSeeds {
    fn default() -> Self {
        Self {
            k0: 0x0123_4567_89AB_CDEF,
            k: 1,
            k_prime: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetEntry {
    pub record: ProvenanceRecord,
    pub jpeg: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub grid: ConditionGrid,
    pub seeds: DatasetSeeds,
    /// Blocks per image, M.
    pub block_count: usize,
    pub entries: Vec<DatasetEntry>,
}

/// For each source image: compress at `qf_original`, then for each of `k`
/// and `k'` encrypt and compress at `qf_first` (j = 1), and recompress that
/// at every `qf_second` (j = 2). `n_fixed` defaults to 10% of the blocks.
pub fn build_dataset(
    sources: &[SourceImage],
    grid: &ConditionGrid,
    seeds: DatasetSeeds,
    n_fixed: Option<usize>,
) -> Result<Dataset> {
    let first = sources
        .first()
        .ok_or_else(|| Error::Corpus("no source images".into()))?;
    let (w, h) = (first.image.width(), first.image.height());
    for s in sources {
        s.image.require_block_aligned()?;
        if (s.image.width(), s.image.height()) != (w, h) {
            return Err(Error::Corpus(format!(
                "{} is {}x{}, expected {w}x{h}",
                s.id,
                s.image.width(),
                s.image.height()
            )));
        }
    }
    let m = first.image.block_count();
    let params = match n_fixed {
        Some(n) => EncryptionParams::new(n),
        None => EncryptionParams::default_for_blocks(m),
    };
    if params.n_fixed > m {
        return Err(Error::TooManyFixedBlocks {
            n: params.n_fixed,
            available: m,
        });
    }

    let per_image: Vec<Vec<DatasetEntry>> = sources
        .par_iter()
        .enumerate()
        .map(|(i, src)| generate_one(i, src, grid, seeds, params))
        .collect::<Result<_>>()?;

    Ok(Dataset {
        grid: grid.clone(),
        seeds,
        block_count: m,
        entries: per_image.into_iter().flatten().collect(),
    })
}

fn generate_one(
    origin: usize,
    src: &SourceImage,
    grid: &ConditionGrid,
    seeds: DatasetSeeds,
    params: EncryptionParams,
) -> Result<Vec<DatasetEntry>> {
    let original = encode_jpeg(&src.image, ConditionGrid::qf(grid.qf_original));
    let decoded = decode_jpeg(&original)?;
    let mut out = Vec::with_capacity(2 * (1 + grid.qf_second.len()));
    for (label, k) in [(KeyLabel::K, seeds.k), (KeyLabel::KPrime, seeds.k_prime)] {
        let keys = derive_keys(seeds.k0, k);
        let record = |j: u8, chain: Vec<u8>| ProvenanceRecord {
            id: format!(
                "o{origin:04}-j{j}-{}-q{}",
                label.tag(),
                chain.iter().map(u8::to_string).collect::<Vec<_>>().join("-")
            ),
            origin,
            origin_name: src.id.clone(),
            j,
            k0: seeds.k0,
            k,
            key: label,
            n_fixed: params.n_fixed,
            qf_chain: chain,
        };
        let single = encode_jpeg(
            &encrypt(&decoded, &keys, params)?,
            ConditionGrid::qf(grid.qf_first),
        );
        let single_pixels = decode_jpeg(&single)?;
        out.push(DatasetEntry {
            record: record(1, vec![grid.qf_original, grid.qf_first]),
            jpeg: single,
        });
        for &q2 in &grid.qf_second {
            out.push(DatasetEntry {
                record: record(2, vec![grid.qf_original, grid.qf_first, q2]),
                jpeg: encode_jpeg(&single_pixels, ConditionGrid::qf(q2)),
            });
        }
    }
    Ok(out)
}

/// Features of one dataset entry, kept at full length M so that any
/// N can be evaluated later.
#[derive(Debug, Clone)]
pub struct EntryFeatures {
    pub record: ProvenanceRecord,
    pub magnitudes: Vec<u16>,
    pub signs: Vec<bool>,
}

pub fn extract_all(dataset: &Dataset) -> Result<Vec<EntryFeatures>> {
    dataset
        .entries
        .par_iter()
        .map(|e| {
            let img = decode_jpeg(&e.jpeg)?;
            let m = img.block_count();
            Ok(EntryFeatures {
                record: e.record.clone(),
                magnitudes: feature_from_pixels(&img, m)?,
                signs: sign_feature_from_pixels(&img, m)?,
            })
        })
        .collect()
}

/// One manifest line: a record plus where its files live, relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub feature: PathBuf,
    #[serde(flatten)]
    pub record: ProvenanceRecord,
}

pub const MANIFEST_NAME: &str = "manifest.jsonl";

/// Writes `images/<id>.jpg`, `features/<id>.etcf` (full length M) and a
/// JSON-lines manifest into `dir`. Returns the manifest path.
pub fn write_dataset(
    dir: &Path,
    dataset: &Dataset,
    features: &[EntryFeatures],
) -> Result<PathBuf> {
    let images = dir.join("images");
    let feats = dir.join("features");
    for d in [&images, &feats] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let mut manifest = String::new();
    for (entry, f) in dataset.entries.iter().zip(features) {
        let image = PathBuf::from("images").join(format!("{}.jpg", entry.record.id));
        let feature = PathBuf::from("features").join(format!("{}.etcf", entry.record.id));
        let ip = dir.join(&image);
        std::fs::write(&ip, &entry.jpeg).map_err(|e| Error::io(&ip, e))?;
        let fp = dir.join(&feature);
        std::fs::write(&fp, format::to_bytes(&f.magnitudes)).map_err(|e| Error::io(&fp, e))?;
        let line = ManifestEntry {
            image,
            feature,
            record: entry.record.clone(),
        };
        manifest.push_str(&serde_json::to_string(&line).expect("manifest entries serialize"));
        manifest.push('\n');
    }
    let path = dir.join(MANIFEST_NAME);
    std::fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Manifest {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    parse_manifest(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
