//! `ETCF` feature files.
//!
//! Layout (little-endian): the magic `ETCF`, a version byte (1), a `u32`
//! count N, then N `u16` values.

use std::path::Path;

use super::{FeatureVector, FEATURE_MAX};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ETCF";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 9;

pub fn to_bytes(values: &[u16]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 2 * values.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(values.len() as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<Vec<u16>> {
    let bad = |msg: &str| Error::FeatureFormat(msg.to_string());
    if bytes.len() < HEADER_LEN {
        return Err(bad("shorter than the header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    if bytes[4] != VERSION {
        return Err(Error::FeatureFormat(format!("unknown version {}", bytes[4])));
    }
    let n = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 2 * n {
        return Err(Error::FeatureFormat(format!(
            "header says {n} values, body holds {} bytes",
            body.len()
        )));
    }
    body.chunks_exact(2)
        .map(|c| {
            let v = u16::from_le_bytes([c[0], c[1]]);
            if v > FEATURE_MAX {
                Err(Error::FeatureFormat(format!("value {v} exceeds {FEATURE_MAX}")))
            } else {
                Ok(v)
            }
        })
        .collect()
}

/// One decimal value per line.
pub fn to_text(values: &[u16]) -> String {
    let mut s = String::with_capacity(values.len() * 4);
    for v in values {
        s.push_str(&v.to_string());
        s.push('\n');
    }
    s
}

pub fn write(path: impl AsRef<Path>, feature: &FeatureVector) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_bytes(feature.values())).map_err(|e| Error::io(path, e))
}

/// Reads an ETCF file; the image id is the file stem.
pub fn read(path: impl AsRef<Path>) -> Result<FeatureVector> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(FeatureVector::new(id, from_bytes(&bytes)?))
}
