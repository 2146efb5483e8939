//! Plain-text key records:
//!
//! ```text
//! k0 = 1234
//! k = 5678
//! n = 480
//! ```
//!
//! Seeds are unsigned 64-bit decimals. Blank lines and `#` comments are ignored.

use std::path::Path;
use std::str::FromStr;

use super::{derive_keys, EncryptionParams, KeySet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyFile {
    pub k0: u64,
    pub k: u64,
    pub n: usize,
}

impl KeyFile {
    pub fn keys(&self) -> KeySet {
        derive_keys(self.k0, self.k)
    }

    pub fn params(&self) -> EncryptionParams {
        EncryptionParams::new(self.n)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        std::fs::read_to_string(path)
            .map_err(|e| Error::io(path, e))?
            .parse()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

impl std::fmt::Display for KeyFile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "k0 = {}", self.k0)?;
        writeln!(f, "k = {}", self.k)?;
        writeln!(f, "n = {}", self.n)
    }
}

impl FromStr for KeyFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (mut k0, mut k, mut n) = (None, None, None);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::KeyFile(format!("line {}: expected `key = value`", i + 1)))?;
            let value = value.trim();
            let bad = |what: &str| Error::KeyFile(format!("line {}: bad {what} `{value}`", i + 1));
            match key.trim() {
                "k0" => k0 = Some(value.parse::<u64>().map_err(|_| bad("k0"))?),
                "k" => k = Some(value.parse::<u64>().map_err(|_| bad("k"))?),
                "n" | "N" => n = Some(value.parse::<usize>().map_err(|_| bad("n"))?),
                other => {
                    return Err(Error::KeyFile(format!(
                        "line {}: unknown field `{other}`",
                        i + 1
                    )))
                }
            }
        }
        let missing = |f: &str| Error::KeyFile(format!("missing `{f}`"));
        let n = n.ok_or_else(|| missing("n"))?;
        if n == 0 {
            return Err(Error::KeyFile("n must be at least 1".into()));
        }
        Ok(KeyFile {
            k0: k0.ok_or_else(|| missing("k0"))?,
            k: k.ok_or_else(|| missing("k"))?,
            n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_full_u64_range() {
        let kf = KeyFile {
            k0: u64::MAX,
            k: 0,
            n: 480,
        };
        assert_eq!(kf.to_string().parse::<KeyFile>().unwrap(), kf);
    }

    #[test]
    fn accepts_comments_and_blank_lines() {
        let kf: KeyFile = "# keys\n\nk0 = 1\nk=2 # second layer\nn = 3\n".parse().unwrap();
        assert_eq!((kf.k0, kf.k, kf.n), (1, 2, 3));
    }

    #[test]
    fn rejects_bad_records() {
        assert!("k0 = 1\nk = 2\n".parse::<KeyFile>().is_err());
        assert!("k0 = -1\nk = 2\nn = 1".parse::<KeyFile>().is_err());
        assert!("k0 = 1\nk = 2\nn = 1\nq = 3".parse::<KeyFile>().is_err());
        assert!("garbage".parse::<KeyFile>().is_err());
        assert!("k0 = 1\nk = 2\nn = 0".parse::<KeyFile>().is_err());
    }
}
