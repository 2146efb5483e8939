//! Precision/recall over query-candidate decisions.

use serde::{Deserialize, Serialize};

use super::dataset::{EntryFeatures, KeyLabel};
use crate::error::{Error, Result};
use crate::feature::{compare_signs, compare_values, IdentificationParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyMode {
    /// Database encrypted with the query key `k`.
    Same,
    /// Database encrypted with `k'`, same `k0`.
    Rekeyed,
}

impl KeyMode {
    fn database_key(self) -> KeyLabel {
        match self {
            KeyMode::Same => KeyLabel::K,
            KeyMode::Rekeyed => KeyLabel::KPrime,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            KeyMode::Same => "k=k'",
            KeyMode::Rekeyed => "k!=k'",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `|DC|` of the first N blocks, threshold `d`.
    Proposed,
    /// Sign bits of the first N DC values, exact match.
    DcSign,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::DcSign => "DC sign",
        }
    }
}

/// TP/FP/FN counts with `p = TP/(TP+FP)`, `r = TP/(TP+FN)` in percent;
/// `None` when the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrScore {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub p: Option<f64>,
    pub r: Option<f64>,
}

impl PrScore {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let pct = |num: usize, den: usize| (den > 0).then(|| 100.0 * num as f64 / den as f64);
        Self {
            tp,
            fp,
            fn_,
            p: pct(tp, tp + fp),
            r: pct(tp, tp + fn_),
        }
    }

    pub fn is_perfect(&self) -> bool {
        self.fp == 0 && self.fn_ == 0 && self.tp > 0
    }
}

/// Scores for one (scheme, key mode) run under both counting conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunScore {
    /// Every (query, candidate) decision counted.
    pub pairwise: PrScore,
    /// One decision per query: its first accepted candidate (halting scan).
    pub per_query: PrScore,
    pub queries: usize,
    pub candidates: usize,
}

fn split(features: &[EntryFeatures], mode: KeyMode) -> (Vec<&EntryFeatures>, Vec<&EntryFeatures>) {
    let queries = features
        .iter()
        .filter(|f| f.record.j == 1 && f.record.key == KeyLabel::K)
        .collect();
    let db_key = mode.database_key();
    let db = features
        .iter()
        .filter(|f| f.record.j == 2 && f.record.key == db_key)
        .collect();
    (queries, db)
}

fn check_len(features: &[&EntryFeatures], n: usize) -> Result<()> {
    for f in features {
        let len = f.magnitudes.len().min(f.signs.len());
        if len < n {
            return Err(Error::LengthMismatch { needed: n, got: len });
        }
    }
    Ok(())
}

/// Compares every single-compressed `k` image with every double-compressed
/// image of the database side and scores decisions against origin equality.
pub fn run_identification(
    features: &[EntryFeatures],
    params: IdentificationParams,
    mode: KeyMode,
    scheme: Scheme,
) -> Result<RunScore> {
    let (queries, db) = split(features, mode);
    check_len(&queries, params.n_fixed)?;
    check_len(&db, params.n_fixed)?;

    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let (mut q_tp, mut q_fp, mut q_fn) = (0, 0, 0);
    for q in &queries {
        let mut first: Option<bool> = None;
        for c in &db {
            let accept = match scheme {
                Scheme::Proposed => compare_values(&q.magnitudes, &c.magnitudes, params)?.accepted,
                Scheme::DcSign => compare_signs(&q.signs, &c.signs, params.n_fixed)?,
            };
            let truth = q.record.origin == c.record.origin;
            match (accept, truth) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
            if accept && first.is_none() {
                first = Some(truth);
            }
        }
        match first {
            Some(true) => q_tp += 1,
            Some(false) => q_fp += 1,
            None => q_fn += 1,
        }
    }
    Ok(RunScore {
        pairwise: PrScore::from_counts(tp, fp, fn_),
        per_query: PrScore::from_counts(q_tp, q_fp, q_fn),
        queries: queries.len(),
        candidates: db.len(),
    })
}

/// Reruns the identification with the features cut to each N.
pub fn sweep_n(
    features: &[EntryFeatures],
    threshold: u32,
    n_values: &[usize],
    mode: KeyMode,
    scheme: Scheme,
) -> Result<Vec<(usize, RunScore)>> {
    n_values
        .iter()
        .map(|&n| {
            run_identification(features, IdentificationParams::new(n, threshold), mode, scheme)
                .map(|s| (n, s))
        })
        .collect()
}

/// Result of a threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calibration {
    /// Smallest d accepting every true pair.
    pub min_full_recall: u32,
    /// Smallest difference any false pair needs; every d below it keeps p = 100%.
    pub false_pair_margin: Option<u32>,
    /// Smallest d with p = r = 100%, if one exists.
    pub best: Option<u32>,
}

/// For each pair the smallest accepting d is its largest element-wise
/// difference over the first N values; the sweep reduces to two extrema.
pub fn calibrate(features: &[EntryFeatures], n: usize, mode: KeyMode) -> Result<Calibration> {
    let (queries, db) = split(features, mode);
    check_len(&queries, n)?;
    check_len(&db, n)?;
    let mut max_true = 0u32;
    let mut min_false: Option<u32> = None;
    for q in &queries {
        for c in &db {
            let worst = q.magnitudes[..n]
                .iter()
                .zip(&c.magnitudes[..n])
                .map(|(a, b)| a.abs_diff(*b) as u32)
                .max()
                .unwrap_or(0);
            if q.record.origin == c.record.origin {
                max_true = max_true.max(worst);
            } else {
                min_false = Some(min_false.map_or(worst, |m| m.min(worst)));
            }
        }
    }
    let best = match min_false {
        Some(f) if f <= max_true => None,
        _ => Some(max_true),
    };
    Ok(Calibration {
        min_full_recall: max_true,
        false_pair_margin: min_false,
        best,
    })
}
