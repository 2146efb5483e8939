//! Desk-scale reproduction of the identification experiment.
//!
//! A run builds the encrypted dataset for each quality condition, extracts
//! full-length features once, then scores the proposed `|DC|` scheme and the
//! DC-sign baseline with the database encrypted under `k` and under `k'`.

pub mod corpus;
pub mod dataset;
pub mod report;
pub mod score;

use std::path::PathBuf;

pub use corpus::{synthetic_scene, CorpusSource, SourceImage};
pub use dataset::{
    build_dataset, extract_all, read_manifest, write_dataset, ConditionGrid, Dataset,
    DatasetEntry, DatasetSeeds, EntryFeatures, KeyLabel, ManifestEntry, ProvenanceRecord,
};
pub use report::{BenchReport, CalibrationRow, ReportRow, SweepRow};
pub use score::{calibrate, run_identification, sweep_n, Calibration, KeyMode, PrScore, RunScore, Scheme};

use crate::cipher::EncryptionParams;
use crate::error::Result;
use crate::feature::{IdentificationParams, DEFAULT_THRESHOLD};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub corpus: CorpusSource,
    pub count: usize,
    pub conditions: Vec<ConditionGrid>,
    pub seeds: DatasetSeeds,
    /// Defaults to 10% of the blocks.
    pub n_fixed: Option<usize>,
    pub threshold: u32,
    pub modes: Vec<KeyMode>,
    /// N values for the sweep; `None` means `[1, N/3, N, M]`, empty disables it.
    pub sweep: Option<Vec<usize>>,
    pub calibrate: bool,
    /// Where to write images, features and manifests, one subdirectory per condition.
    pub output_dir: Option<PathBuf>,
}

impl BenchConfig {
    /// 50 synthetic 640x480 scenes, conditions (1)-(3), both key modes.
    pub fn desk_scale() -> Self {
        Self {
            corpus: CorpusSource::synthetic(2024),
            count: 50,
            conditions: (1..=3).filter_map(ConditionGrid::standard).collect(),
            seeds: DatasetSeeds::default(),
            n_fixed: None,
            threshold: DEFAULT_THRESHOLD,
            modes: vec![KeyMode::Same, KeyMode::Rekeyed],
            sweep: None,
            calibrate: false,
            output_dir: None,
        }
    }
}

fn describe(corpus: &CorpusSource) -> String {
    match corpus {
        CorpusSource::Directory(p) => p.display().to_string(),
        CorpusSource::Synthetic { seed, .. } => format!("synthetic (seed {seed})"),
    }
}

fn condition_slug(name: &str) -> String {
    let s: String = name.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
    format!("condition-{s}")
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    let sources = config.corpus.load(config.count)?;
    let (width, height) = sources
        .first()
        .map(|s| (s.image.width(), s.image.height()))
        .unwrap_or((0, 0));
    let m = sources.first().map_or(0, |s| s.image.block_count());
    let n_fixed = config
        .n_fixed
        .unwrap_or_else(|| EncryptionParams::default_for_blocks(m).n_fixed);
    let params = IdentificationParams::new(n_fixed, config.threshold);
    let sweep = config
        .sweep
        .clone()
        .unwrap_or_else(|| {
            let mut v = vec![1, (n_fixed / 3).max(1), n_fixed, m];
            v.dedup();
            v
        });

    let mut report = BenchReport {
        corpus: describe(&config.corpus),
        images: sources.len(),
        width,
        height,
        block_count: m,
        n_fixed,
        threshold: config.threshold,
        seeds: config.seeds,
        rows: Vec::new(),
        sweeps: Vec::new(),
        calibrations: Vec::new(),
    };

    for grid in &config.conditions {
        let dataset = build_dataset(&sources, grid, config.seeds, Some(n_fixed))?;
        let features = extract_all(&dataset)?;
        if let Some(dir) = &config.output_dir {
            write_dataset(&dir.join(condition_slug(&grid.name)), &dataset, &features)?;
        }
        for scheme in [Scheme::Proposed, Scheme::DcSign] {
            for &mode in &config.modes {
                report.rows.push(ReportRow {
                    scheme,
                    condition: grid.name.clone(),
                    mode,
                    score: run_identification(&features, params, mode, scheme)?,
                });
            }
        }
        for &mode in &config.modes {
            for (n, score) in sweep_n(&features, config.threshold, &sweep, mode, Scheme::Proposed)? {
                report.sweeps.push(SweepRow {
                    condition: grid.name.clone(),
                    mode,
                    n,
                    score: score.pairwise,
                });
            }
            if config.calibrate {
                report.calibrations.push(CalibrationRow {
                    condition: grid.name.clone(),
                    mode,
                    result: calibrate(&features, n_fixed, mode)?,
                });
            }
        }
    }
    Ok(report)
}
