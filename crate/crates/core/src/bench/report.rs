//! Text and JSON renderings of a benchmark run.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dataset::DatasetSeeds;
use super::score::{Calibration, KeyMode, PrScore, RunScore, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scheme: Scheme,
    pub condition: String,
    pub mode: KeyMode,
    pub score: RunScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub condition: String,
    pub mode: KeyMode,
    pub n: usize,
    pub score: PrScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub condition: String,
    pub mode: KeyMode,
    pub result: Calibration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub corpus: String,
    pub images: usize,
    pub width: usize,
    pub height: usize,
    pub block_count: usize,
    pub n_fixed: usize,
    pub threshold: u32,
    pub seeds: DatasetSeeds,
    pub rows: Vec<ReportRow>,
    pub sweeps: Vec<SweepRow>,
    pub calibrations: Vec<CalibrationRow>,
}

impl BenchReport {
    pub fn row(&self, scheme: Scheme, condition: &str, mode: KeyMode) -> Option<&RunScore> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.condition == condition && r.mode == mode)
            .map(|r| &r.score)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Table laid out as scheme x condition, with p and r for each key mode.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "corpus: {} ({} images, {}x{}, M = {})",
            self.corpus, self.images, self.width, self.height, self.block_count
        );
        let _ = writeln!(
            out,
            "N = {}, d = {}, k0 = {}, k = {}, k' = {}",
            self.n_fixed, self.threshold, self.seeds.k0, self.seeds.k, self.seeds.k_prime
        );
        let _ = writeln!(out);

        let modes = [KeyMode::Same, KeyMode::Rekeyed];
        let _ = writeln!(
            out,
            "{:<10} {:<10} | {:>8} {:>8} | {:>8} {:>8}",
            "scheme", "condition", "p[%]", "r[%]", "p[%]", "r[%]"
        );
        let _ = writeln!(
            out,
            "{:<10} {:<10} | {:^17} | {:^17}",
            "", "", modes[0].label(), modes[1].label()
        );
        let _ = writeln!(out, "{}", "-".repeat(61));
        let mut conditions: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !conditions.contains(&r.condition.as_str()) {
                conditions.push(&r.condition);
            }
        }
        for scheme in [Scheme::Proposed, Scheme::DcSign] {
            for cond in &conditions {
                let cell = |mode| match self.row(scheme, cond, mode) {
                    Some(s) => format!("{:>8} {:>8}", pct(s.pairwise.p), pct(s.pairwise.r)),
                    None => format!("{:>8} {:>8}", "-", "-"),
                };
                let _ = writeln!(
                    out,
                    "{:<10} {:<10} | {} | {}",
                    scheme.label(),
                    cond,
                    cell(modes[0]),
                    cell(modes[1])
                );
            }
        }

        let _ = writeln!(out);
        let _ = writeln!(out, "pairwise counts (TP/FP/FN) and per-query counts:");
        for r in &self.rows {
            let (pw, pq) = (&r.score.pairwise, &r.score.per_query);
            let _ = writeln!(
                out,
                "  {:<9} {:<4} {:<6} pairs {}/{}/{}  queries {}/{}/{}  ({} x {})",
                r.scheme.label(),
                r.condition,
                r.mode.label(),
                pw.tp,
                pw.fp,
                pw.fn_,
                pq.tp,
                pq.fp,
                pq.fn_,
                r.score.queries,
                r.score.candidates
            );
        }

        if !self.sweeps.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "N sweep (proposed, d = {}):", self.threshold);
            for s in &self.sweeps {
                let _ = writeln!(
                    out,
                    "  {:<4} {:<6} N = {:<5} p = {:>7} r = {:>7}  ({}/{}/{})",
                    s.condition,
                    s.mode.label(),
                    s.n,
                    pct(s.score.p),
                    pct(s.score.r),
                    s.score.tp,
                    s.score.fp,
                    s.score.fn_
                );
            }
        }

        if !self.calibrations.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "threshold calibration (N = {}):", self.n_fixed);
            for c in &self.calibrations {
                let margin = c
                    .result
                    .false_pair_margin
                    .map_or("-".to_string(), |v| v.to_string());
                let best = c.result.best.map_or("none".to_string(), |v| v.to_string());
                let _ = writeln!(
                    out,
                    "  {:<4} {:<6} r=100% from d = {}, first false accept at d = {}, best d = {}",
                    c.condition,
                    c.mode.label(),
                    c.result.min_full_recall,
                    margin,
                    best
                );
            }
        }
        out
    }
}

fn pct(v: Option<f64>) -> String {
    v.map_or("n/a".to_string(), |v| format!("{v:.2}"))
}
