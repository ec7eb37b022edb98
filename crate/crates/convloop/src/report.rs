//! Aggregates repair results into the run metrics (plausible / correct /
//! tries), and emits machine-readable reports: JSON with every chain, turn,
//! prompt and outcome so an experiment is fully auditable, plus a one-row-
//! per-bug CSV.

use crate::domain::{normalize_patch, BugInstance, CandidatePatch, RepairResult};
use crate::orchestrator::BugRunRecord;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to read labels {path}: {source}")]
    LabelsIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("labels {path} line {line}: {reason}")]
    LabelsInvalid {
        path: String,
        line: usize,
        reason: String,
    },
}

/// Human adjudications: bug id → approved normalized-patch hashes. Lets
/// manual semantic-equivalence judgments be recorded once and re-applied.
#[derive(Debug, Default, Clone)]
pub struct Labels {
    approved: BTreeMap<String, Vec<String>>,
}

impl Labels {
    pub fn load(path: &Path) -> Result<Labels, ReportError> {
        let text = std::fs::read_to_string(path).map_err(|source| ReportError::LabelsIo {
            path: path.display().to_string(),
            source,
        })?;
        let mut approved: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let bug_id = parts.next().expect("nonempty line").to_string();
            let hashes: Vec<String> = parts.map(str::to_string).collect();
            if hashes.is_empty() {
                return Err(ReportError::LabelsInvalid {
                    path: path.display().to_string(),
                    line: i + 1,
                    reason: "expected `bug_id hash [hash...]`".to_string(),
                });
            }
            approved.entry(bug_id).or_default().extend(hashes);
        }
        Ok(Labels { approved })
    }

    pub fn approves(&self, bug_id: &str, normalized_patch: &str) -> bool {
        self.approved
            .get(bug_id)
            .map(|hashes| hashes.iter().any(|h| h == &patch_hash(normalized_patch)))
            .unwrap_or(false)
    }
}

/// Hex SHA-256 of a normalized patch; the currency of labels files.
pub fn patch_hash(normalized_patch: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(normalized_patch.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// True iff the plausible patch and the reference patch normalize to the
/// same text. A proxy for manual semantic-equivalence judgment, not a
/// reproduction of it.
pub fn judge_correct_exact(plausible: &CandidatePatch, bug: &BugInstance) -> bool {
    plausible.normalized == normalize_patch(&bug.reference_patch, bug.language)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerBugRow {
    pub bug_id: String,
    pub plausible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_exact: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_labeled: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tries: Option<u32>,
    pub chains: usize,
    pub samples_used: u32,
    pub wall_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_bugs: usize,
    pub n_plausible: usize,
    pub n_correct_exact: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_correct_labeled: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_tries_over_plausible: Option<f64>,
    pub per_bug: Vec<PerBugRow>,
}

/// Compute the run metrics over per-bug records, in record order.
pub fn summarize(records: &[BugRunRecord], labels: Option<&Labels>) -> Summary {
    let mut per_bug = Vec::with_capacity(records.len());
    let mut n_plausible = 0;
    let mut n_correct_exact = 0;
    let mut n_correct_labeled = 0;
    let mut tries_sum: u64 = 0;

    for record in records {
        match &record.result {
            Ok(result) => {
                let plausible = result.plausible_patch.is_some();
                if plausible {
                    n_plausible += 1;
                    tries_sum += u64::from(result.tries.unwrap_or(0));
                }
                if result.correct_exact == Some(true) {
                    n_correct_exact += 1;
                }
                let correct_labeled = match (labels, &result.plausible_patch) {
                    (Some(labels), Some(patch)) => {
                        let approved = labels.approves(&record.bug_id, &patch.normalized);
                        if approved {
                            n_correct_labeled += 1;
                        }
                        Some(approved)
                    }
                    _ => None,
                };
                per_bug.push(PerBugRow {
                    bug_id: record.bug_id.clone(),
                    plausible,
                    correct_exact: result.correct_exact,
                    correct_labeled,
                    tries: result.tries,
                    chains: result.chains.len(),
                    samples_used: result.samples_used,
                    wall_ms: result.wall_clock_ms,
                    error: None,
                });
            }
            Err(fault) => per_bug.push(PerBugRow {
                bug_id: record.bug_id.clone(),
                plausible: false,
                correct_exact: None,
                correct_labeled: None,
                tries: None,
                chains: 0,
                samples_used: 0,
                wall_ms: 0,
                error: Some(fault.message.clone()),
            }),
        }
    }

    Summary {
        n_bugs: records.len(),
        n_plausible,
        n_correct_exact,
        n_correct_labeled: labels.map(|_| n_correct_labeled),
        mean_tries_over_plausible: if n_plausible > 0 {
            Some(round_sig(tries_sum as f64 / n_plausible as f64, 6))
        } else {
            None
        },
        per_bug,
    }
}

/// Round to `digits` significant digits so report floats are stable.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (x * factor).round() / factor
}

/// One per-bug entry in the full JSON report.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ReportedResult {
    Completed(RepairResult),
    HarnessError { bug_id: String, message: String },
}

/// The full machine-readable report: metrics plus every chain, turn, prompt
/// and outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub summary: Summary,
    pub results: Vec<ReportedResult>,
}

impl Report {
    pub fn new(records: &[BugRunRecord], labels: Option<&Labels>) -> Report {
        let summary = summarize(records, labels);
        let results = records
            .iter()
            .map(|record| match &record.result {
                Ok(result) => ReportedResult::Completed(result.clone()),
                Err(fault) => ReportedResult::HarnessError {
                    bug_id: fault.bug_id.clone(),
                    message: fault.message.clone(),
                },
            })
            .collect();
        Report { summary, results }
    }

    /// Copy with timing fields zeroed, for byte-stable comparisons.
    pub fn without_timing(&self) -> Report {
        let mut clone = self.clone();
        for row in &mut clone.summary.per_bug {
            row.wall_ms = 0;
        }
        for result in &mut clone.results {
            if let ReportedResult::Completed(result) = result {
                result.wall_clock_ms = 0;
            }
        }
        clone
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

pub fn emit_report(report: &Report, format: ReportFormat, path: &Path) -> Result<(), ReportError> {
    let io_err = |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    match format {
        ReportFormat::Json => {
            let text = serde_json::to_string_pretty(report).expect("report serialization");
            file.write_all(text.as_bytes()).map_err(io_err)?;
            file.write_all(b"\n").map_err(io_err)?;
        }
        ReportFormat::Csv => {
            let text = render_csv(&report.summary);
            file.write_all(text.as_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

/// One row per bug: bug_id, plausible, correct_exact, tries, chains, wall_ms.
pub fn render_csv(summary: &Summary) -> String {
    let mut out = String::from("bug_id,plausible,correct_exact,tries,chains,wall_ms\n");
    for row in &summary.per_bug {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&row.bug_id),
            row.plausible,
            row.correct_exact
                .map(|b| b.to_string())
                .unwrap_or_default(),
            row.tries.map(|t| t.to_string()).unwrap_or_default(),
            row.chains,
            row.wall_ms,
        ));
    }
    out
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// One summary per max-chain-length setting, as produced by the sweep mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub max_chain_length: u32,
    pub summary: Summary,
}
