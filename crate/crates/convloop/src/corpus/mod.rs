//! Loads bug directories into BugInstances and checks corpus health.
//!
//! Bug directory layout: a plain key/value `bug.cfg` (`id=`, `language=`,
//! `entry_point=`, `source=<file>`, `reference=<file>`) next to the named
//! source files and a `tests.txt` with one `inputs -> expected` line per
//! testcase (`#` comments allowed).

pub mod import;

pub use import::{default_exclusions, import_quixbugs, ImportReport};

use crate::domain::{parse_test_line, BugInstance, Language, RepairConfig, TestCase};
use crate::harness::Validator;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing manifest {path}")]
    ManifestMissing { path: PathBuf },
    #[error("invalid manifest {path}: field {field}: {reason}")]
    ManifestInvalid {
        path: PathBuf,
        field: String,
        reason: String,
    },
    #[error("missing source file {path}")]
    SourceMissing { path: PathBuf },
    #[error("testcase error in {path} line {line}: {reason}")]
    TestcaseParse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("include list names absent bug id {0}")]
    UnknownBugId(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn read(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Load one bug directory into a fully populated BugInstance.
pub fn load_bug(dir: &Path) -> Result<BugInstance, CorpusError> {
    let manifest_path = dir.join("bug.cfg");
    if !manifest_path.exists() {
        return Err(CorpusError::ManifestMissing {
            path: manifest_path,
        });
    }
    let invalid = |field: &str, reason: String| CorpusError::ManifestInvalid {
        path: manifest_path.clone(),
        field: field.to_string(),
        reason,
    };

    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    for raw in read(&manifest_path)?.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(invalid(line, "expected key=value".to_string()));
        };
        let key = key.trim().to_string();
        if !matches!(
            key.as_str(),
            "id" | "language" | "entry_point" | "source" | "reference"
        ) {
            return Err(invalid(&key, "unknown field".to_string()));
        }
        if fields.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(invalid(&key, "duplicate field".to_string()));
        }
    }
    let get = |field: &str| {
        fields
            .get(field)
            .cloned()
            .ok_or_else(|| invalid(field, "missing".to_string()))
    };

    let id = get("id")?;
    let language: Language = get("language")?
        .parse()
        .map_err(|reason| invalid("language", reason))?;
    let entry_point = get("entry_point")?;
    if !is_identifier(&entry_point) {
        return Err(invalid(
            "entry_point",
            format!("{entry_point:?} is not a plain identifier"),
        ));
    }

    let source_path = dir.join(get("source")?);
    if !source_path.exists() {
        return Err(CorpusError::SourceMissing { path: source_path });
    }
    let reference_path = dir.join(get("reference")?);
    if !reference_path.exists() {
        return Err(CorpusError::SourceMissing {
            path: reference_path,
        });
    }
    let buggy_source = read(&source_path)?;
    let reference_patch = read(&reference_path)?;

    // the entry point must be defined in both sources
    let defines = |source: &str| match language {
        Language::Python => source.contains(&format!("def {entry_point}")),
        Language::Java => source.contains(&format!("{entry_point}(")),
    };
    if !defines(&buggy_source) {
        return Err(invalid(
            "entry_point",
            format!("{entry_point} is not defined in the buggy source"),
        ));
    }
    if !defines(&reference_patch) {
        return Err(invalid(
            "entry_point",
            format!("{entry_point} is not defined in the reference patch"),
        ));
    }

    let tests_path = dir.join("tests.txt");
    if !tests_path.exists() {
        return Err(CorpusError::SourceMissing { path: tests_path });
    }
    let mut testcases = Vec::new();
    for (i, raw) in read(&tests_path)?.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (inputs, expected) =
            parse_test_line(line).map_err(|e| CorpusError::TestcaseParse {
                path: tests_path.clone(),
                line: i + 1,
                reason: e.to_string(),
            })?;
        for value in inputs.iter().chain([&expected]) {
            if !value.is_finite() {
                return Err(CorpusError::TestcaseParse {
                    path: tests_path.clone(),
                    line: i + 1,
                    reason: "corpus values must be finite".to_string(),
                });
            }
        }
        testcases.push(TestCase {
            id: format!("t{}", testcases.len() + 1),
            inputs,
            expected,
        });
    }
    if testcases.is_empty() {
        return Err(CorpusError::TestcaseParse {
            path: tests_path,
            line: 0,
            reason: "testsuite is empty".to_string(),
        });
    }
    let arity = testcases[0].inputs.len();
    for (i, test) in testcases.iter().enumerate() {
        if test.inputs.len() != arity {
            return Err(CorpusError::TestcaseParse {
                path: tests_path,
                line: i + 1,
                reason: format!(
                    "inputs arity {} differs from the suite arity {}",
                    test.inputs.len(),
                    arity
                ),
            });
        }
    }

    Ok(BugInstance {
        id,
        language,
        buggy_source,
        entry_point,
        testcases,
        reference_patch,
    })
}

/// A bug directory that failed to load under `--skip-broken`.
#[derive(Debug)]
pub struct SkippedBug {
    pub dir: PathBuf,
    pub error: CorpusError,
}

/// Load every bug directory under `root` in lexicographic id order, applying
/// include/exclude filters by id.
pub fn load_suite(
    root: &Path,
    include: Option<&[String]>,
    exclude: &[String],
    skip_broken: bool,
) -> Result<(Vec<BugInstance>, Vec<SkippedBug>), CorpusError> {
    let entries = std::fs::read_dir(root).map_err(|source| CorpusError::Io {
        path: root.to_path_buf(),
        source,
    })?;
    let mut bugs = Vec::new();
    let mut skipped = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        let dir = entry.path();
        if !dir.is_dir() || !dir.join("bug.cfg").exists() {
            continue;
        }
        match load_bug(&dir) {
            Ok(bug) => bugs.push(bug),
            Err(error) if skip_broken => skipped.push(SkippedBug { dir, error }),
            Err(error) => return Err(error),
        }
    }
    bugs.sort_by(|a, b| a.id.cmp(&b.id));

    if let Some(include) = include {
        for wanted in include {
            if !bugs.iter().any(|b| &b.id == wanted) {
                return Err(CorpusError::UnknownBugId(wanted.clone()));
            }
        }
        bugs.retain(|b| include.contains(&b.id));
    }
    bugs.retain(|b| !exclude.contains(&b.id));
    Ok((bugs, skipped))
}

/// Corpus health for one bug.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HealthStatus {
    Healthy,
    /// The reference patch does not pass its own testsuite.
    UnhealthyReference,
    /// The buggy source passes everything; there is no bug to repair.
    UnhealthyNotABug,
    /// The environment could not run the checks at all.
    HarnessFault,
}

#[derive(Debug)]
pub struct BugHealth {
    pub bug_id: String,
    pub status: HealthStatus,
    pub reference_kind: String,
    pub buggy_kind: String,
    /// Testcase ids the buggy source fails (directly observed or attributed
    /// by the failure classification).
    pub buggy_failing: Vec<String>,
    pub detail: Option<String>,
}

/// Check that the reference patch is plausible and the buggy source is not;
/// reports, never throws.
pub fn doctor(bug: &BugInstance, cfg: &RepairConfig, validator: &Validator) -> BugHealth {
    use crate::domain::ValidationOutcome;

    let reference = validator.validate_detailed(bug, &bug.reference_patch, cfg);
    if let ValidationOutcome::HarnessError { message } = &reference.outcome {
        return BugHealth {
            bug_id: bug.id.clone(),
            status: HealthStatus::HarnessFault,
            reference_kind: reference.outcome.kind().to_string(),
            buggy_kind: "not_run".to_string(),
            buggy_failing: Vec::new(),
            detail: Some(message.clone()),
        };
    }
    let buggy = validator.validate_detailed(bug, &bug.buggy_source, cfg);

    let mut buggy_failing: Vec<String> = buggy
        .per_test
        .iter()
        .filter(|t| t.passed == Some(false))
        .map(|t| t.test_id.clone())
        .collect();
    match &buggy.outcome {
        ValidationOutcome::Timeout { test, .. } if !buggy_failing.contains(&test.id) => {
            buggy_failing.push(test.id.clone());
        }
        ValidationOutcome::RuntimeError { test, .. } if !buggy_failing.contains(&test.id) => {
            buggy_failing.push(test.id.clone());
        }
        _ => {}
    }

    let status = if let ValidationOutcome::HarnessError { .. } = buggy.outcome {
        HealthStatus::HarnessFault
    } else if !reference.outcome.is_plausible() {
        HealthStatus::UnhealthyReference
    } else if buggy.outcome.is_plausible() {
        HealthStatus::UnhealthyNotABug
    } else {
        HealthStatus::Healthy
    };

    BugHealth {
        bug_id: bug.id.clone(),
        status,
        reference_kind: reference.outcome.kind().to_string(),
        buggy_kind: buggy.outcome.kind().to_string(),
        buggy_failing,
        detail: match &buggy.outcome {
            ValidationOutcome::HarnessError { message } => Some(message.clone()),
            _ => None,
        },
    }
}
