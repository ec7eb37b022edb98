//! Shared domain types for the repair loop. No I/O here; everything is
//! immutable after construction and safe to share across threads.

pub mod normalize;
pub mod value;

pub use normalize::normalize_patch;
pub use value::{parse_test_line, render_inputs, split_test_line, values_equal, Value};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Languages with a registered test runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Python,
    Java,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Python => "python",
            Language::Java => "java",
        }
    }
}

impl std::str::FromStr for Language {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "python" => Ok(Language::Python),
            "java" => Ok(Language::Java),
            other => Err(format!("unknown language {other:?} (expected python or java)")),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One function invocation plus its expected output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub inputs: Vec<Value>,
    pub expected: Value,
}

/// One repairable bug: a self-contained buggy function, its entry point,
/// testcases and the reference developer fix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BugInstance {
    pub id: String,
    pub language: Language,
    pub buggy_source: String,
    pub entry_point: String,
    pub testcases: Vec<TestCase>,
    pub reference_patch: String,
}

/// Where a candidate patch came from within a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub chain_index: u32,
    /// 1-based turn within the chain.
    pub turn_index: u32,
    /// 1-based index over all model samples for this bug.
    pub global_sample_index: u32,
}

/// One model-produced patch with its normalized form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidatePatch {
    pub raw_model_output: String,
    pub extracted_source: String,
    pub normalized: String,
    pub provenance: Provenance,
}

/// What a test actually produced: a value, or the harness-reported error text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActualOutput {
    Value(Value),
    ErrorText(String),
}

impl ActualOutput {
    pub fn render(&self) -> String {
        match self {
            ActualOutput::Value(v) => v.render(),
            ActualOutput::ErrorText(t) => t.clone(),
        }
    }
}

/// Classified result of running a patch against a bug's full testsuite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationOutcome {
    /// Passed every testcase.
    Plausible,
    /// Ran to completion but at least one output mismatched; `first_failing`
    /// is the earliest mismatching testcase in corpus order.
    TestFailure {
        first_failing: TestCase,
        actual: ActualOutput,
        passed_count: usize,
        total: usize,
    },
    /// Failed to compile/parse before the first test.
    CompileError { message: String },
    /// Uncaught exception while executing a test.
    RuntimeError { test: TestCase, message: String },
    /// Wall clock exceeded the per-test limit while executing a test.
    Timeout { test: TestCase, limit_ms: u64 },
    /// The environment (not the patch) is broken: missing runner,
    /// unparseable shim output.
    HarnessError { message: String },
}

impl ValidationOutcome {
    pub fn is_plausible(&self) -> bool {
        matches!(self, ValidationOutcome::Plausible)
    }

    pub fn is_harness_error(&self) -> bool {
        matches!(self, ValidationOutcome::HarnessError { .. })
    }

    /// Short tag for report rows and log lines.
    pub fn kind(&self) -> &'static str {
        match self {
            ValidationOutcome::Plausible => "plausible",
            ValidationOutcome::TestFailure { .. } => "test_failure",
            ValidationOutcome::CompileError { .. } => "compile_error",
            ValidationOutcome::RuntimeError { .. } => "runtime_error",
            ValidationOutcome::Timeout { .. } => "timeout",
            ValidationOutcome::HarnessError { .. } => "harness_error",
        }
    }
}

/// One prompt → sample → validation cycle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Turn {
    pub prompt_sent: String,
    pub patch: CandidatePatch,
    pub outcome: ValidationOutcome,
    /// True when the outcome was replayed from the per-bug cache instead of
    /// a fresh validation run.
    pub reused_cached_outcome: bool,
}

/// Why a chain stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainTermination {
    FoundPlausible,
    MaxLengthReached,
    BudgetExhausted,
    TokenBudgetExceeded,
    BackendFailure,
}

/// A maximal sequence of turns sharing one growing conversation transcript.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Chain {
    pub chain_index: u32,
    pub turns: Vec<Turn>,
    pub termination: ChainTermination,
}

impl Chain {
    /// Check the structural invariants; used by tests and debug assertions.
    pub fn check_invariants(&self, max_chain_length: u32) -> Result<(), String> {
        if self.turns.len() as u32 > max_chain_length {
            return Err(format!(
                "chain {} has {} turns, above the maximum {}",
                self.chain_index,
                self.turns.len(),
                max_chain_length
            ));
        }
        let plausible_positions: Vec<usize> = self
            .turns
            .iter()
            .enumerate()
            .filter(|(_, t)| t.outcome.is_plausible())
            .map(|(i, _)| i)
            .collect();
        match self.termination {
            ChainTermination::FoundPlausible => {
                if plausible_positions != vec![self.turns.len() - 1] {
                    return Err(format!(
                        "chain {} terminated FoundPlausible but its plausible turn is not the unique last turn",
                        self.chain_index
                    ));
                }
            }
            _ => {
                if !plausible_positions.is_empty() {
                    return Err(format!(
                        "chain {} holds a plausible turn without FoundPlausible termination",
                        self.chain_index
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Failure feedback phrasing appended to the transcript after each
/// non-plausible turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackStyle {
    NoTestcase,
    NaturalLanguage,
    Functional,
}

/// Knobs of one repair run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepairConfig {
    pub max_chain_length: u32,
    pub sample_budget: u32,
    pub feedback_style: FeedbackStyle,
    pub top_p: f64,
    pub temperature: f64,
    pub per_test_timeout_ms: u64,
    pub prompt_token_budget: u32,
    pub max_generation_tokens: u32,
    pub float_tolerance: f64,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            max_chain_length: 3,
            sample_budget: 50,
            feedback_style: FeedbackStyle::Functional,
            top_p: 0.95,
            temperature: 1.0,
            per_test_timeout_ms: 5000,
            prompt_token_budget: 2048,
            max_generation_tokens: 512,
            float_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field} must be {requirement} (got {got})")]
    OutOfRange {
        field: &'static str,
        requirement: &'static str,
        got: String,
    },
}

impl RepairConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn bad(
            field: &'static str,
            requirement: &'static str,
            got: impl fmt::Display,
        ) -> ConfigError {
            ConfigError::OutOfRange {
                field,
                requirement,
                got: got.to_string(),
            }
        }
        if self.max_chain_length < 1 {
            return Err(bad("max_chain_length", ">= 1", self.max_chain_length));
        }
        if self.sample_budget < 1 {
            return Err(bad("sample_budget", ">= 1", self.sample_budget));
        }
        if !self.top_p.is_finite() || self.top_p <= 0.0 || self.top_p > 1.0 {
            return Err(bad("top_p", "in (0, 1]", self.top_p));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(bad("temperature", ">= 0", self.temperature));
        }
        if !self.float_tolerance.is_finite() || self.float_tolerance < 0.0 {
            return Err(bad("float_tolerance", ">= 0", self.float_tolerance));
        }
        if self.per_test_timeout_ms == 0 {
            return Err(bad("per_test_timeout_ms", "> 0", self.per_test_timeout_ms));
        }
        Ok(())
    }
}

/// Per-bug outcome of one repair run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepairResult {
    pub bug_id: String,
    pub chains: Vec<Chain>,
    pub plausible_patch: Option<CandidatePatch>,
    /// Number of model samples consumed up to and including the plausible
    /// one; present iff a plausible patch was found.
    pub tries: Option<u32>,
    /// Whether the plausible patch normalizes to the same text as the
    /// reference patch; present iff a plausible patch was found.
    pub correct_exact: Option<bool>,
    pub samples_used: u32,
    pub wall_clock_ms: u64,
}
