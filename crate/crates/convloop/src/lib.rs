//! Conversational automated program repair: an orchestrator that alternates
//! LLM patch generation with testcase validation, feeding each failure back
//! into the next prompt. Ships the corpus tooling, validation harness,
//! generation backends and reporting needed to run benchmark-style
//! experiments end to end.

pub mod backend;
pub mod corpus;
pub mod domain;
pub mod harness;
pub mod orchestrator;
pub mod prompting;
pub mod report;

#[cfg(test)]
pub(crate) mod testutil;

pub use backend::{
    extract_patch, load_script, BackendError, CommandBackend, GenerationBackend,
    GenerationRequest, GenerationResponse, HttpApi, HttpBackend, HttpBackendConfig,
    ScriptedBackend, TurnRef,
};
pub use corpus::{doctor, import_quixbugs, load_bug, load_suite, BugHealth, CorpusError, HealthStatus};
pub use domain::{
    normalize_patch, values_equal, ActualOutput, BugInstance, CandidatePatch, Chain,
    ChainTermination, FeedbackStyle, Language, Provenance, RepairConfig, RepairResult, TestCase,
    Turn, ValidationOutcome, Value,
};
pub use harness::{generate_shim, OutcomeCache, ValidationReport, Validator, ValidatorConfig};
pub use orchestrator::{repair, repair_suite, BugRunRecord, HarnessFault};
pub use prompting::{
    assemble_transcript, build_feedback, build_initial_prompt, render_invocation, token_estimate,
    PromptText,
};
pub use report::{
    emit_report, judge_correct_exact, summarize, Labels, Report, ReportFormat, Summary,
};
