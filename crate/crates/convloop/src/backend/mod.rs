//! Uniform generation interface over three backends: an OpenAI-compatible
//! HTTP client, a generic external-command backend, and a deterministic
//! scripted backend for hermetic replay.

pub mod command;
pub mod extract;
pub mod http;
pub mod script;

pub use command::CommandBackend;
pub use extract::extract_patch;
pub use http::{HttpApi, HttpBackend, HttpBackendConfig};
pub use script::{load_script, ScriptedBackend};

use crate::prompting::PromptText;
use thiserror::Error;

/// Default request timeout for remote/child generation.
pub const DEFAULT_REQUEST_TIMEOUT_MS: u64 = 120_000;

/// Position of the requested sample within the run; lets keyed scripted
/// backends replay a specific (chain, turn). Other backends ignore it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TurnRef {
    pub chain_index: u32,
    pub turn_index: u32,
}

/// One generation request with the sampling parameters of the run.
#[derive(Debug, Clone)]
pub struct GenerationRequest {
    pub prompt: PromptText,
    pub top_p: f64,
    pub temperature: f64,
    pub max_generation_tokens: u32,
    pub stop_sequences: Vec<String>,
    pub turn: Option<TurnRef>,
}

impl GenerationRequest {
    /// Request with the run's sampling parameters and the default stop
    /// sequence (the closing code fence).
    pub fn from_config(prompt: PromptText, cfg: &crate::domain::RepairConfig) -> Self {
        GenerationRequest {
            prompt,
            top_p: cfg.top_p,
            temperature: cfg.temperature,
            max_generation_tokens: cfg.max_generation_tokens,
            stop_sequences: vec!["```".to_string()],
            turn: None,
        }
    }
}

/// One completion as returned by a backend.
#[derive(Debug, Clone)]
pub struct GenerationResponse {
    /// May be empty; downstream extraction/validation treats that as a
    /// compile-error-equivalent patch.
    pub raw_text: String,
    pub backend_name: String,
    pub latency_ms: u64,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("network error after {attempts} attempt(s): {message}")]
    Network { attempts: u32, message: String },
    #[error("rate limited after {attempts} attempt(s): {message}")]
    RateLimited { attempts: u32, message: String },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("scripted backend exhausted: {0}")]
    ScriptExhausted(String),
    #[error("child process failed with status {status:?}: {stderr}")]
    ChildProcessFailure {
        status: Option<i32>,
        stderr: String,
    },
    #[error("generation timed out after {limit_ms} ms")]
    Timeout { limit_ms: u64 },
    #[error("backend configuration error: {0}")]
    Config(String),
}

/// A source of model completions. Implementations are safe for concurrent
/// calls across different bugs; within one chain, calls are sequential by
/// construction.
pub trait GenerationBackend: Send + Sync {
    fn name(&self) -> &str;
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError>;
}
