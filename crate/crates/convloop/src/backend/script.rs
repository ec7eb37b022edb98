//! Deterministic scripted backend: replays canned completions from a file,
//! either in file order or keyed by (chain, turn). Makes whole repair runs
//! hermetic and byte-reproducible.

use super::{BackendError, GenerationBackend, GenerationRequest, GenerationResponse, TurnRef};
use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScriptParseError {
    #[error("failed to read script {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("script line {line}: {reason}")]
    Invalid { line: usize, reason: String },
}

#[derive(Debug)]
enum Responses {
    /// Replayed in file order.
    Sequential(Vec<String>),
    /// Looked up (and consumed) by `@chain:N turn:M` key.
    Keyed(HashMap<TurnRef, String>),
}

#[derive(Debug)]
struct State {
    responses: Responses,
    cursor: usize,
}

/// Backend whose completions replay from a parsed script.
#[derive(Debug)]
pub struct ScriptedBackend {
    state: Mutex<State>,
    name: String,
}

impl ScriptedBackend {
    /// Replay the given responses in order. Mostly for tests.
    pub fn from_responses<I, S>(responses: I) -> ScriptedBackend
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedBackend {
            state: Mutex::new(State {
                responses: Responses::Sequential(
                    responses.into_iter().map(Into::into).collect(),
                ),
                cursor: 0,
            }),
            name: "script".to_string(),
        }
    }

    fn from_blocks(blocks: Vec<(Option<TurnRef>, String, usize)>) -> Result<Self, ScriptParseError> {
        let keyed = blocks.iter().any(|(k, _, _)| k.is_some());
        let responses = if keyed {
            let mut map = HashMap::new();
            for (key, text, line) in blocks {
                let Some(key) = key else {
                    return Err(ScriptParseError::Invalid {
                        line,
                        reason: "mixing keyed and unkeyed response blocks".to_string(),
                    });
                };
                if map.insert(key, text).is_some() {
                    return Err(ScriptParseError::Invalid {
                        line,
                        reason: format!(
                            "duplicate key @chain:{} turn:{}",
                            key.chain_index, key.turn_index
                        ),
                    });
                }
            }
            Responses::Keyed(map)
        } else {
            Responses::Sequential(blocks.into_iter().map(|(_, text, _)| text).collect())
        };
        Ok(ScriptedBackend {
            state: Mutex::new(State {
                responses,
                cursor: 0,
            }),
            name: "script".to_string(),
        })
    }
}

/// Parse a script file: UTF-8 response blocks separated by lines consisting
/// of exactly `---`; an optional first line per block `@chain:N turn:M` keys
/// the response.
pub fn load_script(path: &Path) -> Result<ScriptedBackend, ScriptParseError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScriptParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_script(&text)
}

pub fn parse_script(text: &str) -> Result<ScriptedBackend, ScriptParseError> {
    let mut blocks: Vec<(Option<TurnRef>, String, usize)> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut block_start = 1usize;

    let mut finish = |current: &mut Vec<&str>, start: usize| -> Result<(), ScriptParseError> {
        if current.is_empty() {
            return Ok(());
        }
        let (key, body_start) = match current.first() {
            Some(first) if first.starts_with('@') => (Some(parse_key(first, start)?), 1),
            _ => (None, 0),
        };
        blocks.push((key, current[body_start..].join("\n"), start));
        current.clear();
        Ok(())
    };

    for (i, line) in text.lines().enumerate() {
        if line == "---" {
            finish(&mut current, block_start)?;
            block_start = i + 2;
        } else {
            current.push(line);
        }
    }
    finish(&mut current, block_start)?;
    ScriptedBackend::from_blocks(blocks)
}

fn parse_key(line: &str, line_no: usize) -> Result<TurnRef, ScriptParseError> {
    let invalid = |reason: &str| ScriptParseError::Invalid {
        line: line_no,
        reason: format!("{reason} (expected `@chain:N turn:M`, got {line:?})"),
    };
    let mut chain = None;
    let mut turn = None;
    for part in line.trim_start_matches('@').split_whitespace() {
        match part.split_once(':') {
            Some(("chain", n)) => chain = Some(n.parse().map_err(|_| invalid("bad chain index"))?),
            Some(("turn", n)) => turn = Some(n.parse().map_err(|_| invalid("bad turn index"))?),
            _ => return Err(invalid("unknown field")),
        }
    }
    match (chain, turn) {
        (Some(chain_index), Some(turn_index)) => Ok(TurnRef {
            chain_index,
            turn_index,
        }),
        _ => Err(invalid("missing chain or turn")),
    }
}

impl GenerationBackend for ScriptedBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        let mut state = self.state.lock().expect("script state lock");
        let cursor = state.cursor;
        let raw_text = match &mut state.responses {
            Responses::Sequential(items) => {
                let total = items.len();
                items.get(cursor).cloned().ok_or_else(|| {
                    BackendError::ScriptExhausted(format!(
                        "all {total} scripted response(s) consumed"
                    ))
                })?
            }
            Responses::Keyed(map) => {
                let key = request.turn.ok_or_else(|| {
                    BackendError::ScriptExhausted(
                        "keyed script requires a (chain, turn) slot on the request".to_string(),
                    )
                })?;
                map.remove(&key).ok_or_else(|| {
                    BackendError::ScriptExhausted(format!(
                        "no scripted response for chain {} turn {}",
                        key.chain_index, key.turn_index
                    ))
                })?
            }
        };
        state.cursor += 1;
        Ok(GenerationResponse {
            raw_text,
            backend_name: self.name.clone(),
            latency_ms: 0,
        })
    }
}
