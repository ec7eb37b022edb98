//! The conversational repair loop: drives chains of prompt → sample →
//! validate turns, applies the termination rules and budget accounting,
//! dedups validation work through the per-bug outcome cache, and produces a
//! RepairResult.

use crate::backend::{
    extract_patch, GenerationBackend, GenerationRequest, TurnRef,
};
use crate::domain::{
    normalize_patch, BugInstance, CandidatePatch, Chain, ChainTermination, Provenance,
    RepairConfig, RepairResult, Turn, ValidationOutcome,
};
use crate::harness::{OutcomeCache, Validator};
use crate::prompting::{assemble_transcript, build_initial_prompt};
use crate::report::judge_correct_exact;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;
use thiserror::Error;

/// The environment (not any patch) failed while repairing a bug; the run for
/// that bug is aborted and the fault surfaces in the report instead of being
/// fed back into prompts.
#[derive(Debug, Clone, Error)]
#[error("harness fault while repairing {bug_id}: {message}")]
pub struct HarnessFault {
    pub bug_id: String,
    pub message: String,
}

/// Repair one bug: chains of turns until a plausible patch, the sample
/// budget runs out, or the backend fails.
pub fn repair(
    bug: &BugInstance,
    cfg: &RepairConfig,
    backend: &dyn GenerationBackend,
    validator: &Validator,
) -> Result<RepairResult, HarnessFault> {
    let started = Instant::now();
    let initial = build_initial_prompt(bug);
    let cache = OutcomeCache::new();
    let mut chains: Vec<Chain> = Vec::new();
    let mut samples_used: u32 = 0;

    while samples_used < cfg.sample_budget {
        let chain_index = chains.len() as u32;
        let mut turns: Vec<Turn> = Vec::new();
        let mut transcript = initial.clone();
        let chain_started_at_sample = samples_used;

        let termination = loop {
            if turns.len() as u32 >= cfg.max_chain_length {
                break ChainTermination::MaxLengthReached;
            }
            if samples_used >= cfg.sample_budget {
                break ChainTermination::BudgetExhausted;
            }
            if transcript.estimated_tokens() > cfg.prompt_token_budget {
                break ChainTermination::TokenBudgetExceeded;
            }

            let mut request = GenerationRequest::from_config(transcript.clone(), cfg);
            request.turn = Some(TurnRef {
                chain_index,
                turn_index: turns.len() as u32 + 1,
            });
            let response = match backend.generate(&request) {
                Ok(response) => response,
                Err(_) => break ChainTermination::BackendFailure,
            };
            samples_used += 1;

            let extracted = extract_patch(&response.raw_text, bug);
            let normalized = normalize_patch(&extracted, bug.language);
            let patch = CandidatePatch {
                raw_model_output: response.raw_text,
                extracted_source: extracted,
                normalized,
                provenance: Provenance {
                    chain_index,
                    turn_index: turns.len() as u32 + 1,
                    global_sample_index: samples_used,
                },
            };

            let (outcome, reused_cached_outcome) = match cache.lookup(&patch.normalized) {
                Some(outcome) => (outcome, true),
                None => {
                    let outcome = validator.validate(bug, &patch.extracted_source, cfg);
                    if !outcome.is_harness_error() {
                        cache.insert(&patch.normalized, outcome.clone());
                    }
                    (outcome, false)
                }
            };

            if let ValidationOutcome::HarnessError { message } = &outcome {
                return Err(HarnessFault {
                    bug_id: bug.id.clone(),
                    message: message.clone(),
                });
            }

            turns.push(Turn {
                prompt_sent: transcript.text().to_string(),
                patch: patch.clone(),
                outcome: outcome.clone(),
                reused_cached_outcome,
            });

            if outcome.is_plausible() {
                chains.push(Chain {
                    chain_index,
                    turns,
                    termination: ChainTermination::FoundPlausible,
                });
                let correct_exact = judge_correct_exact(&patch, bug);
                return Ok(RepairResult {
                    bug_id: bug.id.clone(),
                    chains,
                    plausible_patch: Some(patch),
                    tries: Some(samples_used),
                    correct_exact: Some(correct_exact),
                    samples_used,
                    wall_clock_ms: started.elapsed().as_millis() as u64,
                });
            }

            // feedback goes into the next prompt of this chain
            transcript = assemble_transcript(&initial, &turns, cfg.feedback_style, bug)
                .expect("turns hold only non-plausible, non-harness outcomes");
        };

        let aborting = termination == ChainTermination::BackendFailure
            // a chain that consumed nothing can never make progress
            || (samples_used == chain_started_at_sample
                && termination == ChainTermination::TokenBudgetExceeded);
        chains.push(Chain {
            chain_index,
            turns,
            termination,
        });
        if aborting {
            break;
        }
    }

    debug_assert_eq!(
        samples_used as usize,
        chains.iter().map(|c| c.turns.len()).sum::<usize>(),
        "sample budget accounting must equal recorded turns"
    );

    Ok(RepairResult {
        bug_id: bug.id.clone(),
        chains,
        plausible_patch: None,
        tries: None,
        correct_exact: None,
        samples_used,
        wall_clock_ms: started.elapsed().as_millis() as u64,
    })
}

/// Outcome of one bug within a suite run.
#[derive(Debug)]
pub struct BugRunRecord {
    pub bug_id: String,
    pub result: Result<RepairResult, HarnessFault>,
}

/// Builds one backend per bug, so scripted replays are independent and
/// deterministic under parallelism.
pub type BackendFactory<'a> =
    dyn Fn(&BugInstance) -> Result<Box<dyn GenerationBackend>, String> + Sync + 'a;

/// Repair a whole suite with at most `parallelism` bugs in flight. Result
/// order matches input order; one bug's harness fault does not abort others.
pub fn repair_suite(
    bugs: &[BugInstance],
    cfg: &RepairConfig,
    make_backend: &BackendFactory,
    validator: &Validator,
    parallelism: usize,
) -> Vec<BugRunRecord> {
    let parallelism = parallelism.max(1).min(bugs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<BugRunRecord>>> =
        Mutex::new((0..bugs.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..parallelism {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= bugs.len() {
                    break;
                }
                let bug = &bugs[index];
                let result = match make_backend(bug) {
                    Ok(backend) => repair(bug, cfg, backend.as_ref(), validator),
                    Err(message) => Err(HarnessFault {
                        bug_id: bug.id.clone(),
                        message: format!("backend setup failed: {message}"),
                    }),
                };
                slots.lock().expect("suite slots")[index] = Some(BugRunRecord {
                    bug_id: bug.id.clone(),
                    result,
                });
            });
        }
    });

    slots
        .into_inner()
        .expect("suite slots")
        .into_iter()
        .map(|slot| slot.expect("every bug produced a record"))
        .collect()
}
