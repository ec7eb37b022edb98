//! Prompt construction: the initial prompt, the three feedback styles and the
//! assembled conversation transcript. Templates are byte-exact and pinned by
//! golden tests; they are part of the tool's stable observable behavior.

use crate::domain::{
    render_inputs, BugInstance, FeedbackStyle, Turn, ValidationOutcome, Value,
};
use thiserror::Error;

/// Prompt text with its token estimate frozen at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptText {
    text: String,
    estimated_tokens: u32,
}

impl PromptText {
    pub fn new(text: String) -> PromptText {
        let estimated_tokens = token_estimate(&text);
        PromptText {
            text,
            estimated_tokens,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn estimated_tokens(&self) -> u32 {
        self.estimated_tokens
    }
}

/// Backend-agnostic token estimate: ceil(bytes / 4). The budget it feeds is a
/// safety margin, not an exact accounting.
pub fn token_estimate(text: &str) -> u32 {
    text.len().div_ceil(4) as u32
}

/// The conversation opener built from the buggy function, verbatim.
pub fn build_initial_prompt(bug: &BugInstance) -> PromptText {
    PromptText::new(format!(
        "The following code is buggy.\n{}\nPlease provide a fixed version.\n",
        bug.buggy_source
    ))
}

/// Render a call like `sieve(4)` or `partition([3, 1, 3], 3)` in the
/// canonical literal syntax.
pub fn render_invocation(entry_point: &str, inputs: &[Value]) -> String {
    format!("{entry_point}({})", render_inputs(inputs))
}

#[derive(Debug, Error)]
pub enum FeedbackError {
    #[error("cannot build feedback for a {0} outcome")]
    UnexpectedOutcome(&'static str),
}

/// Build the failure feedback appended to the transcript after one
/// non-plausible turn. Rejects Plausible (nothing to feed back) and
/// HarnessError (environment faults never reach prompts).
pub fn build_feedback(
    outcome: &ValidationOutcome,
    style: FeedbackStyle,
    bug: &BugInstance,
) -> Result<PromptText, FeedbackError> {
    let text = match outcome {
        ValidationOutcome::Plausible | ValidationOutcome::HarnessError { .. } => {
            return Err(FeedbackError::UnexpectedOutcome(outcome.kind()));
        }
        ValidationOutcome::TestFailure {
            first_failing,
            actual,
            ..
        } => match style {
            FeedbackStyle::NoTestcase => {
                "The fixed version is still not correct. Please provide another fixed version.\n"
                    .to_string()
            }
            FeedbackStyle::NaturalLanguage => format!(
                "The fixed version is still not correct. When the input is {}, it incorrectly returns {} but it should return {}. Please provide another fixed version.\n",
                render_inputs(&first_failing.inputs),
                actual.render(),
                first_failing.expected.render(),
            ),
            FeedbackStyle::Functional => format!(
                "The fixed version is still not correct. {} returns {} but the expected output is {}. Please provide another fixed version.\n",
                render_invocation(&bug.entry_point, &first_failing.inputs),
                actual.render(),
                first_failing.expected.render(),
            ),
        },
        other => format!(
            "The fixed version is still not correct. It fails with: {}. Please provide another fixed version.\n",
            diagnostic_line(other),
        ),
    };
    Ok(PromptText::new(text))
}

/// One-line error class + message for non-testcase failures.
fn diagnostic_line(outcome: &ValidationOutcome) -> String {
    match outcome {
        ValidationOutcome::CompileError { message } => {
            format!("CompileError: {}", one_line(message))
        }
        ValidationOutcome::RuntimeError { test, message } => {
            format!("RuntimeError on test {}: {}", test.id, one_line(message))
        }
        ValidationOutcome::Timeout { test, limit_ms } => {
            format!("Timeout: test {} exceeded {} ms", test.id, limit_ms)
        }
        _ => unreachable!("diagnostic_line is only called for error outcomes"),
    }
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Concatenate the initial prompt with each prior turn's extracted patch
/// (as a plain fenced code block) and its feedback, in order.
/// With zero turns this is the identity on the initial prompt.
pub fn assemble_transcript(
    initial: &PromptText,
    turns: &[Turn],
    style: FeedbackStyle,
    bug: &BugInstance,
) -> Result<PromptText, FeedbackError> {
    let mut text = initial.text().to_string();
    for turn in turns {
        text.push_str("```\n");
        text.push_str(turn.patch.extracted_source.trim_end_matches(['\n', '\r']));
        text.push_str("\n```\n");
        text.push_str(build_feedback(&turn.outcome, style, bug)?.text());
    }
    Ok(PromptText::new(text))
}
