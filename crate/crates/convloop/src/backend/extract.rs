//! Turn a raw model completion into a candidate patch source.
//!
//! Extraction priority: the first fenced code block; else the largest
//! contiguous region starting at a line that defines the bug's entry point
//! (by indentation for python, by brace balance for java); else the whole
//! text trimmed. The rules are applied to a fixed point, so extraction is
//! idempotent on its own output.

use crate::domain::{BugInstance, Language};

/// Extract the patch source from raw model output. Total: garbage in means
/// garbage out, and validation classifies it as a compile error.
pub fn extract_patch(raw_text: &str, bug: &BugInstance) -> String {
    let mut current = raw_text.to_string();
    // each rule either shrinks the text or leaves it unchanged
    for _ in 0..8 {
        let next = extract_once(&current, bug);
        if next == current {
            return next;
        }
        current = next;
    }
    current
}

fn extract_once(raw_text: &str, bug: &BugInstance) -> String {
    if let Some(block) = first_fenced_block(raw_text) {
        return block;
    }
    if let Some(region) = largest_definition_region(raw_text, bug) {
        return region;
    }
    raw_text.trim().to_string()
}

/// Content of the first fenced code block: an opening line of three backticks
/// with an optional language tag, through the matching closing fence (or end
/// of text when the model was cut off mid-block).
fn first_fenced_block(text: &str) -> Option<String> {
    let mut lines = text.lines();
    let mut collected: Option<Vec<&str>> = None;
    for line in &mut lines {
        match &mut collected {
            None => {
                if is_opening_fence(line) {
                    collected = Some(Vec::new());
                }
            }
            Some(body) => {
                if line.trim() == "```" {
                    return Some(body.join("\n"));
                }
                body.push(line);
            }
        }
    }
    collected.map(|body| body.join("\n"))
}

fn is_opening_fence(line: &str) -> bool {
    let trimmed = line.trim_start();
    match trimmed.strip_prefix("```") {
        Some(rest) => rest
            .trim_end()
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '+' || c == '-'),
        None => false,
    }
}

fn largest_definition_region(text: &str, bug: &BugInstance) -> Option<String> {
    let lines: Vec<&str> = text.lines().collect();
    let mut best: Option<String> = None;
    for (i, line) in lines.iter().enumerate() {
        let region = match bug.language {
            Language::Python if is_python_def(line, &bug.entry_point) => {
                Some(python_block(&lines, i))
            }
            Language::Java if is_java_definition(line, &bug.entry_point) => {
                Some(java_block(&lines, i))
            }
            _ => None,
        };
        if let Some(region) = region {
            if best.as_ref().is_none_or(|b| region.len() > b.len()) {
                best = Some(region);
            }
        }
    }
    best
}

fn is_python_def(line: &str, entry_point: &str) -> bool {
    let trimmed = line.trim_start();
    trimmed
        .strip_prefix("def ")
        .and_then(|rest| rest.strip_prefix(entry_point))
        .is_some_and(|tail| tail.trim_start().starts_with('('))
}

/// The def line plus every following line that is blank or indented deeper
/// than the def line; trailing blanks are dropped.
fn python_block(lines: &[&str], start: usize) -> String {
    let def_indent = indent_width(lines[start]);
    let mut end = start + 1;
    for (offset, line) in lines[start + 1..].iter().enumerate() {
        if line.trim().is_empty() || indent_width(line) > def_indent {
            end = start + 2 + offset;
        } else {
            break;
        }
    }
    let mut block: Vec<&str> = lines[start..end].to_vec();
    while block.last().is_some_and(|l| l.trim().is_empty()) {
        block.pop();
    }
    block.join("\n")
}

fn indent_width(line: &str) -> usize {
    line.chars()
        .take_while(|c| *c == ' ' || *c == '\t')
        .map(|c| if c == '\t' { 4 } else { 1 })
        .sum()
}

/// A method-definition-looking line: the entry point name followed by an
/// opening parenthesis, with a modifier or type token before the name so a
/// bare call site does not match.
fn is_java_definition(line: &str, entry_point: &str) -> bool {
    let Some(pos) = line.find(entry_point) else {
        return false;
    };
    let after = &line[pos + entry_point.len()..];
    if !after.trim_start().starts_with('(') {
        return false;
    }
    let before = line[..pos].trim_end();
    if before.is_empty() {
        return false;
    }
    let tokens: Vec<&str> = before.split_whitespace().collect();
    if tokens.iter().any(|t| {
        matches!(*t, "return" | "new" | "throw" | "case" | "if" | "while")
            || t.contains('=')
            || t.contains('.')
            || t.contains('(')
    }) {
        return false;
    }
    matches!(
        tokens[0],
        "public" | "private" | "protected" | "static" | "final" | "synchronized"
    ) || tokens.last().is_some_and(|last| {
        last.chars().all(|c| {
            c.is_ascii_alphanumeric() || c == '_' || c == '[' || c == ']' || c == '<' || c == '>'
        })
    })
}

/// From the definition line until the brace depth returns to zero after the
/// first opening brace.
fn java_block(lines: &[&str], start: usize) -> String {
    let mut depth: i32 = 0;
    let mut seen_open = false;
    let mut end = start;
    'outer: for (i, line) in lines.iter().enumerate().skip(start) {
        for ch in line.chars() {
            match ch {
                '{' => {
                    depth += 1;
                    seen_open = true;
                }
                '}' => {
                    depth -= 1;
                    if seen_open && depth == 0 {
                        end = i;
                        break 'outer;
                    }
                }
                _ => {}
            }
        }
        end = i;
    }
    lines[start..=end].join("\n")
}
