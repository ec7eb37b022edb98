//! Testcase value literals and the tolerant deep-equality used to judge
//! actual vs expected outputs.
//!
//! The textual syntax is a JSON value subset: integers, floats, `true`/`false`,
//! `null`, double-quoted strings and `[a, b]` lists. Maps and other structured
//! inputs are deliberately not representable.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// A closed recursive testcase literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Value>),
}

#[derive(Debug, Error)]
pub enum LiteralError {
    #[error("invalid literal {text:?}: {reason}")]
    Invalid { text: String, reason: String },
    #[error("missing `->` separator between inputs and expected output")]
    MissingArrow,
    #[error("literal must not contain non-finite floats")]
    NonFinite,
}

impl Value {
    /// Parse one literal in the canonical syntax.
    pub fn parse(text: &str) -> Result<Value, LiteralError> {
        let json: serde_json::Value =
            serde_json::from_str(text.trim()).map_err(|e| LiteralError::Invalid {
                text: clip(text),
                reason: e.to_string(),
            })?;
        Value::from_json(json).map_err(|reason| LiteralError::Invalid {
            text: clip(text),
            reason,
        })
    }

    /// Convert an already-parsed JSON value, rejecting shapes the literal
    /// syntax excludes (objects).
    pub fn from_json(json: serde_json::Value) -> Result<Value, String> {
        match json {
            serde_json::Value::Null => Ok(Value::Null),
            serde_json::Value::Bool(b) => Ok(Value::Bool(b)),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Value::Int(i))
                } else if let Some(f) = n.as_f64() {
                    Ok(Value::Float(f))
                } else {
                    Err(format!("integer {n} does not fit in 64 bits"))
                }
            }
            serde_json::Value::String(s) => Ok(Value::Str(s)),
            serde_json::Value::Array(items) => items
                .into_iter()
                .map(Value::from_json)
                .collect::<Result<Vec<_>, _>>()
                .map(Value::List),
            serde_json::Value::Object(_) => Err("maps are not representable".to_string()),
        }
    }

    /// Canonical textual form; `parse(render(v)) == v` for finite values.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        match self {
            Value::Null => out.push_str("null"),
            Value::Bool(true) => out.push_str("true"),
            Value::Bool(false) => out.push_str("false"),
            Value::Int(i) => out.push_str(&i.to_string()),
            Value::Float(f) => {
                let s = f.to_string();
                out.push_str(&s);
                // keep float-ness visible so round-trips preserve the type
                if !s.contains('.') && !s.contains('e') && !s.contains('E') {
                    out.push_str(".0");
                }
            }
            Value::Str(s) => {
                out.push_str(&serde_json::to_string(s).expect("string serialization"))
            }
            Value::List(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.render_into(out);
                }
                out.push(']');
            }
        }
    }

    /// True when the value (recursively) contains only finite floats.
    pub fn is_finite(&self) -> bool {
        match self {
            Value::Float(f) => f.is_finite(),
            Value::List(items) => items.iter().all(Value::is_finite),
            _ => true,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Deep structural equality with numeric tolerance: floats compare with
/// `|a - b| <= tol`, an integer equals a float with the same magnitude, lists
/// compare element-wise in order. Non-numeric kinds never cross-match.
pub fn values_equal(a: &Value, b: &Value, tol: f64) -> bool {
    match (a, b) {
        (Value::Null, Value::Null) => true,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Int(x), Value::Int(y)) => x == y,
        (Value::Str(x), Value::Str(y)) => x == y,
        (Value::Float(x), Value::Float(y)) => (x - y).abs() <= tol,
        (Value::Int(x), Value::Float(y)) | (Value::Float(y), Value::Int(x)) => {
            (*x as f64 - y).abs() <= tol
        }
        (Value::List(xs), Value::List(ys)) => {
            xs.len() == ys.len()
                && xs
                    .iter()
                    .zip(ys.iter())
                    .all(|(x, y)| values_equal(x, y, tol))
        }
        _ => false,
    }
}

/// Split one `inputs -> expected` testcase line at the top-level arrow,
/// ignoring arrows inside strings or brackets.
pub fn split_test_line(line: &str) -> Result<(&str, &str), LiteralError> {
    let bytes = line.as_bytes();
    let mut depth = 0i32;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate() {
        if escaped {
            escaped = false;
            continue;
        }
        if in_string {
            match b {
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'[' => depth += 1,
            b']' => depth -= 1,
            b'-' if depth == 0 && bytes.get(i + 1) == Some(&b'>') => {
                return Ok((&line[..i], &line[i + 2..]));
            }
            _ => {}
        }
    }
    Err(LiteralError::MissingArrow)
}

/// Parse one `inputs -> expected` line into input values and the expected
/// output. An empty left side means a zero-argument invocation.
pub fn parse_test_line(line: &str) -> Result<(Vec<Value>, Value), LiteralError> {
    let (left, right) = split_test_line(line)?;
    let left = left.trim();
    let inputs = if left.is_empty() {
        Vec::new()
    } else {
        match Value::parse(&format!("[{left}]"))? {
            Value::List(items) => items,
            _ => unreachable!("bracketed parse yields a list"),
        }
    };
    let expected = Value::parse(right)?;
    Ok((inputs, expected))
}

/// Render input values as the comma-separated argument list used both in
/// tests.txt lines and in feedback prompts.
pub fn render_inputs(inputs: &[Value]) -> String {
    inputs
        .iter()
        .map(Value::render)
        .collect::<Vec<_>>()
        .join(", ")
}

fn clip(text: &str) -> String {
    let t = text.trim();
    if t.chars().count() > 80 {
        let head: String = t.chars().take(80).collect();
        format!("{head}…")
    } else {
        t.to_string()
    }
}
