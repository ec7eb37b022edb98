//! Lexical patch normalization: strips comments for the bug's language and
//! collapses whitespace, so that trivially reformatted patches deduplicate to
//! the same key. Deliberately not AST-based.

use super::Language;

/// Normalize a patch source for dedup and reference comparison.
/// Total, deterministic and idempotent.
pub fn normalize_patch(source: &str, language: Language) -> String {
    let stripped = match language {
        Language::Python => strip_python_comments(source),
        Language::Java => strip_java_comments(source),
    };
    collapse_whitespace(&stripped)
}

fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(ch);
        }
    }
    out
}

/// Drop `#` comments that are not inside a string literal. Handles single,
/// double and triple quotes with backslash escapes.
fn strip_python_comments(source: &str) -> String {
    let chars: Vec<char> = source.chars().collect();
    let mut out = String::with_capacity(source.len());
    let mut i = 0;
    let mut quote: Option<(char, bool)> = None; // (quote char, is_triple)
    while i < chars.len() {
        let ch = chars[i];
        if let Some((q, triple)) = quote {
            out.push(ch);
            if ch == '\\' && i + 1 < chars.len() {
                out.push(chars[i + 1]);
                i += 2;
                continue;
            }
            if ch == q {
                if triple {
                    if chars.get(i + 1) == Some(&q) && chars.get(i + 2) == Some(&q) {
                        out.push(q);
                        out.push(q);
                        i += 3;
                        quote = None;
                        continue;
                    }
                } else {
                    quote = None;
                }
            }
            i += 1;
            continue;
        }
        match ch {
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '\'' | '"' => {
                let triple = chars.get(i + 1) == Some(&ch) && chars.get(i + 2) == Some(&ch);
                quote = Some((ch, triple));
                out.push(ch);
                if triple {
                    out.push(ch);
                    out.push(ch);
                    i += 3;
                    continue;
                }
                i += 1;
            }
            _ => {
                out.push(ch);
                i += 1;
            }
        }
    }
    out
}

/// Drop `//` and `/* */` comments that are not inside a string or char
/// literal.
fn strip_java_comments(source: &str) -> String {
    let chars: Vec<char> = source.chars().collect();
    let mut out = String::with_capacity(source.len());
    let mut i = 0;
    let mut quote: Option<char> = None;
    while i < chars.len() {
        let ch = chars[i];
        if let Some(q) = quote {
            out.push(ch);
            if ch == '\\' && i + 1 < chars.len() {
                out.push(chars[i + 1]);
                i += 2;
                continue;
            }
            if ch == q {
                quote = None;
            }
            i += 1;
            continue;
        }
        match ch {
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'*') => {
                i += 2;
                while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                    i += 1;
                }
                i = (i + 2).min(chars.len());
                // block comments separate tokens
                out.push(' ');
            }
            '"' | '\'' => {
                quote = Some(ch);
                out.push(ch);
                i += 1;
            }
            _ => {
                out.push(ch);
                i += 1;
            }
        }
    }
    out
}
