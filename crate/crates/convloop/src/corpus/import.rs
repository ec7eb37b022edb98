//! One-shot importer from a QuixBugs checkout into the canonical corpus
//! layout. QuixBugs encodes tests per line as JSON `[args, expected]` in
//! json_testcases/; programs without such testcases (the graph-structured
//! ones) cannot be imported and are skipped with a warning.

use super::CorpusError;
use crate::domain::{render_inputs, Language, Value};
use crate::harness::strip_package_declaration;
use std::collections::BTreeSet;
use std::path::Path;

/// Exclusion list shipped with the tool; see data/quixbugs_excluded.txt.
pub fn default_exclusions() -> BTreeSet<String> {
    parse_exclusions(include_str!("../../data/quixbugs_excluded.txt"))
}

pub fn parse_exclusions(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Default)]
pub struct ImportReport {
    pub imported: Vec<String>,
    pub skipped: Vec<(String, String)>,
}

/// Convert a QuixBugs checkout into canonical bug directories under `dst`.
pub fn import_quixbugs(
    src: &Path,
    dst: &Path,
    language: Language,
    exclusions: &BTreeSet<String>,
) -> Result<ImportReport, CorpusError> {
    let (programs_dir, correct_dir, extension) = match language {
        Language::Python => ("python_programs", "correct_python_programs", "py"),
        Language::Java => ("java_programs", "correct_java_programs", "java"),
    };
    let programs = src.join(programs_dir);
    let entries = std::fs::read_dir(&programs).map_err(|source| CorpusError::Io {
        path: programs.clone(),
        source,
    })?;

    let mut names: Vec<String> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io {
            path: programs.clone(),
            source,
        })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some(extension) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        // helper files in the checkout, not programs
        if stem.ends_with("_test") || stem.eq_ignore_ascii_case("node")
            || stem.eq_ignore_ascii_case("weightedEdge")
        {
            continue;
        }
        names.push(stem.to_string());
    }
    names.sort();

    let mut report = ImportReport::default();
    for name in names {
        // QuixBugs java programs are UPPERCASE files; testcases and the
        // canonical id use the lowercase program name
        let id_base = name.to_lowercase();
        let skip = |report: &mut ImportReport, reason: &str| {
            report.skipped.push((id_base.clone(), reason.to_string()));
        };

        if exclusions.contains(&id_base) {
            skip(&mut report, "excluded");
            continue;
        }
        let testcases_path = src.join("json_testcases").join(format!("{id_base}.json"));
        if !testcases_path.exists() {
            skip(&mut report, "no json testcases");
            continue;
        }
        let correct_path = correct_source_path(src, correct_dir, &name, extension);
        let Some(correct_path) = correct_path else {
            skip(&mut report, "no reference patch");
            continue;
        };

        let buggy = read(&programs.join(format!("{name}.{extension}")))?;
        let fixed = read(&correct_path)?;
        let tests = convert_testcases(&testcases_path)?;

        let id = match language {
            Language::Python => id_base.clone(),
            Language::Java => format!("{id_base}_java"),
        };
        let (buggy, fixed) = match language {
            Language::Python => (buggy, fixed),
            // compiled into a flat default-package workspace
            Language::Java => (
                strip_package_declaration(&buggy),
                strip_package_declaration(&fixed),
            ),
        };

        let bug_dir = dst.join(&id);
        let write = |name: &str, contents: &str| -> Result<(), CorpusError> {
            std::fs::write(bug_dir.join(name), contents).map_err(|source| CorpusError::Io {
                path: bug_dir.join(name),
                source,
            })
        };
        std::fs::create_dir_all(&bug_dir).map_err(|source| CorpusError::Io {
            path: bug_dir.clone(),
            source,
        })?;
        write(
            "bug.cfg",
            &format!(
                "id={id}\nlanguage={}\nentry_point={id_base}\nsource=buggy.src\nreference=fixed.src\n",
                language.as_str()
            ),
        )?;
        write("buggy.src", &buggy)?;
        write("fixed.src", &fixed)?;
        write("tests.txt", &tests)?;
        report.imported.push(id);
    }
    Ok(report)
}

fn correct_source_path(
    src: &Path,
    correct_dir: &str,
    name: &str,
    extension: &str,
) -> Option<std::path::PathBuf> {
    let path = src.join(correct_dir).join(format!("{name}.{extension}"));
    if path.exists() {
        return Some(path);
    }
    None
}

fn read(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Each json_testcases line is `[args, expected]`; args is an array of
/// arguments (a bare value means one argument).
fn convert_testcases(path: &Path) -> Result<String, CorpusError> {
    let text = read(path)?;
    let mut out = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |reason: String| CorpusError::TestcaseParse {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        let json: serde_json::Value =
            serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        let serde_json::Value::Array(mut pair) = json else {
            return Err(parse_err("expected [args, expected]".to_string()));
        };
        if pair.len() != 2 {
            return Err(parse_err(format!(
                "expected [args, expected], got {} element(s)",
                pair.len()
            )));
        }
        let expected = Value::from_json(pair.remove(1)).map_err(parse_err)?;
        let args_json = pair.remove(0);
        let args = match args_json {
            serde_json::Value::Array(items) => items
                .into_iter()
                .map(Value::from_json)
                .collect::<Result<Vec<_>, _>>()
                .map_err(parse_err)?,
            single => vec![Value::from_json(single).map_err(parse_err)?],
        };
        out.push_str(&render_inputs(&args));
        out.push_str(" -> ");
        out.push_str(&expected.render());
        out.push('\n');
    }
    Ok(out)
}
