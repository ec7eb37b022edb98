//! Runs a candidate patch against a bug's full testsuite in an isolated
//! child process and classifies the result. One process per suite run; the
//! per-test timeout is re-armed at every `START` line and the whole run is
//! capped at per_test_timeout × total tests.

pub mod shim;

pub use shim::{generate_shim, java_class_name, strip_package_declaration};

use crate::domain::{
    render_inputs, values_equal, ActualOutput, BugInstance, Language, RepairConfig,
    ValidationOutcome, Value,
};
use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};
use std::path::PathBuf;
use std::process::{Command, ExitStatus, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

/// Headroom for interpreter/VM startup before the first `START` line and on
/// top of the whole-suite budget.
const STARTUP_GRACE_MS: u64 = 2000;

/// Ceiling for the javac step of java validations.
const COMPILE_TIMEOUT_MS: u64 = 60_000;

#[derive(Debug, Clone)]
pub struct ValidatorConfig {
    pub python_bin: String,
    pub javac_bin: String,
    pub java_bin: String,
    /// Retain temp workspaces for debugging instead of removing them.
    pub keep_workdirs: bool,
}

impl Default for ValidatorConfig {
    fn default() -> Self {
        ValidatorConfig {
            python_bin: "python3".to_string(),
            javac_bin: "javac".to_string(),
            java_bin: "java".to_string(),
            keep_workdirs: false,
        }
    }
}

/// Outcome of one executed (or skipped) testcase, for health reports.
#[derive(Debug, Clone)]
pub struct TestExecution {
    pub test_id: String,
    /// None when the test never ran (earlier error or timeout).
    pub actual: Option<ActualOutput>,
    pub passed: Option<bool>,
}

#[derive(Debug)]
pub struct ValidationReport {
    pub outcome: ValidationOutcome,
    pub per_test: Vec<TestExecution>,
    /// Present when keep_workdirs retained the workspace.
    pub workdir: Option<PathBuf>,
    pub wall_ms: u64,
}

/// Validates patches in temp workspaces. Safe to call concurrently for
/// different bugs (workspaces are disjoint).
pub struct Validator {
    cfg: ValidatorConfig,
    calls: AtomicU64,
}

impl Validator {
    pub fn new(cfg: ValidatorConfig) -> Validator {
        Validator {
            cfg,
            calls: AtomicU64::new(0),
        }
    }

    /// Number of real validation runs performed; lets tests pin down cache
    /// behavior.
    pub fn validation_calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn validate(
        &self,
        bug: &BugInstance,
        patch_source: &str,
        cfg: &RepairConfig,
    ) -> ValidationOutcome {
        self.validate_detailed(bug, patch_source, cfg).outcome
    }

    /// Full validation with the per-test table. HarnessError signals an
    /// environment problem, never a patch failure.
    pub fn validate_detailed(
        &self,
        bug: &BugInstance,
        patch_source: &str,
        cfg: &RepairConfig,
    ) -> ValidationReport {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let started = Instant::now();
        let report = |outcome: ValidationOutcome, per_test, workdir| ValidationReport {
            outcome,
            per_test,
            workdir,
            wall_ms: started.elapsed().as_millis() as u64,
        };

        let workspace = match tempfile::Builder::new()
            .prefix(&format!("{}-", sanitize_id(&bug.id)))
            .tempdir()
        {
            Ok(dir) => dir,
            Err(e) => {
                return report(
                    ValidationOutcome::HarnessError {
                        message: format!("failed to create temp workspace: {e}"),
                    },
                    Vec::new(),
                    None,
                )
            }
        };
        let ws = workspace.path();

        let mut tests_text = String::new();
        for test in &bug.testcases {
            tests_text.push_str(&render_inputs(&test.inputs));
            tests_text.push_str(" -> ");
            tests_text.push_str(&test.expected.render());
            tests_text.push('\n');
        }

        let total = bug.testcases.len();
        let budget = Duration::from_millis(cfg.per_test_timeout_ms.saturating_mul(total.max(1) as u64));
        let per_test = Duration::from_millis(cfg.per_test_timeout_ms);

        let run = (|| -> Result<ShimRun, String> {
            let write = |name: &str, contents: &str| {
                std::fs::write(ws.join(name), contents)
                    .map_err(|e| format!("failed to write {name}: {e}"))
            };
            write("tests.txt", &tests_text)?;
            match bug.language {
                Language::Python => {
                    write("patch.py", patch_source)?;
                    write("shim.py", &generate_shim(bug))?;
                    let mut cmd = Command::new(&self.cfg.python_bin);
                    cmd.arg("shim.py").current_dir(ws);
                    run_protocol_process(cmd, per_test, budget)
                        .map_err(|e| format!("failed to run {}: {e}", self.cfg.python_bin))
                }
                Language::Java => {
                    let Some(class_name) = java_class_name(patch_source) else {
                        return Ok(ShimRun::compile_failure(
                            "no class declaration found in patch".to_string(),
                        ));
                    };
                    if class_name == "Runner" {
                        return Ok(ShimRun::compile_failure(
                            "patch class name Runner collides with the test runner".to_string(),
                        ));
                    }
                    write(
                        &format!("{class_name}.java"),
                        &strip_package_declaration(patch_source),
                    )?;
                    write("Runner.java", &generate_shim(bug))?;

                    let compile_limit = Duration::from_millis(COMPILE_TIMEOUT_MS);
                    let mut javac = Command::new(&self.cfg.javac_bin);
                    javac
                        .args(["-d", ".", "Runner.java", &format!("{class_name}.java")])
                        .current_dir(ws);
                    let compiled = run_protocol_process(javac, compile_limit, compile_limit)
                        .map_err(|e| format!("failed to run {}: {e}", self.cfg.javac_bin))?;
                    if compiled.timed_out {
                        return Ok(ShimRun::compile_failure("compilation timed out".to_string()));
                    }
                    if !compiled.status.is_some_and(|s| s.success()) {
                        return Ok(ShimRun::compile_failure(tail(&compiled.stderr, 1000)));
                    }

                    let mut java = Command::new(&self.cfg.java_bin);
                    java.args(["-cp", ".", "Runner", &class_name]).current_dir(ws);
                    run_protocol_process(java, per_test, budget)
                        .map_err(|e| format!("failed to run {}: {e}", self.cfg.java_bin))
                }
            }
        })();

        let run = match run {
            Ok(run) => run,
            Err(message) => {
                return report(ValidationOutcome::HarnessError { message }, Vec::new(), None)
            }
        };

        let (outcome, per_test_results) = classify(bug, cfg, &run);

        let kept = if self.cfg.keep_workdirs {
            Some(workspace.keep())
        } else {
            None
        };
        report(outcome, per_test_results, kept)
    }
}

fn sanitize_id(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

fn tail(text: &str, max: usize) -> String {
    let trimmed = text.trim();
    if trimmed.len() <= max {
        return trimmed.to_string();
    }
    let start = trimmed.len() - max;
    let boundary = (start..trimmed.len())
        .find(|i| trimmed.is_char_boundary(*i))
        .unwrap_or(trimmed.len());
    format!("…{}", &trimmed[boundary..])
}

#[derive(Debug)]
struct ShimRun {
    lines: Vec<String>,
    stderr: String,
    status: Option<ExitStatus>,
    timed_out: bool,
    /// 1-based index of the last `START` line seen; 0 when none was.
    last_started: usize,
    /// Set when a pre-run step already decided the outcome.
    compile_failure: Option<String>,
}

impl ShimRun {
    fn compile_failure(message: String) -> ShimRun {
        ShimRun {
            lines: Vec::new(),
            stderr: String::new(),
            status: None,
            timed_out: false,
            last_started: 0,
            compile_failure: Some(message),
        }
    }
}

struct RunState {
    last_started: usize,
    last_start_at: Instant,
    lines: Vec<String>,
}

/// Spawn the command and collect its protocol lines, killing it when either
/// the current test exceeds the per-test limit or the whole run exceeds the
/// budget.
fn run_protocol_process(
    mut cmd: Command,
    per_test_timeout: Duration,
    budget: Duration,
) -> std::io::Result<ShimRun> {
    let started = Instant::now();
    cmd.stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn()?;
    let stdout = child.stdout.take().expect("piped stdout");
    let stderr = child.stderr.take().expect("piped stderr");

    let state = Arc::new(Mutex::new(RunState {
        last_started: 0,
        last_start_at: started,
        lines: Vec::new(),
    }));
    let reader_state = Arc::clone(&state);
    let reader = std::thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            let Ok(line) = line else { break };
            let mut st = reader_state.lock().expect("run state lock");
            if let Some(rest) = line.strip_prefix("START ") {
                if let Ok(index) = rest.trim().parse::<usize>() {
                    st.last_started = index;
                    st.last_start_at = Instant::now();
                }
            }
            st.lines.push(line);
        }
    });
    let stderr_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = BufReader::new(stderr).read_to_string(&mut buf);
        buf
    });

    let grace = Duration::from_millis(STARTUP_GRACE_MS);
    let mut timed_out = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        let now = Instant::now();
        let (last_started, last_start_at) = {
            let st = state.lock().expect("run state lock");
            (st.last_started, st.last_start_at)
        };
        // before the first START the deadline covers interpreter startup too
        let per_test_deadline = if last_started == 0 {
            last_start_at + per_test_timeout + grace
        } else {
            last_start_at + per_test_timeout
        };
        if now >= started + budget + grace || now >= per_test_deadline {
            let _ = child.kill();
            let _ = child.wait();
            timed_out = true;
            break None;
        }
        std::thread::sleep(Duration::from_millis(5));
    };

    let _ = reader.join();
    let stderr = stderr_reader.join().unwrap_or_default();
    let st = state.lock().expect("run state lock");
    Ok(ShimRun {
        lines: st.lines.clone(),
        stderr,
        status,
        timed_out,
        last_started: st.last_started,
        compile_failure: None,
    })
}

fn classify(
    bug: &BugInstance,
    cfg: &RepairConfig,
    run: &ShimRun,
) -> (ValidationOutcome, Vec<TestExecution>) {
    let total = bug.testcases.len();

    if let Some(message) = &run.compile_failure {
        return (
            ValidationOutcome::CompileError {
                message: message.clone(),
            },
            Vec::new(),
        );
    }

    // collect VAL/ERR/DONE events; anything else on stdout means the shim
    // stream is unusable
    let mut actuals: Vec<Option<String>> = vec![None; total];
    let mut error: Option<(usize, String)> = None;
    let mut done = false;
    for line in &run.lines {
        let mut parts = line.splitn(3, ' ');
        let keyword = parts.next().unwrap_or_default();
        match keyword {
            "DONE" => done = true,
            "START" | "OK" => {}
            "VAL" | "ERR" => {
                let index: usize = match parts.next().and_then(|s| s.parse().ok()) {
                    Some(i) => i,
                    None => return (harness_error(format!("malformed shim line: {line}")), Vec::new()),
                };
                let rest = parts.next().unwrap_or_default().to_string();
                if keyword == "ERR" {
                    error = Some((index, rest));
                } else if index >= 1 && index <= total {
                    actuals[index - 1] = Some(rest);
                } else {
                    return (
                        harness_error(format!("shim reported value for unknown test {index}")),
                        Vec::new(),
                    );
                }
            }
            _ => {
                return (
                    harness_error(format!("unexpected shim output line: {line}")),
                    Vec::new(),
                )
            }
        }
    }

    let per_test_from = |actuals: &[Option<String>], errored: Option<(usize, &str)>| {
        let mut rows = Vec::with_capacity(total);
        for (i, test) in bug.testcases.iter().enumerate() {
            let row = match &actuals[i] {
                Some(text) => match Value::parse(text) {
                    Ok(value) => TestExecution {
                        test_id: test.id.clone(),
                        passed: Some(values_equal(&value, &test.expected, cfg.float_tolerance)),
                        actual: Some(ActualOutput::Value(value)),
                    },
                    Err(_) => TestExecution {
                        test_id: test.id.clone(),
                        passed: Some(false),
                        actual: Some(ActualOutput::ErrorText(text.clone())),
                    },
                },
                None => match errored {
                    Some((index, message)) if index == i + 1 => TestExecution {
                        test_id: test.id.clone(),
                        passed: Some(false),
                        actual: Some(ActualOutput::ErrorText(message.to_string())),
                    },
                    _ => TestExecution {
                        test_id: test.id.clone(),
                        actual: None,
                        passed: None,
                    },
                },
            };
            rows.push(row);
        }
        rows
    };

    if run.timed_out {
        let index = run.last_started.clamp(1, total.max(1));
        let rows = per_test_from(&actuals, None);
        return (
            ValidationOutcome::Timeout {
                test: bug.testcases[index - 1].clone(),
                limit_ms: cfg.per_test_timeout_ms,
            },
            rows,
        );
    }

    if let Some((index, message)) = error {
        let rows = per_test_from(&actuals, Some((index, message.as_str())));
        if index == 0 {
            return (ValidationOutcome::CompileError { message }, rows);
        }
        if index <= total {
            return (
                ValidationOutcome::RuntimeError {
                    test: bug.testcases[index - 1].clone(),
                    message,
                },
                rows,
            );
        }
        return (
            harness_error(format!("shim reported error for unknown test {index}")),
            rows,
        );
    }

    if !done {
        return (
            harness_error(format!(
                "shim ended without DONE (exit status {:?}): {}",
                run.status.and_then(|s| s.code()),
                tail(&run.stderr, 500)
            )),
            per_test_from(&actuals, None),
        );
    }

    // full suite ran: authoritative comparison host-side
    let mut values: Vec<Value> = Vec::with_capacity(total);
    for (i, slot) in actuals.iter().enumerate() {
        let Some(text) = slot else {
            return (
                harness_error(format!(
                    "shim finished without a value for test {}",
                    bug.testcases[i].id
                )),
                per_test_from(&actuals, None),
            );
        };
        match Value::parse(text) {
            Ok(value) => values.push(value),
            Err(e) => {
                return (
                    harness_error(format!(
                        "unparseable shim value for test {}: {e}",
                        bug.testcases[i].id
                    )),
                    per_test_from(&actuals, None),
                )
            }
        }
    }

    let rows = per_test_from(&actuals, None);
    let passed_count = bug
        .testcases
        .iter()
        .zip(values.iter())
        .filter(|(test, value)| values_equal(value, &test.expected, cfg.float_tolerance))
        .count();
    let first_mismatch = bug
        .testcases
        .iter()
        .zip(values.iter())
        .position(|(test, value)| !values_equal(value, &test.expected, cfg.float_tolerance));
    match first_mismatch {
        None => (ValidationOutcome::Plausible, rows),
        Some(i) => (
            ValidationOutcome::TestFailure {
                first_failing: bug.testcases[i].clone(),
                actual: ActualOutput::Value(values[i].clone()),
                passed_count,
                total,
            },
            rows,
        ),
    }
}

fn harness_error(message: String) -> ValidationOutcome {
    ValidationOutcome::HarnessError { message }
}

/// Per-bug cache of validation outcomes keyed by normalized patch text;
/// re-validation of an already-seen patch is free.
#[derive(Default)]
pub struct OutcomeCache {
    map: Mutex<HashMap<String, ValidationOutcome>>,
}

impl OutcomeCache {
    pub fn new() -> OutcomeCache {
        OutcomeCache::default()
    }

    pub fn lookup(&self, normalized: &str) -> Option<ValidationOutcome> {
        self.map
            .lock()
            .expect("cache lock")
            .get(normalized)
            .cloned()
    }

    /// First insert wins; re-inserting the same key is a no-op.
    pub fn insert(&self, normalized: &str, outcome: ValidationOutcome) {
        self.map
            .lock()
            .expect("cache lock")
            .entry(normalized.to_string())
            .or_insert(outcome);
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::TestCase;
    use crate::testutil::{sieve_bug, SIEVE_BUGGY, SIEVE_REFERENCE};

    fn fast_cfg() -> RepairConfig {
        RepairConfig {
            per_test_timeout_ms: 400,
            ..RepairConfig::default()
        }
    }

    fn validator() -> Validator {
        Validator::new(ValidatorConfig::default())
    }

    #[test]
    fn reference_patch_is_plausible() {
        let bug = sieve_bug();
        let outcome = validator().validate(&bug, SIEVE_REFERENCE, &fast_cfg());
        assert_eq!(outcome, ValidationOutcome::Plausible);
    }

    #[test]
    fn buggy_source_fails_first_on_sieve_2() {
        let bug = sieve_bug();
        match validator().validate(&bug, SIEVE_BUGGY, &fast_cfg()) {
            ValidationOutcome::TestFailure {
                first_failing,
                actual,
                passed_count,
                total,
            } => {
                // sieve(1) expects [] and passes; sieve(2) is the first failure
                assert_eq!(first_failing.id, "t2");
                assert_eq!(first_failing.inputs, vec![Value::Int(2)]);
                assert_eq!(actual, ActualOutput::Value(Value::List(vec![])));
                assert_eq!(passed_count, 1);
                assert_eq!(total, 5);
            }
            other => panic!("expected TestFailure, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_is_compile_error() {
        let bug = sieve_bug();
        let outcome = validator().validate(&bug, "def sieve(max:\n    return []", &fast_cfg());
        match outcome {
            ValidationOutcome::CompileError { message } => {
                assert!(message.contains("SyntaxError"), "message: {message}")
            }
            other => panic!("expected CompileError, got {other:?}"),
        }
    }

    #[test]
    fn missing_entry_point_is_compile_error() {
        let bug = sieve_bug();
        let outcome = validator().validate(&bug, "def other(x):\n    return x", &fast_cfg());
        assert!(matches!(outcome, ValidationOutcome::CompileError { .. }));
    }

    #[test]
    fn raising_patch_is_runtime_error() {
        let bug = sieve_bug();
        let patch = "def sieve(max):\n    raise ValueError('nope %d' % max)";
        match validator().validate(&bug, patch, &fast_cfg()) {
            ValidationOutcome::RuntimeError { test, message } => {
                assert_eq!(test.id, "t1");
                assert!(message.contains("ValueError"));
            }
            other => panic!("expected RuntimeError, got {other:?}"),
        }
    }

    #[test]
    fn nonterminating_patch_times_out_on_the_stuck_test() {
        let bug = sieve_bug();
        let patch = "def sieve(max):\n    while True:\n        pass";
        let cfg = fast_cfg();
        let started = Instant::now();
        match validator().validate(&bug, patch, &cfg) {
            ValidationOutcome::Timeout { test, limit_ms } => {
                assert_eq!(test.id, "t1");
                assert_eq!(limit_ms, cfg.per_test_timeout_ms);
            }
            other => panic!("expected Timeout, got {other:?}"),
        }
        let wall = started.elapsed();
        assert!(wall >= Duration::from_millis(cfg.per_test_timeout_ms));
        assert!(wall < Duration::from_secs(10));
    }

    #[test]
    fn patch_prints_do_not_corrupt_the_protocol() {
        let bug = sieve_bug();
        let patch = "def sieve(max):\n    print('noise', max)\n    primes = []\n    for n in range(2, max + 1):\n        if all(n % p > 0 for p in primes):\n            primes.append(n)\n    return primes";
        assert_eq!(
            validator().validate(&bug, patch, &fast_cfg()),
            ValidationOutcome::Plausible
        );
    }

    #[test]
    fn missing_runner_binary_is_a_harness_error() {
        let bug = sieve_bug();
        let validator = Validator::new(ValidatorConfig {
            python_bin: "definitely-not-python-xyz".to_string(),
            ..ValidatorConfig::default()
        });
        match validator.validate(&bug, SIEVE_REFERENCE, &fast_cfg()) {
            ValidationOutcome::HarnessError { message } => {
                assert!(message.contains("definitely-not-python-xyz"))
            }
            other => panic!("expected HarnessError, got {other:?}"),
        }
    }

    #[test]
    fn float_tolerance_is_applied_host_side() {
        let mut bug = sieve_bug();
        bug.entry_point = "near".to_string();
        bug.testcases = vec![TestCase {
            id: "t1".into(),
            inputs: vec![Value::Int(0)],
            expected: Value::Float(1.0),
        }];
        bug.buggy_source = "def near(x):\n    return 2.0".into();
        bug.reference_patch = "def near(x):\n    return 1.0".into();
        let patch = "def near(x):\n    return 1.0000004";
        assert_eq!(
            validator().validate(&bug, patch, &fast_cfg()),
            ValidationOutcome::Plausible
        );
        let patch = "def near(x):\n    return 1.1";
        assert!(matches!(
            validator().validate(&bug, patch, &fast_cfg()),
            ValidationOutcome::TestFailure { .. }
        ));
    }

    #[test]
    fn validation_is_deterministic() {
        let bug = sieve_bug();
        let v = validator();
        let first = v.validate(&bug, SIEVE_BUGGY, &fast_cfg());
        let second = v.validate(&bug, SIEVE_BUGGY, &fast_cfg());
        assert_eq!(first, second);
        assert_eq!(v.validation_calls(), 2);
    }

    #[test]
    fn plausible_is_stable_across_repeated_runs() {
        let bug = sieve_bug();
        let v = validator();
        for _ in 0..3 {
            assert_eq!(
                v.validate(&bug, SIEVE_REFERENCE, &fast_cfg()),
                ValidationOutcome::Plausible
            );
        }
    }

    #[test]
    fn detailed_report_lists_per_test_results() {
        let bug = sieve_bug();
        let report = validator().validate_detailed(&bug, SIEVE_BUGGY, &fast_cfg());
        assert_eq!(report.per_test.len(), 5);
        assert_eq!(report.per_test[0].passed, Some(true));
        assert_eq!(report.per_test[1].passed, Some(false));
        assert!(report.workdir.is_none());
    }

    #[test]
    fn keep_workdirs_retains_the_workspace() {
        let bug = sieve_bug();
        let validator = Validator::new(ValidatorConfig {
            keep_workdirs: true,
            ..ValidatorConfig::default()
        });
        let report = validator.validate_detailed(&bug, SIEVE_REFERENCE, &fast_cfg());
        let dir = report.workdir.expect("workdir retained");
        assert!(dir.join("patch.py").exists());
        assert!(dir.join("tests.txt").exists());
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn garbage_shim_output_is_a_harness_error() {
        let bug = sieve_bug();
        let dir = tempfile::tempdir().unwrap();
        let fake_python = dir.path().join("fake-python");
        std::fs::write(&fake_python, "#!/bin/sh\necho GARBAGE LINE\n").unwrap();
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            std::fs::set_permissions(&fake_python, std::fs::Permissions::from_mode(0o755))
                .unwrap();
        }
        let validator = Validator::new(ValidatorConfig {
            python_bin: fake_python.display().to_string(),
            ..ValidatorConfig::default()
        });
        match validator.validate(&bug, SIEVE_REFERENCE, &fast_cfg()) {
            ValidationOutcome::HarnessError { message } => {
                assert!(message.contains("unexpected shim output"), "{message}")
            }
            other => panic!("expected HarnessError, got {other:?}"),
        }
    }

    #[test]
    fn java_patches_without_a_class_never_reach_javac() {
        let mut bug = sieve_bug();
        bug.language = Language::Java;
        bug.entry_point = "bitcount".into();
        // runs without any JDK installed
        let v = Validator::new(ValidatorConfig {
            javac_bin: "definitely-no-javac".into(),
            java_bin: "definitely-no-java".into(),
            ..ValidatorConfig::default()
        });
        match v.validate(&bug, "int bitcount = 3;", &fast_cfg()) {
            ValidationOutcome::CompileError { message } => {
                assert!(message.contains("no class declaration"))
            }
            other => panic!("expected CompileError, got {other:?}"),
        }
        match v.validate(
            &bug,
            "public class Runner { static void bitcount() {} }",
            &fast_cfg(),
        ) {
            ValidationOutcome::CompileError { message } => {
                assert!(message.contains("Runner"))
            }
            other => panic!("expected CompileError, got {other:?}"),
        }
    }

    #[test]
    fn cache_semantics() {
        let cache = OutcomeCache::new();
        assert!(cache.lookup("k").is_none());
        cache.insert("k", ValidationOutcome::Plausible);
        assert_eq!(cache.lookup("k"), Some(ValidationOutcome::Plausible));
        // idempotent: the first entry wins
        cache.insert(
            "k",
            ValidationOutcome::CompileError {
                message: "x".into(),
            },
        );
        assert_eq!(cache.lookup("k"), Some(ValidationOutcome::Plausible));
        assert_eq!(cache.len(), 1);
        assert!(cache.lookup("unseen").is_none());
    }
}
