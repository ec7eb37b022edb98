//! End-to-end runs of the convloop binary: subcommands, report files, exit
//! codes.

mod common;

use common::{walkthrough_script, fixtures_dir, write_quixbugs_checkout};
use std::process::Command;

fn convloop() -> Command {
    Command::new(env!("CARGO_BIN_EXE_convloop"))
}

fn run_ok(cmd: &mut Command) -> String {
    let output = cmd.output().expect("binary runs");
    assert!(
        output.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        output.status.code(),
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8_lossy(&output.stdout).to_string()
}

#[test]
fn run_walkthrough_script_writes_reports() {
    let out = tempfile::tempdir().unwrap();
    let report = out.path().join("report.json");
    let csv = out.path().join("rows.csv");
    let stdout = run_ok(convloop()
        .args(["run", "--corpus"])
        .arg(fixtures_dir())
        .args(["--bug", "sieve", "--backend", "script", "--script"])
        .arg(walkthrough_script())
        .args(["--style", "functional", "--timeout-ms", "600"])
        .arg("--report")
        .arg(&report)
        .arg("--csv")
        .arg(&csv));

    assert!(stdout.contains("sieve: plausible tries=3"));
    assert!(stdout.contains("plausible 1/1"));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["summary"]["n_plausible"], 1);
    assert_eq!(report["summary"]["per_bug"][0]["tries"], 3);
    assert_eq!(report["results"][0]["status"], "completed");

    let csv = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "bug_id,plausible,correct_exact,tries,chains,wall_ms");
    assert!(lines[1].starts_with("sieve,true,true,3,1,"));
}

#[test]
fn doctor_reports_healthy_fixture_corpus() {
    let stdout = run_ok(convloop()
        .args(["doctor", "--corpus"])
        .arg(fixtures_dir())
        .args(["--timeout-ms", "600"]));
    assert!(stdout.contains("sieve: healthy"));
    assert!(stdout.contains("bitcount: healthy"));
    assert!(stdout.contains("6 healthy, 0 unhealthy"));
}

#[test]
fn doctor_flags_an_unhealthy_corpus_with_exit_1() {
    // a "bug" whose buggy source already passes: not-a-bug
    let corpus = tempfile::tempdir().unwrap();
    let dir = corpus.path().join("nobug");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("bug.cfg"),
        "id=nobug\nlanguage=python\nentry_point=f\nsource=buggy.src\nreference=fixed.src\n",
    )
    .unwrap();
    std::fs::write(dir.join("buggy.src"), "def f(x):\n    return x\n").unwrap();
    std::fs::write(dir.join("fixed.src"), "def f(x):\n    return x\n").unwrap();
    std::fs::write(dir.join("tests.txt"), "1 -> 1\n").unwrap();

    let output = convloop()
        .args(["doctor", "--corpus"])
        .arg(corpus.path())
        .args(["--timeout-ms", "600"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stdout).contains("UNHEALTHY(not-a-bug)"));
}

#[test]
fn import_quixbugs_yields_thirty_bugs() {
    let src = tempfile::tempdir().unwrap();
    let dst = tempfile::tempdir().unwrap();
    write_quixbugs_checkout(src.path());

    let stdout = run_ok(convloop()
        .arg("import-quixbugs")
        .arg(src.path())
        .arg(dst.path()));
    assert!(stdout.contains("imported 30 python bug(s)"));

    let imported: Vec<_> = std::fs::read_dir(dst.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().join("bug.cfg").exists())
        .collect();
    assert_eq!(imported.len(), 30);

    // a converted bug round-trips through the loader
    let bug = convloop::load_bug(&dst.path().join("sieve")).unwrap();
    assert_eq!(bug.entry_point, "sieve");
    assert_eq!(bug.testcases.len(), 2);
}

#[test]
fn sweep_emits_one_summary_per_setting() {
    let out = tempfile::tempdir().unwrap();
    let report = out.path().join("sweep.json");
    // three fenced wrong patches; extraction works for every bug's entry point
    let script = out.path().join("wrong.script");
    std::fs::write(
        &script,
        "```python\ndef unrelated_a():\n    return 0\n```\n---\n```python\ndef unrelated_b():\n    return 1\n```\n---\n```python\ndef unrelated_c():\n    return 2\n```\n",
    )
    .unwrap();

    let stdout = run_ok(convloop()
        .args(["sweep", "--chain-lengths", "1..6", "--corpus"])
        .arg(fixtures_dir())
        .args(["--backend", "script", "--script"])
        .arg(&script)
        .args(["--budget", "3", "--timeout-ms", "500", "--parallelism", "2"])
        .arg("--report")
        .arg(&report));

    for length in 1..=6 {
        assert!(
            stdout.contains(&format!("max_chain_length={length}:")),
            "missing line for setting {length} in:\n{stdout}"
        );
    }
    let sweep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let entries = sweep["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 6);
    for (i, entry) in entries.iter().enumerate() {
        assert_eq!(entry["max_chain_length"], (i + 1) as u64);
        assert_eq!(entry["summary"]["n_bugs"], 6);
    }
}

#[test]
fn missing_backend_configuration_exits_2() {
    let output = convloop()
        .args(["run", "--corpus"])
        .arg(fixtures_dir())
        .args(["--backend", "script"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--script"));
}

#[test]
fn invalid_config_value_exits_2() {
    let output = convloop()
        .args(["run", "--corpus"])
        .arg(fixtures_dir())
        .args(["--backend", "script", "--script"])
        .arg(walkthrough_script())
        .args(["--top-p", "1.5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("top_p"));
}

#[test]
fn harness_environment_fault_exits_3() {
    let output = convloop()
        .args(["run", "--corpus"])
        .arg(fixtures_dir())
        .args(["--bug", "sieve", "--backend", "script", "--script"])
        .arg(walkthrough_script())
        .args(["--python-bin", "definitely-not-a-python"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stdout).contains("HARNESS ERROR"));
}

#[test]
fn command_backend_round_trips_through_a_shell_script() {
    // a tiny "model" that always answers with the reference patch
    let out = tempfile::tempdir().unwrap();
    let model = out.path().join("model.sh");
    let fixed = fixtures_dir().join("sieve/fixed.src");
    std::fs::write(
        &model,
        format!("#!/bin/sh\ncat >/dev/null\ncat {}\n", fixed.display()),
    )
    .unwrap();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&model, std::fs::Permissions::from_mode(0o755)).unwrap();
    }

    let stdout = run_ok(convloop()
        .args(["run", "--corpus"])
        .arg(fixtures_dir())
        .args(["--bug", "sieve", "--backend", "cmd", "--cmd"])
        .arg(model.to_str().unwrap())
        .args(["--budget", "2", "--timeout-ms", "600"]));
    assert!(stdout.contains("sieve: plausible tries=1"));
}

#[test]
fn keep_workdirs_is_accepted() {
    // smoke: the flag parses and the run completes
    run_ok(convloop()
        .args(["run", "--corpus"])
        .arg(fixtures_dir())
        .args(["--bug", "sieve", "--backend", "script", "--script"])
        .arg(walkthrough_script())
        .args(["--timeout-ms", "600", "--keep-workdirs"]));
    // retained workspaces live under the system temp root with the bug id
    let mut cleaned = 0;
    for entry in std::fs::read_dir(std::env::temp_dir()).unwrap() {
        let path = entry.unwrap().path();
        let retained = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("sieve-"))
            && path.join("tests.txt").exists();
        if retained {
            std::fs::remove_dir_all(&path).ok();
            cleaned += 1;
        }
    }
    assert!(cleaned > 0, "expected retained sieve-* workspaces");
}

#[test]
fn include_filter_with_absent_id_exits_2() {
    let output = convloop()
        .args(["doctor", "--corpus"])
        .arg(fixtures_dir())
        .args(["--bug", "nonexistent-bug"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("nonexistent-bug"));
}

