//! Helpers shared by the integration suites.

use convloop::{BugInstance, RepairConfig};
use std::path::{Path, PathBuf};

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixtures_dir() -> PathBuf {
    crate_dir().join("fixtures")
}

#[allow(dead_code)]
pub fn walkthrough_script() -> PathBuf {
    crate_dir().join("scripts/sieve_walkthrough.script")
}

#[allow(dead_code)]
pub fn load_fixture(name: &str) -> BugInstance {
    convloop::load_bug(&fixtures_dir().join(name)).expect("fixture loads")
}

/// Default experiment settings with a CI-friendly validation timeout.
#[allow(dead_code)]
pub fn fast_cfg() -> RepairConfig {
    RepairConfig {
        per_test_timeout_ms: 500,
        ..RepairConfig::default()
    }
}

/// Compare against (or, with UPDATE_GOLDEN=1, regenerate) a pinned file.
#[allow(dead_code)]
pub fn assert_golden(name: &str, actual: &str) {
    let path = crate_dir().join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert_eq!(
        actual,
        expected,
        "output differs from golden {} (run with UPDATE_GOLDEN=1 to regenerate)",
        path.display()
    );
}

/// Build a QuixBugs-shaped checkout with the benchmark's forty program names.
#[allow(dead_code)]
pub fn write_quixbugs_checkout(root: &Path) {
    const PROGRAMS: [&str; 40] = [
        "bitcount",
        "breadth_first_search",
        "bucketsort",
        "depth_first_search",
        "detect_cycle",
        "find_first_in_sorted",
        "find_in_sorted",
        "flatten",
        "gcd",
        "get_factors",
        "hanoi",
        "is_valid_parenthesization",
        "kheapsort",
        "knapsack",
        "kth",
        "lcs_length",
        "levenshtein",
        "lis",
        "longest_common_subsequence",
        "max_sublist_sum",
        "mergesort",
        "minimum_spanning_tree",
        "next_palindrome",
        "next_permutation",
        "pascal",
        "possible_change",
        "powerset",
        "quicksort",
        "reverse_linked_list",
        "rpn_eval",
        "shortest_path_length",
        "shortest_path_lengths",
        "shortest_paths",
        "shunting_yard",
        "sieve",
        "sqrt",
        "subsequences",
        "to_base",
        "topological_ordering",
        "wrap",
    ];
    // graph-structured programs ship no json testcases in the real checkout
    const NO_JSON: [&str; 9] = [
        "breadth_first_search",
        "depth_first_search",
        "detect_cycle",
        "minimum_spanning_tree",
        "reverse_linked_list",
        "shortest_path_length",
        "shortest_path_lengths",
        "shortest_paths",
        "topological_ordering",
    ];
    for dir in ["python_programs", "correct_python_programs", "json_testcases"] {
        std::fs::create_dir_all(root.join(dir)).unwrap();
    }
    for name in PROGRAMS {
        let source = format!("def {name}(x):\n    return x\n");
        std::fs::write(root.join("python_programs").join(format!("{name}.py")), &source).unwrap();
        std::fs::write(
            root.join("correct_python_programs").join(format!("{name}.py")),
            &source,
        )
        .unwrap();
        if !NO_JSON.contains(&name) {
            std::fs::write(
                root.join("json_testcases").join(format!("{name}.json")),
                "[[1], 1]\n[[2], 2]\n",
            )
            .unwrap();
        }
    }
    std::fs::write(root.join("python_programs").join("node.py"), "class Node: pass\n").unwrap();
}
