//! Shared fixtures for unit tests.

use crate::domain::{
    ActualOutput, BugInstance, Language, TestCase, ValidationOutcome, Value,
};

pub const SIEVE_BUGGY: &str = "def sieve(max):
    primes = []
    for n in range(2, max + 1):
        if any(n % p > 0 for p in primes):
            primes.append(n)
    return primes
";

pub const SIEVE_REFERENCE: &str = "def sieve(max):
    primes = []
    for n in range(2, max + 1):
        # keep n only when no smaller prime divides it
        if all(n % p > 0 for p in primes):
            primes.append(n)
    return primes
";

/// First sample of the worked chain: the if condition negated. Passes
/// sieve(2) but returns [2, 4] for sieve(4).
pub const SIEVE_SAMPLE_1: &str = "def sieve(max):
    primes = []
    for n in range(2, max + 1):
        if not any(n % p > 0 for p in primes):
            primes.append(n)
    return primes
";

/// Second sample: correct condition but the loop range lost its upper bound.
/// Returns [] for sieve(2).
pub const SIEVE_SAMPLE_2: &str = "def sieve(max):
    primes = []
    for n in range(2, max):
        if all(n % p > 0 for p in primes):
            primes.append(n)
    return primes
";

/// Third sample: correct, formatted differently from the reference.
pub const SIEVE_SAMPLE_3: &str = "def sieve(max):
    primes = []
    for n in range(2, max + 1):
        if all(n % p > 0 for p in primes):
            primes.append(n)

    return primes
";

pub fn sieve_testcases() -> Vec<TestCase> {
    [
        ("1", "[]"),
        ("2", "[2]"),
        ("4", "[2, 3]"),
        ("7", "[2, 3, 5, 7]"),
        ("20", "[2, 3, 5, 7, 11, 13, 17, 19]"),
    ]
    .iter()
    .enumerate()
    .map(|(i, (input, expected))| TestCase {
        id: format!("t{}", i + 1),
        inputs: vec![Value::parse(input).unwrap()],
        expected: Value::parse(expected).unwrap(),
    })
    .collect()
}

pub fn sieve_bug() -> BugInstance {
    BugInstance {
        id: "sieve".into(),
        language: Language::Python,
        buggy_source: SIEVE_BUGGY.into(),
        entry_point: "sieve".into(),
        testcases: sieve_testcases(),
        reference_patch: SIEVE_REFERENCE.into(),
    }
}

/// A TestFailure outcome on `sieve(input)` with the given actual/expected
/// literals.
pub fn sieve_failure(input: i64, actual: &str, expected: &str) -> ValidationOutcome {
    ValidationOutcome::TestFailure {
        first_failing: TestCase {
            id: format!("sieve-{input}"),
            inputs: vec![Value::Int(input)],
            expected: Value::parse(expected).unwrap(),
        },
        actual: ActualOutput::Value(Value::parse(actual).unwrap()),
        passed_count: 0,
        total: 5,
    }
}
