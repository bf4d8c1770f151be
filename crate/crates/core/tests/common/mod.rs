//! Shared oracles and property suites. The acceptance test runs the same
//! checks as the per-topic test files, so each check returns a summary
//! line instead of panicking.

#![allow(dead_code)]

pub mod invariants;
pub mod oracles;

use proptest::strategy::Strategy;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `Ok(summary)` or `Err(what went wrong)`.
pub type Check = Result<String, String>;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Proptest runner with a fixed seed and no failure persistence, so every
/// run draws the same cases.
pub fn runner(seed: u64, cases: u32) -> TestRunner {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &key))
}

pub fn run_prop<S>(
    seed: u64,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Check
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    runner(seed, cases)
        .run(&strategy, test)
        .map(|()| format!("{cases} cases"))
        .map_err(|e| e.to_string())
}

/// Panics with the failure text; for use in `#[test]` wrappers.
pub fn expect(check: Check) {
    match check {
        Ok(summary) => eprintln!("{summary}"),
        Err(e) => panic!("{e}"),
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
