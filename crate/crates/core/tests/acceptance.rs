//! The acceptance gate: runs the full verification battery and prints one
//! pass/fail line per criterion (visible with `--nocapture`, or via the
//! `verify` subcommand of the CLI). Wall-clock budgets are enforced only in
//! optimized builds; debug builds still check every numerical property.

use rankcapra_core::checks::run_all;
use rankcapra_core::Seed;

#[test]
fn acceptance() {
    let reports = run_all(Seed(0));
    let total: u128 = reports.iter().map(|r| r.millis).sum();
    let mut failed = Vec::new();
    for r in &reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status} {:<34} {:>7} ms  {}", r.name, r.millis, r.detail);
        if !r.passed {
            failed.push(r.name);
        }
    }
    println!("total: {total} ms across {} suites", reports.len());
    assert!(failed.is_empty(), "failed suites: {failed:?}");

    #[cfg(not(debug_assertions))]
    {
        for r in &reports {
            assert!(
                r.millis <= r.budget_millis,
                "suite '{}' took {} ms, budget {} ms",
                r.name,
                r.millis,
                r.budget_millis
            );
        }
        assert!(
            total <= 300_000,
            "battery took {total} ms, budget 300000 ms"
        );
    }
}
