//! One pass/fail line per acceptance criterion, all at the default seed.

use powertower::verify::{run_criterion, CRITERIA, DEFAULT_SEED};

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        let report = run_criterion(id, DEFAULT_SEED).expect("criterion ran");
        println!("{}", report.line());
        if !report.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
