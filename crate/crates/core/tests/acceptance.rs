//! Runs every verification criterion and prints one pass/fail line each.

use etk_core::acceptance::{Criterion, CriterionReport};

#[test]
fn acceptance_criteria() {
    let reports: Vec<CriterionReport> = Criterion::ALL.iter().map(|c| c.run()).collect();
    println!();
    for report in &reports {
        println!("{}", report.summary());
    }
    println!();
    for report in &reports {
        print!("{report}");
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.criterion.key())
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
