//! The twelve acceptance criteria at their pinned tolerances. Runs without
//! the libtest harness so the PASS/FAIL lines always reach the output.

use std::process::ExitCode;

use toric_bergman::acceptance::{run_all, KNOWN_FAILURES};

fn main() -> ExitCode {
    let outcomes = run_all();
    let mut unexpected = Vec::new();
    for o in &outcomes {
        println!("{}", o.line());
        // Known shortfalls must still be computed without error.
        if o.detail.starts_with("error:") || (!o.pass && !KNOWN_FAILURES.contains(&o.number)) {
            unexpected.push(o.number);
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} PASS; documented failures: {KNOWN_FAILURES:?}", outcomes.len());
    if outcomes.len() != 12 || !unexpected.is_empty() {
        println!("acceptance: unexpected failures {unexpected:?}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
