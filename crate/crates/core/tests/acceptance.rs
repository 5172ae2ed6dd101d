//! Runs every registered suite at its default settings and prints one line per
//! criterion. Exits nonzero if any criterion fails.
//!
//! `KSGOF_ACCEPTANCE_REPORT=path` also writes the full JSON reports.

use std::process::ExitCode;

use ksgof::power::{run_suite, suite_catalog, SuiteOptions};

fn main() -> ExitCode {
    let opts = SuiteOptions::default();
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut reports = Vec::new();
    let mut run = 0;
    let mut failed = 0;
    for info in suite_catalog() {
        if !filter.is_empty() && !filter.iter().any(|f| info.id.contains(f.as_str())) {
            continue;
        }
        run += 1;
        match run_suite(info.id, &opts) {
            Ok(report) => {
                println!("{}", report.summary_line());
                for note in &report.notes {
                    println!("       note: {note}");
                }
                if !report.passed {
                    failed += 1;
                    println!("       measured: {}", report.measured);
                }
                reports.push(report);
            }
            Err(e) => {
                failed += 1;
                println!("[FAIL] {:>2} {}: error: {e}", info.criterion, info.id);
            }
        }
    }
    if let Ok(path) = std::env::var("KSGOF_ACCEPTANCE_REPORT") {
        let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
        std::fs::write(&path, json).expect("write report");
    }
    println!("acceptance: {run} run, {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
