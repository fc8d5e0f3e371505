//! Runs every acceptance criterion at full scale and prints one line each.
//! Built without the libtest harness so the lines are always shown.

use qlekit::acceptance::{run_all, Scale};
use std::process::ExitCode;

fn main() -> ExitCode {
    let results = run_all(Scale::Full);
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("acceptance: {} passed, {} failed", results.len() - failed.len(), failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
