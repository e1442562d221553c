//! Acceptance gate: one `[PASS]`/`[FAIL]` line per criterion, nonzero exit on
//! any failure. Criteria 1 and 13 also drive the built `cis` binary.

use std::path::Path;

use cis_cli::acceptance;
use cis_cli::args::Level;

fn main() {
    let exe = Path::new(env!("CARGO_BIN_EXE_cis"));
    let results = acceptance::run(Level::Full, Some(exe), |r| println!("{}", r.line()));
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
