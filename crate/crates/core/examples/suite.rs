//! Runs the verification suite at its default parameter point and prints a table.

use weaktraj::verify::{failures, run_suite, SuiteConfig};

fn main() -> weaktraj::Result<()> {
    let start = std::time::Instant::now();
    let reports = run_suite(&SuiteConfig::default())?;
    for r in &reports {
        println!(
            "{:<26} {:<36} {:<22} {:>12.3e} / {:<8.1e} n = {}",
            r.family,
            r.name,
            r.status.to_string(),
            r.max_error,
            r.tolerance,
            r.probe_count
        );
    }
    println!(
        "{} checks, {} failed, {:.1} s",
        reports.len(),
        failures(&reports).len(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
