//! Runs the built-in verification suite and prints one line per check.

use skewbm::verify::{default_suite, run_checks};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_240_601);
    let report = run_checks(seed, &default_suite(seed)).expect("default suite is well-formed");
    for c in &report.checks {
        println!(
            "{:<5} {:<45} stat={:<12.6e} thr={:<12.6e} p={:?} {}ms {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.statistic.unwrap_or(f64::NAN),
            c.threshold.unwrap_or(f64::NAN),
            c.p_value,
            c.millis,
            c.diagnostic.as_deref().unwrap_or("")
        );
    }
    println!("overall_pass = {}", report.overall_pass);
}
