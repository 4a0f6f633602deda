//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;

use qrom_core::verify::{self, CheckResult, SuiteConfig};

/// Hand-derived values the library checks are compared against a second time here.
fn independent_oracles() -> Vec<(&'static str, bool)> {
    // OWF with S=4, T=2, N=M=1024, per-query costs (1, 2): P = 4 * (2 + 1 + 2)
    let p: f64 = 4.0 * (2.0 + 1.0 + 2.0);
    let owf = 2.0 * (p + 4.0) / 1024.0;
    // Salting, general game: 4 nu + P/K with P = 8 * (2 + 1 + 1), K = 256
    let salt: f64 = 4.0 * 0.1 + 8.0 * 4.0 / 256.0;
    // Two oracles with success 1/4 and 3/4: ratios of consecutive moments
    let m = |k: i32| 0.5 * 0.25f64.powi(k) + 0.5 * 0.75f64.powi(k);
    let eps: Vec<f64> = (1..=3).map(|k| m(k) / m(k - 1)).collect();
    vec![
        ("owf worked example", (owf - 0.046875).abs() < 1e-15),
        ("salting worked example", (salt - 0.525).abs() < 1e-15),
        ("conditional sequence", eps.iter().zip([0.5, 0.625, 0.7]).all(|(a, b)| (a - b).abs() < 1e-15)),
    ]
}

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let results: Vec<CheckResult> = match verify::run_all(&cfg) {
        Ok(r) => r,
        Err(e) => {
            println!("[FAIL] suite construction: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut ok = true;
    for (i, r) in results.iter().enumerate() {
        println!("criterion {:>2} {}", i + 1, r.line());
        ok &= r.passed;
    }
    for (name, passed) in independent_oracles() {
        println!("oracle       [{}] {name}", if passed { "PASS" } else { "FAIL" });
        ok &= passed;
    }
    println!("{} of {} criteria passed", results.iter().filter(|r| r.passed).count(), results.len());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
