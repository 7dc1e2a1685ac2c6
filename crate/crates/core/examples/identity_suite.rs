//! The verification suite: Gauss and integration-by-parts residuals on
//! random functions, the brute-force energy oracle, and two constants.

use fracmix::experiments::verify::{verify_suite, DEFAULT_SEED};

fn main() -> fracmix::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    let report = verify_suite(seed)?;
    for c in &report.checks {
        println!("{} {:<45} {:.3e} <= {:.0e}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    Ok(())
}
