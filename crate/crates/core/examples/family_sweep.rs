//! Config-driven sweep: a Neumann interval traveling to infinity. The gap
//! to the Dirichlet baseline closes as the interval leaves.
//!
//! `cargo run --release --example family_sweep [config.json] [out_dir]`

use std::path::PathBuf;

use fracmix::experiments::{emit, fit_rate, run, ExperimentConfig, Field};

fn main() -> fracmix::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/traveling_neumann_s03.json"));
    let out_dir = args.next().map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let config = ExperimentConfig::load(&config)?;
    let out = run(&config, 0)?;
    println!("{:>3} {:>8} {:>12} {:>12} {:>10}", "k", "param", "lambda1", "gap", "ms");
    for r in &out.records {
        match &r.error {
            None => println!("{:>3} {:>8} {:>12.8} {:>12.3e} {:>10.1}", r.k, r.param, r.lambda1, r.gap, r.ms),
            Some(e) => println!("{:>3} {:>8} failed: {e}", r.k, r.param),
        }
    }
    if let Ok(fit) = fit_rate(&out.records, Field::Param, Field::Gap) {
        println!("gap ~ param^{:.3} (r2 {:.4})", fit.slope, fit.r2);
    }
    for path in emit(&out.records, &config, &out_dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
