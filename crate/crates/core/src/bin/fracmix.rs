use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use fracmix::assembly::{MeshParams, Scheme};
use fracmix::eigensolver::SolverParams;
use fracmix::error::{Error, Result};
use fracmix::experiments::output::{csv_string, write_json};
use fracmix::experiments::verify::DEFAULT_SEED;
use fracmix::experiments::{emit, richardson_baseline, run, verify_suite, ExperimentConfig};
use fracmix::fracops::{dini_check, DiniOutcome, FractionalOrder, KernelOrder, ModulusOfContinuity};
use fracmix::geometry::Domain1D;
use fracmix::nonlocal_ops::e_of_r_sweep;

#[derive(Parser)]
#[command(name = "fracmix", version, about = "Mixed Dirichlet/Neumann principal eigenvalues of the fractional Laplacian")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment config (JSON, `"schema": 1`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory that output paths in the config are resolved against.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for the random test functions of `verify`. The solvers are
    /// deterministic and ignore it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one partition: the config's explicit partition, or the first `k` of its sweep.
    Solve,
    /// Run the config's family sweep and write CSV/JSON/plot data.
    Sweep,
    /// Dirichlet baseline at h, h/2, h/4 with Richardson extrapolation.
    Baseline {
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, default_value_t = 0.04)]
        h: f64,
        #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [-1.0, 1.0], allow_negative_numbers = true)]
        omega: Vec<f64>,
        #[arg(long, default_value = "P1", value_parser = parse_scheme)]
        scheme: Scheme,
    },
    /// Identity suite: Gauss and parts residuals, brute-force energy, constants.
    Verify,
    /// Scaling of E(r), the singular-weight integral over a tangent ball.
    Efr {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, num_args = 1.., default_values_t = [0.6, 0.7])]
        s: Vec<f64>,
        /// Radii 2^-k for k in [KMIN, KMAX].
        #[arg(long, num_args = 2, value_names = ["KMIN", "KMAX"], default_values_t = [3, 8])]
        k: Vec<i32>,
    },
    /// Dini-type integrability of a boundary modulus against a kernel order.
    Dini {
        /// `power:BETA`, `log_spine`, or a JSON value such as `{"table": [[t, w], ...]}`.
        #[arg(long)]
        modulus: String,
        /// `power:ALPHA` or a JSON table.
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    match s.to_ascii_uppercase().as_str() {
        "P0" => Ok(Scheme::P0),
        "P1" => Ok(Scheme::P1),
        _ => Err(format!("unknown scheme `{s}` (expected P0 or P1)")),
    }
}

fn parse_power_or_json<T: serde::de::DeserializeOwned>(text: &str, power: fn(f64) -> T) -> Result<T> {
    if let Some(v) = text.strip_prefix("power:") {
        let x: f64 = v.parse().map_err(|_| Error::Config(format!("bad exponent in `{text}`")))?;
        return Ok(power(x));
    }
    let json = if text.trim_start().starts_with(['{', '"']) { text.to_string() } else { format!("\"{text}\"") };
    serde_json::from_str(&json).map_err(|e| Error::Config(format!("`{text}`: {e}")))
}

/// Errors in the inputs exit with 1; numerical failures with 2.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Io { .. } | Error::BadParameters(_) | Error::InvalidParameter(_) | Error::IncompatibleScheme(_) => 1,
        _ => 2,
    }
}

fn load(global: &Global) -> Result<ExperimentConfig> {
    let path = global
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("this subcommand needs --config <path>".into()))?;
    ExperimentConfig::load(path)
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn cmd_solve(global: &Global) -> Result<u8> {
    let mut config = load(global)?;
    if let Some(sweep) = config.sweep.as_mut() {
        sweep.ks.truncate(1);
    }
    let out = run(&config, global.jobs)?;
    let r = &out.records[0];
    println!("{}", serde_json::to_string_pretty(r).map_err(|e| Error::Config(e.to_string()))?);
    report_written(&emit(&out.records, &config, &global.out)?);
    Ok(if r.is_ok() { 0 } else { 2 })
}

fn cmd_sweep(global: &Global) -> Result<u8> {
    let config = load(global)?;
    let out = run(&config, global.jobs)?;
    print!("{}", csv_string(&out.records));
    report_written(&emit(&out.records, &config, &global.out)?);
    for r in out.records.iter().filter(|r| !r.is_ok()) {
        eprintln!("k={}: {}", r.k, r.error.as_deref().unwrap_or_default());
    }
    Ok(if out.failures() == 0 { 0 } else { 2 })
}

fn cmd_baseline(global: &Global, s: f64, h: f64, omega: &[f64], scheme: Scheme) -> Result<u8> {
    let (order, omega, mesh, solver) = match &global.config {
        Some(_) => {
            let c = load(global)?;
            (c.fractional_order()?, c.domain()?, c.mesh_for(None), c.solver)
        }
        None => (
            FractionalOrder::new(1, s)?,
            Domain1D::new(omega[0], omega[1])?,
            MeshParams { h, collar: 8.0, scheme, auto_collar: true },
            SolverParams::default(),
        ),
    };
    let hs = [mesh.h, mesh.h / 2.0, mesh.h / 4.0];
    let rich = richardson_baseline(omega, &order, &mesh, &solver, &hs)?;
    for (h, l) in rich.hs.iter().zip(&rich.lambdas) {
        println!("h={h:<10} lambda1={l:.10}");
    }
    println!("observed order {:.3}, extrapolated lambda1 = {:.8}", rich.order, rich.extrapolated);
    if global.config.is_some() {
        let path = global.out.join("baseline.json");
        write_json(&path, &rich)?;
        report_written(&[path]);
    }
    Ok(0)
}

fn cmd_verify(global: &Global) -> Result<u8> {
    let report = verify_suite(global.seed)?;
    for c in &report.checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        println!("{mark}  {:<45} {:.3e} (<= {:.0e})", c.name, c.value, c.threshold);
    }
    if global.config.is_some() || global.out != Path::new(".") {
        let path = global.out.join("verify.json");
        write_json(&path, &report)?;
        report_written(&[path]);
    }
    Ok(if report.passed() { 0 } else { 2 })
}

fn cmd_efr(global: &Global, dim: usize, ss: &[f64], k: &[i32]) -> Result<u8> {
    let radii: Vec<f64> = (k[0]..=k[1]).map(|i| 2f64.powi(-i)).collect();
    let mut rows = Vec::new();
    let mut code = 0;
    for &s in ss {
        match e_of_r_sweep(s, dim, &radii, 1e-10) {
            Ok(sw) => {
                let expected = dim as f64 - 2.0 * s;
                println!(
                    "N={dim} s={s}: slope {:.5} (N-2s = {expected}), rel. error {:.2e}, prefactor spread {:.2e}",
                    sw.slope,
                    (sw.slope - expected).abs() / expected,
                    sw.prefactor_spread
                );
                rows.push(json!({ "s": s, "sweep": sw }));
            }
            Err(e @ Error::DivergentIntegral(_)) => {
                println!("N={dim} s={s}: {e}");
                rows.push(json!({ "s": s, "error": e.tag() }));
            }
            Err(e) => {
                eprintln!("N={dim} s={s}: {e}");
                code = 2;
            }
        }
    }
    if global.out != Path::new(".") {
        let path = global.out.join("efr.json");
        write_json(&path, &json!({ "dimension": dim, "radii": radii, "rows": rows }))?;
        report_written(&[path]);
    }
    Ok(code)
}

fn cmd_dini(modulus: &str, kernel: &str, tol: f64) -> Result<u8> {
    let omega0 = parse_power_or_json(modulus, ModulusOfContinuity::Power)?;
    let psi = parse_power_or_json(kernel, KernelOrder::Power)?;
    match dini_check(&omega0, &psi, tol) {
        Ok(DiniOutcome::Finite(v)) => println!("finite: {v:.12}"),
        Ok(DiniOutcome::Divergent) => println!("divergent"),
        Err(e @ Error::Inconclusive(_)) => println!("inconclusive: {e}"),
        Err(e) => return Err(e),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let outcome = match &cli.command {
        Command::Solve => cmd_solve(g),
        Command::Sweep => cmd_sweep(g),
        Command::Baseline { s, h, omega, scheme } => cmd_baseline(g, *s, *h, omega, *scheme),
        Command::Verify => cmd_verify(g),
        Command::Efr { dim, s, k } => cmd_efr(g, *dim, s, k),
        Command::Dini { modulus, kernel, tol } => cmd_dini(modulus, kernel, *tol),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.tag());
            ExitCode::from(exit_code(&e))
        }
    }
}
