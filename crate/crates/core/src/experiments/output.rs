use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fracops::normalization_constant;

use super::config::ExperimentConfig;
use super::runner::{fit_rate, ExperimentRecord, Field};

pub const CSV_HEADER: &str = "k,param,lambda1,baseline,gap,measN_R,measD_R,condC,sep,gauss_res,iters,h,L,ms";

/// Curves written to the plot data file, each against the family parameter.
const PLOT_CURVES: [Field; 4] = [Field::Lambda1, Field::Gap, Field::CondC, Field::MeasN];

fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn csv_string(records: &[ExperimentRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let cells: Vec<String> = Field::ALL
            .iter()
            .map(|&f| match f {
                Field::K => r.k.to_string(),
                Field::Iters => r.iters.to_string(),
                Field::Ms => format!("{:.3}", r.ms),
                other => num(r.field(other)),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn abscissa(r: &ExperimentRecord) -> f64 {
    if r.param.is_finite() { r.param } else { r.k as f64 }
}

/// Whitespace-separated columns, one block per curve, blocks separated by
/// two blank lines (gnuplot `index` layout).
pub fn plotdata_string(records: &[ExperimentRecord]) -> String {
    let mut out = String::new();
    for (i, curve) in PLOT_CURVES.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# curve: {}\n# param {}", curve.name(), curve.name());
        for r in records.iter().filter(|r| r.is_ok()) {
            let _ = writeln!(out, "{} {}", num(abscissa(r)), num(r.field(*curve)));
        }
    }
    out
}

pub fn environment_stamp() -> Value {
    json!({
        "crate": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "os": std::env::consts::OS,
        "arch": std::env::consts::ARCH,
        "threads": rayon::current_num_threads(),
    })
}

fn fit_value(records: &[ExperimentRecord], x: Field, y: Field) -> Value {
    match fit_rate(records, x, y) {
        Ok(f) => serde_json::to_value(f).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.tag() }),
    }
}

pub fn summary_json(records: &[ExperimentRecord], config: &ExperimentConfig) -> Value {
    let norm = normalization_constant(config.order.dimension, config.order.s, 1e-10)
        .map(|n| json!({ "value": n.value, "gamma_form": n.gamma_form, "ratio": n.ratio }))
        .unwrap_or(Value::Null);
    let failures: Vec<Value> = records
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| json!({ "k": r.k, "error": e })))
        .collect();
    json!({
        "config": config,
        "summary": {
            "count": records.len(),
            "ok": records.len() - failures.len(),
            "failures": failures,
        },
        "fits": {
            "gap_vs_param": fit_value(records, Field::Param, Field::Gap),
            "lambda1_vs_param": fit_value(records, Field::Param, Field::Lambda1),
            "condC_vs_param": fit_value(records, Field::Param, Field::CondC),
        },
        "normalization": norm,
        "records": records,
        "environment": environment_stamp(),
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    write_file(path, &(text + "\n"))
}

/// Write the configured CSV, JSON and plot data files under `out_dir` and
/// return the paths written.
pub fn emit(records: &[ExperimentRecord], config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let o = &config.outputs;
    if let Some(p) = &o.csv {
        let path = out_dir.join(p);
        write_file(&path, &csv_string(records))?;
        written.push(path);
    }
    if let Some(p) = &o.json {
        let path = out_dir.join(p);
        write_json(&path, &summary_json(records, config))?;
        written.push(path);
    }
    if let Some(p) = &o.plotdata {
        let path = out_dir.join(p);
        write_file(&path, &plotdata_string(records))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{
                "schema": 1, "order": {"s": 0.5}, "omega": [-1, 1],
                "sweep": {"family": {"kind": "traveling_ball", "scale": 1, "ratio": 2}, "ks": [0]},
                "discretization": {"h": 0.1},
                "outputs": {"csv": "a/run.csv", "json": "a/run.json", "plotdata": "a/run.dat"}
            }"#,
        )
        .unwrap()
    }

    fn record(k: u32) -> ExperimentRecord {
        ExperimentRecord {
            k,
            param: 2f64.powi(k as i32),
            lambda1: 1.0 - 0.5f64.powi(k as i32 + 1),
            baseline: 1.0,
            gap: 0.5f64.powi(k as i32 + 1),
            meas_n_r: 0.5,
            meas_d_r: 1.5,
            meas_n_r8: 1.0,
            meas_d_r8: 15.0,
            cond_c: f64::INFINITY,
            sep: 0.0,
            gauss_res: 1e-16,
            iters: 4,
            h: 0.1,
            collar: 8.0,
            ms: 12.5,
            farfield_slope: None,
            error: None,
        }
    }

    #[test]
    fn empty_run_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit(&[], &config(), dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        assert_eq!(std::fs::read_to_string(&paths[0]).unwrap(), format!("{CSV_HEADER}\n"));
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&paths[1]).unwrap()).unwrap();
        assert_eq!(v["summary"]["count"], 0);
        assert_eq!(v["fits"]["gap_vs_param"]["error"], "degenerate_data");
        assert!((v["normalization"]["ratio"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn seven_rows_in_order_with_fits() {
        let records: Vec<_> = (0..7).map(record).collect();
        let csv = csv_string(&records);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 8);
        assert!(lines[1].starts_with("0,1,0.5,1,0.5,"));
        assert!(lines[7].starts_with("6,64,"));
        assert!(lines[3].contains(",inf,0,1e-16,4,0.1,8,12.500"));
        let v = summary_json(&records, &config());
        assert!((v["fits"]["gap_vs_param"]["slope"].as_f64().unwrap() + 1.0).abs() < 1e-12);
        let plot = plotdata_string(&records);
        assert_eq!(plot.matches("# curve:").count(), 4);
        assert!(plot.contains("64 0.9921875\n"));
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("a");
        std::fs::write(&blocker, "not a directory").unwrap();
        match emit(&[record(0)], &config(), dir.path()) {
            Err(Error::Io { path, .. }) => assert!(path.starts_with(&blocker)),
            other => panic!("expected an io error, got {other:?}"),
        }
    }
}
