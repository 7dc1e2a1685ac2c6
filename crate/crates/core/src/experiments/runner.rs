use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{MeshParams, Scheme};
use crate::eigensolver::{solve_mixed, MixedSolution, SolverParams};
use crate::error::{Error, Result};
use crate::fracops::FractionalOrder;
use crate::geometry::{measure_in_ball, ConditionC, Domain1D, ExteriorPartition};
use crate::nonlocal_ops::{farfield_rate, DiscreteFunction};
use crate::quadrature::linear_fit;

use super::config::ExperimentConfig;

/// Points at which far-field deviations are sampled: three per decade on
/// `[10, 1000]`, in units of `|Ω|/2`.
pub fn farfield_points(omega: &Domain1D) -> Vec<f64> {
    let unit = 0.5 * omega.length();
    (0..7).map(|i| omega.center() + unit * 10f64.powf(1.0 + i as f64 / 3.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub k: u32,
    /// Family parameter `p_k`; `NaN` for an explicit partition.
    pub param: f64,
    pub lambda1: f64,
    pub baseline: f64,
    pub gap: f64,
    /// `|N ∩ B_R|`, `|D ∩ B_R|` at `R = 2|Ω|`.
    pub meas_n_r: f64,
    pub meas_d_r: f64,
    /// Same at `R = 8|Ω|`.
    pub meas_n_r8: f64,
    pub meas_d_r8: f64,
    /// `∫_D ∫_Ω k`; infinite when divergent.
    pub cond_c: f64,
    pub sep: f64,
    pub gauss_res: f64,
    pub iters: usize,
    pub h: f64,
    #[serde(rename = "L")]
    pub collar: f64,
    pub ms: f64,
    pub farfield_slope: Option<f64>,
    /// Error tag when the record failed; numeric fields are then `NaN`.
    pub error: Option<String>,
}

impl ExperimentRecord {
    fn failed(k: u32, param: f64, baseline: f64, mesh: &MeshParams, ms: f64, err: &Error) -> Self {
        ExperimentRecord {
            k,
            param,
            lambda1: f64::NAN,
            baseline,
            gap: f64::NAN,
            meas_n_r: f64::NAN,
            meas_d_r: f64::NAN,
            meas_n_r8: f64::NAN,
            meas_d_r8: f64::NAN,
            cond_c: f64::NAN,
            sep: f64::NAN,
            gauss_res: f64::NAN,
            iters: 0,
            h: mesh.h,
            collar: mesh.collar,
            ms,
            farfield_slope: None,
            error: Some(format!("{}: {err}", err.tag())),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn field(&self, field: Field) -> f64 {
        match field {
            Field::K => self.k as f64,
            Field::Param => self.param,
            Field::Lambda1 => self.lambda1,
            Field::Baseline => self.baseline,
            Field::Gap => self.gap,
            Field::MeasN => self.meas_n_r,
            Field::MeasD => self.meas_d_r,
            Field::CondC => self.cond_c,
            Field::Sep => self.sep,
            Field::GaussRes => self.gauss_res,
            Field::Iters => self.iters as f64,
            Field::H => self.h,
            Field::L => self.collar,
            Field::Ms => self.ms,
        }
    }
}

/// Record columns, named as in the CSV header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    K,
    Param,
    Lambda1,
    Baseline,
    Gap,
    MeasN,
    MeasD,
    CondC,
    Sep,
    GaussRes,
    Iters,
    H,
    L,
    Ms,
}

impl Field {
    pub const ALL: [Field; 14] = [
        Field::K,
        Field::Param,
        Field::Lambda1,
        Field::Baseline,
        Field::Gap,
        Field::MeasN,
        Field::MeasD,
        Field::CondC,
        Field::Sep,
        Field::GaussRes,
        Field::Iters,
        Field::H,
        Field::L,
        Field::Ms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::K => "k",
            Field::Param => "param",
            Field::Lambda1 => "lambda1",
            Field::Baseline => "baseline",
            Field::Gap => "gap",
            Field::MeasN => "measN_R",
            Field::MeasD => "measD_R",
            Field::CondC => "condC",
            Field::Sep => "sep",
            Field::GaussRes => "gauss_res",
            Field::Iters => "iters",
            Field::H => "h",
            Field::L => "L",
            Field::Ms => "ms",
        }
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Field::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown record field `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

/// Least squares on `(ln x, ln y)`; non-positive or non-finite pairs are
/// skipped, and fewer than four usable pairs is degenerate.
pub fn fit_power(x: &[f64], y: &[f64]) -> Result<Fit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    if lx.len() < 4 {
        return Err(Error::DegenerateData(format!("{} usable points, need 4", lx.len())));
    }
    let (slope, intercept, r2) =
        linear_fit(&lx, &ly).ok_or_else(|| Error::DegenerateData("all x values coincide".into()))?;
    Ok(Fit { slope, intercept, r2, n: lx.len() })
}

pub fn fit_rate(records: &[ExperimentRecord], x: Field, y: Field) -> Result<Fit> {
    let ok: Vec<&ExperimentRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let xs: Vec<f64> = ok.iter().map(|r| r.field(x)).collect();
    let ys: Vec<f64> = ok.iter().map(|r| r.field(y)).collect();
    fit_power(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct BaselineKey {
    omega: (u64, u64),
    s: u64,
    h: u64,
    scheme: Scheme,
}

/// Dirichlet baselines `λ₁(Ωᶜ)` per `(Ω, s, h, scheme)`. The collar is not
/// part of the key: with no Neumann set nothing outside `Ω` is meshed.
#[derive(Debug, Default)]
pub struct BaselineCache {
    map: Mutex<HashMap<BaselineKey, f64>>,
}

impl BaselineCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, omega: Domain1D, order: &FractionalOrder, mesh: &MeshParams, solver: &SolverParams) -> Result<f64> {
        let key = BaselineKey {
            omega: (omega.a.to_bits(), omega.b.to_bits()),
            s: order.s.to_bits(),
            h: mesh.h.to_bits(),
            scheme: mesh.scheme,
        };
        if let Some(&v) = self.map.lock().expect("baseline cache poisoned").get(&key) {
            return Ok(v);
        }
        let v = baseline(omega, order, mesh, solver)?;
        self.map.lock().expect("baseline cache poisoned").insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("baseline cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A fresh all-Dirichlet solve.
pub fn baseline(omega: Domain1D, order: &FractionalOrder, mesh: &MeshParams, solver: &SolverParams) -> Result<f64> {
    Ok(solve_mixed(&ExteriorPartition::full_dirichlet(omega), order, mesh, solver)?.result.lambda1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Richardson {
    pub hs: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Observed order from the last three levels.
    pub order: f64,
    pub extrapolated: f64,
}

/// Richardson extrapolation of the Dirichlet baseline over a sequence of
/// mesh sizes, each half the previous one.
pub fn richardson_baseline(
    omega: Domain1D,
    order: &FractionalOrder,
    mesh: &MeshParams,
    solver: &SolverParams,
    hs: &[f64],
) -> Result<Richardson> {
    if hs.len() < 3 {
        return Err(Error::InvalidParameter("Richardson extrapolation needs three mesh sizes".into()));
    }
    let lambdas = hs
        .iter()
        .map(|&h| baseline(omega, order, &MeshParams { h, ..*mesh }, solver))
        .collect::<Result<Vec<_>>>()?;
    let n = hs.len();
    let (l0, l1, l2) = (lambdas[n - 3], lambdas[n - 2], lambdas[n - 1]);
    let refine = hs[n - 2] / hs[n - 1];
    let ratio = (l0 - l1) / (l1 - l2);
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(Error::DegenerateData(format!("non-monotone refinement sequence {lambdas:?}")));
    }
    let p = ratio.ln() / refine.ln();
    let extrapolated = l2 - (l1 - l2) / (refine.powf(p) - 1.0);
    Ok(Richardson { hs: hs.to_vec(), lambdas, order: p, extrapolated })
}

fn solve_record(
    config: &ExperimentConfig,
    order: &FractionalOrder,
    k: u32,
    param: f64,
    partition: &ExteriorPartition,
    mesh: &MeshParams,
    baseline: f64,
) -> Result<ExperimentRecord> {
    let MixedSolution { discretization, system, result, diagnostics } =
        solve_mixed(partition, order, mesh, &config.solver)?;
    let flags = config.verify;
    let omega = partition.omega;
    let big = 8.0 * omega.length();
    let farfield_slope = if flags.farfield && !partition.neumann.is_empty() {
        let u = DiscreteFunction::new(&discretization, &system.dofs, result.full_vector())?;
        farfield_rate(&u, order, &farfield_points(&omega)).ok().map(|f| f.slope)
    } else {
        None
    };
    let nan_unless = |on: bool, v: f64| if on { v } else { f64::NAN };
    Ok(ExperimentRecord {
        k,
        param,
        lambda1: result.lambda1,
        baseline,
        gap: baseline - result.lambda1,
        meas_n_r: nan_unless(flags.measures, diagnostics.measure_neumann),
        meas_d_r: nan_unless(flags.measures, diagnostics.measure_dirichlet),
        meas_n_r8: nan_unless(flags.measures, measure_in_ball(&partition.neumann, big)),
        meas_d_r8: nan_unless(flags.measures, measure_in_ball(&partition.dirichlet, big)),
        cond_c: nan_unless(
            flags.condition_c,
            match diagnostics.condition_c {
                ConditionC::Finite(v) => v,
                ConditionC::Divergent => f64::INFINITY,
            },
        ),
        sep: diagnostics.separation.unwrap_or(f64::INFINITY),
        gauss_res: nan_unless(flags.gauss, diagnostics.gauss_residual),
        iters: result.iterations,
        h: discretization.h,
        collar: discretization.collar,
        ms: 0.0,
        farfield_slope,
        error: None,
    })
}

/// Everything a sweep produced; records are ordered by `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub records: Vec<ExperimentRecord>,
    pub baselines_solved: usize,
}

impl RunOutput {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }
}

/// Solve every record of `config` on a pool of `jobs` workers (0 means the
/// rayon default). Per-record failures are kept as tagged rows.
pub fn run(config: &ExperimentConfig, jobs: usize) -> Result<RunOutput> {
    config.validate()?;
    let order = config.fractional_order()?;
    let omega = config.domain()?;
    let cache = BaselineCache::new();
    let tasks: Vec<(u32, f64)> = match &config.sweep {
        Some(sweep) => sweep.ks.iter().map(|&k| (k, sweep.family.parameter(k))).collect(),
        None => vec![(0, f64::NAN)],
    };
    // Warm the cache up front so each baseline is solved exactly once; a
    // failed baseline is retried (and reported) by the records needing it.
    for &(_, param) in &tasks {
        let mesh = config.mesh_for(config.sweep.as_ref().map(|_| param));
        let _ = cache.get(omega, &order, &mesh, &config.solver);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let mut records: Vec<ExperimentRecord> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(k, param)| {
                let start = Instant::now();
                let mesh = config.mesh_for(config.sweep.as_ref().map(|_| param));
                let outcome = (|| {
                    let partition = match &config.sweep {
                        Some(sweep) => sweep.family.generate(&omega, k)?,
                        None => config.explicit_partition()?.expect("validated"),
                    };
                    let base = cache.get(omega, &order, &mesh, &config.solver)?;
                    solve_record(config, &order, k, param, &partition, &mesh, base)
                })();
                let ms = start.elapsed().as_secs_f64() * 1e3;
                match outcome {
                    Ok(mut r) => {
                        r.ms = ms;
                        r
                    }
                    Err(e) => ExperimentRecord::failed(k, param, f64::NAN, &mesh, ms, &e),
                }
            })
            .collect()
    });
    records.sort_by_key(|r| r.k);
    Ok(RunOutput { records, baselines_solved: cache.len() })
}
