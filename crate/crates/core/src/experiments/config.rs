use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::{MeshParams, Scheme};
use crate::eigensolver::SolverParams;
use crate::error::{Error, Result};
use crate::fracops::FractionalOrder;
use crate::geometry::{endpoint, Domain1D, ExteriorPartition, ExteriorSet, PartitionFamily};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderConfig {
    #[serde(default = "one")]
    pub dimension: usize,
    pub s: f64,
}

fn one() -> usize {
    1
}

/// A sweep over `k` for one partition family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub family: PartitionFamily,
    pub ks: Vec<u32>,
    /// Per-record mesh size: `min(h, parameter / resolve)`. Lets shrinking
    /// families keep their features resolved.
    #[serde(default)]
    pub resolve: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default)]
    pub dirichlet: ExteriorSet,
    #[serde(default)]
    pub neumann: ExteriorSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub h: f64,
    #[serde(rename = "L", default = "default_collar")]
    pub collar: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "yes")]
    pub auto_collar: bool,
}

fn default_collar() -> f64 {
    8.0
}

fn default_scheme() -> Scheme {
    Scheme::P1
}

fn yes() -> bool {
    true
}

impl DiscretizationConfig {
    pub fn mesh(&self) -> MeshParams {
        MeshParams {
            h: self.h,
            collar: self.collar,
            scheme: self.scheme,
            auto_collar: self.auto_collar,
        }
    }
}

/// Output file names, resolved against the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub plotdata: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyFlags {
    #[serde(default = "yes")]
    pub gauss: bool,
    #[serde(default)]
    pub farfield: bool,
    #[serde(default = "yes")]
    pub condition_c: bool,
    #[serde(default = "yes")]
    pub measures: bool,
}

impl Default for VerifyFlags {
    fn default() -> Self {
        VerifyFlags {
            gauss: true,
            farfield: false,
            condition_c: true,
            measures: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub order: OrderConfig,
    #[serde(with = "endpoint")]
    pub omega: (f64, f64),
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub partition: Option<PartitionConfig>,
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub verify: VerifyFlags,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn domain(&self) -> Result<Domain1D> {
        Domain1D::new(self.omega.0, self.omega.1)
    }

    pub fn fractional_order(&self) -> Result<FractionalOrder> {
        FractionalOrder::new(self.order.dimension, self.order.s)
    }

    /// Mesh parameters for a record whose family parameter is `param`.
    pub fn mesh_for(&self, param: Option<f64>) -> MeshParams {
        let mut mesh = self.discretization.mesh();
        if let (Some(p), Some(r)) = (param, self.sweep.as_ref().and_then(|s| s.resolve)) {
            mesh.h = mesh.h.min(p / r);
        }
        mesh
    }

    pub fn explicit_partition(&self) -> Result<Option<ExteriorPartition>> {
        match &self.partition {
            None => Ok(None),
            Some(p) => Ok(Some(ExteriorPartition::new(self.domain()?, p.dirichlet.clone(), p.neumann.clone())?)),
        }
    }

    /// Check every parameter combination before anything is solved.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("unsupported schema {} (expected {SCHEMA_VERSION})", self.schema));
        }
        let order = self.fractional_order()?;
        order.require_1d()?;
        let omega = self.domain()?;
        let d = &self.discretization;
        if !(d.h > 0.0 && d.h.is_finite() && d.collar > 0.0 && d.collar.is_finite()) {
            return bad("discretization.h and L must be positive and finite".into());
        }
        if d.scheme == Scheme::P0 && order.s >= 0.5 {
            return Err(Error::IncompatibleScheme(order.s));
        }
        if !(self.solver.tol > 0.0 && self.solver.max_iter > 0) {
            return bad("solver.tol and solver.max_iter must be positive".into());
        }
        match (&self.sweep, &self.partition) {
            (None, None) => return bad("one of `sweep` or `partition` is required".into()),
            (Some(_), Some(_)) => return bad("`sweep` and `partition` are mutually exclusive".into()),
            _ => {}
        }
        self.explicit_partition()?;
        if let Some(sweep) = &self.sweep {
            if sweep.ks.is_empty() {
                return bad("sweep.ks is empty".into());
            }
            if let Some(r) = sweep.resolve {
                if !(r > 0.0 && r.is_finite()) {
                    return bad("sweep.resolve must be positive".into());
                }
            }
            for &k in &sweep.ks {
                sweep.family.generate(&omega, k)?;
            }
        }
        Ok(())
    }
}
