use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assembly::{assemble, build_mesh, MeshParams, Scheme};
use crate::error::Result;
use crate::fracops::{indicator_seminorm_identity, normalization_constant, FractionalOrder};
use crate::geometry::{Domain1D, ExteriorPartition, ExteriorSet, Label};
use crate::nonlocal_ops::{brute_force_energy, gauss_residual, parts_residual, DiscreteFunction, BRUTE_FORCE_MAX_ELEMENTS};

pub const DEFAULT_SEED: u64 = 20_240_611;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const BRUTE_FORCE_TOL: f64 = 1e-10;
pub const RANDOM_FUNCTIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, passed: value <= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Largest Gauss and integration-by-parts residuals over `count` random
/// discrete functions on a mesh with no Dirichlet set.
pub fn identity_residuals(order: &FractionalOrder, mesh: &MeshParams, count: usize, seed: u64) -> Result<(f64, f64)> {
    let omega = Domain1D::new(-1.0, 1.0)?;
    let disc = build_mesh(&ExteriorPartition::full_neumann(omega), order, mesh)?;
    let system = assemble(&disc, order)?;
    let n = system.dofs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut gauss, mut parts) = (0f64, 0f64);
    for _ in 0..count {
        let u = random_vector(&mut rng, n);
        let v = random_vector(&mut rng, n);
        gauss = gauss.max(gauss_residual(&system, &u));
        parts = parts.max(parts_residual(&system, &u, &v));
    }
    Ok((gauss, parts))
}

/// Relative gap between the assembled quadratic form and the independent
/// double integral, on a mesh small enough for the brute-force oracle.
pub fn brute_force_gap(order: &FractionalOrder, scheme: Scheme, seed: u64) -> Result<f64> {
    let omega = Domain1D::new(0.0, 1.0)?;
    let neumann = ExteriorSet::new(vec![(-1.5, -1.0), (1.0, 2.0)])?;
    let partition = ExteriorPartition::with_designated(omega, neumann, Label::Neumann)?;
    let mesh = MeshParams { h: 0.125, collar: 4.0, scheme, auto_collar: false };
    let disc = build_mesh(&partition, order, &mesh)?;
    debug_assert!(disc.elements.len() <= BRUTE_FORCE_MAX_ELEMENTS);
    let system = assemble(&disc, order)?;
    let coeffs = random_vector(&mut ChaCha8Rng::seed_from_u64(seed), system.dofs.len());
    let u = DiscreteFunction::new(&disc, &system.dofs, coeffs.clone())?;
    let brute = brute_force_energy(&u, order)?;
    let form = system.bilinear(&coeffs, &coeffs);
    Ok((brute - form).abs() / form.abs())
}

/// The identity suite behind `fracmix verify`.
pub fn verify_suite(seed: u64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let half = FractionalOrder::new(1, 0.5)?;
    let mesh = MeshParams { h: 0.05, collar: 8.0, scheme: Scheme::P1, auto_collar: false };
    let (gauss, parts) = identity_residuals(&half, &mesh, RANDOM_FUNCTIONS, seed)?;
    checks.push(Check::at_most("gauss_residual (P1, s=0.5, h=0.05, L=8)", gauss, IDENTITY_TOL));
    checks.push(Check::at_most("parts_residual (P1, s=0.5, h=0.05, L=8)", parts, IDENTITY_TOL));

    for (scheme, s) in [(Scheme::P0, 0.3), (Scheme::P1, 0.3), (Scheme::P1, 0.7)] {
        let gap = brute_force_gap(&FractionalOrder::new(1, s)?, scheme, seed)?;
        checks.push(Check::at_most(format!("brute-force energy ({scheme:?}, s={s})"), gap, BRUTE_FORCE_TOL));
    }

    let a = normalization_constant(1, 0.5, 1e-10)?;
    checks.push(Check::at_most("a_(1,1/2) vs 1/pi", (a.value - std::f64::consts::FRAC_1_PI).abs(), 1e-6));
    let id = indicator_seminorm_identity(&[(0.0, 1.0)], 0.5, 1e-10)?;
    checks.push(Check::at_most(
        "indicator identity at alpha=0.5",
        (id.lhs - 8.0).abs().max((id.rhs - 8.0).abs()),
        1e-6,
    ));
    Ok(VerifyReport { seed, checks })
}
