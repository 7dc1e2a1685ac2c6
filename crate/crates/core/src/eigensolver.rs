//! Elimination of the exterior Neumann unknowns and inverse iteration for
//! the principal eigenpair.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, build_mesh, Discretization, MeshParams, StiffnessSystem};
use crate::error::{Error, Result};
use crate::fracops::FractionalOrder;
use crate::geometry::{condition_c, measure_in_ball, separation, ConditionC, ExteriorPartition};
use crate::nonlocal_ops::gauss_residual;

/// Below this the eigenvalue is reported as exactly 0.
pub const ZERO_EIGENVALUE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    500
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub lambda1: f64,
    pub u_interior: Vec<f64>,
    /// Values on the exterior Neumann DOFs, from the back map.
    pub u_exterior: Vec<f64>,
    pub iterations: usize,
    /// `‖K u - λ M u‖ / (‖K‖₁ ‖u‖)`.
    pub rq_residual: f64,
    /// `uᵀ M u`.
    pub normalization: f64,
    /// The computed eigenvalue was below [`ZERO_EIGENVALUE`] and set to 0.
    pub zero_flag: bool,
    pub converged: bool,
}

impl EigenResult {
    /// Interior values followed by exterior values, in DOF order.
    pub fn full_vector(&self) -> Vec<f64> {
        self.u_interior.iter().chain(&self.u_exterior).copied().collect()
    }
}

/// `K_eff = K_II - K_IE K_EE⁻¹ K_EI` together with `X = K_EE⁻¹ K_EI`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurReduction {
    pub k_eff: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    coupling: DMatrix<f64>,
}

impl SchurReduction {
    /// Exterior values `u_E = -K_EE⁻¹ K_EI u_I`.
    pub fn back_map(&self, u_interior: &[f64]) -> Vec<f64> {
        let u = DVector::from_column_slice(u_interior);
        (-(&self.coupling * u)).iter().copied().collect()
    }

    /// `n_E × n_I` matrix `K_EE⁻¹ K_EI`.
    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }
}

/// LDLᵀ of a symmetric tridiagonal matrix, solved in place for every column.
fn tridiagonal_solve(diag: &[f64], off: &[f64], rhs: &mut DMatrix<f64>) -> Result<()> {
    let n = diag.len();
    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n.saturating_sub(1)];
    for i in 0..n {
        d[i] = diag[i] - if i > 0 { l[i - 1] * l[i - 1] * d[i - 1] } else { 0.0 };
        if !(d[i] > 0.0) {
            return Err(Error::SingularExteriorBlock(i));
        }
        if i + 1 < n {
            l[i] = off[i] / d[i];
        }
    }
    for mut col in rhs.column_iter_mut() {
        for i in 1..n {
            col[i] -= l[i - 1] * col[i - 1];
        }
        for i in 0..n {
            col[i] /= d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            col[i] -= l[i] * col[i + 1];
        }
    }
    Ok(())
}

pub fn schur_reduce(system: &StiffnessSystem) -> Result<SchurReduction> {
    let mut coupling = system.k_ie.transpose();
    tridiagonal_solve(&system.k_ee_diag, &system.k_ee_off, &mut coupling)?;
    let mut k_eff = &system.k_ii - &system.k_ie * &coupling;
    // The product is symmetric only up to rounding.
    let n = k_eff.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (k_eff[(i, j)] + k_eff[(j, i)]);
            k_eff[(i, j)] = v;
            k_eff[(j, i)] = v;
        }
    }
    Ok(SchurReduction {
        k_eff,
        mass: system.mass.clone(),
        coupling,
    })
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Smallest eigenpair of `K u = λ M u` by shifted inverse iteration.
///
/// The returned vector is sign-fixed (`Σ M u ≥ 0`) and `M`-normalized; the
/// exterior part is left empty (see [`solve_mixed`]).
pub fn smallest_eigenpair(k: &DMatrix<f64>, m: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<EigenResult> {
    let n = k.nrows();
    if n == 0 || k.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::InvalidParameter("eigenproblem needs square matrices of equal size".into()));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParameter("tol and max_iter must be positive".into()));
    }
    let scale = k.trace() / m.trace();
    if !(m.trace() > 0.0) || scale < 0.0 || !scale.is_finite() {
        return Err(Error::IndefinitePencil);
    }
    let sigma = 1e-10 * scale.max(1e-300);
    // Absolute floor for the eigenvalue-change test, so that λ = 0 can converge.
    let floor = (1e-14 * scale).max(1e-30);
    let chol = (k + m * sigma).cholesky().ok_or(Error::IndefinitePencil)?;

    let k_norm = one_norm(k).max(1e-300);
    let normalize = |v: DVector<f64>| -> DVector<f64> {
        let nrm = v.dot(&(m * &v)).sqrt();
        v / nrm
    };
    let mut u = normalize(DVector::from_element(n, 1.0));
    let mut lambda = u.dot(&(k * &u));
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let rhs = m * &u;
        let next = normalize(chol.solve(&rhs));
        let ku = k * &next;
        let new_lambda = next.dot(&ku);
        let r = &ku - (m * &next) * new_lambda;
        residual = r.norm() / (k_norm * next.norm());
        let change = (new_lambda - lambda).abs();
        u = next;
        lambda = new_lambda;
        if change <= tol * lambda.max(floor) && residual <= tol.sqrt() {
            converged = true;
            break;
        }
    }
    if lambda < -1e-8 * scale {
        return Err(Error::IndefinitePencil);
    }
    if (m * &u).sum() < 0.0 {
        u = -u;
    }
    let zero_flag = lambda < ZERO_EIGENVALUE;
    let result = EigenResult {
        lambda1: if zero_flag { 0.0 } else { lambda },
        normalization: u.dot(&(m * &u)),
        u_interior: u.iter().copied().collect(),
        u_exterior: Vec::new(),
        iterations,
        rq_residual: residual,
        zero_flag,
        converged,
    };
    if !converged {
        return Err(Error::MaxIterExceeded(Box::new(result)));
    }
    Ok(result)
}

/// Diagnostics attached to a mixed solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub gauss_residual: f64,
    pub condition_c: ConditionC,
    /// `dist(D, Ω)`; `None` when `D` is empty.
    pub separation: Option<f64>,
    /// `|N ∩ B_R|` and `|D ∩ B_R|` at `R = 2|Ω|`.
    pub measure_neumann: f64,
    pub measure_dirichlet: f64,
    pub snap_displacement: f64,
}

#[derive(Debug, Clone)]
pub struct MixedSolution {
    pub discretization: Discretization,
    pub system: StiffnessSystem,
    pub result: EigenResult,
    pub diagnostics: Diagnostics,
}

/// Mesh, assemble, eliminate, solve and reconstruct.
pub fn solve_mixed(
    partition: &ExteriorPartition,
    order: &FractionalOrder,
    mesh: &MeshParams,
    solver: &SolverParams,
) -> Result<MixedSolution> {
    let disc = build_mesh(partition, order, mesh)?;
    let system = assemble(&disc, order)?;
    let reduction = schur_reduce(&system)?;
    let mut result = smallest_eigenpair(&reduction.k_eff, &reduction.mass, solver.tol, solver.max_iter)?;
    result.u_exterior = reduction.back_map(&result.u_interior);

    let omega = partition.omega;
    let radius = 2.0 * omega.length();
    let diagnostics = Diagnostics {
        gauss_residual: gauss_residual(&system, &result.full_vector()),
        condition_c: condition_c(&partition.dirichlet, &omega, order)?,
        separation: if partition.dirichlet.is_empty() {
            None
        } else {
            Some(separation(&partition.dirichlet, &omega)?)
        },
        measure_neumann: measure_in_ball(&partition.neumann, radius),
        measure_dirichlet: measure_in_ball(&partition.dirichlet, radius),
        snap_displacement: disc.snap.max_displacement,
    };
    Ok(MixedSolution {
        discretization: disc,
        system,
        result,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Scheme;
    use crate::geometry::{Domain1D, ExteriorSet, Label};

    fn order(s: f64) -> FractionalOrder {
        FractionalOrder::new(1, s).unwrap()
    }

    fn mesh(h: f64, scheme: Scheme) -> MeshParams {
        MeshParams { h, collar: 8.0, scheme, auto_collar: true }
    }

    #[test]
    fn tridiagonal_solver_matches_dense() {
        let diag = [4.0, 5.0, 6.0, 3.0];
        let off = [1.0, -2.0, 0.5];
        let mut a = DMatrix::zeros(4, 4);
        for i in 0..4 {
            a[(i, i)] = diag[i];
            if i < 3 {
                a[(i, i + 1)] = off[i];
                a[(i + 1, i)] = off[i];
            }
        }
        let b = DMatrix::from_fn(4, 2, |i, j| (i + 2 * j) as f64 - 1.5);
        let mut x = b.clone();
        tridiagonal_solve(&diag, &off, &mut x).unwrap();
        assert!((&a * &x - b).abs().max() < 1e-13);
        assert!(matches!(
            tridiagonal_solve(&[1.0, -1.0], &[0.0], &mut DMatrix::zeros(2, 1)),
            Err(Error::SingularExteriorBlock(1))
        ));
    }

    #[test]
    fn inverse_iteration_on_known_pencil() {
        let k = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let m = DMatrix::identity(3, 3);
        let r = smallest_eigenpair(&k, &m, 1e-12, 200).unwrap();
        let exact = 2.0 - 2f64.sqrt();
        assert!((r.lambda1 - exact).abs() < 1e-10);
        assert!((r.normalization - 1.0).abs() < 1e-12);
        assert!(r.u_interior.iter().all(|v| *v > 0.0));
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -3.0]);
        assert!(matches!(
            smallest_eigenpair(&bad, &DMatrix::identity(2, 2), 1e-10, 50),
            Err(Error::IndefinitePencil)
        ));
        assert!(matches!(
            smallest_eigenpair(&k, &m, 1e-14, 1),
            Err(Error::MaxIterExceeded(_))
        ));
    }

    #[test]
    fn decoupled_schur_is_identity_reduction() {
        let omega = Domain1D::new(0.0, 1.0).unwrap();
        let p = ExteriorPartition::full_dirichlet(omega);
        let o = order(0.3);
        let sys = assemble(&build_mesh(&p, &o, &mesh(0.1, Scheme::P0)).unwrap(), &o).unwrap();
        let red = schur_reduce(&sys).unwrap();
        assert_eq!(red.k_eff, sys.k_ii);
    }

    #[test]
    fn neumann_everywhere_gives_zero() {
        let omega = Domain1D::new(-1.0, 1.0).unwrap();
        for (scheme, s) in [(Scheme::P0, 0.3), (Scheme::P1, 0.6)] {
            let o = order(s);
            let sol = solve_mixed(&ExteriorPartition::full_neumann(omega), &o, &mesh(0.1, scheme), &SolverParams::default()).unwrap();
            assert_eq!(sol.result.lambda1, 0.0);
            assert!(sol.result.zero_flag);
            let u0 = sol.result.u_interior[0];
            assert!(sol.result.u_interior.iter().all(|v| (v - u0).abs() < 1e-6 * u0));
            assert!(sol.result.u_exterior.iter().all(|v| (v - u0).abs() < 1e-6 * u0));
        }
    }

    #[test]
    fn back_map_is_weighted_average_for_p0() {
        let omega = Domain1D::new(0.0, 1.0).unwrap();
        let n = ExteriorSet::new(vec![(1.0, 1.5)]).unwrap();
        let p = ExteriorPartition::with_designated(omega, n, Label::Neumann).unwrap();
        let o = order(0.25);
        let disc = build_mesh(&p, &o, &mesh(0.125, Scheme::P0)).unwrap();
        let sys = assemble(&disc, &o).unwrap();
        let red = schur_reduce(&sys).unwrap();
        let u: Vec<f64> = (0..sys.n_interior()).map(|i| 1.0 + i as f64).collect();
        let ue = red.back_map(&u);
        for (j, (fi, f)) in disc.neumann_elements().enumerate() {
            let _ = fi;
            let mut num = 0.0;
            let mut den = 0.0;
            for (ei, e) in disc.omega_elements() {
                let w = crate::fracops::kernel_cell_integral((e.lo, e.hi), (f.lo, f.hi), &o).unwrap();
                num += w * u[sys.dofs.of_entity[ei].unwrap()];
                den += w;
            }
            assert!((ue[j] - num / den).abs() < 1e-12, "{j}");
        }
    }

    #[test]
    fn nested_dirichlet_sets_order_eigenvalues() {
        let omega = Domain1D::new(-1.0, 1.0).unwrap();
        let o = order(0.4);
        let small = ExteriorSet::new(vec![(1.0, 1.5)]).unwrap();
        let big = ExteriorSet::new(vec![(1.0, 2.5), (-3.0, -1.0)]).unwrap();
        let mut lams = Vec::new();
        for d in [small, big] {
            let p = ExteriorPartition::with_designated(omega, d, Label::Dirichlet).unwrap();
            lams.push(solve_mixed(&p, &o, &mesh(0.1, Scheme::P1), &SolverParams::default()).unwrap().result.lambda1);
        }
        let full = solve_mixed(&ExteriorPartition::full_dirichlet(omega), &o, &mesh(0.1, Scheme::P1), &SolverParams::default())
            .unwrap()
            .result
            .lambda1;
        assert!(0.0 < lams[0] && lams[0] <= lams[1] && lams[1] <= full);
    }
}
