//! One mixed problem end to end: solve, inspect diagnostics, and evaluate
//! the reconstructed solution and its nonlocal normal derivative outside.

use fracmix::assembly::{MeshParams, Scheme};
use fracmix::eigensolver::{solve_mixed, SolverParams};
use fracmix::fracops::FractionalOrder;
use fracmix::geometry::{Domain1D, ExteriorPartition, ExteriorSet, Label};
use fracmix::nonlocal_ops::{neumann_value, nonlocal_normal, DiscreteFunction};

fn main() -> fracmix::Result<()> {
    let omega = Domain1D::new(-1.0, 1.0)?;
    let order = FractionalOrder::new(1, 0.5)?;
    let partition = ExteriorPartition::with_designated(omega, ExteriorSet::new(vec![(1.0, 2.0)])?, Label::Neumann)?;
    let mesh = MeshParams { h: 0.02, collar: 8.0, scheme: Scheme::P1, auto_collar: true };
    let sol = solve_mixed(&partition, &order, &mesh, &SolverParams::default())?;
    let r = &sol.result;
    println!("lambda1 = {:.10} after {} iterations (residual {:.1e})", r.lambda1, r.iterations, r.rq_residual);
    println!("diagnostics: {:?}", sol.diagnostics);

    let u = DiscreteFunction::new(&sol.discretization, &sol.system.dofs, r.full_vector())?;
    println!("mean over Ω: {:.6}", u.mean());
    for x in [1.1, 1.5, 1.9] {
        println!(
            "x={x}: reconstructed u = {:.6}, N_s u = {:.2e}",
            neumann_value(&u, x, &order)?,
            nonlocal_normal(&u, x, &order)?
        );
    }
    Ok(())
}
