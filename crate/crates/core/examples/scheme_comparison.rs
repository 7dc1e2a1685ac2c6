//! Piecewise-constant and piecewise-linear discretizations side by side for
//! `s < 1/2`, over a short refinement sequence.

use fracmix::assembly::{MeshParams, Scheme};
use fracmix::eigensolver::{solve_mixed, SolverParams};
use fracmix::fracops::FractionalOrder;
use fracmix::geometry::{Domain1D, ExteriorPartition, ExteriorSet, Label};

fn main() -> fracmix::Result<()> {
    let omega = Domain1D::new(-1.0, 1.0)?;
    let order = FractionalOrder::new(1, 0.3)?;
    let partitions = [
        ("full Dirichlet", ExteriorPartition::full_dirichlet(omega)),
        ("touching Dirichlet", ExteriorPartition::with_designated(omega, ExteriorSet::new(vec![(1.0, 1.5)])?, Label::Dirichlet)?),
        ("far Neumann", ExteriorPartition::with_designated(omega, ExteriorSet::new(vec![(3.0, 4.0)])?, Label::Neumann)?),
    ];
    for (name, p) in &partitions {
        print!("{name:>18}:");
        for h in [0.08, 0.04, 0.02] {
            let solve = |scheme| -> fracmix::Result<f64> {
                let mesh = MeshParams { h, collar: 8.0, scheme, auto_collar: true };
                Ok(solve_mixed(p, &order, &mesh, &SolverParams::default())?.result.lambda1)
            };
            let (l0, l1) = (solve(Scheme::P0)?, solve(Scheme::P1)?);
            print!("  h={h}: P0 {l0:.5} P1 {l1:.5}");
        }
        println!();
    }
    Ok(())
}
