//! Far from Ω the Neumann extension tends to the mean of `u` over Ω. Fit
//! the decay rate of the deviation for a symmetric and a lopsided partition.

use fracmix::assembly::{MeshParams, Scheme};
use fracmix::eigensolver::{solve_mixed, SolverParams};
use fracmix::experiments::farfield_points;
use fracmix::fracops::FractionalOrder;
use fracmix::geometry::{Domain1D, ExteriorPartition, ExteriorSet};
use fracmix::nonlocal_ops::{farfield_rate, DiscreteFunction};

fn main() -> fracmix::Result<()> {
    let omega = Domain1D::new(-1.0, 1.0)?;
    let order = FractionalOrder::new(1, 0.5)?;
    let mesh = MeshParams { h: 0.02, collar: 8.0, scheme: Scheme::P1, auto_collar: true };
    let inf = f64::INFINITY;
    let cases = [
        ("N = (4, inf)", vec![(-inf, -1.0), (1.0, 4.0)], vec![(4.0, inf)]),
        ("N = (1, inf)", vec![(-inf, -1.0)], vec![(1.0, inf)]),
    ];
    for (name, d, n) in cases {
        let p = ExteriorPartition::new(omega, ExteriorSet::new(d)?, ExteriorSet::new(n)?)?;
        let sol = solve_mixed(&p, &order, &mesh, &SolverParams::default())?;
        let u = DiscreteFunction::new(&sol.discretization, &sol.system.dofs, sol.result.full_vector())?;
        let rate = farfield_rate(&u, &order, &farfield_points(&omega))?;
        println!("{name}: lambda1 = {:.6}, slope {:.4} (r2 {:.3})", sol.result.lambda1, rate.slope, rate.r2);
        for (x, d) in rate.points.iter().zip(&rate.deviations) {
            println!("    |x| = {x:>8.2}  |u(x) - mean| = {d:.3e}");
        }
    }
    Ok(())
}
