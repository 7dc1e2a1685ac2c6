//! The all-Dirichlet eigenvalue on (-1, 1) for several `s`, with Richardson
//! extrapolation in the mesh size.

use fracmix::assembly::{MeshParams, Scheme};
use fracmix::eigensolver::SolverParams;
use fracmix::experiments::richardson_baseline;
use fracmix::fracops::FractionalOrder;
use fracmix::geometry::Domain1D;

fn main() -> fracmix::Result<()> {
    let omega = Domain1D::new(-1.0, 1.0)?;
    let mesh = MeshParams { h: 0.04, collar: 8.0, scheme: Scheme::P1, auto_collar: true };
    for s in [0.25, 0.5, 0.75] {
        let order = FractionalOrder::new(1, s)?;
        let r = richardson_baseline(omega, &order, &mesh, &SolverParams::default(), &[0.04, 0.02, 0.01])?;
        println!("s={s}: lambda1(h) = {:?}, observed order {:.2}, extrapolated {:.6}", r.lambdas, r.order, r.extrapolated);
    }
    Ok(())
}
