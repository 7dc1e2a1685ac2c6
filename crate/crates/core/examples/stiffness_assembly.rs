//! Mesh an exterior partition, assemble the P1 stiffness matrix and check
//! its basic structure: symmetry, the Gauss identity, and `K·1 = 0` when
//! nothing is Dirichlet.

use fracmix::assembly::{assemble, build_mesh, MeshParams, Scheme};
use fracmix::fracops::FractionalOrder;
use fracmix::geometry::{Domain1D, ExteriorPartition, ExteriorSet, Label};
use fracmix::nonlocal_ops::gauss_residual;

fn main() -> fracmix::Result<()> {
    let omega = Domain1D::new(-1.0, 1.0)?;
    let order = FractionalOrder::new(1, 0.4)?;
    let mesh = MeshParams { h: 0.05, collar: 8.0, scheme: Scheme::P1, auto_collar: true };

    let mixed = ExteriorPartition::with_designated(omega, ExteriorSet::new(vec![(1.0, 3.0), (-2.0, -1.0)])?, Label::Neumann)?;
    for (name, p) in [("all Neumann", ExteriorPartition::full_neumann(omega)), ("mixed", mixed)] {
        let disc = build_mesh(&p, &order, &mesh)?;
        let sys = assemble(&disc, &order)?;
        let k = sys.full_matrix();
        let asym = (&k - k.transpose()).abs().max();
        let ones = vec![1.0; sys.dofs.len()];
        let row_sum = sys.apply(&ones).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let u: Vec<f64> = (0..sys.dofs.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        println!(
            "{name:>12}: h={:.4} L={} interior={} exterior={} |K-K^T|={asym:.1e} max|K·1|={row_sum:.2e} gauss residual={:.1e}",
            disc.h,
            disc.collar,
            sys.n_interior(),
            sys.n_exterior(),
            gauss_residual(&sys, &u)
        );
    }
    Ok(())
}
