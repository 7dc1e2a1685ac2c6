//! The seminorm of an indicator function computed two ways: integrating the
//! pointwise exterior potential, and summing exact interval-pair integrals.

use fracmix::fracops::indicator_seminorm_identity;

fn main() -> fracmix::Result<()> {
    for (omega, alpha) in [
        (vec![(0.0, 1.0)], 0.5),
        (vec![(0.0, 2.0)], 0.5),
        (vec![(0.0, 1.0), (2.0, 3.5)], 0.3),
        (vec![(0.0, 1.0)], 0.95),
    ] {
        let id = indicator_seminorm_identity(&omega, alpha, 1e-10)?;
        println!("Ω = {omega:?}, alpha = {alpha}: lhs {:.12}, rhs {:.12}, gap {:.1e}", id.lhs, id.rhs, id.gap);
    }
    Ok(())
}
