//! Exterior partition families: where the designated set sits for each `k`,
//! whether the Neumann sets diffuse, and the condition (C) integral.

use fracmix::fracops::FractionalOrder;
use fracmix::geometry::{condition_c, diffusion_report, Domain1D, FamilyKind, PartitionFamily, Side};

fn family(kind: FamilyKind, scale: f64, ratio: f64) -> PartitionFamily {
    PartitionFamily { kind, scale, ratio, length: 1.0, gap: 0.0, side: Side::Right }
}

fn main() -> fracmix::Result<()> {
    let omega = Domain1D::new(-1.0, 1.0)?;
    let order = FractionalOrder::new(1, 0.25)?;
    let families = [
        family(FamilyKind::TravelingBall, 1.0, 2.0),
        family(FamilyKind::ShrinkingNeumann, 0.5, 0.5),
        family(FamilyKind::ShrinkingDirichletTouching, 0.5, 0.5),
        family(FamilyKind::TravelingRing, 1.0, 2.0),
        family(FamilyKind::InfiniteSector, 1.0, 2.0),
    ];
    for f in &families {
        println!("{:?} (designated: {:?})", f.kind, f.kind.designated_label());
        for k in [0, 2, 4] {
            let p = f.generate(&omega, k)?;
            let cond = condition_c(&p.dirichlet, &omega, &order)?;
            println!("  k={k}: D = {:?}\n        N = {:?}\n        condition C = {:?}", p.dirichlet.intervals(), p.neumann.intervals(), cond);
        }
        let report = diffusion_report(f, &omega, &[2.0, 8.0, 32.0], &[0, 4, 8, 12])?;
        println!("  Neumann sets diffuse on compacts: {}\n", report.diffusing);
    }
    Ok(())
}
