use fracmix::assembly::{assemble, build_mesh, MeshParams, Scheme};
use fracmix::eigensolver::{solve_mixed, SolverParams};
use fracmix::experiments::fit_power;
use fracmix::fracops::{dini_check, kernel_cell_integral, DiniOutcome, FractionalOrder, KernelOrder, ModulusOfContinuity};
use fracmix::geometry::{Domain1D, ExteriorPartition, ExteriorSet, Label};
use fracmix::nonlocal_ops::{e_of_r, gauss_residual, parts_residual};
use proptest::prelude::*;

fn order(s: f64) -> FractionalOrder {
    FractionalOrder::new(1, s).unwrap()
}

fn omega() -> Domain1D {
    Domain1D::new(-1.0, 1.0).unwrap()
}

/// A Neumann set made of 0.5-wide slots on either side of `Ω`; the rest of
/// the exterior is Dirichlet.
fn slots_partition(slots: &[bool]) -> ExteriorPartition {
    let raw: Vec<(f64, f64)> = slots
        .iter()
        .enumerate()
        .filter(|(_, on)| **on)
        .map(|(i, _)| {
            let j = (i / 2) as f64;
            if i % 2 == 0 { (1.0 + 0.5 * j, 1.5 + 0.5 * j) } else { (-1.5 - 0.5 * j, -1.0 - 0.5 * j) }
        })
        .collect();
    let mut sorted = raw;
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in sorted {
        match merged.last_mut() {
            Some(last) if (lo - last.1).abs() < 1e-12 => last.1 = hi,
            _ => merged.push((lo, hi)),
        }
    }
    let n = ExteriorSet::new(merged).unwrap();
    ExteriorPartition::with_designated(omega(), n, Label::Neumann).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cell_integral_is_symmetric_and_scales(
        lo in -3.0f64..3.0, w1 in 0.1f64..2.0, gap in 0.05f64..2.0, w2 in 0.1f64..2.0,
        s in 0.05f64..0.95, c in 0.25f64..4.0,
    ) {
        let o = order(s);
        let a = (lo, lo + w1);
        let b = (lo + w1 + gap, lo + w1 + gap + w2);
        let ab = kernel_cell_integral(a, b, &o).unwrap();
        let ba = kernel_cell_integral(b, a, &o).unwrap();
        prop_assert!(ab > 0.0);
        prop_assert!((ab - ba).abs() <= 1e-12 * ab);
        // ∬ |x-y|^{-1-2s} is homogeneous of degree 1 - 2s.
        let scaled = kernel_cell_integral((c * a.0, c * a.1), (c * b.0, c * b.1), &o).unwrap();
        prop_assert!((scaled - c.powf(1.0 - 2.0 * s) * ab).abs() <= 1e-10 * scaled);
    }

    #[test]
    fn neumann_assembly_identities(s in 0.1f64..0.9, seed in 0u64..1000) {
        let o = order(s);
        let mesh = MeshParams { h: 0.1, collar: 8.0, scheme: Scheme::P1, auto_collar: false };
        let disc = build_mesh(&ExteriorPartition::full_neumann(omega()), &o, &mesh).unwrap();
        let sys = assemble(&disc, &o).unwrap();
        let n = sys.dofs.len();
        let u: Vec<f64> = (0..n).map(|i| (((i as u64 + 1) * (seed + 7)) % 23) as f64 / 11.0 - 1.0).collect();
        let v: Vec<f64> = (0..n).map(|i| (((i as u64 + 3) * (seed + 5)) % 19) as f64 / 9.0 - 1.0).collect();
        prop_assert!(gauss_residual(&sys, &u) <= 1e-12);
        prop_assert!(parts_residual(&sys, &u, &v) <= 1e-12);
        let k = sys.full_matrix();
        prop_assert_eq!(&k, &k.transpose());
        let ones = vec![1.0; n];
        let k1 = sys.apply(&ones);
        let scale = k.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(k1.iter().all(|r| r.abs() <= 1e-11 * scale));
    }

    #[test]
    fn mixed_eigenvalue_between_zero_and_baseline(slots in proptest::collection::vec(any::<bool>(), 8), s in 0.2f64..0.8) {
        let o = order(s);
        let mesh = MeshParams { h: 0.1, collar: 8.0, scheme: Scheme::P1, auto_collar: true };
        let solver = SolverParams::default();
        let base = solve_mixed(&ExteriorPartition::full_dirichlet(omega()), &o, &mesh, &solver).unwrap().result.lambda1;
        let sol = solve_mixed(&slots_partition(&slots), &o, &mesh, &solver).unwrap();
        prop_assert!(sol.result.lambda1 >= 0.0);
        prop_assert!(sol.result.lambda1 <= base * (1.0 + 1e-8));
        prop_assert!(sol.diagnostics.gauss_residual <= 1e-12);
        prop_assert!((sol.result.normalization - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn more_neumann_means_smaller_eigenvalue(slots in proptest::collection::vec(any::<bool>(), 8), extra in 0usize..8) {
        let o = order(0.5);
        let mesh = MeshParams { h: 0.1, collar: 8.0, scheme: Scheme::P1, auto_collar: true };
        let solver = SolverParams::default();
        let mut bigger = slots.clone();
        bigger[extra] = true;
        let l_small = solve_mixed(&slots_partition(&slots), &o, &mesh, &solver).unwrap().result.lambda1;
        let l_big = solve_mixed(&slots_partition(&bigger), &o, &mesh, &solver).unwrap().result.lambda1;
        prop_assert!(l_big <= l_small * (1.0 + 1e-10));
    }

    #[test]
    fn e_of_r_is_homogeneous(r in 1e-3f64..0.25, c in 0.1f64..0.9, s in 0.1f64..0.7) {
        let e1 = e_of_r(r, s, 2, 1e-11).unwrap();
        let e2 = e_of_r(c * r, s, 2, 1e-11).unwrap();
        prop_assert!((e2 / e1 - c.powf(2.0 - 2.0 * s)).abs() <= 1e-7);
    }

    #[test]
    fn dini_power_classification(beta in 0.05f64..1.0, alpha in 0.05f64..1.0) {
        prop_assume!((beta - alpha).abs() > 1e-6);
        let out = dini_check(&ModulusOfContinuity::Power(beta), &KernelOrder::Power(alpha), 1e-9).unwrap();
        if beta > alpha {
            let DiniOutcome::Finite(v) = out else { panic!("expected finite") };
            prop_assert!((v - 1.0 / (beta - alpha)).abs() <= 1e-6 * v.max(1.0));
        } else {
            prop_assert_eq!(out, DiniOutcome::Divergent);
        }
    }

    #[test]
    fn power_fit_recovers_exponent(c in 0.1f64..10.0, p in -3.0f64..3.0) {
        let x: Vec<f64> = (1..8).map(|i| i as f64 * 0.7).collect();
        let y: Vec<f64> = x.iter().map(|v| c * v.powf(p)).collect();
        let f = fit_power(&x, &y).unwrap();
        prop_assert!((f.slope - p).abs() <= 1e-10);
        prop_assert!((f.intercept - c.ln()).abs() <= 1e-10);
    }

    #[test]
    fn exterior_set_measure_is_additive(cuts in proptest::collection::vec(1.0f64..9.0, 4), split in 1.0f64..9.0) {
        let mut c = cuts.clone();
        c.sort_by(f64::total_cmp);
        prop_assume!(c.windows(2).all(|w| w[1] - w[0] > 1e-9));
        let set = ExteriorSet::new(vec![(c[0], c[1]), (c[2], c[3])]).unwrap();
        let total = set.measure_within(0.0, 10.0);
        prop_assert!((total - (c[1] - c[0] + c[3] - c[2])).abs() <= 1e-12);
        let parts = set.measure_within(0.0, split) + set.measure_within(split, 10.0);
        prop_assert!((parts - total).abs() <= 1e-12);
    }
}
