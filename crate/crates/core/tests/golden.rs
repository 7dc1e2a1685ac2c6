//! Values frozen from independent oracles and earlier verified runs.

use fracmix::assembly::{MeshParams, Scheme};
use fracmix::eigensolver::{solve_mixed, SolverParams};
use fracmix::fracops::{kernel_cell_integral, normalization_constant, FractionalOrder};
use fracmix::geometry::{Domain1D, ExteriorPartition, ExteriorSet, Label};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn normalization_constants() {
    let pi = std::f64::consts::PI;
    assert!(close(normalization_constant(1, 0.5, 1e-10).unwrap().value, 1.0 / pi, 1e-9));
    assert!(close(normalization_constant(1, 0.25, 1e-10).unwrap().value, 0.19947114020071634, 1e-8));
    assert!(close(normalization_constant(1, 0.75, 1e-10).unwrap().value, 0.2992067103010745, 1e-8));
    assert!(close(normalization_constant(2, 0.5, 1e-10).unwrap().value, 1.0 / (2.0 * pi), 1e-8));
}

#[test]
fn cell_integrals() {
    let o = FractionalOrder::new(1, 0.5).unwrap();
    // ∫_0^1∫_2^3 (y-x)^{-2} = ln(4/3)
    assert!(close(kernel_cell_integral((0.0, 1.0), (2.0, 3.0), &o).unwrap(), (4.0f64 / 3.0).ln(), 1e-12));
    let q = FractionalOrder::new(1, 0.25).unwrap();
    assert!(close(kernel_cell_integral((0.0, 1.0), (2.0, 3.0), &q).unwrap(), 0.3855052687092512, 1e-10));
}

#[test]
fn dirichlet_baseline_refinement() {
    let omega = Domain1D::new(-1.0, 1.0).unwrap();
    let o = FractionalOrder::new(1, 0.5).unwrap();
    let p = ExteriorPartition::full_dirichlet(omega);
    let frozen = [(0.04, 1.1628761612), (0.02, 1.1603713191), (0.01, 1.1590867624)];
    for (h, lambda) in frozen {
        let mesh = MeshParams { h, collar: 8.0, scheme: Scheme::P1, auto_collar: true };
        let got = solve_mixed(&p, &o, &mesh, &SolverParams::default()).unwrap().result.lambda1;
        assert!(close(got, lambda, 1e-9), "h={h}: {got}");
    }
}

#[test]
fn fixed_neumann_interval() {
    let omega = Domain1D::new(-1.0, 1.0).unwrap();
    let o = FractionalOrder::new(1, 0.5).unwrap();
    let p = ExteriorPartition::with_designated(omega, ExteriorSet::new(vec![(1.0, 2.0)]).unwrap(), Label::Neumann).unwrap();
    let mesh = MeshParams { h: 0.02, collar: 8.0, scheme: Scheme::P1, auto_collar: true };
    let got = solve_mixed(&p, &o, &mesh, &SolverParams::default()).unwrap().result.lambda1;
    assert!(close(got, 0.6591871172510829, 1e-9), "{got}");
}
