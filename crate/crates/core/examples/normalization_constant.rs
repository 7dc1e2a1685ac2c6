//! The constant `a_{N,s}` from its defining Fourier integral, compared with
//! the Gamma-function expression, plus a few closed-form cell integrals.

use fracmix::fracops::{gamma_closed_form, kernel_cell_integral, normalization_constant, FractionalOrder};

fn main() -> fracmix::Result<()> {
    println!("{:>3} {:>5} {:>14} {:>14} {:>8}", "N", "s", "a (integral)", "Gamma form", "ratio");
    for dim in [1, 2] {
        for s in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let a = normalization_constant(dim, s, 1e-10)?;
            println!("{dim:>3} {s:>5} {:>14.10} {:>14.10} {:>8.5}", a.value, gamma_closed_form(dim, s), a.ratio);
        }
    }

    let order = FractionalOrder::new(1, 0.5)?;
    println!("\ns = 1/2, a = {:.12} (1/pi = {:.12})", order.a_ns, std::f64::consts::FRAC_1_PI);
    for (a, b) in [((0.0, 1.0), (2.0, 3.0)), ((0.0, 1.0), (1.5, f64::INFINITY)), ((-1.0, 0.0), (0.01, 0.02))] {
        println!("  ∬ k over {a:?} x {b:?} = {:.12}", kernel_cell_integral(a, b, &order)?);
    }
    Ok(())
}
