//! Dini-type integrability of a boundary modulus of continuity against a
//! kernel order.

use fracmix::fracops::{dini_check, KernelOrder, ModulusOfContinuity};

fn main() {
    let cases = [
        (ModulusOfContinuity::Power(0.8), KernelOrder::Power(0.5)),
        (ModulusOfContinuity::Power(0.5), KernelOrder::Power(0.5)),
        (ModulusOfContinuity::Power(0.3), KernelOrder::Power(0.6)),
        (ModulusOfContinuity::LogSpine, KernelOrder::Power(0.1)),
        (ModulusOfContinuity::Table(vec![(1e-4, 1e-4), (1e-2, 1e-2), (1.0, 1.0)]), KernelOrder::Power(0.5)),
    ];
    for (w, psi) in cases {
        match dini_check(&w, &psi, 1e-9) {
            Ok(out) => println!("{w:?} vs {psi:?}: {out:?}"),
            Err(e) => println!("{w:?} vs {psi:?}: {e}"),
        }
    }
}
