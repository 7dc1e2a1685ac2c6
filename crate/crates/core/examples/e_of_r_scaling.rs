//! `E(r)`: the integral of `dist(x, hyperplane)^{-2s}` over a ball of
//! radius `r` tangent to the hyperplane scales like `r^{N-2s}`.

use fracmix::nonlocal_ops::e_of_r_sweep;

fn main() -> fracmix::Result<()> {
    let radii: Vec<f64> = (3..=8).map(|k| 2f64.powi(-k)).collect();
    for dim in [1, 2, 3] {
        for s in [0.2, 0.4, 0.6, 0.7, 0.75] {
            match e_of_r_sweep(s, dim, &radii, 1e-10) {
                Ok(sw) => println!("N={dim} s={s}: slope {:.6} (N-2s = {:.2})", sw.slope, dim as f64 - 2.0 * s),
                Err(e) => println!("N={dim} s={s}: {e}"),
            }
        }
    }
    Ok(())
}
