//! Quadrature primitives: Gauss–Legendre rules, adaptive Gauss–Kronrod
//! integration and exact moments of power functions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest Gauss–Legendre order kept in the rule cache.
pub const MAX_GAUSS_ORDER: usize = 64;

/// Default relative tolerance for adaptive integration.
pub const DEFAULT_TOL: f64 = 1e-8;

const MAX_SUBDIVISIONS: usize = 20_000;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Newton iteration on the Legendre recurrence; nodes are returned in
    /// increasing order.
    fn compute(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(c + hw * x);
        }
        sum * hw
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + hw * x, w * hw))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached Gauss–Legendre rule of order `n` (1 ≤ n ≤ [`MAX_GAUSS_ORDER`]).
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (1..=MAX_GAUSS_ORDER).map(GaussRule::compute).collect());
    assert!(
        (1..=MAX_GAUSS_ORDER).contains(&n),
        "Gauss order {n} out of range"
    );
    &rules[n - 1]
}

// Gauss–Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = hw * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * hw, ((kron - gauss) * hw).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over the finite
/// interval `[a, b]`. Stops when the summed Kronrod/Gauss discrepancy is
/// below `max(rel_tol·|I|, abs_tol)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut pieces = 1;
    loop {
        let target = (rel_tol * total.abs()).max(abs_tol);
        if total_err <= target {
            return Ok(total);
        }
        if pieces >= MAX_SUBDIVISIONS || !total.is_finite() {
            return Err(Error::NonConvergedQuadrature {
                tol: rel_tol,
                estimate: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            return Err(Error::NonConvergedQuadrature {
                tol: rel_tol,
                estimate: total,
                error: total_err,
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        pieces += 1;
        // Re-sum periodically to keep the running totals from drifting.
        if pieces % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Integrate `f` over `[a, b]` when `f(x) ~ (x - a)^exponent` near `a`
/// (exponent > -1). The substitution `x = a + (b - a) u^m` makes the
/// transformed integrand smooth at the endpoint (the power is capped, so
/// exponents very close to -1 are only partly regularized).
pub fn integrate_left_singular<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    exponent: f64,
    rel_tol: f64,
) -> Result<f64> {
    if exponent <= -1.0 {
        return Err(Error::DivergentIntegral(format!(
            "endpoint exponent {exponent} <= -1"
        )));
    }
    let m = if exponent >= 2.0 {
        1.0
    } else {
        (3.0 / (exponent + 1.0)).ceil().min(12.0)
    };
    let len = b - a;
    integrate(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let um = u.powf(m);
            if um == 0.0 {
                // the transformed integrand vanishes like u^{m(e+1)-1}
                return 0.0;
            }
            f(a + len * um) * len * m * um / u
        },
        0.0,
        1.0,
        rel_tol,
        0.0,
    )
}

/// `∫_{d0}^{d1} t^p dt` for `0 <= d0 <= d1`, exact and free of cancellation
/// when `d1 ≈ d0` or `p ≈ -1`. Returns `+inf` when the integral diverges at 0.
pub fn power_moment(d0: f64, d1: f64, p: f64) -> f64 {
    debug_assert!(d0 >= 0.0 && d1 >= d0, "power_moment({d0}, {d1}, {p})");
    if d1 == d0 {
        return 0.0;
    }
    let q = p + 1.0;
    if d1.is_infinite() {
        if q >= 0.0 {
            return f64::INFINITY;
        }
        if d0 == 0.0 {
            return f64::INFINITY;
        }
        return -d0.powf(q) / q;
    }
    if d0 == 0.0 {
        return if q > 0.0 { d1.powf(q) / q } else { f64::INFINITY };
    }
    let log_ratio = ((d1 - d0) / d0).ln_1p();
    if q == 0.0 {
        log_ratio
    } else {
        d0.powf(q) * (q * log_ratio).exp_m1() / q
    }
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, intercept, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_integrate_polynomials_exactly() {
        for n in [1, 2, 5, 12, 20, 64] {
            let rule = gauss_legendre(n);
            let w: f64 = rule.weights.iter().sum();
            assert!((w - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let v = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let v = integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn left_singular_substitution() {
        let v = integrate_left_singular(|x: f64| x.powf(-0.7), 0.0, 1.0, -0.7, 1e-12).unwrap();
        assert!((v - 1.0 / 0.3).abs() < 1e-10);
        assert!(integrate_left_singular(|x: f64| 1.0 / x, 0.0, 1.0, -1.0, 1e-8).is_err());
    }

    #[test]
    fn power_moment_matches_naive_and_log_limit() {
        let naive = |d0: f64, d1: f64, p: f64| (d1.powf(p + 1.0) - d0.powf(p + 1.0)) / (p + 1.0);
        assert!((power_moment(1.0, 3.0, -1.5) - naive(1.0, 3.0, -1.5)).abs() < 1e-14);
        assert!((power_moment(0.0, 2.0, -0.5) - naive(0.0, 2.0, -0.5)).abs() < 1e-14);
        assert!((power_moment(2.0, 5.0, -1.0) - (2.5f64).ln()).abs() < 1e-15);
        let near = power_moment(2.0, 5.0, -1.0 + 1e-12);
        assert!((near - (2.5f64).ln()).abs() < 1e-11);
        assert!(power_moment(0.0, 1.0, -1.0).is_infinite());
        assert!((power_moment(2.0, f64::INFINITY, -2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let (m, c, r2) = linear_fit(&x, &y).unwrap();
        assert!((m - 2.0).abs() < 1e-14 && (c - 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }
}
