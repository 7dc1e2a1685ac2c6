//! Kernel-level fractional calculus.
//!
//! Everything here works with the kernel `|x - y|^{-(N + 2s)}` and its
//! normalization constant `a_{N,s}`. In one dimension the double integrals
//! of the kernel over pairs of intervals have closed forms, which the
//! assembly code relies on; in two dimensions only the quantities needed
//! by the scaling oracles are provided.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_left_singular, power_moment, DEFAULT_TOL};

/// Dimension `N`, exponent `s` and the normalization constant `a_{N,s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalOrder {
    pub dimension: usize,
    pub s: f64,
    pub a_ns: f64,
}

impl FractionalOrder {
    /// Builds the order, computing `a_{N,s}` from its defining integral.
    pub fn new(dimension: usize, s: f64) -> Result<Self> {
        let c = normalization_constant(dimension, s, 1e-10)?;
        Ok(FractionalOrder {
            dimension,
            s,
            a_ns: c.value,
        })
    }

    /// Exponent of the kernel, `N + 2s`.
    pub fn kernel_exponent(&self) -> f64 {
        self.dimension as f64 + 2.0 * self.s
    }

    pub fn kernel(&self, r: f64) -> f64 {
        r.powf(-self.kernel_exponent())
    }

    pub(crate) fn require_1d(&self) -> Result<()> {
        if self.dimension != 1 {
            return Err(Error::InvalidParameter(format!(
                "operation is one-dimensional, got N = {}",
                self.dimension
            )));
        }
        Ok(())
    }
}

fn check_order(dimension: usize, s: f64) -> Result<()> {
    if !(dimension == 1 || dimension == 2) {
        return Err(Error::InvalidParameter(format!(
            "dimension must be 1 or 2, got {dimension}"
        )));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s must lie in (0,1), got {s}")));
    }
    Ok(())
}

/// `a_{N,s}` together with the Gamma-function expression it is commonly
/// quoted with. The two differ by a constant factor (2 in every case we
/// have evaluated); `value` is the reciprocal of the defining integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationConstant {
    pub value: f64,
    pub gamma_form: f64,
    /// `value / gamma_form`.
    pub ratio: f64,
}

/// Reciprocal of `∫_{R^N} (1 - cos ξ₁) / |ξ|^{N+2s} dξ`.
///
/// The radial part reduces, after one integration by parts, to
/// `(1/2s) ∫_0^∞ sin t · t^{-2s} dt`, which is summed over half periods and
/// accelerated by repeated averaging of the partial sums. In 2D the
/// transverse direction contributes the factor `∫_R (1 + t²)^{-(1+s)} dt`.
pub fn normalization_constant(dimension: usize, s: f64, tol: f64) -> Result<NormalizationConstant> {
    check_order(dimension, s)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let inner_tol = (tol * 1e-3).max(1e-14);
    let coarse = sine_power_integral(s, 24, inner_tol)?;
    let fine = sine_power_integral(s, 40, inner_tol)?;
    if (coarse - fine).abs() > tol * fine.abs() {
        return Err(Error::NonConvergedQuadrature {
            tol,
            estimate: fine,
            error: (coarse - fine).abs(),
        });
    }
    // ∫_R (1 - cos t)|t|^{-1-2s} dt
    let mut integral = 2.0 * fine / (2.0 * s);
    if dimension == 2 {
        // ∫_R (1+t²)^{-(1+s)} dt = 2 ∫_0^{π/2} sin^{2s} φ dφ
        let transverse =
            2.0 * integrate_left_singular(|phi| phi.sin().powf(2.0 * s), 0.0, FRAC_PI_2, 2.0 * s, inner_tol)?;
        integral *= transverse;
    }
    let value = 1.0 / integral;
    let gamma_form = gamma_closed_form(dimension, s);
    Ok(NormalizationConstant {
        value,
        gamma_form,
        ratio: value / gamma_form,
    })
}

/// `2^{2s-1} π^{-N/2} Γ((N+2s)/2) / |Γ(-s)|`, with `|Γ(-s)| = Γ(1-s)/s`.
pub fn gamma_closed_form(dimension: usize, s: f64) -> f64 {
    let n = dimension as f64;
    2f64.powf(2.0 * s - 1.0) * PI.powf(-n / 2.0) * gamma((n + 2.0 * s) / 2.0) * s / gamma(1.0 - s)
}

/// `∫_0^∞ sin t · t^{-2s} dt` from `terms` half-period pieces past the
/// first, with Euler averaging over the last 16 partial sums.
fn sine_power_integral(s: f64, terms: usize, tol: f64) -> Result<f64> {
    let p = -2.0 * s;
    let f = |t: f64| t.sin() * t.powf(p);
    let first = integrate_left_singular(f, 0.0, PI, 1.0 + p, tol)?;
    let averaging = 16;
    let mut partial = Vec::with_capacity(terms + 1);
    let mut sum = first;
    partial.push(sum);
    for j in 1..=terms {
        let lo = j as f64 * PI;
        sum += integrate(f, lo, lo + PI, tol, 0.0)?;
        partial.push(sum);
    }
    let mut tail: Vec<f64> = partial[partial.len() - averaging..].to_vec();
    while tail.len() > 1 {
        tail = tail.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    Ok(tail[0])
}

/// Closed-form `∫_{[p,q]} ∫_{[r,u]} |x - y|^{-(1 + sigma)} dy dx` for two
/// intervals on the line with `q <= r` (either order accepted). Endpoints
/// may be infinite as long as the integral is finite.
pub(crate) fn interval_pair_integral(a: (f64, f64), b: (f64, f64), sigma: f64) -> Result<f64> {
    let (left, right) = if a.1 <= b.0 {
        (a, b)
    } else if b.1 <= a.0 {
        (b, a)
    } else {
        return Err(Error::InvalidCells(a.0, a.1, b.0, b.1));
    };
    let (p, q) = left;
    let (r, u) = right;
    if p == q || r == u {
        return Ok(0.0);
    }
    if q == r && sigma >= 1.0 {
        return Err(Error::DivergentIntegral(format!(
            "intervals touch at {q} and the kernel exponent 1 + {sigma} is at least 2"
        )));
    }
    let e = -sigma;
    let value = match (p.is_infinite(), u.is_infinite()) {
        (true, true) => {
            return Err(Error::DivergentIntegral("two unbounded intervals".into()));
        }
        (false, true) => power_moment(r - q, r - p, e),
        (true, false) => power_moment(r - q, u - q, e),
        (false, false) => power_moment(r - q, r - p, e) - power_moment(u - q, u - p, e),
    };
    Ok(value / sigma)
}

/// Exact `∫_{cellA} ∫_{cellB} |x - y|^{-(1+2s)} dy dx` in one dimension.
pub fn kernel_cell_integral(cell_a: (f64, f64), cell_b: (f64, f64), order: &FractionalOrder) -> Result<f64> {
    order.require_1d()?;
    interval_pair_integral(cell_a, cell_b, 2.0 * order.s)
}

/// Bounded region used by the pointwise integrability estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Interval { a: f64, b: f64 },
    Disk { center: [f64; 2], radius: f64 },
}

impl Region {
    /// Distance from `x` to the boundary, and whether `x` lies outside.
    fn boundary_distance(&self, x: &[f64]) -> (f64, bool) {
        match *self {
            Region::Interval { a, b } => {
                let x = x[0];
                if x < a {
                    (a - x, true)
                } else if x > b {
                    (x - b, true)
                } else {
                    ((x - a).min(b - x), false)
                }
            }
            Region::Disk { center, radius } => {
                let d = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt();
                ((d - radius).abs(), d > radius)
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Region::Interval { .. } => 1,
            Region::Disk { .. } => 2,
        }
    }
}

/// Surface measure of the unit sphere in `R^N`.
pub fn unit_sphere_area(dimension: usize) -> f64 {
    let n = dimension as f64;
    2.0 * PI.powf(n / 2.0) / gamma(n / 2.0)
}

/// `I(x) = ∫_Ω |x - y|^{-(N+2s)} dy` for `x` outside the closure of `Ω`.
pub fn exterior_mass(x: &[f64], omega: &Region, order: &FractionalOrder) -> Result<f64> {
    if x.len() != omega.dimension() || omega.dimension() != order.dimension {
        return Err(Error::InvalidParameter("dimension mismatch".into()));
    }
    let (dist, outside) = omega.boundary_distance(x);
    if dist == 0.0 {
        return Err(Error::OnBoundary(x[0]));
    }
    if !outside {
        return Err(Error::InvalidParameter("point lies inside the domain".into()));
    }
    let e = -order.kernel_exponent();
    match *omega {
        Region::Interval { a, b } => {
            let x = x[0];
            Ok(if x < a {
                power_moment(a - x, b - x, e)
            } else {
                power_moment(x - b, x - a, e)
            })
        }
        Region::Disk { center, radius } => {
            // Polar coordinates around x: each ray crosses the disk on a
            // chord [r-, r+], contributing ∫ r^{-1-2s} dr.
            let rho = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt();
            let theta_max = (radius / rho).asin();
            let radial = |theta: f64| {
                let c = rho * theta.cos();
                let disc = (radius * radius - (rho * theta.sin()).powi(2)).max(0.0).sqrt();
                power_moment(c - disc, c + disc, -1.0 - 2.0 * order.s)
            };
            // Chord length vanishes like a square root at the tangent ray.
            let half = integrate_left_singular(|phi| radial(theta_max - phi), 0.0, theta_max, 0.5, 1e-10)?;
            Ok(2.0 * half)
        }
    }
}

/// Upper bound `ω_{N-1}/(2s) · dist(x,∂Ω)^{-2s}` on [`exterior_mass`].
pub fn exterior_mass_bound(x: &[f64], omega: &Region, order: &FractionalOrder) -> f64 {
    let (d, _) = omega.boundary_distance(x);
    unit_sphere_area(order.dimension) / (2.0 * order.s) * d.powf(-2.0 * order.s)
}

/// `∫_{cell} I(x) dx` for an exterior cell in one dimension.
pub fn exterior_mass_cell(cell: (f64, f64), omega: (f64, f64), order: &FractionalOrder) -> Result<f64> {
    kernel_cell_integral(cell, omega, order)
}

/// `∫_{|z|>R} |z|^{-(N+2s)} dz = ω_{N-1} R^{-2s} / (2s)`.
pub fn tail_mass(radius: f64, order: &FractionalOrder) -> f64 {
    unit_sphere_area(order.dimension) * radius.powf(-2.0 * order.s) / (2.0 * order.s)
}

/// Modulus of continuity `ω₀` of a boundary graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusOfContinuity {
    /// `t^β`
    Power(f64),
    /// `1/ln(1/t)` near 0, held at `1/2` from `t = e^{-2}` on.
    LogSpine,
    /// Sampled `(t, ω₀(t))`, interpolated log-log.
    Table(Vec<(f64, f64)>),
}

/// Order `Ψ` of an integro-differential kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelOrder {
    /// `t^α`
    Power(f64),
    Table(Vec<(f64, f64)>),
}

const LOG_SPINE_KNEE: f64 = 0.135_335_283_236_612_7; // e^{-2}

impl ModulusOfContinuity {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ModulusOfContinuity::Power(beta) => t.powf(*beta),
            ModulusOfContinuity::LogSpine => {
                if t <= 0.0 {
                    0.0
                } else if t < LOG_SPINE_KNEE {
                    1.0 / (1.0 / t).ln()
                } else {
                    0.5
                }
            }
            ModulusOfContinuity::Table(samples) => table_eval(samples, t),
        }
    }

    /// `(power, log power)` with `ω₀(t) ~ t^power (ln 1/t)^logpower` at 0,
    /// plus whether it is exact.
    fn asymptotics(&self) -> (f64, f64, bool) {
        match self {
            ModulusOfContinuity::Power(beta) => (*beta, 0.0, true),
            ModulusOfContinuity::LogSpine => (0.0, -1.0, true),
            ModulusOfContinuity::Table(samples) => (table_exponent(samples), 0.0, false),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ModulusOfContinuity::Power(beta) if !(*beta > 0.0) => Err(Error::InvalidParameter(format!(
                "modulus exponent must be positive, got {beta}"
            ))),
            ModulusOfContinuity::Table(samples) => validate_table(samples, "modulus"),
            _ => Ok(()),
        }
    }
}

impl KernelOrder {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            KernelOrder::Power(alpha) => t.powf(*alpha),
            KernelOrder::Table(samples) => table_eval(samples, t),
        }
    }

    /// Exponent `e` with `Ψ(1/t) ~ t^e` as `t → 0`.
    fn asymptotics(&self) -> (f64, bool) {
        match self {
            KernelOrder::Power(alpha) => (-alpha, true),
            KernelOrder::Table(samples) => (-table_exponent_at_infinity(samples), false),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            KernelOrder::Power(alpha) if !(*alpha > 0.0) => Err(Error::InvalidParameter(format!(
                "kernel order must be positive, got {alpha}"
            ))),
            KernelOrder::Table(samples) => validate_table(samples, "kernel order"),
            _ => Ok(()),
        }
    }
}

fn validate_table(samples: &[(f64, f64)], what: &str) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter(format!("{what} table needs two samples")));
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
            return Err(Error::InvalidParameter(format!(
                "{what} table must be sorted in t and nondecreasing"
            )));
        }
    }
    if samples.iter().any(|(t, v)| !(*t > 0.0) || !(*v > 0.0)) {
        return Err(Error::InvalidParameter(format!("{what} table needs positive samples")));
    }
    Ok(())
}

fn segment_slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1.ln() - a.1.ln()) / (b.0.ln() - a.0.ln())
}

fn table_exponent(samples: &[(f64, f64)]) -> f64 {
    segment_slope(samples[0], samples[1])
}

fn table_exponent_at_infinity(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len();
    segment_slope(samples[n - 2], samples[n - 1])
}

fn table_eval(samples: &[(f64, f64)], t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let n = samples.len();
    let (lo, hi) = if t <= samples[0].0 {
        (samples[0], samples[1])
    } else if t >= samples[n - 1].0 {
        (samples[n - 2], samples[n - 1])
    } else {
        let i = samples.partition_point(|(x, _)| *x <= t);
        (samples[i - 1], samples[i])
    };
    let slope = segment_slope(lo, hi);
    lo.1 * (t / lo.0).powf(slope)
}

/// Outcome of the Dini-type integrability test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiniOutcome {
    Finite(f64),
    Divergent,
}

/// Classifies `∫_0^1 ω₀(t)/t · Ψ(1/t) dt`.
///
/// The behaviour at 0 is read off as `t^e (ln 1/t)^q`. For the analytic
/// kinds the exponents are exact and the borderline `e = -1` is settled by
/// the logarithmic power; for sampled tables the exponent is estimated and
/// anything within `tol` of `-1` is reported as inconclusive.
pub fn dini_check(omega0: &ModulusOfContinuity, psi: &KernelOrder, tol: f64) -> Result<DiniOutcome> {
    omega0.validate()?;
    psi.validate()?;
    let (w_pow, w_log, w_exact) = omega0.asymptotics();
    let (p_pow, p_exact) = psi.asymptotics();
    // e + 1 = w_pow + p_pow
    let excess = w_pow + p_pow;
    let exact = w_exact && p_exact;
    if !exact && excess.abs() <= tol {
        return Err(Error::Inconclusive(format!(
            "estimated exponent {} is within {tol} of -1",
            excess - 1.0
        )));
    }
    // At the borderline the log factor decides; every supported modulus has
    // log power 0 or -1, neither of which is summable against dt/t.
    let finite = excess > 0.0 || (excess == 0.0 && w_log < -1.0);
    if finite && excess == 0.0 {
        return Err(Error::Inconclusive("borderline exponent with a summable logarithm".into()));
    }
    if !finite {
        return Ok(DiniOutcome::Divergent);
    }
    let integrand = |t: f64| omega0.eval(t) / t * psi.eval(1.0 / t);
    let value = integrate_left_singular(integrand, 0.0, 1.0, excess - 1.0, 1e-12)?;
    Ok(DiniOutcome::Finite(value))
}

/// Near and far distance from `x = anchor + offset` to the interval
/// `[lo, hi]` (which must not contain `x`). Computing from the offset keeps
/// tiny distances exact when `anchor` is an endpoint.
pub(crate) fn offset_distances(lo: f64, hi: f64, anchor: f64, offset: f64) -> (f64, f64) {
    let (lo_off, hi_off) = (lo - anchor, hi - anchor);
    if hi_off <= offset {
        (offset - hi_off, offset - lo_off)
    } else {
        (lo_off - offset, hi_off - offset)
    }
}

/// Two routes to the seminorm of an indicator function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndicatorIdentity {
    /// `∫_{Ωᶜ} I_Ω^α(x) dx`, by quadrature of the pointwise closed form.
    pub lhs: f64,
    /// `½ ∬ (χ_Ω(x) - χ_Ω(y))² |x-y|^{-(1+α)}`, by exact interval-pair integrals.
    pub rhs: f64,
    pub gap: f64,
}

impl IndicatorIdentity {
    pub fn within(&self, tol: f64) -> bool {
        self.gap <= tol * self.lhs.abs()
    }
}

fn check_intervals(omega: &[(f64, f64)]) -> Result<()> {
    if omega.is_empty() {
        return Err(Error::EmptySet);
    }
    for w in omega.windows(2) {
        if !(w[0].1 < w[1].0) {
            return Err(Error::InvalidParameter("intervals must be sorted and disjoint".into()));
        }
    }
    if omega.iter().any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
        return Err(Error::InvalidParameter("intervals must be bounded and nonempty".into()));
    }
    Ok(())
}

/// Checks the indicator-seminorm identity on a finite union of intervals.
pub fn indicator_seminorm_identity(omega: &[(f64, f64)], alpha: f64, tol: f64) -> Result<IndicatorIdentity> {
    check_intervals(omega)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
    }
    // Mass seen from x = anchor + dir·d with the d^{-α}/α singularity of
    // the interval ending at the anchor removed; that part is integrated
    // in closed form below.
    let regular_mass = |anchor: f64, dir: f64, d: f64| -> f64 {
        omega
            .iter()
            .map(|&(a, b)| {
                let (d0, d1) = offset_distances(a, b, anchor, dir * d);
                if a == anchor || b == anchor {
                    -d1.powf(-alpha) / alpha
                } else {
                    power_moment(d0, d1, -1.0 - alpha)
                }
            })
            .sum()
    };
    let singular = |len: f64| len.powf(1.0 - alpha) / (alpha * (1.0 - alpha));
    let qtol = (tol * 1e-2).clamp(1e-13, DEFAULT_TOL);
    let first = omega[0].0;
    let last = omega[omega.len() - 1].1;
    let span = last - first;
    let truncation = 100.0 * span;
    let mut complement: Vec<(f64, f64)> = vec![(f64::NEG_INFINITY, first)];
    complement.extend(omega.windows(2).map(|w| (w[0].1, w[1].0)));
    complement.push((last, f64::INFINITY));

    let mut lhs = 0.0;
    for &(lo, hi) in &complement {
        if lo.is_infinite() {
            let cut = hi - truncation;
            lhs += singular(truncation) + integrate(|d| regular_mass(hi, -1.0, d), 0.0, truncation, qtol, 0.0)?;
            lhs += omega
                .iter()
                .map(|&iv| interval_pair_integral((f64::NEG_INFINITY, cut), iv, alpha))
                .sum::<Result<f64>>()?;
        } else if hi.is_infinite() {
            let cut = lo + truncation;
            lhs += singular(truncation) + integrate(|d| regular_mass(lo, 1.0, d), 0.0, truncation, qtol, 0.0)?;
            lhs += omega
                .iter()
                .map(|&iv| interval_pair_integral(iv, (cut, f64::INFINITY), alpha))
                .sum::<Result<f64>>()?;
        } else {
            let half = 0.5 * (hi - lo);
            lhs += 2.0 * singular(half);
            lhs += integrate(|d| regular_mass(lo, 1.0, d), 0.0, half, qtol, 0.0)?;
            lhs += integrate(|d| regular_mass(hi, -1.0, d), 0.0, half, qtol, 0.0)?;
        }
    }

    let mut rhs = 0.0;
    for &iv in omega {
        for &piece in &complement {
            rhs += interval_pair_integral(iv, piece, alpha)?;
        }
    }
    Ok(IndicatorIdentity {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(s: f64) -> FractionalOrder {
        FractionalOrder::new(1, s).unwrap()
    }

    /// Tensor Gauss on a separated pair, independent of the closed form.
    fn brute_pair(p: f64, q: f64, r: f64, u: f64, s: f64) -> f64 {
        let rule = crate::quadrature::gauss_legendre(40);
        let mut sum = 0.0;
        for (x, wx) in rule.mapped(p, q) {
            for (y, wy) in rule.mapped(r, u) {
                sum += wx * wy * (y - x).abs().powf(-1.0 - 2.0 * s);
            }
        }
        sum
    }

    #[test]
    fn normalization_matches_reference_values() {
        // Reference values: reciprocal of 2·(-Γ(-2s) cos πs), 40-digit arithmetic.
        let c = normalization_constant(1, 0.5, 1e-8).unwrap();
        assert!((c.value - 1.0 / PI).abs() < 1e-8);
        assert!((c.gamma_form - 1.0 / (2.0 * PI)).abs() < 1e-12);
        assert!((c.ratio - 2.0).abs() < 1e-7);
        let c = normalization_constant(1, 0.25, 1e-8).unwrap();
        assert!((c.value - 0.199_471_140_200_716_34).abs() < 1e-8);
        let c = normalization_constant(1, 0.75, 1e-8).unwrap();
        assert!((c.value - 0.299_206_710_301_074_5).abs() < 1e-8);
        let c = normalization_constant(2, 0.5, 1e-8).unwrap();
        assert!((c.value - 1.0 / (2.0 * PI)).abs() < 1e-8);
    }

    #[test]
    fn normalization_is_refinement_stable() {
        let coarse = sine_power_integral(0.25, 24, 1e-13).unwrap();
        let fine = sine_power_integral(0.25, 48, 1e-13).unwrap();
        assert!((coarse - fine).abs() <= 1e-8 * fine.abs());
    }

    #[test]
    fn normalization_rejects_bad_input() {
        assert!(normalization_constant(3, 0.5, 1e-8).is_err());
        assert!(normalization_constant(1, 1.0, 1e-8).is_err());
        assert!(normalization_constant(1, 0.5, 0.0).is_err());
    }

    #[test]
    fn cell_integral_separated_and_touching() {
        let o = order(0.25);
        let v = kernel_cell_integral((0.0, 1.0), (2.0, 3.0), &o).unwrap();
        assert!((v - 0.385_505_268_709_251_2).abs() < 1e-13);
        assert!((v - brute_pair(0.0, 1.0, 2.0, 3.0, 0.25)).abs() < 1e-12);
        let t = kernel_cell_integral((-1.0, 0.0), (0.0, 1.0), &o).unwrap();
        // 8 - 4√2
        assert!((t - (8.0 - 4.0 * 2f64.sqrt())).abs() < 1e-13);
        let o6 = order(0.6);
        assert!(matches!(
            kernel_cell_integral((-1.0, 0.0), (0.0, 1.0), &o6),
            Err(Error::DivergentIntegral(_))
        ));
        assert!(matches!(
            kernel_cell_integral((0.0, 1.0), (0.5, 2.0), &o),
            Err(Error::InvalidCells(..))
        ));
    }

    #[test]
    fn cell_integral_log_limit_at_one_half() {
        let o = order(0.5);
        let v = kernel_cell_integral((0.0, 1.0), (10.0, 11.0), &o).unwrap();
        assert!((v - (100.0f64 / 99.0).ln()).abs() < 1e-15);
        let v = kernel_cell_integral((0.0, 1.0), (2.0, 3.0), &o).unwrap();
        assert!((v - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!((v - brute_pair(0.0, 1.0, 2.0, 3.0, 0.5)).abs() < 1e-12);
        // continuity across s = 1/2
        let below = interval_pair_integral((0.0, 1.0), (2.0, 3.0), 1.0 - 1e-9).unwrap();
        assert!((below - v).abs() < 1e-8);
    }

    #[test]
    fn cell_integral_with_unbounded_cell() {
        let o = order(0.3);
        // ∫_0^1 ∫_2^∞ (y-x)^{-1.6} = ∫_0^1 (2-x)^{-0.6}/0.6 dx
        let exact = (2f64.powf(0.4) - 1.0) / (0.4 * 0.6);
        let v = kernel_cell_integral((0.0, 1.0), (2.0, f64::INFINITY), &o).unwrap();
        assert!((v - exact).abs() < 1e-14);
        let w = kernel_cell_integral((f64::NEG_INFINITY, -1.0), (0.0, 1.0), &o).unwrap();
        assert!((w - exact).abs() < 1e-14);
    }

    #[test]
    fn exterior_mass_examples() {
        let o = order(0.25);
        let omega = Region::Interval { a: 0.0, b: 1.0 };
        let v = exterior_mass(&[-0.25], &omega, &o).unwrap();
        assert!((v - 2.0 * (0.25f64.powf(-0.5) - 1.25f64.powf(-0.5))).abs() < 1e-14);
        assert!(v <= exterior_mass_bound(&[-0.25], &omega, &o));
        assert!(matches!(exterior_mass(&[0.0], &omega, &o), Err(Error::OnBoundary(_))));
        let o6 = order(0.6);
        assert!(exterior_mass(&[-0.01], &omega, &o6).unwrap().is_finite());
        assert!(matches!(
            exterior_mass_cell((-0.1, 0.0), (0.0, 1.0), &o6),
            Err(Error::DivergentIntegral(_))
        ));
        let mut prev = f64::INFINITY;
        for d in [0.5, 1.0, 4.0, 16.0, 64.0] {
            let m = exterior_mass(&[-d], &omega, &o).unwrap();
            assert!(m <= d.powf(-0.5) / 0.25 && m < prev);
            prev = m;
        }
    }

    #[test]
    fn exterior_mass_disk_far_and_bounds() {
        let o = FractionalOrder::new(2, 0.4).unwrap();
        let disk = Region::Disk { center: [0.0, 0.0], radius: 1.0 };
        let far = exterior_mass(&[100.0, 0.0], &disk, &o).unwrap();
        // |B_1| / 100^{2.8}, corrected to second order by the averaging of |x-y|^{-2.8}
        let approx = PI * 100f64.powf(-2.8);
        assert!((far / approx - 1.0).abs() < 1e-3);
        for r in [1.01, 1.1, 2.0, 5.0] {
            let x = [r, 0.0];
            let m = exterior_mass(&x, &disk, &o).unwrap();
            assert!(m <= exterior_mass_bound(&x, &disk, &o));
            // same order from below near the boundary
            let d = r - 1.0;
            assert!(m >= 0.05 * d.powf(-0.8) / (1.0 + d).powf(2.0 + 0.8) );
        }
    }

    #[test]
    fn tail_mass_values() {
        assert!((tail_mass(1.0, &order(0.5)) - 2.0).abs() < 1e-15);
        assert!((tail_mass(4.0, &order(0.5)) - 0.5).abs() < 1e-15);
        assert!((tail_mass(2.0, &order(0.25)) - 2f64.powf(-0.5) / 0.25).abs() < 1e-14);
    }

    #[test]
    fn dini_classification() {
        let v = dini_check(&ModulusOfContinuity::Power(0.6), &KernelOrder::Power(0.3), 1e-3).unwrap();
        match v {
            DiniOutcome::Finite(x) => assert!((x - 10.0 / 3.0).abs() < 1e-8),
            DiniOutcome::Divergent => panic!("expected finite"),
        }
        assert_eq!(
            dini_check(&ModulusOfContinuity::Power(0.3), &KernelOrder::Power(0.3), 1e-3).unwrap(),
            DiniOutcome::Divergent
        );
        for alpha in [0.01, 0.1, 0.5, 2.0] {
            assert_eq!(
                dini_check(&ModulusOfContinuity::LogSpine, &KernelOrder::Power(alpha), 1e-3).unwrap(),
                DiniOutcome::Divergent
            );
        }
    }

    #[test]
    fn dini_tables() {
        let table: Vec<(f64, f64)> = [1e-6, 1e-4, 1e-2, 1.0].iter().map(|t: &f64| (*t, t.powf(0.8))).collect();
        match dini_check(&ModulusOfContinuity::Table(table.clone()), &KernelOrder::Power(0.3), 1e-3).unwrap() {
            DiniOutcome::Finite(x) => assert!((x - 2.0).abs() < 1e-6),
            DiniOutcome::Divergent => panic!(),
        }
        assert!(matches!(
            dini_check(&ModulusOfContinuity::Table(table), &KernelOrder::Power(0.8), 1e-3),
            Err(Error::Inconclusive(_))
        ));
        let bad = vec![(0.1, 1.0), (0.2, 0.5)];
        assert!(dini_check(&ModulusOfContinuity::Table(bad), &KernelOrder::Power(0.8), 1e-3).is_err());
    }

    #[test]
    fn indicator_identity_unit_interval() {
        let id = indicator_seminorm_identity(&[(0.0, 1.0)], 0.5, 1e-8).unwrap();
        assert!((id.lhs - 8.0).abs() < 1e-6, "{id:?}");
        assert!((id.rhs - 8.0).abs() < 1e-12, "{id:?}");
        assert!(id.within(1e-8));
    }

    #[test]
    fn indicator_identity_dilation_and_unions() {
        let one = indicator_seminorm_identity(&[(0.0, 1.0)], 0.5, 1e-8).unwrap();
        let two = indicator_seminorm_identity(&[(0.0, 2.0)], 0.5, 1e-8).unwrap();
        assert!((two.lhs / one.lhs - 2f64.sqrt()).abs() < 1e-7);
        for alpha in [0.2, 0.5, 0.8] {
            let id = indicator_seminorm_identity(&[(-3.0, -1.0), (0.0, 0.5), (2.0, 5.0)], alpha, 1e-8).unwrap();
            assert!(id.within(1e-7), "alpha={alpha} {id:?}");
        }
        let mut prev = 0.0;
        for alpha in [0.9, 0.95, 0.99] {
            let id = indicator_seminorm_identity(&[(0.0, 1.0)], alpha, 1e-8).unwrap();
            assert!(id.rhs > prev && id.within(1e-6));
            prev = id.rhs;
        }
    }
}
