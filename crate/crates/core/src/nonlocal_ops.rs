//! Nonlocal calculus on discrete solutions: normal derivative, Neumann
//! reconstruction, Gauss and integration-by-parts residuals, far-field
//! decay, the `Φ` potential and the `E(r)` scaling integral.

use serde::Serialize;

use crate::assembly::{dirichlet_potential, Discretization, DofMap, ElementKind, Scheme, StiffnessSystem};
use crate::error::{Error, Result};
use crate::fracops::{offset_distances, FractionalOrder};
use crate::geometry::Domain1D;
use crate::quadrature::{integrate_left_singular, linear_fit, power_moment};

/// Coefficients over every free DOF of a discretization.
#[derive(Debug, Clone)]
pub struct DiscreteFunction<'a> {
    pub disc: &'a Discretization,
    pub dofs: &'a DofMap,
    pub coeffs: Vec<f64>,
}

/// `u = c0 + c1·y` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPiece {
    pub lo: f64,
    pub hi: f64,
    pub c0: f64,
    pub c1: f64,
}

impl LinearPiece {
    pub fn eval(&self, y: f64) -> f64 {
        self.c0 + self.c1 * y
    }

    /// `∫ u(y) |x - y|^{-(1+2s)} dy` for `x` outside the piece.
    pub fn kernel_moment(&self, x: f64, s: f64) -> f64 {
        let (d0, d1, sign) = if x <= self.lo {
            (self.lo - x, self.hi - x, 1.0)
        } else {
            (x - self.hi, x - self.lo, -1.0)
        };
        // y = x + sign·t
        self.eval(x) * power_moment(d0, d1, -1.0 - 2.0 * s) + self.c1 * sign * power_moment(d0, d1, -2.0 * s)
    }

    /// `∫ u(y) dy`.
    pub fn integral(&self) -> f64 {
        let (lo, hi) = (self.lo, self.hi);
        self.c0 * (hi - lo) + 0.5 * self.c1 * (hi * hi - lo * lo)
    }
}

impl<'a> DiscreteFunction<'a> {
    pub fn new(disc: &'a Discretization, dofs: &'a DofMap, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dofs.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                dofs.len(),
                coeffs.len()
            )));
        }
        Ok(DiscreteFunction { disc, dofs, coeffs })
    }

    fn coeff(&self, dof: Option<usize>) -> f64 {
        dof.map_or(0.0, |d| self.coeffs[d])
    }

    /// Representation of `u` on one element.
    pub fn piece(&self, element: usize) -> LinearPiece {
        let e = &self.disc.elements[element];
        let [d0, d1] = self.dofs.element_dofs(self.disc, element);
        match self.dofs.scheme {
            Scheme::P0 => LinearPiece { lo: e.lo, hi: e.hi, c0: self.coeff(d0), c1: 0.0 },
            Scheme::P1 => {
                let (u0, u1) = (self.coeff(d0), self.coeff(d1));
                let c1 = (u1 - u0) / e.len();
                LinearPiece { lo: e.lo, hi: e.hi, c0: u0 - c1 * e.lo, c1 }
            }
        }
    }

    pub fn omega_pieces(&self) -> Vec<LinearPiece> {
        self.disc.omega_elements().map(|(i, _)| self.piece(i)).collect()
    }

    /// `(1/|Ω|) ∫_Ω u`.
    pub fn mean(&self) -> f64 {
        self.omega_pieces().iter().map(LinearPiece::integral).sum::<f64>() / self.disc.omega().length()
    }

    /// Value at an exterior point: the mesh where there is one, 0 on `D`,
    /// the continuum reconstruction on Neumann regions past the collar.
    pub fn exterior_value(&self, x: f64, order: &FractionalOrder) -> Result<f64> {
        let omega = self.disc.omega();
        check_exterior(&omega, x)?;
        if let Some(i) = self
            .disc
            .elements
            .iter()
            .position(|e| e.kind == ElementKind::Neumann && e.lo <= x && x <= e.hi)
        {
            return Ok(self.piece(i).eval(x));
        }
        if self.disc.snapped.dirichlet.contains(x) {
            return Ok(0.0);
        }
        neumann_value(self, x, order)
    }
}

fn check_exterior(omega: &Domain1D, x: f64) -> Result<()> {
    if x == omega.a || x == omega.b {
        return Err(Error::OnBoundary(x));
    }
    if omega.a < x && x < omega.b {
        return Err(Error::InvalidParameter(format!("{x} lies inside the domain")));
    }
    Ok(())
}

fn omega_mass(omega: &Domain1D, x: f64, s: f64) -> f64 {
    let p = -1.0 - 2.0 * s;
    if x < omega.a {
        power_moment(omega.a - x, omega.b - x, p)
    } else {
        power_moment(x - omega.b, x - omega.a, p)
    }
}

/// `a ∫_Ω (u(x) - u(y)) |x - y|^{-(1+2s)} dy`.
pub fn nonlocal_normal(u: &DiscreteFunction, x: f64, order: &FractionalOrder) -> Result<f64> {
    let omega = u.disc.omega();
    check_exterior(&omega, x)?;
    let ux = u.exterior_value(x, order)?;
    let moments: f64 = u.omega_pieces().iter().map(|p| p.kernel_moment(x, order.s)).sum();
    Ok(order.a_ns * (ux * omega_mass(&omega, x, order.s) - moments))
}

/// `∫_Ω u k(x, ·) / ∫_Ω k(x, ·)`: the exterior value making `N_s u(x) = 0`.
pub fn neumann_value(u: &DiscreteFunction, x: f64, order: &FractionalOrder) -> Result<f64> {
    let omega = u.disc.omega();
    check_exterior(&omega, x)?;
    let moments: f64 = u.omega_pieces().iter().map(|p| p.kernel_moment(x, order.s)).sum();
    Ok(moments / omega_mass(&omega, x, order.s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarFieldRate {
    pub points: Vec<f64>,
    /// `|neumann_value(x) - mean(u)|`.
    pub deviations: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Log-log slope of the deviation of the reconstruction from the mean.
pub fn farfield_rate(u: &DiscreteFunction, order: &FractionalOrder, points: &[f64]) -> Result<FarFieldRate> {
    let mean = u.mean();
    let mut deviations = Vec::with_capacity(points.len());
    for &x in points {
        deviations.push((neumann_value(u, x, order)? - mean).abs());
    }
    let scale = mean.abs().max(f64::MIN_POSITIVE);
    if deviations.iter().any(|d| *d <= 1e-13 * scale) {
        return Err(Error::DegenerateData("deviation from the mean vanishes".into()));
    }
    let lx: Vec<f64> = points.iter().map(|x| x.abs().ln()).collect();
    let ly: Vec<f64> = deviations.iter().map(|d| d.ln()).collect();
    let (slope, intercept, r2) =
        linear_fit(&lx, &ly).ok_or_else(|| Error::DegenerateData("need two distinct points".into()))?;
    Ok(FarFieldRate {
        points: points.to_vec(),
        deviations,
        slope,
        intercept,
        r2,
    })
}

fn abs_weighted_sum(system: &StiffnessSystem, u: &[f64]) -> f64 {
    let abs_u: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    let ni = system.n_interior();
    let ne = system.n_exterior();
    let mut total = 0.0;
    for r in 0..ni {
        for c in 0..ni {
            total += system.k_ii[(r, c)].abs() * abs_u[c];
        }
        for c in 0..ne {
            // K_IE and its transpose
            total += system.k_ie[(r, c)].abs() * (abs_u[ni + c] + abs_u[r]);
        }
    }
    for c in 0..ne {
        total += system.k_ee_diag[c].abs() * abs_u[ni + c];
        if c + 1 < ne {
            total += system.k_ee_off[c].abs() * (abs_u[ni + c] + abs_u[ni + c + 1]);
        }
    }
    total
}

/// `|𝟙ᵀ K u + gᵀu|` relative to `Σ |K_ij| |u_j|`: the discrete
/// `∫_Ω (-Δ)ˢu + ∫_{Ωᶜ} N_s u`, with `g` the flux into the unmeshed
/// Dirichlet set.
pub fn gauss_residual(system: &StiffnessSystem, u: &[f64]) -> f64 {
    let flux: f64 = system.dirichlet_flux.iter().zip(u).map(|(g, v)| g * v).sum();
    let total: f64 = system.apply(u).iter().sum::<f64>() + flux;
    let scale = abs_weighted_sum(system, u);
    if scale == 0.0 {
        0.0
    } else {
        total.abs() / scale
    }
}

/// Compares `uᵀ K v` (the bilinear form) with the split
/// `v_Iᵀ (K u)_I + v_Eᵀ (K u)_E`, relative to `|v|ᵀ |K| |u|`.
pub fn parts_residual(system: &StiffnessSystem, u: &[f64], v: &[f64]) -> f64 {
    let ni = system.n_interior();
    let form: f64 = system.apply(v).iter().zip(u).map(|(a, b)| a * b).sum();
    let ku = system.apply(u);
    let interior: f64 = ku[..ni].iter().zip(&v[..ni]).map(|(a, b)| a * b).sum();
    let exterior: f64 = ku[ni..].iter().zip(&v[ni..]).map(|(a, b)| a * b).sum();
    let abs_v: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let abs_ku: f64 = {
        let n = u.len();
        let full = system.full_matrix();
        (0..n)
            .map(|r| abs_v[r] * (0..n).map(|c| full[(r, c)].abs() * u[c].abs()).sum::<f64>())
            .sum()
    };
    let gap = (form - interior - exterior).abs();
    if abs_ku == 0.0 {
        gap
    } else {
        gap / abs_ku
    }
}

/// Largest mesh accepted by [`brute_force_energy`].
pub const BRUTE_FORCE_MAX_ELEMENTS: usize = 40;

/// `(a/2) ∬_{Q_Ω} (u(x) - u(y))² k` by adaptive quadrature of a pointwise
/// closed-form inner integral, independent of the assembly formulas.
pub fn brute_force_energy(u: &DiscreteFunction, order: &FractionalOrder) -> Result<f64> {
    let disc = u.disc;
    if disc.elements.len() > BRUTE_FORCE_MAX_ELEMENTS {
        return Err(Error::InvalidParameter(format!(
            "brute force is limited to {BRUTE_FORCE_MAX_ELEMENTS} elements"
        )));
    }
    let s = order.s;
    let pieces: Vec<(LinearPiece, ElementKind)> = disc
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| (u.piece(i), e.kind))
        .collect();
    let dirichlet = &disc.snapped.dirichlet;
    // ∫_f (u(y) - u(x))² |x-y|^{-1-2s} dy at x = anchor + offset, with
    // u(y) - u(x) = α + β (y - x).
    let inner = |anchor: f64, offset: f64, ux: f64, f: &LinearPiece| -> f64 {
        let x = anchor + offset;
        let beta = f.c1;
        let (lo_off, hi_off) = (f.lo - anchor, f.hi - anchor);
        if lo_off < offset && offset < hi_off {
            let q = 1.0 - 2.0 * s;
            return beta * beta * (power_moment(0.0, offset - lo_off, q) + power_moment(0.0, hi_off - offset, q));
        }
        let alpha = f.eval(x) - ux;
        let (d0, d1) = offset_distances(f.lo, f.hi, anchor, offset);
        let sign = if hi_off <= offset { -1.0 } else { 1.0 };
        let mut v = beta * beta * power_moment(d0, d1, 1.0 - 2.0 * s);
        if alpha != 0.0 {
            v += alpha * alpha * power_moment(d0, d1, -1.0 - 2.0 * s)
                + 2.0 * alpha * beta * sign * power_moment(d0, d1, -2.0 * s);
        }
        v
    };
    let exponent = match disc.scheme {
        Scheme::P0 => -2.0 * s,
        Scheme::P1 => 0.0,
    };
    let mut total = 0.0;
    for (e, kind) in &pieces {
        if *kind != ElementKind::Omega {
            continue;
        }
        let density = |anchor: f64, offset: f64| -> f64 {
            let ux = e.eval(anchor + offset);
            let mut acc = 0.0;
            for (f, fk) in &pieces {
                let w = if *fk == ElementKind::Omega { 1.0 } else { 2.0 };
                acc += w * inner(anchor, offset, ux, f);
            }
            acc + 2.0 * ux * ux * dirichlet_potential(dirichlet, anchor, offset, s)
        };
        let half = 0.5 * (e.hi - e.lo);
        total += integrate_left_singular(|t| density(e.lo, t), 0.0, half, exponent, 1e-12)?;
        total += integrate_left_singular(|t| density(e.hi, -t), 0.0, half, exponent, 1e-12)?;
    }
    Ok(0.5 * order.a_ns * total)
}

/// `Φ(x) = ∫_Ω φ(y) |x - y|^{-(1+2s)} dy`.
pub fn phi_potential(phi: &DiscreteFunction, x: f64, order: &FractionalOrder) -> Result<f64> {
    check_exterior(&phi.disc.omega(), x)?;
    Ok(phi.omega_pieces().iter().map(|p| p.kernel_moment(x, order.s)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityRow {
    pub radius: f64,
    /// `∫_{Ωᶜ ∩ (−R, R)} Φ`.
    pub integral: f64,
    /// Upper bound on `∫_{|x| > R} Φ`.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityTable {
    pub rows: Vec<IntegrabilityRow>,
    /// `∫_{Ωᶜ} Φ`.
    pub total: f64,
}

impl IntegrabilityTable {
    /// Increasing in `R`, and each later value within the earlier tail bound.
    pub fn is_cauchy(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].integral >= w[0].integral)
            && self.rows.iter().enumerate().all(|(i, r)| {
                self.rows[i..]
                    .iter()
                    .chain(std::iter::once(&IntegrabilityRow { radius: f64::INFINITY, integral: self.total, tail_bound: 0.0 }))
                    .all(|later| later.integral - r.integral <= r.tail_bound * (1.0 + 1e-9) + 1e-14)
            })
    }
}

/// `∫_e (c0 + c1 y) (y - c)^{-2s}` with `c` at or left of the piece.
fn piece_power_right(p: &LinearPiece, c: f64, s: f64) -> f64 {
    let (t0, t1) = (p.lo - c, p.hi - c);
    p.eval(c) * power_moment(t0, t1, -2.0 * s) + p.c1 * power_moment(t0, t1, 1.0 - 2.0 * s)
}

/// `∫_e (c0 + c1 y) (c - y)^{-2s}` with `c` at or right of the piece.
fn piece_power_left(p: &LinearPiece, c: f64, s: f64) -> f64 {
    let (t0, t1) = (c - p.hi, c - p.lo);
    p.eval(c) * power_moment(t0, t1, -2.0 * s) - p.c1 * power_moment(t0, t1, 1.0 - 2.0 * s)
}

/// `∫_{Ωᶜ ∩ (−R, R)} Φ` for each radius, exactly: after swapping the order
/// of integration the `x` integral is elementary.
pub fn phi_integrability(phi: &DiscreteFunction, order: &FractionalOrder, radii: &[f64]) -> Result<IntegrabilityTable> {
    let omega = phi.disc.omega();
    let s = order.s;
    let pieces = phi.omega_pieces();
    let near: f64 = pieces
        .iter()
        .map(|p| piece_power_right(p, omega.a, s) + piece_power_left(p, omega.b, s))
        .sum::<f64>()
        / (2.0 * s);
    if !near.is_finite() {
        return Err(Error::DivergentIntegral("Φ is not integrable near the boundary".into()));
    }
    let mass: f64 = pieces.iter().map(LinearPiece::integral).sum();
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > omega.a.abs().max(omega.b.abs())) {
            return Err(Error::InvalidParameter(format!("radius {r} does not contain the domain")));
        }
        let far: f64 = pieces
            .iter()
            .map(|p| piece_power_right(p, -r, s) + piece_power_left(p, r, s))
            .sum::<f64>()
            / (2.0 * s);
        let tail_bound = mass.abs() * ((r - omega.b).powf(-2.0 * s) + (r + omega.a).powf(-2.0 * s)) / (2.0 * s);
        rows.push(IntegrabilityRow { radius: r, integral: near - far, tail_bound });
    }
    Ok(IntegrabilityTable { rows, total: near })
}

/// Volume of the unit ball in `R^d`, `d ∈ {0, 1, 2}`.
fn slice_volume(dim: usize, radius: f64) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0 * radius,
        _ => std::f64::consts::PI * radius * radius,
    }
}

/// `E(r) = ∫_{B_r} x_N^{-2s} dx` for the ball of radius `r` tangent to
/// `{x_N = 0}`, via the slice profile `∫_0^{2r} t^{-2s} |B^{N-1}(√(2rt - t²))| dt`.
pub fn e_of_r(r: f64, s: f64, dimension: usize, tol: f64) -> Result<f64> {
    if !(dimension == 1 || dimension == 2 || dimension == 3) {
        return Err(Error::InvalidParameter(format!("dimension {dimension} not supported")));
    }
    if !(r > 0.0 && r <= 0.25) {
        return Err(Error::InvalidParameter(format!("r must lie in (0, 1/4], got {r}")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s must lie in (0,1), got {s}")));
    }
    let n = dimension as f64;
    if s >= (n + 1.0) / 4.0 {
        return Err(Error::DivergentIntegral(format!(
            "E(r) is infinite for s = {s} >= (N+1)/4 = {}",
            (n + 1.0) / 4.0
        )));
    }
    let slice = |t: f64| slice_volume(dimension - 1, (2.0 * r * t - t * t).max(0.0).sqrt());
    let f = |t: f64| t.powf(-2.0 * s) * slice(t);
    let half_power = (n - 1.0) / 2.0;
    let near = integrate_left_singular(f, 0.0, r, half_power - 2.0 * s, tol)?;
    let far = integrate_left_singular(|v| f(2.0 * r - v), 0.0, r, half_power, tol)?;
    Ok(near + far)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EofRSweep {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `max/min` of `E(r)/r^{N-2s}` over the sweep, minus 1.
    pub prefactor_spread: f64,
}

pub fn e_of_r_sweep(s: f64, dimension: usize, radii: &[f64], tol: f64) -> Result<EofRSweep> {
    let values = radii.iter().map(|&r| e_of_r(r, s, dimension, tol)).collect::<Result<Vec<_>>>()?;
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&lx, &ly).ok_or_else(|| Error::DegenerateData("need two radii".into()))?;
    let expo = dimension as f64 - 2.0 * s;
    let pref: Vec<f64> = radii.iter().zip(&values).map(|(r, v)| v / r.powf(expo)).collect();
    let max = pref.iter().cloned().fold(f64::MIN, f64::max);
    let min = pref.iter().cloned().fold(f64::MAX, f64::min);
    Ok(EofRSweep {
        radii: radii.to_vec(),
        values,
        slope,
        intercept,
        r2,
        prefactor_spread: max / min - 1.0,
    })
}
