//! Meshing and assembly of the nonlocal stiffness and mass matrices.
//!
//! The energy is `(a/2) ∬_{Q_Ω} (u(x) - u(y))² k(x, y)` with
//! `Q_Ω = ℝ² ∖ (Ωᶜ)²`. Only `Ω` and the Neumann part of the collar are
//! meshed: `u` vanishes on `D`, so every `Ω × D` pair reduces to
//! `a ∫_Ω u(x)² T_D(x) dx` with `T_D(x) = ∫_D k(x, y) dy` known in closed
//! form over the whole (possibly unbounded) Dirichlet set. Neumann regions
//! beyond the collar are dropped.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::{interval_pair_integral, offset_distances, FractionalOrder};
use crate::geometry::{Domain1D, ExteriorPartition, ExteriorSet, Label};
use crate::quadrature::{gauss_legendre, power_moment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Piecewise constants on cells; needs `s < 1/2`.
    P0,
    /// Continuous piecewise linears across `∂Ω`.
    P1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    /// Requested mesh size; snapped to `|Ω|/n`.
    pub h: f64,
    /// Collar half-width `L`; the grid spans `[a - L, b + L]`.
    pub collar: f64,
    pub scheme: Scheme,
    /// Widen the collar until every finite partition endpoint is inside it.
    pub auto_collar: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Omega,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Element {
    pub lo: f64,
    pub hi: f64,
    pub kind: ElementKind,
    pub nodes: [usize; 2],
}

impl Element {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Interior,
    ExteriorNeumann,
    Dirichlet,
}

/// Where partition endpoints moved when snapped to the grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SnapReport {
    /// `(original, snapped)` for every endpoint that moved.
    pub moved: Vec<(f64, f64)>,
    pub max_displacement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discretization {
    pub partition: ExteriorPartition,
    /// The partition after snapping; this is what gets assembled.
    pub snapped: ExteriorPartition,
    pub h: f64,
    pub collar: f64,
    pub scheme: Scheme,
    pub far_left: Label,
    pub far_right: Label,
    pub nodes: Vec<f64>,
    pub node_class: Vec<NodeClass>,
    /// Sorted by position; `Ω` elements and meshed Neumann elements.
    pub elements: Vec<Element>,
    pub snap: SnapReport,
}

impl Discretization {
    pub fn omega(&self) -> Domain1D {
        self.partition.omega
    }

    pub fn omega_elements(&self) -> impl Iterator<Item = (usize, &Element)> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind == ElementKind::Omega)
    }

    pub fn neumann_elements(&self) -> impl Iterator<Item = (usize, &Element)> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind == ElementKind::Neumann)
    }
}

/// Distance the collar must reach on each side so that every finite
/// partition endpoint lies inside the grid.
pub fn required_collar(partition: &ExteriorPartition) -> (f64, f64) {
    let omega = partition.omega;
    let mut left: f64 = 0.0;
    let mut right: f64 = 0.0;
    for set in [&partition.dirichlet, &partition.neumann] {
        for i in set.intervals() {
            for e in [i.lo(), i.hi()] {
                if !e.is_finite() {
                    continue;
                }
                if e <= omega.a {
                    left = left.max(omega.a - e);
                } else if e >= omega.b {
                    right = right.max(e - omega.b);
                }
            }
        }
    }
    (left, right)
}

fn labels_beyond(partition: &ExteriorPartition, lo: f64, hi: f64) -> Vec<Label> {
    let mut out = Vec::new();
    for label in [Label::Dirichlet, Label::Neumann] {
        if partition.set(label).measure_within(lo, hi) > 0.0 {
            out.push(label);
        }
    }
    out
}

/// Builds the uniform grid and classifies elements and nodes.
pub fn build_mesh(partition: &ExteriorPartition, order: &FractionalOrder, params: &MeshParams) -> Result<Discretization> {
    order.require_1d()?;
    let omega = partition.omega;
    let len = omega.length();
    if !(params.h > 0.0 && params.h.is_finite()) {
        return Err(Error::InvalidParameter(format!("h must be positive, got {}", params.h)));
    }
    if !(params.collar >= 4.0 * len) {
        return Err(Error::InvalidParameter(format!(
            "collar {} is shorter than 4|Ω| = {}",
            params.collar,
            4.0 * len
        )));
    }
    if params.scheme == Scheme::P0 && order.s >= 0.5 {
        return Err(Error::IncompatibleScheme(order.s));
    }
    let n_omega = ((len / params.h).round() as i64).max(1);
    let h = len / n_omega as f64;

    let (need_left, need_right) = required_collar(partition);
    let mut collar = params.collar;
    if params.auto_collar {
        collar = collar.max(need_left).max(need_right);
    }
    let m = (collar / h - 1e-9).ceil() as i64;
    let collar = m as f64 * h;
    let (lo_edge, hi_edge) = (omega.a - collar, omega.b + collar);
    let left_labels = labels_beyond(partition, f64::NEG_INFINITY, lo_edge);
    let right_labels = labels_beyond(partition, hi_edge, f64::INFINITY);
    if left_labels.len() != 1 {
        return Err(Error::MixedFarField { side: "left" });
    }
    if right_labels.len() != 1 {
        return Err(Error::MixedFarField { side: "right" });
    }

    for set in [&partition.dirichlet, &partition.neumann] {
        for i in set.intervals() {
            let l = i.length();
            if l.is_finite() && h > 0.25 * l {
                return Err(Error::UnderResolved { h, feature: l });
            }
        }
    }

    // Grid index j ↦ a + j h, with j = n_omega pinned to b.
    let coord = |j: i64| -> f64 {
        if j == n_omega {
            omega.b
        } else {
            omega.a + j as f64 * h
        }
    };
    let index_of = |x: f64| -> i64 { ((x - omega.a) / h).round() as i64 };
    let mut snap = SnapReport::default();
    let mut snap_set = |set: &ExteriorSet| -> Result<ExteriorSet> {
        let mut out = Vec::new();
        for i in set.intervals() {
            let mut ends = [i.lo(), i.hi()];
            for e in ends.iter_mut() {
                if e.is_finite() && *e >= lo_edge - 1e-12 && *e <= hi_edge + 1e-12 {
                    let snapped = coord(index_of(*e));
                    if snapped != *e && !snap.moved.contains(&(*e, snapped)) {
                        let d = (snapped - *e).abs();
                        snap.moved.push((*e, snapped));
                        snap.max_displacement = snap.max_displacement.max(d);
                    }
                    *e = snapped;
                }
            }
            if ends[0] < ends[1] {
                out.push((ends[0], ends[1]));
            }
        }
        ExteriorSet::new(out)
    };
    let dirichlet = snap_set(&partition.dirichlet)?;
    let neumann = snap_set(&partition.neumann)?;
    let snapped = ExteriorPartition::new(omega, dirichlet, neumann)?;

    // Element index ranges [j0, j1) on the grid.
    let mut ranges: Vec<(i64, i64, ElementKind)> = vec![(0, n_omega, ElementKind::Omega)];
    let (j_lo, j_hi) = (-m, n_omega + m);
    for i in snapped.neumann.intervals() {
        let j0 = if i.lo().is_finite() { index_of(i.lo()).max(j_lo) } else { j_lo };
        let j1 = if i.hi().is_finite() { index_of(i.hi()).min(j_hi) } else { j_hi };
        if j0 < j1 {
            ranges.push((j0, j1, ElementKind::Neumann));
        }
    }
    ranges.sort_by_key(|r| r.0);

    let mut node_index: Vec<i64> = Vec::new();
    for &(j0, j1, _) in &ranges {
        node_index.extend(j0..=j1);
    }
    node_index.sort_unstable();
    node_index.dedup();
    let node_id = |j: i64| node_index.binary_search(&j).expect("node on grid");
    let nodes: Vec<f64> = node_index.iter().map(|&j| coord(j)).collect();

    let mut elements = Vec::new();
    for &(j0, j1, kind) in &ranges {
        for j in j0..j1 {
            elements.push(Element {
                lo: coord(j),
                hi: coord(j + 1),
                kind,
                nodes: [node_id(j), node_id(j + 1)],
            });
        }
    }

    // A node is Dirichlet when it bounds a Dirichlet interval; otherwise it
    // is interior if it touches an Ω element.
    let mut node_class = vec![NodeClass::ExteriorNeumann; nodes.len()];
    for e in &elements {
        if e.kind == ElementKind::Omega {
            node_class[e.nodes[0]] = NodeClass::Interior;
            node_class[e.nodes[1]] = NodeClass::Interior;
        }
    }
    for i in snapped.dirichlet.intervals() {
        for e in [i.lo(), i.hi()] {
            if e.is_finite() {
                if let Ok(id) = node_index.binary_search(&index_of(e)) {
                    if (nodes[id] - e).abs() <= 1e-12 * (1.0 + e.abs()) {
                        node_class[id] = NodeClass::Dirichlet;
                    }
                }
            }
        }
    }

    Ok(Discretization {
        partition: partition.clone(),
        snapped,
        h,
        collar,
        scheme: params.scheme,
        far_left: left_labels[0],
        far_right: right_labels[0],
        nodes,
        node_class,
        elements,
        snap,
    })
}

/// Numbering of the free unknowns: interior DOFs first, then exterior
/// Neumann DOFs, each block ordered by position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DofMap {
    pub scheme: Scheme,
    pub n_interior: usize,
    pub n_exterior: usize,
    /// Cell center (P0) or node (P1) of each DOF.
    pub positions: Vec<f64>,
    /// P0: DOF of each element. P1: DOF of each node (`None` if Dirichlet).
    pub of_entity: Vec<Option<usize>>,
}

impl DofMap {
    pub fn len(&self) -> usize {
        self.n_interior + self.n_exterior
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn build(disc: &Discretization) -> DofMap {
        let (interior, exterior): (Vec<(usize, f64)>, Vec<(usize, f64)>) = match disc.scheme {
            Scheme::P0 => {
                let mut i = Vec::new();
                let mut e = Vec::new();
                for (id, el) in disc.elements.iter().enumerate() {
                    match el.kind {
                        ElementKind::Omega => i.push((id, el.center())),
                        ElementKind::Neumann => e.push((id, el.center())),
                    }
                }
                (i, e)
            }
            Scheme::P1 => {
                let mut i = Vec::new();
                let mut e = Vec::new();
                for (id, c) in disc.node_class.iter().enumerate() {
                    match c {
                        NodeClass::Interior => i.push((id, disc.nodes[id])),
                        NodeClass::ExteriorNeumann => e.push((id, disc.nodes[id])),
                        NodeClass::Dirichlet => {}
                    }
                }
                (i, e)
            }
        };
        let n_entities = match disc.scheme {
            Scheme::P0 => disc.elements.len(),
            Scheme::P1 => disc.nodes.len(),
        };
        let mut of_entity = vec![None; n_entities];
        let mut positions = Vec::with_capacity(interior.len() + exterior.len());
        for (dof, (id, x)) in interior.iter().chain(exterior.iter()).enumerate() {
            of_entity[*id] = Some(dof);
            positions.push(*x);
        }
        DofMap {
            scheme: disc.scheme,
            n_interior: interior.len(),
            n_exterior: exterior.len(),
            positions,
            of_entity,
        }
    }

    /// DOFs carried by an element: one for P0, the two end nodes for P1.
    pub fn element_dofs(&self, disc: &Discretization, element: usize) -> [Option<usize>; 2] {
        match self.scheme {
            Scheme::P0 => [self.of_entity[element], None],
            Scheme::P1 => {
                let e = &disc.elements[element];
                [self.of_entity[e.nodes[0]], self.of_entity[e.nodes[1]]]
            }
        }
    }
}

/// Block form of the stiffness matrix over free DOFs and the mass matrix
/// over interior DOFs.
///
/// `K_EE` is tridiagonal in the exterior ordering: exterior DOFs only
/// couple through a shared element, via the `Ω`-weighted Gram term.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessSystem {
    pub k_ii: DMatrix<f64>,
    pub k_ie: DMatrix<f64>,
    pub k_ee_diag: Vec<f64>,
    /// `k_ee_off[i]` couples exterior DOFs `i` and `i + 1`.
    pub k_ee_off: Vec<f64>,
    pub mass: DMatrix<f64>,
    pub dofs: DofMap,
    /// Diagonal contribution of the Dirichlet set to each interior DOF.
    pub tail_corrections: Vec<f64>,
    /// `g` with `gᵀu` the flux of `u` into the Dirichlet set that the free
    /// rows miss: couplings to Dirichlet-node hats, minus the `Ω×D` term
    /// tested against the DOF partition of unity. `𝟙ᵀKu + gᵀu = 0`.
    pub dirichlet_flux: Vec<f64>,
    pub snap: SnapReport,
    pub a_ns: f64,
    pub s: f64,
}

impl StiffnessSystem {
    pub fn n_interior(&self) -> usize {
        self.dofs.n_interior
    }

    pub fn n_exterior(&self) -> usize {
        self.dofs.n_exterior
    }

    /// `K u` over all free DOFs.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let ni = self.n_interior();
        let ne = self.n_exterior();
        assert_eq!(u.len(), ni + ne);
        let (ui, ue) = u.split_at(ni);
        let mut out = vec![0.0; ni + ne];
        for r in 0..ni {
            let mut acc = 0.0;
            for c in 0..ni {
                acc += self.k_ii[(r, c)] * ui[c];
            }
            for c in 0..ne {
                acc += self.k_ie[(r, c)] * ue[c];
            }
            out[r] = acc;
        }
        for c in 0..ne {
            let mut acc = 0.0;
            for r in 0..ni {
                acc += self.k_ie[(r, c)] * ui[r];
            }
            acc += self.k_ee_diag[c] * ue[c];
            if c > 0 {
                acc += self.k_ee_off[c - 1] * ue[c - 1];
            }
            if c + 1 < ne {
                acc += self.k_ee_off[c] * ue[c + 1];
            }
            out[ni + c] = acc;
        }
        out
    }

    /// `uᵀ K v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        self.apply(v).iter().zip(u).map(|(a, b)| a * b).sum()
    }

    /// Dense copy of the full matrix, for small systems and tests.
    pub fn full_matrix(&self) -> DMatrix<f64> {
        let ni = self.n_interior();
        let n = ni + self.n_exterior();
        let mut k = DMatrix::zeros(n, n);
        k.view_mut((0, 0), (ni, ni)).copy_from(&self.k_ii);
        k.view_mut((0, ni), (ni, n - ni)).copy_from(&self.k_ie);
        k.view_mut((ni, 0), (n - ni, ni)).copy_from(&self.k_ie.transpose());
        for i in 0..n - ni {
            k[(ni + i, ni + i)] = self.k_ee_diag[i];
            if i + 1 < n - ni {
                k[(ni + i, ni + i + 1)] = self.k_ee_off[i];
                k[(ni + i + 1, ni + i)] = self.k_ee_off[i];
            }
        }
        k
    }
}

/// `T_D(x) = ∫_D |x - y|^{-(1+2s)} dy` at `x = anchor + offset`.
pub(crate) fn dirichlet_potential(dirichlet: &ExteriorSet, anchor: f64, offset: f64, s: f64) -> f64 {
    let p = -1.0 - 2.0 * s;
    dirichlet
        .intervals()
        .iter()
        .map(|i| {
            let (d0, d1) = offset_distances(i.lo(), i.hi(), anchor, offset);
            power_moment(d0, d1, p)
        })
        .sum()
}

/// Gauss order for a separated pair at distance `gap` (elements of size `h`).
fn separated_order(gap: f64, h: f64) -> usize {
    let r = gap / h;
    if r >= 1000.0 {
        2
    } else if r >= 256.0 {
        3
    } else if r >= 64.0 {
        4
    } else if r >= 16.0 {
        5
    } else if r >= 4.0 {
        8
    } else {
        12
    }
}

const DUFFY_ORDER: usize = 16;
const DUFFY_CHECK_ORDER: usize = 24;
const ENTRY_TOL: f64 = 1e-8;

type Local = Vec<(usize, usize, f64)>;

/// Row marker for entries whose test function is a Dirichlet-node hat.
const FLUX_ROW: usize = usize::MAX;

fn push_local(out: &mut Local, dofs: &[Option<usize>], a: &[f64], n: usize, weight: f64) {
    for (k, dk) in dofs.iter().enumerate() {
        let row = dk.unwrap_or(FLUX_ROW);
        for (l, dl) in dofs.iter().enumerate() {
            let Some(dl) = dl else { continue };
            out.push((row, *dl, weight * a[k * n + l]));
        }
    }
}

/// `∫_0^1∫_0^1 d dᵀ (h_l p + h_r q)^{-1-2s} h_l h_r dp dq` for
/// `d = [p, q - p, -q]`, i.e. the pair of adjacent elements `[z-h_l, z]`
/// and `[z, z+h_r]` acting on (far-left node, shared node, far-right node).
fn adjacent_pair(hl: f64, hr: f64, s: f64, order: usize) -> [f64; 9] {
    let rule = gauss_legendre(order);
    let e = -1.0 - 2.0 * s;
    let radial = hl * hr / (3.0 - 2.0 * s);
    let mut a = [0.0; 9];
    for (t, w) in rule.mapped(0.0, 1.0) {
        // q <= p: (p, q) = ρ(1, t); q >= p: (p, q) = ρ(t, 1)
        for (p, q, dist) in [(1.0, t, hl + hr * t), (t, 1.0, hl * t + hr)] {
            let d = [p, q - p, -q];
            let f = w * radial * dist.powf(e);
            for k in 0..3 {
                for l in 0..3 {
                    a[k * 3 + l] += f * (d[k] * d[l]);
                }
            }
        }
    }
    a
}

fn same_element(h: f64, s: f64) -> [f64; 4] {
    let c = 2.0 * h.powf(3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s)) / (h * h);
    [c, -c, -c, c]
}

/// Tensor Gauss for two separated elements; DOF vector
/// `[φ_e0(x), φ_e1(x), -φ_f0(y), -φ_f1(y)]`.
fn separated_pair(e: &Element, f: &Element, s: f64, order: usize) -> [f64; 16] {
    let rule = gauss_legendre(order);
    let p = -1.0 - 2.0 * s;
    let mut a = [0.0; 16];
    let (he, hf) = (e.len(), f.len());
    for (x, wx) in rule.mapped(e.lo, e.hi) {
        let ex = (x - e.lo) / he;
        for (y, wy) in rule.mapped(f.lo, f.hi) {
            let fy = (y - f.lo) / hf;
            let d = [1.0 - ex, ex, fy - 1.0, -fy];
            let w = wx * wy * (x - y).abs().powf(p);
            for k in 0..4 {
                for l in 0..4 {
                    a[k * 4 + l] += w * (d[k] * d[l]);
                }
            }
        }
    }
    a
}

/// `∫_e φ_k φ_l T_D` over an Ω element; the Gauss points are graded toward
/// an end that touches `D` (where `T_D` blows up like `dist^{-2s}`).
fn dirichlet_element(e: &Element, dirichlet: &ExteriorSet, s: f64) -> [f64; 4] {
    let touches = |x: f64| dirichlet.intervals().iter().any(|i| i.lo() == x || i.hi() == x);
    let (left, right) = (touches(e.lo), touches(e.hi));
    let rule = gauss_legendre(20);
    let h = e.len();
    let mut a = [0.0; 4];
    let mut add = |anchor: f64, offset: f64, w: f64| {
        let x = anchor + offset;
        let t = (x - e.lo) / h;
        let phi = [1.0 - t, t];
        let v = w * dirichlet_potential(dirichlet, anchor, offset, s);
        for k in 0..2 {
            for l in 0..2 {
                a[k * 2 + l] += v * (phi[k] * phi[l]);
            }
        }
    };
    // Split at the midpoint and grade each touching half with u ↦ u³.
    let half = 0.5 * h;
    for (start, dir, graded) in [(e.lo, 1.0, left), (e.hi, -1.0, right)] {
        for (u, w) in rule.mapped(0.0, 1.0) {
            let (off, jac) = if graded { (half * u * u * u, 3.0 * half * u * u) } else { (half * u, half) };
            add(start, dir * off, w * jac);
        }
    }
    a
}

/// Assembles `K` and `M` for a discretization.
pub fn assemble(disc: &Discretization, order: &FractionalOrder) -> Result<StiffnessSystem> {
    order.require_1d()?;
    let s = order.s;
    let a_ns = order.a_ns;
    if disc.scheme == Scheme::P0 && s >= 0.5 {
        return Err(Error::DivergentEntry(s));
    }
    let dofs = DofMap::build(disc);
    let dirichlet = &disc.snapped.dirichlet;
    let omega_ids: Vec<usize> = disc.omega_elements().map(|(i, _)| i).collect();

    let batches: Vec<Result<Local>> = omega_ids
        .par_chunks(16)
        .map(|chunk| {
            let mut out = Local::new();
            for &ei in chunk {
                match disc.scheme {
                    Scheme::P0 => p0_row(disc, &dofs, ei, s, a_ns, &mut out)?,
                    Scheme::P1 => p1_row(disc, &dofs, ei, s, a_ns, &mut out)?,
                }
            }
            Ok(out)
        })
        .collect();

    let ni = dofs.n_interior;
    let ne = dofs.n_exterior;
    let mut k_ii = DMatrix::zeros(ni, ni);
    let mut k_ie = DMatrix::zeros(ni, ne);
    let mut k_ee_diag = vec![0.0; ne];
    let mut k_ee_off = vec![0.0; ne.saturating_sub(1)];
    let mut dirichlet_flux = vec![0.0; ni + ne];
    for batch in batches {
        for (r, c, v) in batch? {
            if r == FLUX_ROW {
                dirichlet_flux[c] += v;
                continue;
            }
            match (r < ni, c < ni) {
                (true, true) => k_ii[(r, c)] += v,
                (true, false) => k_ie[(r, c - ni)] += v,
                (false, true) => {}
                (false, false) => {
                    let (r, c) = (r - ni, c - ni);
                    if r == c {
                        k_ee_diag[r] += v;
                    } else if c == r + 1 {
                        k_ee_off[r] += v;
                    } else if r != c + 1 {
                        unreachable!("exterior DOFs {r} and {c} are not neighbours");
                    }
                }
            }
        }
    }

    // Dirichlet contribution, kept separately for reporting.
    let mut tail_corrections = vec![0.0; ni];
    let mut mass = DMatrix::zeros(ni, ni);
    for &ei in &omega_ids {
        let e = &disc.elements[ei];
        let ed = dofs.element_dofs(disc, ei);
        match disc.scheme {
            Scheme::P0 => {
                let d = ed[0].expect("Ω cell is a DOF");
                let mut t = 0.0;
                for i in dirichlet.intervals() {
                    t += interval_pair_integral((e.lo, e.hi), i.0, 2.0 * s)?;
                }
                k_ii[(d, d)] += a_ns * t;
                tail_corrections[d] += a_ns * t;
                dirichlet_flux[d] -= a_ns * t;
                mass[(d, d)] += e.len();
            }
            Scheme::P1 => {
                let t = if dirichlet.is_empty() { [0.0; 4] } else { dirichlet_element(e, dirichlet, s) };
                let m = e.len() / 6.0;
                let local_mass = [2.0 * m, m, m, 2.0 * m];
                for k in 0..2 {
                    let Some(dk) = ed[k] else { continue };
                    for l in 0..2 {
                        let Some(dl) = ed[l] else { continue };
                        k_ii[(dk, dl)] += a_ns * t[k * 2 + l];
                        dirichlet_flux[dl] -= a_ns * t[k * 2 + l];
                        mass[(dk, dl)] += local_mass[k * 2 + l];
                    }
                    tail_corrections[dk] += a_ns * t[k * 2 + k];
                }
            }
        }
    }

    for (i, d) in k_ee_diag.iter().enumerate() {
        if !(*d > 0.0) {
            return Err(Error::SingularExteriorBlock(i));
        }
    }

    Ok(StiffnessSystem {
        k_ii,
        k_ie,
        k_ee_diag,
        k_ee_off,
        mass,
        dofs,
        tail_corrections,
        dirichlet_flux,
        snap: disc.snap.clone(),
        a_ns,
        s,
    })
}

fn p0_row(disc: &Discretization, dofs: &DofMap, ei: usize, s: f64, a_ns: f64, out: &mut Local) -> Result<()> {
    let e = &disc.elements[ei];
    let de = dofs.of_entity[ei].expect("Ω cell is a DOF");
    for (fi, f) in disc.elements.iter().enumerate() {
        if fi == ei || (f.kind == ElementKind::Omega && fi < ei) {
            continue;
        }
        let df = dofs.of_entity[fi].expect("meshed cell is a DOF");
        let w = a_ns * interval_pair_integral((e.lo, e.hi), (f.lo, f.hi), 2.0 * s)?;
        out.push((de, de, w));
        out.push((df, df, w));
        out.push((de, df, -w));
        out.push((df, de, -w));
    }
    Ok(())
}

fn p1_row(disc: &Discretization, dofs: &DofMap, ei: usize, s: f64, a_ns: f64, out: &mut Local) -> Result<()> {
    let e = &disc.elements[ei];
    let ed = dofs.element_dofs(disc, ei);
    let h = disc.h;
    push_local(out, &ed, &same_element(e.len(), s), 2, 0.5 * a_ns);
    for (fi, f) in disc.elements.iter().enumerate() {
        if fi == ei || (f.kind == ElementKind::Omega && fi < ei) {
            continue;
        }
        let fd = dofs.element_dofs(disc, fi);
        if f.nodes[0] == e.nodes[1] || f.nodes[1] == e.nodes[0] {
            let (l, r, ld, rd) = if f.nodes[0] == e.nodes[1] { (e, f, ed, fd) } else { (f, e, fd, ed) };
            let a = adjacent_pair(l.len(), r.len(), s, DUFFY_ORDER);
            let check = adjacent_pair(l.len(), r.len(), s, DUFFY_CHECK_ORDER);
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (k, (x, y)) in a.iter().zip(check.iter()).enumerate() {
                let change = (x - y).abs() / scale;
                if change > ENTRY_TOL {
                    return Err(Error::EntryToleranceFailure { row: k / 3, col: k % 3, change });
                }
            }
            push_local(out, &[ld[0], ld[1], rd[1]], &a, 3, a_ns);
        } else {
            let gap = if f.lo >= e.hi { f.lo - e.hi } else { e.lo - f.hi };
            let a = separated_pair(e, f, s, separated_order(gap, h));
            push_local(out, &[ed[0], ed[1], fd[0], fd[1]], &a, 4, a_ns);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FamilyKind, PartitionFamily, Side};

    fn unit() -> Domain1D {
        Domain1D::new(0.0, 1.0).unwrap()
    }

    fn params(h: f64, collar: f64, scheme: Scheme) -> MeshParams {
        MeshParams { h, collar, scheme, auto_collar: false }
    }

    #[test]
    fn mesh_full_dirichlet() {
        let o = FractionalOrder::new(1, 0.5).unwrap();
        let p = ExteriorPartition::full_dirichlet(unit());
        let d = build_mesh(&p, &o, &params(0.1, 4.0, Scheme::P1)).unwrap();
        assert_eq!(d.omega_elements().count(), 10);
        assert_eq!(d.neumann_elements().count(), 0);
        assert_eq!(d.far_left, Label::Dirichlet);
        assert_eq!(d.far_right, Label::Dirichlet);
        assert_eq!(d.node_class[0], NodeClass::Dirichlet);
        assert_eq!(*d.node_class.last().unwrap(), NodeClass::Dirichlet);
        assert_eq!(*d.nodes.last().unwrap(), 1.0);
    }

    #[test]
    fn mesh_full_neumann() {
        let o = FractionalOrder::new(1, 0.25).unwrap();
        let p = ExteriorPartition::full_neumann(unit());
        let d = build_mesh(&p, &o, &params(0.1, 4.0, Scheme::P1)).unwrap();
        assert_eq!(d.far_left, Label::Neumann);
        assert!(d.node_class.iter().all(|c| *c != NodeClass::Dirichlet));
        assert_eq!(d.elements.len(), 90);
    }

    #[test]
    fn mesh_far_field_rules() {
        let o = FractionalOrder::new(1, 0.25).unwrap();
        let fam = PartitionFamily {
            kind: FamilyKind::TravelingBall,
            scale: 1.0,
            ratio: 2.0,
            length: 1.0,
            gap: 0.0,
            side: Side::Right,
        };
        let p = fam.generate(&unit(), 4).unwrap();
        assert!(matches!(
            build_mesh(&p, &o, &params(0.1, 4.0, Scheme::P0)),
            Err(Error::MixedFarField { side: "right" })
        ));
        let mut auto = params(0.1, 4.0, Scheme::P0);
        auto.auto_collar = true;
        let d = build_mesh(&p, &o, &auto).unwrap();
        assert!(d.collar >= 17.0);
        assert_eq!(d.neumann_elements().count(), 10);
        let o6 = FractionalOrder::new(1, 0.6).unwrap();
        assert!(matches!(
            build_mesh(&p, &o6, &auto),
            Err(Error::IncompatibleScheme(_))
        ));
    }

    #[test]
    fn mesh_snaps_and_enforces_resolution() {
        let o = FractionalOrder::new(1, 0.25).unwrap();
        let n = ExteriorSet::new(vec![(1.33, 2.0)]).unwrap();
        let p = ExteriorPartition::with_designated(unit(), n, Label::Neumann).unwrap();
        let d = build_mesh(&p, &o, &params(0.05, 4.0, Scheme::P0)).unwrap();
        assert!(d.snap.max_displacement <= 0.025 + 1e-12);
        assert_eq!(d.snap.moved.len(), 1);
        let thin = ExteriorSet::new(vec![(1.0, 1.2)]).unwrap();
        let p = ExteriorPartition::with_designated(unit(), thin, Label::Neumann).unwrap();
        assert!(matches!(
            build_mesh(&p, &o, &params(0.1, 4.0, Scheme::P0)),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn p0_two_cell_entry() {
        let o = FractionalOrder::new(1, 0.25).unwrap();
        let p = ExteriorPartition::full_dirichlet(unit());
        let d = build_mesh(&p, &o, &params(0.5, 4.0, Scheme::P0)).unwrap();
        let sys = assemble(&d, &o).unwrap();
        // (8 - 4√2) · (1/2)^{1-2s} for two half cells
        let w = (8.0 - 4.0 * 2f64.sqrt()) * 0.5f64.powf(0.5);
        assert!((sys.k_ii[(0, 1)] + o.a_ns * w).abs() < 1e-14);
        assert_eq!(sys.k_ii[(0, 1)], sys.k_ii[(1, 0)]);
    }

    #[test]
    fn neumann_assembly_kills_constants() {
        for (scheme, s) in [(Scheme::P0, 0.3), (Scheme::P1, 0.3), (Scheme::P1, 0.7)] {
            let o = FractionalOrder::new(1, s).unwrap();
            let p = ExteriorPartition::full_neumann(unit());
            let d = build_mesh(&p, &o, &params(0.05, 4.0, scheme)).unwrap();
            let sys = assemble(&d, &o).unwrap();
            let ones = vec![1.0; sys.dofs.len()];
            let r = sys.apply(&ones);
            let scale = sys.full_matrix().abs().max();
            assert!(r.iter().all(|v| v.abs() <= 1e-12 * scale), "{scheme:?} {s}");
            let m: f64 = sys.mass.iter().sum();
            assert!((m - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn assembly_is_symmetric_and_psd() {
        let o = FractionalOrder::new(1, 0.4).unwrap();
        let n = ExteriorSet::new(vec![(1.0, 1.5), (-2.0, -1.0)]).unwrap();
        let p = ExteriorPartition::with_designated(unit(), n, Label::Neumann).unwrap();
        for scheme in [Scheme::P0, Scheme::P1] {
            let d = build_mesh(&p, &o, &params(0.1, 4.0, scheme)).unwrap();
            let k = assemble(&d, &o).unwrap().full_matrix();
            assert_eq!((&k - k.transpose()).abs().max(), 0.0);
            let ev = k.clone().symmetric_eigenvalues();
            assert!(ev.min() > -1e-12 * ev.max(), "{scheme:?}");
        }
    }

    #[test]
    fn duffy_matches_refined_tensor_rule() {
        // Adjacent pair, compared against graded tensor Gauss in (ξ, η).
        let s = 0.3;
        let a = adjacent_pair(1.0, 1.0, s, 20);
        let rule = gauss_legendre(40);
        let mut b = [0.0; 9];
        let grade = |u: f64| (u.powi(4), 4.0 * u.powi(3));
        for (u, wu) in rule.mapped(0.0, 1.0) {
            let (xi, jx) = grade(u);
            for (v, wv) in rule.mapped(0.0, 1.0) {
                let (eta, jy) = grade(v);
                let d = [xi, eta - xi, -eta];
                let w = wu * wv * jx * jy * (xi + eta).powf(-1.0 - 2.0 * s);
                for k in 0..3 {
                    for l in 0..3 {
                        b[k * 3 + l] += w * d[k] * d[l];
                    }
                }
            }
        }
        for k in 0..9 {
            assert!((a[k] - b[k]).abs() < 1e-6 * a[0].abs(), "{k}: {} vs {}", a[k], b[k]);
        }
    }
}
