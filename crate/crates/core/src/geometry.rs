//! One-dimensional domains, exterior partitions and the parametric set
//! families used in the sweeps.
//!
//! Exterior sets are finite unions of open intervals whose endpoints may be
//! infinite; nothing is truncated here. Truncation happens only when a mesh
//! is built.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::{interval_pair_integral, FractionalOrder};

/// `Ω = (a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain1D {
    pub a: f64,
    pub b: f64,
}

impl Domain1D {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("domain needs finite a < b, got ({a}, {b})")));
        }
        Ok(Domain1D { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// Distance from an interval to `[a, b]` (0 if they touch or overlap).
    pub fn distance_to(&self, lo: f64, hi: f64) -> f64 {
        if hi <= self.a {
            self.a - hi
        } else if lo >= self.b {
            lo - self.b
        } else {
            0.0
        }
    }
}

/// Serde helper: finite endpoints as numbers, infinite ones as `"inf"`/`"-inf"`.
pub(crate) mod endpoint {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Num(f64),
        Text(String),
    }

    pub(super) fn to_repr(x: f64) -> Repr {
        if x == f64::INFINITY {
            Repr::Text("inf".into())
        } else if x == f64::NEG_INFINITY {
            Repr::Text("-inf".into())
        } else {
            Repr::Num(x)
        }
    }

    pub(super) fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(E::custom(format!("bad endpoint {other:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        (to_repr(v.0), to_repr(v.1)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let (lo, hi): (Repr, Repr) = Deserialize::deserialize(d)?;
        Ok((from_repr::<D::Error>(lo)?, from_repr::<D::Error>(hi)?))
    }
}

/// Same encoding for a single scalar.
mod scalar_endpoint {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::endpoint::{from_repr, to_repr, Repr};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr::<D::Error>(Repr::deserialize(d)?)
    }
}

/// Open interval with possibly infinite endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Interval(#[serde(with = "endpoint")] pub (f64, f64));

impl Interval {
    pub fn lo(&self) -> f64 {
        self.0 .0
    }
    pub fn hi(&self) -> f64 {
        self.0 .1
    }
    pub fn length(&self) -> f64 {
        self.hi() - self.lo()
    }
}

/// Sorted union of disjoint open intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct ExteriorSet {
    intervals: Vec<Interval>,
}

impl TryFrom<Vec<Interval>> for ExteriorSet {
    type Error = Error;
    fn try_from(v: Vec<Interval>) -> Result<Self> {
        ExteriorSet::new(v.into_iter().map(|i| i.0).collect())
    }
}

impl From<ExteriorSet> for Vec<Interval> {
    fn from(s: ExteriorSet) -> Self {
        s.intervals
    }
}

impl ExteriorSet {
    /// Sorts the intervals, merging ones that overlap; touching intervals
    /// stay separate since the shared point is a null set anyway.
    pub fn new(mut raw: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &raw {
            if lo.is_nan() || hi.is_nan() || !(lo < hi) {
                return Err(Error::InvalidParameter(format!("empty or malformed interval ({lo}, {hi})")));
            }
        }
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut intervals: Vec<Interval> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match intervals.last_mut() {
                Some(last) if lo < last.hi() => {
                    last.0 .1 = last.hi().max(hi);
                }
                _ => intervals.push(Interval((lo, hi))),
            }
        }
        Ok(ExteriorSet { intervals })
    }

    pub fn empty() -> Self {
        ExteriorSet::default()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.lo() < x && x < i.hi())
    }

    /// Lebesgue measure of the part inside `(lo, hi)`.
    pub fn measure_within(&self, lo: f64, hi: f64) -> f64 {
        self.intervals
            .iter()
            .map(|i| (i.hi().min(hi) - i.lo().max(lo)).max(0.0))
            .sum()
    }

    pub fn intersects(&self, other: &ExteriorSet) -> bool {
        self.intervals.iter().any(|x| {
            other
                .intervals
                .iter()
                .any(|y| x.lo().max(y.lo()) < x.hi().min(y.hi()))
        })
    }

    /// Complement within `ℝ ∖ [a, b]`.
    pub fn complement_outside(&self, omega: &Domain1D) -> ExteriorSet {
        let mut out = Vec::new();
        for (lo, hi) in [(f64::NEG_INFINITY, omega.a), (omega.b, f64::INFINITY)] {
            let mut cursor = lo;
            for i in &self.intervals {
                if i.hi() <= lo || i.lo() >= hi {
                    continue;
                }
                if i.lo() > cursor {
                    out.push(Interval((cursor, i.lo())));
                }
                cursor = cursor.max(i.hi());
            }
            if cursor < hi {
                out.push(Interval((cursor, hi)));
            }
        }
        ExteriorSet { intervals: out }
    }
}

/// `|set ∩ (−R, R)|`.
pub fn measure_in_ball(set: &ExteriorSet, radius: f64) -> f64 {
    set.measure_within(-radius, radius)
}

/// Which exterior condition a set carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Dirichlet,
    Neumann,
}

impl Label {
    pub fn other(self) -> Label {
        match self {
            Label::Dirichlet => Label::Neumann,
            Label::Neumann => Label::Dirichlet,
        }
    }
}

/// `Ω` together with the Dirichlet set `D` and Neumann set `N` covering
/// `Ωᶜ` up to finitely many points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorPartition {
    pub omega: Domain1D,
    pub dirichlet: ExteriorSet,
    pub neumann: ExteriorSet,
}

impl ExteriorPartition {
    pub fn new(omega: Domain1D, dirichlet: ExteriorSet, neumann: ExteriorSet) -> Result<Self> {
        for set in [&dirichlet, &neumann] {
            for i in set.intervals() {
                if omega.distance_to(i.lo(), i.hi()) == 0.0 && i.lo() < omega.b && i.hi() > omega.a {
                    return Err(Error::BadParameters(format!(
                        "interval ({}, {}) overlaps the domain",
                        i.lo(),
                        i.hi()
                    )));
                }
            }
        }
        if dirichlet.intersects(&neumann) {
            return Err(Error::BadParameters("Dirichlet and Neumann sets overlap".into()));
        }
        let mut all: Vec<(f64, f64)> = dirichlet
            .intervals()
            .iter()
            .chain(neumann.intervals())
            .map(|i| i.0)
            .collect();
        all.push((omega.a, omega.b));
        let union = ExteriorSet::new(all)?;
        // Covered up to points: consecutive pieces must share endpoints.
        let iv = union.intervals();
        let covered = iv.first().map(|i| i.lo()) == Some(f64::NEG_INFINITY)
            && iv.last().map(|i| i.hi()) == Some(f64::INFINITY)
            && iv.windows(2).all(|w| w[0].hi() >= w[1].lo());
        if !covered {
            return Err(Error::BadParameters("D ∪ N does not cover the exterior".into()));
        }
        Ok(ExteriorPartition {
            omega,
            dirichlet,
            neumann,
        })
    }

    /// Partition where `set` carries `label` and the rest of `Ωᶜ` the other one.
    pub fn with_designated(omega: Domain1D, set: ExteriorSet, label: Label) -> Result<Self> {
        let rest = set.complement_outside(&omega);
        match label {
            Label::Dirichlet => ExteriorPartition::new(omega, set, rest),
            Label::Neumann => ExteriorPartition::new(omega, rest, set),
        }
    }

    pub fn full_dirichlet(omega: Domain1D) -> Self {
        ExteriorPartition::with_designated(omega, ExteriorSet::empty(), Label::Neumann)
            .expect("complement of Ω is a valid Dirichlet set")
    }

    pub fn full_neumann(omega: Domain1D) -> Self {
        ExteriorPartition::with_designated(omega, ExteriorSet::empty(), Label::Dirichlet)
            .expect("complement of Ω is a valid Neumann set")
    }

    pub fn set(&self, label: Label) -> &ExteriorSet {
        match label {
            Label::Dirichlet => &self.dirichlet,
            Label::Neumann => &self.neumann,
        }
    }

    /// Label of the exterior point `x`, or `None` on a boundary point.
    pub fn label_at(&self, x: f64) -> Option<Label> {
        if self.dirichlet.contains(x) {
            Some(Label::Dirichlet)
        } else if self.neumann.contains(x) {
            Some(Label::Neumann)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    ShrinkingNeumann,
    NestedNeumann,
    TravelingBall,
    TravelingRing,
    TravelingStrip,
    InfiniteSector,
    ShrinkingDirichletTouching,
    ShrinkingDirichletInterior,
    TravelingDirichlet,
}

impl FamilyKind {
    /// Label carried by the set the family moves or shrinks.
    pub fn designated_label(self) -> Label {
        match self {
            FamilyKind::ShrinkingDirichletTouching
            | FamilyKind::ShrinkingDirichletInterior
            | FamilyKind::TravelingDirichlet => Label::Dirichlet,
            _ => Label::Neumann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    #[default]
    Right,
}

fn default_length() -> f64 {
    1.0
}

/// Parametric generator `k ↦ ExteriorPartition`.
///
/// The family parameter is `p_k = scale · ratio^k`: a length for shrinking
/// kinds, an offset from the boundary for traveling kinds. Only the
/// designated set is described; the rest of `Ωᶜ` gets the other label.
/// In one dimension a traveling strip of infinite length and an infinite
/// sector are the same half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFamily {
    pub kind: FamilyKind,
    pub scale: f64,
    pub ratio: f64,
    /// Length of a traveling set (may be `"inf"` for strips).
    #[serde(default = "default_length", with = "scalar_endpoint")]
    pub length: f64,
    /// Distance from the boundary to the fixed end of shrinking/nested sets.
    #[serde(default)]
    pub gap: f64,
    #[serde(default)]
    pub side: Side,
}

impl PartitionFamily {
    pub fn parameter(&self, k: u32) -> f64 {
        self.scale * self.ratio.powi(k as i32)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::BadParameters(m.to_string()));
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return bad("scale must be positive and finite");
        }
        if !(self.ratio > 0.0 && self.ratio.is_finite()) {
            return bad("ratio must be positive and finite");
        }
        if !(self.length > 0.0) {
            return bad("length must be positive");
        }
        if !(self.gap >= 0.0 && self.gap.is_finite()) {
            return bad("gap must be nonnegative and finite");
        }
        if self.length.is_infinite() && self.kind != FamilyKind::TravelingStrip {
            return bad("only traveling strips may have infinite length");
        }
        Ok(())
    }

    /// The designated set at index `k`, placed to the right of `Ω` and then
    /// mirrored if the family lives on the left.
    fn designated(&self, omega: &Domain1D, k: u32) -> Vec<(f64, f64)> {
        let p = self.parameter(k);
        let len = self.length;
        let g = self.gap;
        // offsets measured from the boundary point on the chosen side
        let right: Vec<(f64, f64)> = match self.kind {
            FamilyKind::ShrinkingNeumann | FamilyKind::ShrinkingDirichletInterior => {
                let c = g + 0.5 * self.scale;
                vec![(c - 0.5 * p, c + 0.5 * p)]
            }
            FamilyKind::NestedNeumann => vec![(g, g + p)],
            FamilyKind::TravelingBall | FamilyKind::TravelingDirichlet | FamilyKind::TravelingStrip => {
                vec![(p, p + len)]
            }
            FamilyKind::InfiniteSector => vec![(p, f64::INFINITY)],
            FamilyKind::ShrinkingDirichletTouching => vec![(0.0, p)],
            FamilyKind::TravelingRing => {
                return vec![(omega.a - p - len, omega.a - p), (omega.b + p, omega.b + p + len)];
            }
        };
        match self.side {
            Side::Right => right.into_iter().map(|(l, h)| (omega.b + l, omega.b + h)).collect(),
            Side::Left => right.into_iter().map(|(l, h)| (omega.a - h, omega.a - l)).collect(),
        }
    }

    pub fn generate(&self, omega: &Domain1D, k: u32) -> Result<ExteriorPartition> {
        self.validate()?;
        let pieces = self.designated(omega, k);
        for &(lo, hi) in &pieces {
            if lo < omega.b && hi > omega.a {
                return Err(Error::BadParameters(format!(
                    "set ({lo}, {hi}) at k = {k} overlaps the domain"
                )));
            }
        }
        let set = ExteriorSet::new(pieces).map_err(|e| Error::BadParameters(e.to_string()))?;
        ExteriorPartition::with_designated(*omega, set, self.kind.designated_label())
    }

    /// The moving or shrinking set at index `k`.
    pub fn designated_set(&self, omega: &Domain1D, k: u32) -> Result<ExteriorSet> {
        let p = self.generate(omega, k)?;
        Ok(p.set(self.kind.designated_label()).clone())
    }
}

/// Table of `|N_k ∩ B_R|` with the diffusion verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionReport {
    pub radii: Vec<f64>,
    pub ks: Vec<u32>,
    /// `measures[i][j]` for `k = ks[i]`, `R = radii[j]`.
    pub measures: Vec<Vec<f64>>,
    /// Per radius: `1e-3 · |B_R|`.
    pub thresholds: Vec<f64>,
    pub diffusing: bool,
}

/// Classifies a family as diffusing when every radius column is
/// nonincreasing in `k` and ends below its threshold.
pub fn diffusion_report(
    family: &PartitionFamily,
    omega: &Domain1D,
    radii: &[f64],
    ks: &[u32],
) -> Result<DiffusionReport> {
    if radii.is_empty() || ks.is_empty() {
        return Err(Error::InvalidParameter("diffusion report needs radii and indices".into()));
    }
    let mut measures = Vec::with_capacity(ks.len());
    for &k in ks {
        let n = family.generate(omega, k)?.neumann;
        measures.push(radii.iter().map(|&r| measure_in_ball(&n, r)).collect::<Vec<_>>());
    }
    let thresholds: Vec<f64> = radii.iter().map(|r| 1e-3 * 2.0 * r).collect();
    let diffusing = (0..radii.len()).all(|j| {
        let col: Vec<f64> = measures.iter().map(|row| row[j]).collect();
        col.windows(2).all(|w| w[1] <= w[0]) && *col.last().unwrap() < thresholds[j]
    });
    Ok(DiffusionReport {
        radii: radii.to_vec(),
        ks: ks.to_vec(),
        measures,
        thresholds,
        diffusing,
    })
}

/// `dist(set, Ω)`.
pub fn separation(set: &ExteriorSet, omega: &Domain1D) -> Result<f64> {
    set.intervals()
        .iter()
        .map(|i| omega.distance_to(i.lo(), i.hi()))
        .reduce(f64::min)
        .ok_or(Error::EmptySet)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionC {
    Finite(f64),
    Divergent,
}

impl ConditionC {
    pub fn value(&self) -> f64 {
        match self {
            ConditionC::Finite(v) => *v,
            ConditionC::Divergent => f64::INFINITY,
        }
    }
}

/// `∫_D ∫_Ω |x - y|^{-(1+2s)} dy dx`, exactly.
pub fn condition_c(dirichlet: &ExteriorSet, omega: &Domain1D, order: &FractionalOrder) -> Result<ConditionC> {
    order.require_1d()?;
    let mut total = 0.0;
    for i in dirichlet.intervals() {
        match interval_pair_integral(i.0, (omega.a, omega.b), 2.0 * order.s) {
            Ok(v) => total += v,
            Err(Error::DivergentIntegral(_)) => return Ok(ConditionC::Divergent),
            Err(e) => return Err(e),
        }
    }
    Ok(ConditionC::Finite(total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Domain1D {
        Domain1D::new(0.0, 1.0).unwrap()
    }

    fn sym() -> Domain1D {
        Domain1D::new(-1.0, 1.0).unwrap()
    }

    fn family(kind: FamilyKind, scale: f64, ratio: f64) -> PartitionFamily {
        PartitionFamily {
            kind,
            scale,
            ratio,
            length: 1.0,
            gap: 0.0,
            side: Side::Right,
        }
    }

    #[test]
    fn traveling_ball_example() {
        let p = family(FamilyKind::TravelingBall, 1.0, 2.0).generate(&sym(), 3).unwrap();
        assert_eq!(p.neumann.intervals(), &[Interval((9.0, 10.0))]);
        assert_eq!(
            p.dirichlet.intervals(),
            &[
                Interval((f64::NEG_INFINITY, -1.0)),
                Interval((1.0, 9.0)),
                Interval((10.0, f64::INFINITY))
            ]
        );
    }

    #[test]
    fn touching_dirichlet_example() {
        let mut f = family(FamilyKind::ShrinkingDirichletTouching, 1.0, 0.5);
        f.side = Side::Left;
        let p = f.generate(&unit(), 2).unwrap();
        assert_eq!(p.dirichlet.intervals(), &[Interval((-0.25, 0.0))]);
        assert_eq!(
            p.neumann.intervals(),
            &[Interval((f64::NEG_INFINITY, -0.25)), Interval((1.0, f64::INFINITY))]
        );
    }

    #[test]
    fn nested_neumann_contains_next() {
        let f = family(FamilyKind::NestedNeumann, 1.0, 0.5);
        for k in 0..6 {
            let a = f.designated_set(&unit(), k).unwrap().intervals()[0];
            let b = f.designated_set(&unit(), k + 1).unwrap().intervals()[0];
            assert!(a.lo() <= b.lo() && b.hi() <= a.hi());
        }
        assert_eq!(f.designated_set(&unit(), 1).unwrap().intervals(), &[Interval((1.0, 1.5))]);
    }

    #[test]
    fn overlapping_family_rejected() {
        let mut f = family(FamilyKind::TravelingRing, 1.0, 2.0);
        f.length = -1.0;
        assert!(matches!(f.generate(&sym(), 0), Err(Error::BadParameters(_))));
        let bad = ExteriorSet::new(vec![(0.5, 2.0)]).unwrap();
        assert!(ExteriorPartition::with_designated(unit(), bad, Label::Neumann).is_err());
    }

    #[test]
    fn measures_in_ball() {
        let s = ExteriorSet::new(vec![(3.0, 4.0)]).unwrap();
        assert_eq!(measure_in_ball(&s, 5.0), 1.0);
        assert_eq!(measure_in_ball(&s, 3.5), 0.5);
        let t = ExteriorSet::new(vec![(10.0, f64::INFINITY)]).unwrap();
        assert_eq!(measure_in_ball(&t, 5.0), 0.0);
    }

    #[test]
    fn diffusion_examples() {
        let ks: Vec<u32> = (0..6).collect();
        let ball = family(FamilyKind::TravelingBall, 1.0, 2.0);
        let r = diffusion_report(&ball, &sym(), &[8.0], &ks).unwrap();
        let col: Vec<f64> = r.measures.iter().map(|m| m[0]).collect();
        assert_eq!(col, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(r.diffusing);
        let fixed = family(FamilyKind::TravelingBall, 1.0, 1.0);
        let r = diffusion_report(&fixed, &unit(), &[8.0], &ks).unwrap();
        assert!(r.measures.iter().all(|m| m[0] == 1.0));
        assert!(!r.diffusing);
        let shrink = family(FamilyKind::ShrinkingNeumann, 1.0, 0.5);
        let ks: Vec<u32> = (0..12).collect();
        let r = diffusion_report(&shrink, &unit(), &[8.0], &ks).unwrap();
        for (i, m) in r.measures.iter().enumerate() {
            assert!((m[0] - 0.5f64.powi(i as i32)).abs() < 1e-15);
        }
        assert!(r.diffusing);
    }

    #[test]
    fn separation_examples() {
        let d = ExteriorSet::new(vec![(2.0, 3.0)]).unwrap();
        assert_eq!(separation(&d, &unit()).unwrap(), 1.0);
        let d = ExteriorSet::new(vec![(-1.0, 0.0)]).unwrap();
        assert_eq!(separation(&d, &unit()).unwrap(), 0.0);
        let d = ExteriorSet::new(vec![(f64::NEG_INFINITY, -5.0), (7.0, f64::INFINITY)]).unwrap();
        assert_eq!(separation(&d, &unit()).unwrap(), 5.0);
        assert!(matches!(separation(&ExteriorSet::empty(), &unit()), Err(Error::EmptySet)));
    }

    #[test]
    fn condition_c_examples() {
        let o = FractionalOrder::new(1, 0.25).unwrap();
        let d = ExteriorSet::new(vec![(-0.01, 0.0)]).unwrap();
        let r: f64 = 0.01;
        let exact = (r.powf(0.5) - ((1.0 + r).powf(0.5) - 1.0)) / (2.0 * 0.25 * 0.5);
        let v = condition_c(&d, &unit(), &o).unwrap().value();
        assert!((v - exact).abs() < 1e-13);
        assert!((v - 0.380_05).abs() < 1e-5);
        let o = FractionalOrder::new(1, 0.5).unwrap();
        let d = ExteriorSet::new(vec![(10.0, 11.0)]).unwrap();
        let v = condition_c(&d, &unit(), &o).unwrap().value();
        assert!((v - (100.0f64 / 99.0).ln()).abs() < 1e-15);
        let o = FractionalOrder::new(1, 0.75).unwrap();
        let d = ExteriorSet::new(vec![(-0.1, 0.0)]).unwrap();
        assert_eq!(condition_c(&d, &unit(), &o).unwrap(), ConditionC::Divergent);
    }

    #[test]
    fn family_json_round_trip() {
        let mut f = family(FamilyKind::TravelingStrip, 1.0, 2.0);
        f.length = f64::INFINITY;
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"inf\""));
        let back: PartitionFamily = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        let set: ExteriorSet = serde_json::from_str(r#"[[2, "inf"], ["-inf", -3]]"#).unwrap();
        assert_eq!(set.intervals()[0], Interval((f64::NEG_INFINITY, -3.0)));
    }
}
