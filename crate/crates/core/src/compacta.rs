//! Ambient metric spaces, finite point clouds and the Hausdorff metric.
//!
//! The space `X` used by the shift relations is a disjoint union of unit
//! intervals `I_k = [2k-2, 2k-1]` together with a point at infinity. It is
//! metrized by pulling back the usual metric of `[0, 1]` through the
//! piecewise-affine map sending the knots `q_j = 1 - 2^-j` to the integers `j`.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::rational::{parse_q, pow2_inv, qi, to_pq, Q};

/// A single coordinate: a rational or the point at infinity of `X`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Finite(Q),
    Infinity,
}

impl Value {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            Value::Finite(x) => Some(x),
            Value::Infinity => None,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Value::Infinity)
    }
}

impl From<Q> for Value {
    fn from(x: Q) -> Self {
        Value::Finite(x)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(x) => write!(f, "{}", to_pq(x)),
            Value::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.trim() == "inf" {
            return Ok(Value::Infinity);
        }
        parse_q(&s).map(Value::Finite).map_err(serde::de::Error::custom)
    }
}

pub type Point = Vec<Value>;

pub fn finite_point(coords: &[Q]) -> Point {
    coords.iter().cloned().map(Value::Finite).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricSpace {
    UnitInterval,
    /// `[0,1]^2` with the sup metric.
    UnitSquare,
    XSpace {
        k_max: usize,
    },
    /// Coordinates indexed by `window.0..=window.1`; coordinate `k` is
    /// weighted by `2^-|k|` and the distance is the weighted supremum.
    WeightedProduct {
        window: (i64, i64),
        base: Box<MetricSpace>,
    },
}

impl MetricSpace {
    pub fn weighted_product(lo: i64, hi: i64, base: MetricSpace) -> Result<Self> {
        if lo > hi {
            return domain(format!("empty window [{lo}, {hi}]"));
        }
        if matches!(base, MetricSpace::WeightedProduct { .. }) {
            return domain("nested weighted products are not supported");
        }
        Ok(MetricSpace::WeightedProduct { window: (lo, hi), base: Box::new(base) })
    }

    /// Number of scalar coordinates carried by one point.
    pub fn dimension(&self) -> usize {
        match self {
            MetricSpace::UnitInterval | MetricSpace::XSpace { .. } => 1,
            MetricSpace::UnitSquare => 2,
            MetricSpace::WeightedProduct { window, base } => {
                (window.1 - window.0 + 1) as usize * base.dimension()
            }
        }
    }

    pub fn contains(&self, p: &[Value]) -> bool {
        self.check_point(p).is_ok()
    }

    pub fn check_point(&self, p: &[Value]) -> Result<()> {
        if p.len() != self.dimension() {
            return domain(format!(
                "point has {} coordinates, ambient expects {}",
                p.len(),
                self.dimension()
            ));
        }
        match self {
            MetricSpace::UnitInterval | MetricSpace::UnitSquare => {
                for v in p {
                    match v {
                        Value::Finite(x) if !x.is_negative() && x <= &Q::one() => {}
                        _ => return domain(format!("coordinate {v} outside [0, 1]")),
                    }
                }
                Ok(())
            }
            MetricSpace::XSpace { k_max } => match &p[0] {
                Value::Infinity => Ok(()),
                Value::Finite(x) => match xspace_component(x) {
                    Some(k) if k <= *k_max => Ok(()),
                    _ => domain(format!("{} lies in no retained component I_1..I_{k_max}", to_pq(x))),
                },
            },
            MetricSpace::WeightedProduct { base, .. } => {
                let d = base.dimension();
                p.chunks(d).try_for_each(|c| base.check_point(c))
            }
        }
    }

    pub fn distance(&self, a: &[Value], b: &[Value]) -> Result<Q> {
        if a.len() != self.dimension() || b.len() != self.dimension() {
            return domain("point dimension does not match the ambient");
        }
        match self {
            MetricSpace::UnitInterval | MetricSpace::UnitSquare => {
                let mut best = Q::zero();
                for (x, y) in a.iter().zip(b) {
                    let (Value::Finite(x), Value::Finite(y)) = (x, y) else {
                        return domain("infinite coordinate in a bounded ambient");
                    };
                    let d = (x - y).abs();
                    if d > best {
                        best = d;
                    }
                }
                Ok(best)
            }
            MetricSpace::XSpace { .. } => xspace_distance(&a[0], &b[0]),
            MetricSpace::WeightedProduct { window, base } => {
                let d = base.dimension();
                let mut best = Q::zero();
                for (i, (ca, cb)) in a.chunks(d).zip(b.chunks(d)).enumerate() {
                    let k = window.0 + i as i64;
                    let dist = base.distance(ca, cb)? * pow2_inv(k.unsigned_abs() as u32);
                    if dist > best {
                        best = dist;
                    }
                }
                Ok(best)
            }
        }
    }
}

/// Index `k >= 1` of the component `I_k = [2k-2, 2k-1]` containing `x`.
pub fn xspace_component(x: &Q) -> Option<usize> {
    if x.is_negative() {
        return None;
    }
    let j = (x / qi(2)).floor();
    if x - &j * qi(2) > Q::one() {
        return None;
    }
    let j: usize = j.to_integer().try_into().ok()?;
    Some(j + 1)
}

/// The pull-back coordinate in `[0, 1]`: `x in [2j, 2j+1]` maps affinely onto
/// `[q_2j, q_2j+1]`, and infinity maps to `1`.
pub fn xspace_unfold(v: &Value) -> Result<Q> {
    match v {
        Value::Infinity => Ok(Q::one()),
        Value::Finite(x) => {
            let k = xspace_component(x)
                .ok_or_else(|| Error::Domain(format!("{} is not a point of X", to_pq(x))))?;
            let j = (k - 1) as u32;
            let quarter = pow2_inv(2 * j);
            let base = qi(2 * j as i64);
            Ok(Q::one() - &quarter + (x - base) * quarter / qi(2))
        }
    }
}

pub fn xspace_distance(x: &Value, y: &Value) -> Result<Q> {
    Ok((xspace_unfold(x)? - xspace_unfold(y)?).abs())
}

/// Weighted supremum `sup_k d_X(x(k), y(k)) / 2^|k|` over the window.
pub fn product_distance(x: &[Value], y: &[Value], window: (i64, i64)) -> Result<Q> {
    if window.0 > window.1 {
        return domain("empty window");
    }
    let len = (window.1 - window.0 + 1) as usize;
    if x.len() != len || y.len() != len {
        return domain(format!(
            "coordinate families of lengths {} and {} do not match the window of size {len}",
            x.len(),
            y.len()
        ));
    }
    let mut best = Q::zero();
    for (i, (a, b)) in x.iter().zip(y).enumerate() {
        let k = window.0 + i as i64;
        let d = xspace_distance(a, b)? * pow2_inv(k.unsigned_abs() as u32);
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactSet {
    pub ambient: MetricSpace,
    pub points: Vec<Point>,
}

impl CompactSet {
    pub fn new(ambient: MetricSpace, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return domain("a compact set needs at least one point");
        }
        for p in &points {
            ambient.check_point(p)?;
        }
        Ok(CompactSet { ambient, points })
    }

    pub fn from_rational_points(ambient: MetricSpace, points: &[Vec<Q>]) -> Result<Self> {
        CompactSet::new(ambient, points.iter().map(|p| finite_point(p)).collect())
    }

    /// Sorted, duplicate-free copy.
    pub fn normalized(&self) -> CompactSet {
        let mut points = self.points.clone();
        points.sort();
        points.dedup();
        CompactSet { ambient: self.ambient.clone(), points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance_to(&self, x: &[Value]) -> Result<Q> {
        let mut best: Option<Q> = None;
        for a in &self.points {
            let d = self.ambient.distance(a, x)?;
            if best.as_ref().is_none_or(|b| &d < b) {
                if d.is_zero() {
                    return Ok(d);
                }
                best = Some(d);
            }
        }
        best.ok_or_else(|| Error::Domain("empty point cloud".into()))
    }
}

fn directed(ambient: &MetricSpace, from: &[Point], to: &[Point]) -> Result<Q> {
    let one_point = |a: &Point, floor: &Q| -> Result<Q> {
        // the inner minimum may stop once it drops to the running maximum
        let mut best: Option<Q> = None;
        for b in to {
            let d = ambient.distance(a, b)?;
            if best.as_ref().is_none_or(|m| &d < m) {
                let stop = &d <= floor;
                best = Some(d);
                if stop {
                    break;
                }
            }
        }
        best.ok_or_else(|| Error::Domain("empty point cloud".into()))
    };
    if from.len() * to.len() < 4096 {
        let mut worst = Q::zero();
        for a in from {
            let d = one_point(a, &worst)?;
            if d > worst {
                worst = d;
            }
        }
        return Ok(worst);
    }
    let zero = Q::zero();
    let parts: Result<Vec<Q>> = from.par_iter().map(|a| one_point(a, &zero)).collect();
    Ok(parts?.into_iter().max().unwrap_or_else(Q::zero))
}

/// `max(sup_a inf_b d(a,b), sup_b inf_a d(a,b))`.
pub fn hausdorff_distance(a: &CompactSet, b: &CompactSet) -> Result<Q> {
    if a.ambient != b.ambient {
        return domain("Hausdorff distance between sets in different ambients");
    }
    if a.points.is_empty() || b.points.is_empty() {
        return domain("Hausdorff distance needs nonempty sets");
    }
    let ab = directed(&a.ambient, &a.points, &b.points)?;
    let ba = directed(&a.ambient, &b.points, &a.points)?;
    Ok(ab.max(ba))
}

/// Directed distance `sup_a inf_b d(a,b)`.
pub fn excess(a: &CompactSet, b: &CompactSet) -> Result<Q> {
    if a.ambient != b.ambient {
        return domain("excess between sets in different ambients");
    }
    directed(&a.ambient, &a.points, &b.points)
}

/// Whether `x` lies in the open `eps`-neighborhood of `a`.
pub fn epsilon_neighborhood_contains(a: &CompactSet, eps: &Q, x: &[Value]) -> Result<bool> {
    if !eps.is_positive() {
        return domain("neighborhood radius must be positive");
    }
    a.ambient.check_point(x)?;
    Ok(&a.distance_to(x)? < eps)
}

pub const DEFAULT_TAIL: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitVerdict {
    Converged,
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetLimit {
    pub verdict: LimitVerdict,
    /// The final term, present only when the tail converged.
    pub limit: Option<CompactSet>,
    /// Union of the tail terms.
    pub limsup: CompactSet,
    /// Points of the last term within `tol` of every tail term.
    pub liminf: Option<CompactSet>,
    /// Hausdorff distances between successive tail terms.
    pub tail_distances: Vec<Q>,
}

/// Finite-stage limit of a sequence of sets, judged on its last `tail` terms.
pub fn set_limit(seq: &[CompactSet], tol: &Q, tail: usize) -> Result<SetLimit> {
    let Some(last) = seq.last() else {
        return domain("set_limit of an empty sequence");
    };
    if !tol.is_positive() {
        return domain("tolerance must be positive");
    }
    if seq.iter().any(|s| s.ambient != last.ambient) {
        return domain("sequence terms live in different ambients");
    }
    let tail = tail.clamp(1, seq.len());
    let window = &seq[seq.len() - tail..];
    let tail_distances = window
        .windows(2)
        .map(|w| hausdorff_distance(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let converged = tail_distances.iter().all(|d| d < tol);

    let mut union: Vec<Point> = window.iter().flat_map(|s| s.points.iter().cloned()).collect();
    union.sort();
    union.dedup();
    let limsup = CompactSet { ambient: last.ambient.clone(), points: union };

    let mut inner = Vec::new();
    for p in &last.points {
        let mut keep = true;
        for s in window {
            if s.distance_to(p)? >= *tol {
                keep = false;
                break;
            }
        }
        if keep {
            inner.push(p.clone());
        }
    }
    let liminf = if inner.is_empty() {
        None
    } else {
        Some(CompactSet { ambient: last.ambient.clone(), points: inner }.normalized())
    };

    Ok(SetLimit {
        verdict: if converged { LimitVerdict::Converged } else { LimitVerdict::Divergent },
        limit: converged.then(|| last.clone()),
        limsup,
        liminf,
        tail_distances,
    })
}

impl PartialOrd for CompactSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CompactSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.points.cmp(&other.points)
    }
}
