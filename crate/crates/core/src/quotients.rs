//! Gluing legs of a fan along aligned triples, and recovering the number of
//! glued triples from legs that converge to a glued leg.
//!
//! A triple `(B, C, D)` on a leg is given by parameters
//! `b1 < b2 = c1 < c2 = d1 < d2`. Points are identified by the maps
//! `B -> D` (orientation preserving), `B -> C` and `C -> D` (both reversing).
//! Collapsing every triple turns the leg parameter into the fold function
//! `u`, which runs over each `B` three times: up, down, up.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::serde_as;

use crate::compacta::MetricSpace;
use crate::error::{domain, Error, Result};
use crate::fans::{Fan, Leg};
use crate::geometry::{add, linf, sample_polyline_step, scale, sub};
use crate::mahavier::mahavier_product;
use crate::rational::{pow2_inv, to_pq, Pq, Q};
use crate::relations::PLRelation;

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlignedTriple {
    #[serde_as(as = "Pq")]
    pub b1: Q,
    #[serde_as(as = "Pq")]
    pub b2: Q,
    #[serde_as(as = "Pq")]
    pub c2: Q,
    #[serde_as(as = "Pq")]
    pub d2: Q,
}

impl AlignedTriple {
    pub fn new(b1: Q, b2: Q, c2: Q, d2: Q) -> Result<Self> {
        let t = AlignedTriple { b1, b2, c2, d2 };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = Q::zero() < self.b1 && self.b1 < self.b2 && self.b2 < self.c2 && self.c2 < self.d2 && self.d2 < Q::one();
        if !ok {
            return domain(format!("triple {self} is not aligned inside (0, 1)"));
        }
        Ok(())
    }

    pub fn c1(&self) -> &Q {
        &self.b2
    }

    pub fn d1(&self) -> &Q {
        &self.c2
    }

    pub fn in_span(&self, t: &Q) -> bool {
        &self.b1 <= t && t <= &self.d2
    }

    pub fn in_b(&self, t: &Q) -> bool {
        &self.b1 <= t && t <= &self.b2
    }

    pub fn in_c(&self, t: &Q) -> bool {
        self.c1() <= t && t <= &self.c2
    }

    /// `B -> D`, sending `b1 -> d1` and `b2 -> d2`.
    pub fn bd(&self, t: &Q) -> Q {
        (&self.d2 - self.d1()) / (&self.b2 - &self.b1) * (t - &self.b1) + self.d1()
    }

    /// `B -> C`, sending `b2 -> c1` and `b1 -> c2`.
    pub fn bc(&self, t: &Q) -> Q {
        (&self.c2 - self.c1()) / (&self.b1 - &self.b2) * (t - &self.b2) + self.c1()
    }

    /// `C -> D`, sending `c2 -> d1` and `c1 -> d2`.
    pub fn cd(&self, t: &Q) -> Q {
        (&self.d2 - self.d1()) / (self.c1() - &self.c2) * (t - &self.c2) + self.d1()
    }

    /// The point of `B` identified with `t`.
    pub fn to_b(&self, t: &Q) -> Q {
        if t <= &self.b2 {
            t.clone()
        } else if t <= &self.c2 {
            &self.b2 + (t - self.c1()) * (&self.b1 - &self.b2) / (&self.c2 - self.c1())
        } else {
            &self.b1 + (t - self.d1()) * (&self.b2 - &self.b1) / (&self.d2 - self.d1())
        }
    }
}

impl std::fmt::Display for AlignedTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}, {})", to_pq(&self.b1), to_pq(&self.b2), to_pq(&self.c2), to_pq(&self.d2))
    }
}

/// Whether the parameters `x` and `y` are identified by the triple. Each map
/// applies to arguments in its source arc.
pub fn triple_equiv(x: &Q, y: &Q, t: &AlignedTriple) -> Result<bool> {
    for p in [x, y] {
        if !t.in_span(p) {
            return domain(format!("parameter {} lies outside {t}", to_pq(p)));
        }
    }
    let one_way = |x: &Q, y: &Q| {
        (t.in_b(y) && (*x == t.bd(y) || *x == t.bc(y))) || (t.in_c(y) && *x == t.cd(y))
    };
    Ok(x == y || one_way(x, y) || one_way(y, x))
}

/// Sends a parameter in some `C` or `D` to the identified point of `B`.
pub fn canonical_rep(x: &Q, triples: &[AlignedTriple]) -> Q {
    match triples.iter().find(|t| t.in_span(x)) {
        Some(t) => t.to_b(x),
        None => x.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSequence(Vec<usize>);

impl IndexSequence {
    pub fn new(prefix: Vec<usize>) -> Result<Self> {
        for (i, &v) in prefix.iter().enumerate() {
            let n = i + 1;
            if v != 2 * n - 1 && v != 2 * n {
                return domain(format!("entry {n} is {v}, expected {} or {}", 2 * n - 1, 2 * n));
            }
        }
        Ok(IndexSequence(prefix))
    }

    /// Parses `"1,3,5"`; the empty string is the empty prefix.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(IndexSequence(Vec::new()));
        }
        let v = s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| Error::Parse(format!("index entry {p:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        IndexSequence::new(v)
    }

    pub fn validated(self) -> Result<Self> {
        IndexSequence::new(self.0)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `i_n` for 1-based `n`.
    pub fn get(&self, n: usize) -> Option<usize> {
        n.checked_sub(1).and_then(|i| self.0.get(i).copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GluingSpec {
    /// Triples on the star leg `A^n`, keyed by `n`.
    pub legs: BTreeMap<usize, Vec<AlignedTriple>>,
}

impl GluingSpec {
    /// Sorts each collection and checks alignment and disjoint spans.
    pub fn new(legs: BTreeMap<usize, Vec<AlignedTriple>>) -> Result<Self> {
        let mut legs = legs;
        for (n, ts) in legs.iter_mut() {
            if *n == 0 {
                return domain("star legs are numbered from 1");
            }
            ts.sort_by(|a, b| a.b1.cmp(&b.b1));
            for t in ts.iter() {
                t.validate()?;
            }
            if let Some(w) = ts.windows(2).find(|w| w[0].d2 >= w[1].b1) {
                return domain(format!("triples {} and {} on leg {n} overlap", w[0], w[1]));
            }
        }
        Ok(GluingSpec { legs })
    }

    pub fn validated(self) -> Result<Self> {
        GluingSpec::new(self.legs)
    }

    /// Evenly spaced triples: triple `j` of `i` is centred at `(2j-1)/(2i+1)`
    /// with pieces of width `1/(6i+3)`.
    pub fn default_for(idx: &IndexSequence) -> GluingSpec {
        let legs = idx
            .entries()
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let i = i as i64;
                let w = Q::new(1.into(), (6 * i + 3).into());
                let ts = (1..=i)
                    .map(|j| {
                        let centre = Q::new((2 * j - 1).into(), (2 * i + 1).into());
                        let b1 = centre - &w * Q::new(3.into(), 2.into());
                        let b2 = &b1 + &w;
                        let c2 = &b2 + &w;
                        let d2 = &c2 + &w;
                        AlignedTriple { b1, b2, c2, d2 }
                    })
                    .collect();
                (k + 1, ts)
            })
            .collect();
        GluingSpec { legs }
    }

    pub fn check_against(&self, idx: &IndexSequence) -> Result<()> {
        if self.legs.len() != idx.len() || self.legs.keys().copied().ne(1..=idx.len()) {
            return domain(format!("gluing data covers legs {:?}, index has length {}", self.legs.keys().collect::<Vec<_>>(), idx.len()));
        }
        for (n, ts) in &self.legs {
            let want = idx.get(*n).unwrap_or(0);
            if ts.len() != want {
                return domain(format!("leg {n} carries {} triples, index asks for {want}", ts.len()));
            }
        }
        Ok(())
    }
}

/// `deg` of the glued star leg `A^n`.
pub fn degree_from_spec(spec: &GluingSpec, n: usize) -> Result<usize> {
    spec.legs.get(&n).map(Vec::len).ok_or_else(|| Error::Domain(format!("leg {n} is outside the prefix")))
}

/// The collapse of a leg parameter: identity up to the first `b2`, then
/// down over `C`, up over `D`, and shifted left after each `d2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldMap {
    triples: Vec<AlignedTriple>,
}

impl FoldMap {
    pub fn new(triples: &[AlignedTriple]) -> Self {
        let mut triples = triples.to_vec();
        triples.sort_by(|a, b| a.b1.cmp(&b.b1));
        FoldMap { triples }
    }

    pub fn eval(&self, s: &Q) -> Q {
        let mut lost = Q::zero();
        for t in &self.triples {
            if s <= &t.b2 {
                break;
            }
            if s <= &t.d2 {
                return t.to_b(s) - lost;
            }
            lost += &t.d2 - &t.b2;
        }
        s - lost
    }

    /// Parameters where `u` changes slope.
    pub fn knots(&self) -> Vec<Q> {
        let mut k = vec![Q::zero()];
        for t in &self.triples {
            k.extend([t.b2.clone(), t.c2.clone(), t.d2.clone()]);
        }
        k.push(Q::one());
        k
    }

    pub fn length(&self) -> Q {
        self.eval(&Q::one())
    }
}

/// The fan of segments of the depth-`m` product, each a straight leg from
/// the origin. Leg ids follow the word order.
pub fn base_fan(rel: &PLRelation, depth: usize) -> Result<Fan> {
    let cx = mahavier_product(rel, depth)?;
    let dim = depth + 1;
    let origin = vec![Q::zero(); dim];
    let mut legs = Vec::new();
    for seg in cx.segments.iter().filter(|s| !s.degenerate) {
        let (a, b) = (seg.point(&seg.domain.0), seg.point(&seg.domain.1));
        let (near, far) = if a == origin { (a, b) } else if b == origin { (b, a) } else {
            return domain(format!("segment {:?} does not reach the origin", seg.word));
        };
        legs.push(Leg::new(legs.len(), vec![near, far])?);
    }
    Fan::new(MetricSpace::weighted_product(1, dim as i64, MetricSpace::UnitInterval)?, origin, legs)
}

/// Ids of the `n` legs of largest diameter, largest first; ties go to the
/// smaller id.
pub fn star_legs(fan: &Fan, n: usize) -> Result<Vec<usize>> {
    if n > fan.legs.len() {
        return domain(format!("fan has {} legs, {n} requested", fan.legs.len()));
    }
    let mut d = fan.legs.iter().map(|l| Ok((l.diameter(&fan.ambient)?, l.id))).collect::<Result<Vec<_>>>()?;
    d.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    Ok(d.into_iter().take(n).map(|(_, id)| id).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointImage {
    pub leg: usize,
    #[serde(with = "points")]
    pub base: Vec<Q>,
    #[serde(with = "points")]
    pub image: Vec<Q>,
}

mod points {
    use serde::{Deserializer, Serializer};
    use serde_with::{DeserializeAs, SerializeAs};

    use crate::rational::{Pq, Q};

    pub fn serialize<S: Serializer>(p: &[Q], s: S) -> Result<S::Ok, S::Error> {
        <Vec<Pq> as SerializeAs<Vec<Q>>>::serialize_as(&p.to_vec(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        <Vec<Pq> as DeserializeAs<'de, Vec<Q>>>::deserialize_as(d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientFan {
    pub fan: Fan,
    /// `star[n-1]` is the id of `A^n`.
    pub star: Vec<usize>,
    pub index: IndexSequence,
    pub gluing: GluingSpec,
    pub endpoints: Vec<EndpointImage>,
    /// Unglued base legs, kept for building approximants.
    pub base_legs: Vec<Leg>,
}

impl QuotientFan {
    /// `n` with `A^n = leg`, when the leg is glued.
    pub fn star_index(&self, leg: usize) -> Option<usize> {
        self.star.iter().take(self.index.len()).position(|&id| id == leg).map(|i| i + 1)
    }

    pub fn fold_of(&self, leg: usize) -> FoldMap {
        match self.star_index(leg) {
            Some(n) => FoldMap::new(&self.gluing.legs[&n]),
            None => FoldMap::new(&[]),
        }
    }

    pub fn expected_degree(&self, leg: usize) -> usize {
        self.star_index(leg).and_then(|n| self.index.get(n)).unwrap_or(0)
    }
}

/// Collapses the triples of each glued star leg; other legs are unchanged.
pub fn quotient_fan(base: &Fan, star: &[usize], idx: &IndexSequence, spec: &GluingSpec) -> Result<QuotientFan> {
    spec.check_against(idx)?;
    if star.len() < idx.len() {
        return domain(format!("{} star legs for an index of length {}", star.len(), idx.len()));
    }
    for id in star {
        if base.leg(*id).is_none() {
            return domain(format!("no leg with id {id}"));
        }
    }
    let mut out = QuotientFan {
        fan: base.clone(),
        star: star.to_vec(),
        index: idx.clone(),
        gluing: spec.clone(),
        endpoints: Vec::new(),
        base_legs: base.legs.clone(),
    };
    let mut legs = Vec::with_capacity(base.legs.len());
    for leg in &base.legs {
        let fold = out.fold_of(leg.id);
        let realized = if out.star_index(leg.id).is_some() {
            Leg::new(leg.id, leg.prefix(&fold.length())?)?
        } else {
            leg.clone()
        };
        out.endpoints.push(EndpointImage {
            leg: leg.id,
            base: leg.endpoint().to_vec(),
            image: realized.endpoint().to_vec(),
        });
        legs.push(realized);
    }
    out.fan = Fan::new(base.ambient.clone(), base.top.clone(), legs)?;
    Ok(out)
}

/// The realized leg lifted by one coordinate, and `count` unglued legs
/// converging to it: `s -> (u(s) e_k, (s - u(s)) 2^-k)` with
/// `e_k = (1 - 2^-k) e + 2^-k z` and `z` the centre of the cube.
pub fn approximants(qf: &QuotientFan, leg: usize, count: usize) -> Result<(Leg, Vec<Leg>)> {
    let base = qf.base_legs.iter().find(|l| l.id == leg).ok_or_else(|| Error::Domain(format!("no leg with id {leg}")))?;
    if base.polyline.len() != 2 {
        return domain("approximants need straight legs");
    }
    let dir = sub(base.endpoint(), base.start());
    let dim = dir.len();
    let fold = qf.fold_of(leg);
    let lift = |p: Vec<Q>, extra: Q| {
        let mut p = add(base.start(), &p);
        p.push(extra);
        p
    };
    let target = Leg::new(leg, vec![lift(vec![Q::zero(); dim], Q::zero()), lift(scale(&dir, &fold.length()), Q::zero())])?;
    let half = Q::new(1.into(), 2.into());
    let centre = vec![half; dim];
    let mut out = Vec::with_capacity(count);
    for k in 1..=count {
        let delta = pow2_inv(k as u32);
        let ek = add(&scale(&dir, &(Q::one() - &delta)), &scale(&sub(&centre, base.start()), &delta));
        let poly = fold
            .knots()
            .iter()
            .map(|s| {
                let u = fold.eval(s);
                lift(scale(&ek, &u), (s - &u) * &delta)
            })
            .collect();
        out.push(Leg::new(k, poly)?);
    }
    Ok((target, out))
}

pub const MIN_APPROXIMANTS: usize = 3;
pub const DETECTION_TAIL: usize = 3;

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Detection {
    Count {
        degree: usize,
        /// Interruption arcs as intervals of the target's parameter.
        #[serde_as(as = "Vec<(Pq, Pq)>")]
        arcs: Vec<(Q, Q)>,
    },
    Inconclusive { reason: String },
}

impl Detection {
    pub fn degree(&self) -> Option<usize> {
        match self {
            Detection::Count { degree, .. } => Some(*degree),
            Detection::Inconclusive { .. } => None,
        }
    }
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn linf_hausdorff(a: &[Vec<Q>], b: &[Vec<Q>]) -> Q {
    let directed = |a: &[Vec<Q>], b: &[Vec<Q>]| {
        a.iter().map(|p| b.iter().map(|q| linf(&sub(p, q))).min().unwrap_or_else(Q::zero)).max().unwrap_or_else(Q::zero)
    };
    directed(a, b).max(directed(b, a))
}

/// Down-runs of the projection framed by up-runs that cover them.
fn folds(poly: &[Vec<Q>], origin: &[Q], chord: &[Q]) -> Vec<(Q, Q)> {
    let norm = dot(chord, chord);
    let proj: Vec<Q> = poly.iter().map(|p| dot(&sub(p, origin), chord) / &norm).collect();
    // (ascending, start, end) for maximal monotone runs
    let mut runs: Vec<(bool, Q, Q)> = Vec::new();
    for w in proj.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let up = w[1] > w[0];
        match runs.last_mut() {
            Some(r) if r.0 == up => r.2 = w[1].clone(),
            _ => runs.push((up, w[0].clone(), w[1].clone())),
        }
    }
    runs.windows(3)
        .filter(|w| w[0].0 && !w[1].0 && w[2].0 && w[0].1 <= w[1].2 && w[2].2 >= w[1].1)
        .map(|w| (w[1].2.clone(), w[1].1.clone()))
        .collect()
}

/// Counts interruptions of `target` seen by `approximants`: folds of the
/// projection onto the target with pattern up, down, up, present in every
/// approximant of the tail within `tol` of each other.
pub fn detect_interruptions(target: &Leg, approximants: &[Leg], tol: &Q) -> Result<Detection> {
    if approximants.len() < MIN_APPROXIMANTS {
        return Ok(Detection::Inconclusive {
            reason: format!("{} approximants, need at least {MIN_APPROXIMANTS}", approximants.len()),
        });
    }
    let origin = target.start().to_vec();
    let chord = sub(target.endpoint(), &origin);
    if chord.iter().all(Zero::is_zero) {
        return domain("target leg is degenerate");
    }
    let tail = &approximants[approximants.len() - DETECTION_TAIL..];
    // samples at spacing tol/4 keep the sampled distance within tol/4 of the true one
    let step = tol / Q::from_integer(4.into());
    let target_pts = sample_polyline_step(&target.polyline, &step);
    for (i, a) in tail.iter().enumerate() {
        if a.polyline[0].len() != origin.len() {
            return domain("approximant dimension differs from the target");
        }
        let d = linf_hausdorff(&sample_polyline_step(&a.polyline, &step), &target_pts);
        if &d > tol {
            return Err(Error::Precondition(format!(
                "approximant {} is {} from the target, above {}",
                approximants.len() - DETECTION_TAIL + i + 1,
                to_pq(&d),
                to_pq(tol)
            )));
        }
    }
    let found: Vec<Vec<(Q, Q)>> = tail.iter().map(|a| folds(&a.polyline, &origin, &chord)).collect();
    let close = |x: &(Q, Q), y: &(Q, Q)| {
        let d = (&x.0 - &y.0).abs().max((&x.1 - &y.1).abs());
        &d <= tol
    };
    let last = found.last().cloned().unwrap_or_default();
    let arcs: Vec<(Q, Q)> = last
        .into_iter()
        .filter(|f| found[..found.len() - 1].iter().all(|other| other.iter().any(|g| close(f, g))))
        .collect();
    Ok(Detection::Count { degree: arcs.len(), arcs })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegDegree {
    pub leg: usize,
    pub star_index: Option<usize>,
    pub expected: usize,
    pub detected: Detection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub legs: Vec<LegDegree>,
}

/// Detection on every leg of the quotient with `count` approximants each.
pub fn degree_report(qf: &QuotientFan, count: usize, tol: &Q) -> Result<DegreeReport> {
    let legs = qf
        .fan
        .legs
        .iter()
        .map(|l| {
            let (target, approx) = approximants(qf, l.id, count)?;
            Ok(LegDegree {
                leg: l.id,
                star_index: qf.star_index(l.id),
                expected: qf.expected_degree(l.id),
                detected: detect_interruptions(&target, &approx, tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DegreeReport { legs })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Distinction {
    /// The fans differ: `A^position` has these degrees in each.
    Position { position: usize, degrees: (usize, usize) },
    /// No certificate from the prefixes; not a proof of homeomorphism.
    IdenticalPrefix,
}

pub fn distinguish(a: &IndexSequence, b: &IndexSequence) -> Result<Distinction> {
    if a.len() != b.len() {
        return domain(format!("prefix lengths differ: {} and {}", a.len(), b.len()));
    }
    Ok(a
        .entries()
        .iter()
        .zip(b.entries())
        .position(|(x, y)| x != y)
        .map(|i| Distinction::Position { position: i + 1, degrees: (a.entries()[i], b.entries()[i]) })
        .unwrap_or(Distinction::IdenticalPrefix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fans::detect_endpoints;
    use crate::rational::{q, qi};
    use crate::relations::make_F_rrho;

    fn t() -> AlignedTriple {
        AlignedTriple::new(q(1, 10), q(2, 10), q(4, 10), q(5, 10)).unwrap()
    }

    #[test]
    fn endpoint_identifications() {
        let t = t();
        assert_eq!(t.bd(&t.b1), *t.d1());
        assert_eq!(t.bd(&t.b2), t.d2);
        assert_eq!(t.bc(&t.b2), *t.c1());
        assert_eq!(t.bc(&t.b1), t.c2);
        assert_eq!(t.cd(&t.c2), *t.d1());
        assert_eq!(t.cd(t.c1()), t.d2);
        assert!(triple_equiv(&t.b1, t.d1(), &t).unwrap());
        assert!(!triple_equiv(&t.b2, &t.c2, &t).unwrap());
        assert!(triple_equiv(&t.b2, &t.d2, &t).unwrap());
        assert!(triple_equiv(&q(3, 20), &q(3, 10), &t).unwrap());
        assert!(triple_equiv(&q(3, 10), &q(9, 20), &t).unwrap());
        assert!(triple_equiv(&qi(0), &qi(0), &t).is_err());
        assert!(AlignedTriple::new(q(1, 10), q(1, 10), q(4, 10), q(5, 10)).is_err());
    }

    #[test]
    fn canonical_and_fold() {
        let t = t();
        let ts = [t.clone()];
        assert_eq!(canonical_rep(t.d1(), &ts), t.b1);
        assert_eq!(canonical_rep(&q(7, 10), &ts), q(7, 10));
        let f = FoldMap::new(&ts);
        assert_eq!(f.eval(&t.b2), t.b2);
        assert_eq!(f.eval(&t.c2), t.b1);
        assert_eq!(f.eval(&t.d2), t.b2);
        assert_eq!(f.length(), q(7, 10));
    }

    #[test]
    fn index_and_spec() {
        assert!(IndexSequence::parse("1,3,6").is_ok());
        assert!(IndexSequence::parse("1,5").is_err());
        assert!(IndexSequence::parse("x").is_err());
        let idx = IndexSequence::parse("2,3,6").unwrap();
        let spec = GluingSpec::default_for(&idx);
        let spec = GluingSpec::new(spec.legs).unwrap();
        spec.check_against(&idx).unwrap();
        assert_eq!(degree_from_spec(&spec, 2).unwrap(), 3);
        assert!(degree_from_spec(&spec, 4).is_err());
        assert!(spec.check_against(&IndexSequence::parse("1,3,6").unwrap()).is_err());
    }

    #[test]
    fn quotient_keeps_fan_structure() {
        let f = make_F_rrho(&q(1, 2), &qi(3)).unwrap();
        let base = base_fan(&f, 2).unwrap();
        assert_eq!(base.legs.len(), 9);
        let star = star_legs(&base, 3).unwrap();
        let idx = IndexSequence::parse("1,4").unwrap();
        let qf = quotient_fan(&base, &star, &idx, &GluingSpec::default_for(&idx)).unwrap();
        assert_eq!(detect_endpoints(&qf.fan).len(), detect_endpoints(&base).len());
        let rep = degree_report(&qf, 8, &q(1, 16)).unwrap();
        for l in &rep.legs {
            assert_eq!(l.detected.degree(), Some(l.expected), "leg {}", l.leg);
        }
        let empty = IndexSequence::parse("").unwrap();
        assert_eq!(quotient_fan(&base, &star, &empty, &GluingSpec::default()).unwrap().fan, base);
    }

    #[test]
    fn separation() {
        let a = IndexSequence::parse("1,4,5").unwrap();
        let b = IndexSequence::parse("1,3,5").unwrap();
        assert_eq!(distinguish(&a, &b).unwrap(), Distinction::Position { position: 2, degrees: (4, 3) });
        assert_eq!(distinguish(&b, &b).unwrap(), Distinction::IdenticalPrefix);
        assert!(distinguish(&a, &IndexSequence::parse("1").unwrap()).is_err());
    }
}
