//! Finite fans: a top `v` and finitely many polyline legs meeting only at `v`.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::serde_as;

use crate::compacta::{
    epsilon_neighborhood_contains, finite_point, hausdorff_distance, set_limit, CompactSet, LimitVerdict,
    MetricSpace,
};
use crate::error::{domain, Error, Result};
use crate::geometry::{linf, meet_only_at, point_on_segment, polyline_intersection, sample_polyline_step, sub, Meet};
use crate::rational::{q, to_pq, Pq, Q};

/// An arc from the top, parameterized piecewise affinely over `[0, 1]`:
/// vertex `i` of the polyline sits at parameter `knots[i]`.
#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub id: usize,
    #[serde_as(as = "Vec<Vec<Pq>>")]
    pub polyline: Vec<Vec<Q>>,
    #[serde_as(as = "Vec<Pq>")]
    pub knots: Vec<Q>,
}

impl Leg {
    /// Leg with knots proportional to sup-norm edge length.
    pub fn new(id: usize, polyline: Vec<Vec<Q>>) -> Result<Leg> {
        if polyline.len() < 2 {
            return domain(format!("leg {id} needs at least two vertices"));
        }
        let lens: Vec<Q> = polyline.windows(2).map(|w| linf(&sub(&w[1], &w[0]))).collect();
        let total: Q = lens.iter().cloned().sum();
        if total.is_zero() {
            return domain(format!("leg {id} is degenerate"));
        }
        let mut knots = vec![Q::zero()];
        let mut acc = Q::zero();
        for l in &lens {
            acc += l;
            knots.push(&acc / &total);
        }
        Leg::with_knots(id, polyline, knots)
    }

    pub fn with_knots(id: usize, polyline: Vec<Vec<Q>>, knots: Vec<Q>) -> Result<Leg> {
        let leg = Leg { id, polyline, knots };
        leg.validate()?;
        Ok(leg)
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.id;
        let n = self.polyline.len();
        if n < 2 {
            return domain(format!("leg {id} needs at least two vertices"));
        }
        let dim = self.polyline[0].len();
        if self.polyline.iter().any(|p| p.len() != dim) {
            return domain(format!("leg {id} mixes point dimensions"));
        }
        if self.knots.len() != n {
            return domain(format!("leg {id} has {} knots for {n} vertices", self.knots.len()));
        }
        if !self.knots[0].is_zero() || !self.knots[n - 1].is_one() {
            return domain(format!("leg {id} knots must run from 0 to 1"));
        }
        if self.knots.windows(2).any(|w| w[0] >= w[1]) {
            return domain(format!("leg {id} knots must increase strictly"));
        }
        if self.polyline.windows(2).any(|w| w[0] == w[1]) {
            return domain(format!("leg {id} repeats a vertex"));
        }
        // simple arc: adjacent edges share only their joint, others are disjoint
        for i in 0..n - 1 {
            for j in i + 1..n - 1 {
                let m = crate::geometry::segment_intersection(
                    &self.polyline[i],
                    &self.polyline[i + 1],
                    &self.polyline[j],
                    &self.polyline[j + 1],
                );
                let ok = if j == i + 1 {
                    m == Meet::Point(self.polyline[j].clone())
                } else {
                    m.is_empty()
                };
                if !ok {
                    return domain(format!("leg {id} is not a simple arc (edges {i} and {j} meet)"));
                }
            }
        }
        Ok(())
    }

    pub fn start(&self) -> &[Q] {
        &self.polyline[0]
    }

    pub fn endpoint(&self) -> &[Q] {
        self.polyline.last().expect("validated leg")
    }

    /// Parameter of `x` on the leg, if `x` lies on it.
    pub fn locate(&self, x: &[Q]) -> Option<Q> {
        if x.len() != self.start().len() {
            return None;
        }
        for (i, w) in self.polyline.windows(2).enumerate() {
            if let Some(s) = point_on_segment(x, &w[0], &w[1]) {
                return Some(&self.knots[i] + s * (&self.knots[i + 1] - &self.knots[i]));
            }
        }
        None
    }

    pub fn eval(&self, t: &Q) -> Result<Vec<Q>> {
        if t.is_negative() || t > &Q::one() {
            return domain(format!("leg parameter {} outside [0, 1]", to_pq(t)));
        }
        let i = self.segment_of(t);
        let s = (t - &self.knots[i]) / (&self.knots[i + 1] - &self.knots[i]);
        Ok(crate::geometry::lerp(&self.polyline[i], &self.polyline[i + 1], &s))
    }

    fn segment_of(&self, t: &Q) -> usize {
        let idx = self.knots.partition_point(|k| k <= t);
        idx.clamp(1, self.knots.len() - 1) - 1
    }

    /// The sub-arc from the top to the point at parameter `t`.
    pub fn prefix(&self, t: &Q) -> Result<Vec<Vec<Q>>> {
        let end = self.eval(t)?;
        if t.is_zero() {
            return Ok(vec![end]);
        }
        let i = self.segment_of(t);
        let mut out: Vec<Vec<Q>> = self.polyline[..=i].to_vec();
        if out.last() != Some(&end) {
            out.push(end);
        }
        Ok(out)
    }

    /// Diameter under a norm-induced metric; attained at a pair of vertices.
    pub fn diameter(&self, ambient: &MetricSpace) -> Result<Q> {
        let pts: Vec<_> = self.polyline.iter().map(|p| finite_point(p)).collect();
        let mut best = Q::zero();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = ambient.distance(&pts[i], &pts[j])?;
                if d > best {
                    best = d;
                }
            }
        }
        Ok(best)
    }
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    pub ambient: MetricSpace,
    #[serde_as(as = "Vec<Pq>")]
    pub top: Vec<Q>,
    pub legs: Vec<Leg>,
}

impl Fan {
    pub fn new(ambient: MetricSpace, top: Vec<Q>, legs: Vec<Leg>) -> Result<Fan> {
        let fan = Fan { ambient, top, legs };
        fan.validate()?;
        Ok(fan)
    }

    pub fn validate(&self) -> Result<()> {
        self.ambient.check_point(&finite_point(&self.top))?;
        let mut ids = BTreeSet::new();
        for leg in &self.legs {
            leg.validate()?;
            if !ids.insert(leg.id) {
                return domain(format!("duplicate leg id {}", leg.id));
            }
            if leg.start() != self.top.as_slice() {
                return domain(format!("leg {} does not start at the top", leg.id));
            }
            for p in &leg.polyline {
                self.ambient.check_point(&finite_point(p))?;
            }
        }
        for (i, a) in self.legs.iter().enumerate() {
            for b in &self.legs[i + 1..] {
                if !meet_only_at(&a.polyline, &b.polyline, &self.top) {
                    return domain(format!("legs {} and {} meet away from the top", a.id, b.id));
                }
            }
        }
        Ok(())
    }

    pub fn leg(&self, id: usize) -> Option<&Leg> {
        self.legs.iter().find(|l| l.id == id)
    }

    /// Leg position and parameter of a point of the fan; the top reports the
    /// first leg at parameter 0.
    pub fn locate(&self, x: &[Q]) -> Option<(usize, Q)> {
        self.legs.iter().enumerate().find_map(|(i, leg)| leg.locate(x).map(|t| (i, t)))
    }

    /// The arc `[v, x]` as a polyline.
    pub fn arc_to(&self, x: &[Q]) -> Result<Vec<Vec<Q>>> {
        if x == self.top.as_slice() {
            return Ok(vec![self.top.clone()]);
        }
        let (i, t) = self
            .locate(x)
            .ok_or_else(|| Error::Domain(format!("point {} is not on the fan", fmt_point(x))))?;
        self.legs[i].prefix(&t)
    }

    pub fn sample_arc(&self, poly: &[Vec<Q>], step: &Q) -> Result<CompactSet> {
        CompactSet::from_rational_points(self.ambient.clone(), &sample_polyline_step(poly, step))
    }
}

pub(crate) fn fmt_point(x: &[Q]) -> String {
    let parts: Vec<String> = x.iter().map(to_pq).collect();
    format!("({})", parts.join(", "))
}

/// `x <= y` along the leg, measured from the top.
pub fn leg_order(x: &[Q], y: &[Q], leg: &Leg) -> Result<bool> {
    let tx = leg
        .locate(x)
        .ok_or_else(|| Error::Domain(format!("{} is not on leg {}", fmt_point(x), leg.id)))?;
    let ty = leg
        .locate(y)
        .ok_or_else(|| Error::Domain(format!("{} is not on leg {}", fmt_point(y), leg.id)))?;
    Ok(tx <= ty)
}

/// Segments from the origin to `(1/i, 1/i^2)`, `i = 1..=n_legs`.
pub fn make_star(n_legs: usize) -> Result<Fan> {
    if n_legs == 0 {
        return domain("a star needs at least one leg");
    }
    let top = vec![Q::zero(), Q::zero()];
    let legs = (1..=n_legs)
        .map(|i| {
            let i = i as i64;
            Leg::new(i as usize - 1, vec![top.clone(), vec![q(1, i), q(1, i * i)]])
        })
        .collect::<Result<Vec<_>>>()?;
    Fan::new(MetricSpace::UnitSquare, top, legs)
}

/// Tips of the legs, sorted and without repeats.
pub fn detect_endpoints(fan: &Fan) -> Vec<Vec<Q>> {
    let set: BTreeSet<Vec<Q>> = fan.legs.iter().map(|l| l.endpoint().to_vec()).collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone)]
pub struct NonsmoothOptions {
    /// Sampling step along arcs; defaults to a quarter of the tolerance.
    pub step: Option<Q>,
    pub tail: usize,
}

impl Default for NonsmoothOptions {
    fn default() -> Self {
        NonsmoothOptions { step: None, tail: crate::compacta::DEFAULT_TAIL }
    }
}

#[derive(Debug, Clone)]
pub struct NonsmoothReport {
    pub witness: bool,
    /// Hausdorff distance between the limsup approximant and `[v, x0]`.
    pub gap: Q,
    pub verdict: LimitVerdict,
    pub limsup: CompactSet,
    pub target_arc: CompactSet,
    /// Whether `[v, x0]` lies inside the `tol`-neighborhood of the limsup.
    pub target_covered: bool,
}

/// Compares the arcs `[v, x_n]` with `[v, x0]`; a gap larger than `tol`
/// between their limsup and `[v, x0]` witnesses non-smoothness at `x0`.
pub fn detect_nonsmooth(
    fan: &Fan,
    x0: &[Q],
    approach: &[Vec<Q>],
    tol: &Q,
    opts: &NonsmoothOptions,
) -> Result<NonsmoothReport> {
    if !tol.is_positive() {
        return domain("tolerance must be positive");
    }
    if approach.is_empty() {
        return Err(Error::Precondition("empty approach sequence".into()));
    }
    let distinct: BTreeSet<&Vec<Q>> = approach.iter().collect();
    if distinct.len() != approach.len() {
        return Err(Error::Precondition("approach points must be pairwise distinct".into()));
    }
    let target = finite_point(x0);
    let tail = opts.tail.clamp(1, approach.len());
    for x in &approach[approach.len() - tail..] {
        if fan.ambient.distance(&finite_point(x), &target)? >= *tol {
            return Err(Error::Precondition(format!(
                "approach point {} is not within tolerance of the target",
                fmt_point(x)
            )));
        }
    }
    let step = opts.step.clone().unwrap_or_else(|| tol / Q::from_integer(4.into()));
    let arcs = approach
        .iter()
        .map(|x| fan.arc_to(x).and_then(|p| fan.sample_arc(&p, &step)))
        .collect::<Result<Vec<_>>>()?;
    let target_arc = fan.sample_arc(&fan.arc_to(x0)?, &step)?;
    let lim = set_limit(&arcs, tol, opts.tail)?;
    let gap = hausdorff_distance(&lim.limsup, &target_arc)?;
    let mut covered = true;
    for p in &target_arc.points {
        if !epsilon_neighborhood_contains(&lim.limsup, tol, p)? {
            covered = false;
            break;
        }
    }
    Ok(NonsmoothReport {
        witness: &gap > tol,
        gap,
        verdict: lim.verdict,
        limsup: lim.limsup,
        target_arc,
        target_covered: covered,
    })
}

/// Whether the graph joining points closer than `eps` is connected.
pub fn is_eps_connected(set: &CompactSet, eps: &Q) -> Result<bool> {
    let n = set.points.len();
    if n == 0 {
        return Ok(true);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && set.ambient.distance(&set.points[i], &set.points[j])? < *eps {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    Ok(seen.into_iter().all(|s| s))
}

/// All pieces where two legs of the fan meet.
pub fn leg_meets(fan: &Fan, a: usize, b: usize) -> Vec<Meet> {
    polyline_intersection(&fan.legs[a].polyline, &fan.legs[b].polyline)
}
