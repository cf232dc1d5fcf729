//! Finite Mahavier products as unions of affinely parametrized segments.
//!
//! A branch word `w_1 .. w_m` selects the tuples `(x_1, .., x_{m+1})` with
//! `x_{i+1} = f_{w_i}(x_i)`; every coordinate is then an affine function of
//! `x_1` over an interval of admissible starting values.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_with::serde_as;

use crate::compacta::Value;
use crate::error::{domain, Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::rational::{to_pq, Pq, Q};
use crate::relations::{ambient_components, relation_contains, PLRelation};

pub const DEFAULT_CAP: usize = 1_000_000;

/// `x -> slope * x + offset`.
#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Affine(#[serde_as(as = "Pq")] pub Q, #[serde_as(as = "Pq")] pub Q);

impl Affine {
    pub fn identity() -> Affine {
        Affine(Q::one(), Q::zero())
    }

    pub fn apply(&self, x: &Q) -> Q {
        &self.0 * x + &self.1
    }

    /// `outer ∘ self`.
    pub fn then(&self, slope: &Q, offset: &Q) -> Affine {
        Affine(slope * &self.0, slope * &self.1 + offset)
    }

    /// `{ x in dom : self(x) in target }`.
    pub fn pullback(&self, dom: &Interval, target: &Interval) -> Interval {
        if self.0.is_zero() {
            if target.contains(&self.1) {
                return dom.clone();
            }
            return Interval::open(Q::zero(), Q::zero());
        }
        target.affine_preimage(&self.0, &self.1).intersect(dom)
    }

    pub fn image(&self, dom: &Interval) -> Interval {
        dom.affine_image(&self.0, &self.1)
    }
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub word: Vec<usize>,
    #[serde_as(as = "(Pq, Pq)")]
    pub domain: (Q, Q),
    /// Open flags of the domain ends; only cylinders produce open ends.
    #[serde(default, skip_serializing_if = "both_closed")]
    pub open: (bool, bool),
    /// Coordinate maps in terms of the first coordinate.
    pub maps: Vec<Affine>,
    #[serde(default)]
    pub degenerate: bool,
}

fn both_closed(o: &(bool, bool)) -> bool {
    !o.0 && !o.1
}

impl Segment {
    fn from_interval(word: Vec<usize>, iv: &Interval, maps: Vec<Affine>) -> Segment {
        Segment {
            word,
            domain: (iv.lo.clone(), iv.hi.clone()),
            open: (iv.lo_open, iv.hi_open),
            maps,
            degenerate: iv.lo == iv.hi,
        }
    }

    pub fn interval(&self) -> Interval {
        Interval {
            lo: self.domain.0.clone(),
            hi: self.domain.1.clone(),
            lo_open: self.open.0,
            hi_open: self.open.1,
        }
    }

    /// Coordinates of the tuple with first coordinate `x`.
    pub fn point(&self, x: &Q) -> Vec<Q> {
        self.maps.iter().map(|m| m.apply(x)).collect()
    }

    /// Range of coordinate `p` (0-based position) over the domain.
    pub fn coordinate_range(&self, p: usize) -> Interval {
        self.maps[p].image(&self.interval())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentComplex {
    pub relation: PLRelation,
    pub depth: usize,
    /// Index carried by the first coordinate: 1 for one-sided products and
    /// the left end of the window for two-sided ones.
    pub first_index: i64,
    pub segments: Vec<Segment>,
    /// Whether the constant sequence at infinity belongs to the complex.
    #[serde(default)]
    pub infinity: bool,
}

impl SegmentComplex {
    pub fn last_index(&self) -> i64 {
        self.first_index + self.depth as i64
    }

    fn position(&self, index: i64) -> Result<usize> {
        if index < self.first_index || index > self.last_index() {
            return domain(format!(
                "coordinate {index} outside {}..={}",
                self.first_index,
                self.last_index()
            ));
        }
        Ok((index - self.first_index) as usize)
    }

    pub fn reindex(&self, delta: i64) -> SegmentComplex {
        SegmentComplex { first_index: self.first_index + delta, ..self.clone() }
    }

    pub fn words(&self) -> Vec<&[usize]> {
        self.segments.iter().map(|s| s.word.as_slice()).collect()
    }
}

fn roots(rel: &PLRelation) -> Vec<Interval> {
    ambient_components(&rel.ambient).into_parts()
}

/// All admissible words of length `m` with their segments.
pub fn mahavier_product(rel: &PLRelation, m: usize) -> Result<SegmentComplex> {
    mahavier_product_capped(rel, m, DEFAULT_CAP)
}

pub fn mahavier_product_capped(rel: &PLRelation, m: usize, cap: usize) -> Result<SegmentComplex> {
    let segments = enumerate(rel, m, cap)?;
    Ok(SegmentComplex { relation: rel.clone(), depth: m, first_index: 1, segments, infinity: rel.infinity_fixed })
}

/// Segment complex over the coordinates `k_minus..=k_plus`.
pub fn two_sided_window(rel: &PLRelation, k_minus: i64, k_plus: i64) -> Result<SegmentComplex> {
    two_sided_window_capped(rel, k_minus, k_plus, DEFAULT_CAP)
}

pub fn two_sided_window_capped(rel: &PLRelation, k_minus: i64, k_plus: i64, cap: usize) -> Result<SegmentComplex> {
    if k_minus > 0 || k_plus < 0 {
        return domain("the window must contain index 0");
    }
    let m = (k_plus - k_minus) as usize;
    let segments = enumerate(rel, m, cap)?;
    Ok(SegmentComplex {
        relation: rel.clone(),
        depth: m,
        first_index: k_minus,
        segments,
        infinity: rel.infinity_fixed,
    })
}

fn enumerate(rel: &PLRelation, m: usize, cap: usize) -> Result<Vec<Segment>> {
    let count = AtomicUsize::new(0);
    let overflow = || Error::Capacity { what: format!("segments of depth {m}"), cap };
    if m == 0 {
        let segs: Vec<Segment> = roots(rel)
            .iter()
            .map(|iv| Segment::from_interval(Vec::new(), iv, vec![Affine::identity()]))
            .collect();
        if segs.len() > cap {
            return Err(overflow());
        }
        return Ok(segs);
    }
    let per_letter: Vec<Result<Vec<Segment>>> = rel
        .branches
        .par_iter()
        .map(|b| {
            let mut out = Vec::new();
            let mut word = vec![b.id];
            let maps = vec![Affine::identity(), Affine::identity().then(&b.slope, &b.offset)];
            extend(rel, m, &mut word, &b.domain_interval(), maps, &mut out, &count, cap)?;
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for part in per_letter {
        all.extend(part?);
    }
    if all.len() > cap {
        return Err(overflow());
    }
    Ok(all)
}

#[allow(clippy::too_many_arguments)]
fn extend(
    rel: &PLRelation,
    m: usize,
    word: &mut Vec<usize>,
    dom: &Interval,
    maps: Vec<Affine>,
    out: &mut Vec<Segment>,
    count: &AtomicUsize,
    cap: usize,
) -> Result<()> {
    if word.len() == m {
        if count.fetch_add(1, Ordering::Relaxed) >= cap {
            return Err(Error::Capacity { what: format!("segments of depth {m}"), cap });
        }
        out.push(Segment::from_interval(word.clone(), dom, maps));
        return Ok(());
    }
    let last = maps.last().expect("nonempty maps").clone();
    for b in &rel.branches {
        let next = last.pullback(dom, &b.domain_interval());
        if next.is_empty() {
            continue;
        }
        let mut maps2 = maps.clone();
        maps2.push(last.then(&b.slope, &b.offset));
        word.push(b.id);
        extend(rel, m, word, &next, maps2, out, count, cap)?;
        word.pop();
    }
    Ok(())
}

/// Whether consecutive coordinates all lie in the relation.
pub fn is_admissible(rel: &PLRelation, coords: &[Value]) -> bool {
    coords.windows(2).all(|w| relation_contains(rel, &w[0], &w[1]))
}

fn branch(rel: &PLRelation, id: usize) -> Result<&crate::relations::AffineBranch> {
    rel.branches.get(id).ok_or_else(|| Error::Domain(format!("unknown branch id {id}")))
}

/// Coordinates generated by a word from a first coordinate.
pub fn word_point(rel: &PLRelation, word: &[usize], x1: &Q) -> Result<Vec<Q>> {
    let mut out = vec![x1.clone()];
    for &l in word {
        let b = branch(rel, l)?;
        let x = out.last().unwrap();
        if !b.in_domain(x) {
            return domain(format!("{} is outside the domain of branch {l}", to_pq(x)));
        }
        out.push(b.apply(x));
    }
    Ok(out)
}

/// Drops the first coordinate of a one-sided point.
pub fn shift_forward(rel: &PLRelation, word: &[usize], x1: &Q) -> Result<(Vec<usize>, Q)> {
    let Some((&first, rest)) = word.split_first() else {
        return domain("cannot shift a point with an empty word");
    };
    word_point(rel, word, x1)?;
    Ok((rest.to_vec(), branch(rel, first)?.apply(x1)))
}

/// A point of a two-sided window: coordinate `first_index` is `base` and the
/// later coordinates follow the word.
#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPoint {
    pub first_index: i64,
    pub word: Vec<usize>,
    #[serde_as(as = "Pq")]
    pub base: Q,
}

impl WindowPoint {
    pub fn coordinates(&self, rel: &PLRelation) -> Result<Vec<Q>> {
        word_point(rel, &self.word, &self.base)
    }

    pub fn reindex(&self, delta: i64) -> WindowPoint {
        WindowPoint { first_index: self.first_index + delta, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Forward,
    Backward,
}

/// One step of the two-sided shift on a fixed window. Forward drops the left
/// coordinate and appends `f_ext` of the right one; backward prepends the
/// `f_ext`-preimage of the left coordinate and drops the right one. The
/// letter that was dropped is returned so that the opposite step undoes it.
pub fn shift_window(rel: &PLRelation, p: &WindowPoint, dir: Direction, ext: usize) -> Result<(WindowPoint, usize)> {
    let coords = p.coordinates(rel)?;
    let b = branch(rel, ext)?;
    match dir {
        Direction::Forward => {
            let right = coords.last().unwrap();
            if !b.in_domain(right) {
                return domain(format!("extension letter {ext} is not admissible at {}", to_pq(right)));
            }
            let (dropped, base) = match p.word.first() {
                Some(&w0) => (w0, coords[1].clone()),
                None => (ext, b.apply(&p.base)),
            };
            let mut word: Vec<usize> = p.word.iter().skip(1).copied().collect();
            if !p.word.is_empty() {
                word.push(ext);
            }
            Ok((WindowPoint { first_index: p.first_index, word, base }, dropped))
        }
        Direction::Backward => {
            if b.slope.is_zero() {
                return domain(format!("branch {ext} is not invertible"));
            }
            let prev = b.unapply(&p.base);
            if !b.in_domain(&prev) {
                return domain(format!("extension letter {ext} is not admissible before {}", to_pq(&p.base)));
            }
            let dropped = p.word.last().copied().unwrap_or(ext);
            let mut word = Vec::with_capacity(p.word.len());
            if !p.word.is_empty() {
                word.push(ext);
                word.extend_from_slice(&p.word[..p.word.len() - 1]);
            }
            Ok((WindowPoint { first_index: p.first_index, word, base: prev }, dropped))
        }
    }
}

/// Restriction of a complex to the tuples whose listed coordinates lie in the
/// given intervals.
pub fn cylinder(cx: &SegmentComplex, constraints: &BTreeMap<i64, Interval>) -> Result<SegmentComplex> {
    let mut pos = Vec::new();
    for (idx, iv) in constraints {
        pos.push((cx.position(*idx)?, iv));
    }
    let mut segments = Vec::new();
    for s in &cx.segments {
        let mut dom = s.interval();
        for (p, iv) in &pos {
            dom = s.maps[*p].pullback(&dom, iv);
            if dom.is_empty() {
                break;
            }
        }
        if !dom.is_empty() {
            segments.push(Segment::from_interval(s.word.clone(), &dom, s.maps.clone()));
        }
    }
    Ok(SegmentComplex {
        relation: cx.relation.clone(),
        depth: cx.depth,
        first_index: cx.first_index,
        segments,
        infinity: cx.infinity && constraints.is_empty(),
    })
}

/// Projection of one segment onto a pair of coordinates.
#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment2 {
    pub word: Vec<usize>,
    #[serde_as(as = "(Pq, Pq)")]
    pub from: (Q, Q),
    #[serde_as(as = "(Pq, Pq)")]
    pub to: (Q, Q),
}

pub fn project(cx: &SegmentComplex, i: i64, j: i64) -> Result<Vec<Segment2>> {
    if i == j {
        return domain("projection needs two distinct coordinates");
    }
    let (pi, pj) = (cx.position(i)?, cx.position(j)?);
    Ok(cx
        .segments
        .iter()
        .map(|s| {
            let (a, b) = (&s.domain.0, &s.domain.1);
            Segment2 {
                word: s.word.clone(),
                from: (s.maps[pi].apply(a), s.maps[pj].apply(a)),
                to: (s.maps[pi].apply(b), s.maps[pj].apply(b)),
            }
        })
        .collect())
}

/// Union over segments of the range of one coordinate.
pub fn coordinate_trace(cx: &SegmentComplex, index: i64) -> Result<IntervalSet> {
    let p = cx.position(index)?;
    Ok(IntervalSet::from_intervals(cx.segments.iter().map(|s| s.coordinate_range(p)).collect()))
}
