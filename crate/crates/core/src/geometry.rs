//! Exact polyline geometry in `Q^d`.

use num_traits::{One, Signed, Zero};

use crate::rational::Q;

pub fn sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Q], s: &Q) -> Vec<Q> {
    a.iter().map(|x| x * s).collect()
}

/// `(1 - t) a + t b`.
pub fn lerp(a: &[Q], b: &[Q], t: &Q) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect()
}

pub fn linf(a: &[Q]) -> Q {
    a.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero)
}

pub fn is_zero(a: &[Q]) -> bool {
    a.iter().all(|x| x.is_zero())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Meet {
    Empty,
    Point(Vec<Q>),
    Segment(Vec<Q>, Vec<Q>),
}

impl Meet {
    pub fn is_empty(&self) -> bool {
        matches!(self, Meet::Empty)
    }
}

fn unit(t: &Q) -> bool {
    !t.is_negative() && t <= &Q::one()
}

/// If `d2` is a scalar multiple of `d1` (with `d1` nonzero) returns the factor.
fn parallel_factor(d1: &[Q], d2: &[Q]) -> Option<Q> {
    let i = d1.iter().position(|x| !x.is_zero())?;
    let f = &d2[i] / &d1[i];
    d1.iter().zip(d2).all(|(a, b)| a * &f == *b).then_some(f)
}

/// Parameter `s in [0,1]` with `a + s (b - a) = x`, if `x` lies on the segment.
pub fn point_on_segment(x: &[Q], a: &[Q], b: &[Q]) -> Option<Q> {
    let d = sub(b, a);
    let w = sub(x, a);
    if is_zero(&d) {
        return is_zero(&w).then(Q::zero);
    }
    if is_zero(&w) {
        return Some(Q::zero());
    }
    let s = parallel_factor(&d, &w)?;
    unit(&s).then_some(s)
}

/// Exact intersection of the closed segments `[p0, p1]` and `[q0, q1]`.
pub fn segment_intersection(p0: &[Q], p1: &[Q], q0: &[Q], q1: &[Q]) -> Meet {
    let d1 = sub(p1, p0);
    let d2 = sub(q1, q0);
    if is_zero(&d1) {
        return match point_on_segment(p0, q0, q1) {
            Some(_) => Meet::Point(p0.to_vec()),
            None => Meet::Empty,
        };
    }
    if is_zero(&d2) {
        return match point_on_segment(q0, p0, p1) {
            Some(_) => Meet::Point(q0.to_vec()),
            None => Meet::Empty,
        };
    }
    let w = sub(q0, p0);
    if let Some(f) = parallel_factor(&d1, &d2) {
        // parallel: collinear only if q0 - p0 is along d1 as well
        let s0 = if is_zero(&w) {
            Q::zero()
        } else {
            match parallel_factor(&d1, &w) {
                Some(s) => s,
                None => return Meet::Empty,
            }
        };
        let s1 = &s0 + &f;
        let (lo, hi) = if s0 <= s1 { (s0, s1) } else { (s1, s0) };
        let lo = lo.max(Q::zero());
        let hi = hi.min(Q::one());
        if lo > hi {
            return Meet::Empty;
        }
        let a = lerp(p0, p1, &lo);
        if lo == hi {
            return Meet::Point(a);
        }
        return Meet::Segment(a, lerp(p0, p1, &hi));
    }
    // p0 + s d1 = q0 + t d2 on a pair of coordinates with a nonzero minor
    let i = d1.iter().position(|x| !x.is_zero()).expect("nonzero direction");
    let j = (0..d1.len())
        .find(|&j| &d1[i] * &d2[j] != &d1[j] * &d2[i])
        .expect("non-parallel directions have a nonzero minor");
    let det = &d1[j] * &d2[i] - &d1[i] * &d2[j];
    let s = (&w[j] * &d2[i] - &w[i] * &d2[j]) / &det;
    let t = (&d1[i] * &w[j] - &d1[j] * &w[i]) / &det;
    if !unit(&s) || !unit(&t) {
        return Meet::Empty;
    }
    let x = lerp(p0, p1, &s);
    if x != lerp(q0, q1, &t) {
        return Meet::Empty;
    }
    Meet::Point(x)
}

/// All nonempty pieces of the intersection of two polylines.
pub fn polyline_intersection(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Meet> {
    let mut out = Vec::new();
    for sa in segments(a) {
        for sb in segments(b) {
            let m = segment_intersection(sa.0, sa.1, sb.0, sb.1);
            if !m.is_empty() && !out.contains(&m) {
                out.push(m);
            }
        }
    }
    out
}

/// Consecutive vertex pairs; a single vertex counts as a degenerate segment.
pub fn segments(poly: &[Vec<Q>]) -> Vec<(&[Q], &[Q])> {
    if poly.len() == 1 {
        return vec![(&poly[0], &poly[0])];
    }
    poly.windows(2).map(|w| (w[0].as_slice(), w[1].as_slice())).collect()
}

/// True when the polylines share exactly the single point `v`.
pub fn meet_only_at(a: &[Vec<Q>], b: &[Vec<Q>], v: &[Q]) -> bool {
    polyline_intersection(a, b)
        .iter()
        .all(|m| matches!(m, Meet::Point(p) if p.as_slice() == v))
}

/// `n + 1` equally spaced points from `a` to `b`.
pub fn subdivide(a: &[Q], b: &[Q], n: usize) -> Vec<Vec<Q>> {
    let n = n.max(1);
    (0..=n)
        .map(|i| lerp(a, b, &Q::new((i as i64).into(), (n as i64).into())))
        .collect()
}

/// Points along a polyline with each edge cut into `per_edge` equal pieces.
pub fn sample_polyline(poly: &[Vec<Q>], per_edge: usize) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = Vec::new();
    if poly.len() == 1 {
        return vec![poly[0].clone()];
    }
    for w in poly.windows(2) {
        let pts = subdivide(&w[0], &w[1], per_edge);
        let skip = usize::from(!out.is_empty());
        out.extend(pts.into_iter().skip(skip));
    }
    out
}

/// Points along a polyline with spacing at most `step` in the sup norm.
pub fn sample_polyline_step(poly: &[Vec<Q>], step: &Q) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = Vec::new();
    if poly.len() == 1 {
        return vec![poly[0].clone()];
    }
    for w in poly.windows(2) {
        let len = linf(&sub(&w[1], &w[0]));
        let n = (len / step).ceil().to_integer();
        let n: usize = n.try_into().unwrap_or(usize::MAX).max(1);
        let pts = subdivide(&w[0], &w[1], n);
        let skip = usize::from(!out.is_empty());
        out.extend(pts.into_iter().skip(skip));
    }
    out
}
