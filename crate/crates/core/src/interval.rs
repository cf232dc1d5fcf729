//! Rational intervals with open or closed ends and finite unions of them.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::{to_pq, Q};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: Q, hi: Q) -> Self {
        Interval { lo, hi, lo_open: false, hi_open: false }
    }

    pub fn open(lo: Q, hi: Q) -> Self {
        Interval { lo, hi, lo_open: true, hi_open: true }
    }

    pub fn point(x: Q) -> Self {
        Interval::closed(x.clone(), x)
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            Ordering::Less => false,
            Ordering::Equal => self.lo_open || self.hi_open,
            Ordering::Greater => true,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        !self.is_empty() && self.lo == self.hi
    }

    pub fn contains(&self, x: &Q) -> bool {
        let above = if self.lo_open { x > &self.lo } else { x >= &self.lo };
        let below = if self.hi_open { x < &self.hi } else { x <= &self.hi };
        above && below
    }

    pub fn length(&self) -> Q {
        if self.is_empty() {
            Q::zero()
        } else {
            &self.hi - &self.lo
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_open) = match self.lo.cmp(&other.lo) {
            Ordering::Less => (other.lo.clone(), other.lo_open),
            Ordering::Greater => (self.lo.clone(), self.lo_open),
            Ordering::Equal => (self.lo.clone(), self.lo_open || other.lo_open),
        };
        let (hi, hi_open) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_open),
            Ordering::Greater => (other.hi.clone(), other.hi_open),
            Ordering::Equal => (self.hi.clone(), self.hi_open || other.hi_open),
        };
        Interval { lo, hi, lo_open, hi_open }
    }

    pub fn meets(&self, other: &Interval) -> bool {
        !self.intersect(other).is_empty()
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        if self.is_empty() {
            return true;
        }
        let lo_ok = match self.lo.cmp(&other.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_open || !other.lo_open,
            Ordering::Less => false,
        };
        let hi_ok = match self.hi.cmp(&other.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_open || !other.hi_open,
            Ordering::Greater => false,
        };
        lo_ok && hi_ok
    }

    /// Image under `t -> slope * t + offset`. Orientation flips for negative slopes.
    pub fn affine_image(&self, slope: &Q, offset: &Q) -> Interval {
        let a = slope * &self.lo + offset;
        let b = slope * &self.hi + offset;
        if slope.is_zero() {
            return Interval::point(a);
        }
        if slope.is_positive() {
            Interval { lo: a, hi: b, lo_open: self.lo_open, hi_open: self.hi_open }
        } else {
            Interval { lo: b, hi: a, lo_open: self.hi_open, hi_open: self.lo_open }
        }
    }

    /// Preimage `{t : slope * t + offset in self}` for a nonzero slope.
    pub fn affine_preimage(&self, slope: &Q, offset: &Q) -> Interval {
        debug_assert!(!slope.is_zero());
        let a = (&self.lo - offset) / slope;
        let b = (&self.hi - offset) / slope;
        if slope.is_positive() {
            Interval { lo: a, hi: b, lo_open: self.lo_open, hi_open: self.hi_open }
        } else {
            Interval { lo: b, hi: a, lo_open: self.hi_open, hi_open: self.lo_open }
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_open { '(' } else { '[' },
            to_pq(&self.lo),
            to_pq(&self.hi),
            if self.hi_open { ')' } else { ']' }
        )
    }
}

/// A finite union of intervals, kept sorted, disjoint and maximally merged.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn from_interval(iv: Interval) -> Self {
        IntervalSet::from_intervals(vec![iv])
    }

    pub fn from_intervals(parts: Vec<Interval>) -> Self {
        let mut parts: Vec<Interval> = parts.into_iter().filter(|iv| !iv.is_empty()).collect();
        // closed left ends first so that merging sees the widest start
        parts.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.lo_open.cmp(&b.lo_open)));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for iv in parts {
            if let Some(last) = merged.last_mut() {
                let touches = match iv.lo.cmp(&last.hi) {
                    Ordering::Less => true,
                    Ordering::Equal => !(iv.lo_open && last.hi_open),
                    Ordering::Greater => false,
                };
                if touches {
                    match iv.hi.cmp(&last.hi) {
                        Ordering::Greater => {
                            last.hi = iv.hi;
                            last.hi_open = iv.hi_open;
                        }
                        Ordering::Equal => last.hi_open = last.hi_open && iv.hi_open,
                        Ordering::Less => {}
                    }
                    continue;
                }
            }
            merged.push(iv);
        }
        IntervalSet { parts: merged }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<Interval> {
        self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: &Q) -> bool {
        // parts are sorted; binary search on the left ends
        let idx = self.parts.partition_point(|iv| &iv.lo <= x);
        idx > 0 && self.parts[idx - 1].contains(x)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.parts.clone();
        all.extend(other.parts.iter().cloned());
        IntervalSet::from_intervals(all)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let a = &self.parts[i];
            let b = &other.parts[j];
            let c = a.intersect(b);
            if !c.is_empty() {
                out.push(c);
            }
            // advance whichever ends first
            let a_first = match a.hi.cmp(&b.hi) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => a.hi_open,
            };
            if a_first {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { parts: out }
    }

    pub fn intersect_interval(&self, iv: &Interval) -> IntervalSet {
        let parts = self
            .parts
            .iter()
            .map(|p| p.intersect(iv))
            .filter(|p| !p.is_empty())
            .collect();
        IntervalSet { parts }
    }

    pub fn meets(&self, other: &IntervalSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let a = &self.parts[i];
            let b = &other.parts[j];
            if a.meets(b) {
                return true;
            }
            let a_first = match a.hi.cmp(&b.hi) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => a.hi_open,
            };
            if a_first {
                i += 1;
            } else {
                j += 1;
            }
        }
        false
    }

    pub fn meets_interval(&self, iv: &Interval) -> bool {
        let start = self.parts.partition_point(|p| p.hi < iv.lo);
        self.parts[start..]
            .iter()
            .take_while(|p| p.lo <= iv.hi)
            .any(|p| p.meets(iv))
    }

    /// True when `iv` lies entirely inside one part of the set.
    pub fn covers_interval(&self, iv: &Interval) -> bool {
        if iv.is_empty() {
            return true;
        }
        let idx = self.parts.partition_point(|p| p.lo <= iv.lo);
        idx > 0 && iv.is_subset_of(&self.parts[idx - 1])
    }

    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.parts.iter().all(|p| other.covers_interval(p))
    }

    pub fn sup(&self) -> Option<&Q> {
        self.parts.last().map(|p| &p.hi)
    }

    pub fn inf(&self) -> Option<&Q> {
        self.parts.first().map(|p| &p.lo)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "{{}}");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " u ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}
