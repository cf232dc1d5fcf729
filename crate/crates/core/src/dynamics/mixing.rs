//! Transitivity and mixing of the shift on a one-sided Mahavier product,
//! checked on dyadic cylinders at a fixed scale.
//!
//! A cylinder is a box of open cells `(c e, (c+1) e)` over the coordinates
//! `1..=m+1` that meets the depth-`m` product. For cylinders `U`, `V` and a
//! step `n`, the shift hits when some admissible sequence starts in `U` and is
//! in `V` after `n` shifts. For `n > m` the two boxes constrain disjoint
//! coordinates and the hit reduces to `F^(n-m)(A_U) ∩ B_V != ∅`, where `A_U`
//! is the set of admissible last coordinates of `U` and `B_V` the set of
//! admissible first coordinates of `V`. For `n <= m` the boxes overlap and
//! the merged box is traced directly.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_with::serde_as;

use crate::error::{domain, Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::mahavier::{mahavier_product, Segment};
use crate::rational::{to_pq, Pq, Q};
use crate::relations::{image_of_set, preimage_of_set, PLRelation};

pub const DEFAULT_CYLINDER_CAP: usize = 200_000;
/// Orbit sets with more parts than this abort the check.
pub const MAX_ORBIT_PARTS: usize = 100_000;
/// Failing pairs kept verbatim in a report; the rest are only counted.
pub const MAX_LISTED_FAILURES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Transitive,
    Mixing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detail {
    #[default]
    Failures,
    All,
}

#[derive(Debug, Clone)]
pub struct VerifyParams {
    pub depth: usize,
    pub epsilon: Q,
    pub horizon: usize,
    pub cap: usize,
    pub detail: Detail,
}

impl VerifyParams {
    pub fn new(depth: usize, epsilon: Q, horizon: usize) -> Self {
        VerifyParams { depth, epsilon, horizon, cap: DEFAULT_CYLINDER_CAP, detail: Detail::Failures }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
    pub first_hit: Option<usize>,
    pub n0: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missed: Vec<usize>,
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixingReport {
    pub mode: Mode,
    pub relation: PLRelation,
    pub depth: usize,
    #[serde_as(as = "Pq")]
    pub epsilon: Q,
    pub horizon: usize,
    pub cylinders: usize,
    pub pairs: usize,
    pub transitive: bool,
    pub mixing: bool,
    /// Verdict for the requested mode.
    pub verdict: bool,
    pub max_first_hit: Option<usize>,
    pub max_n0: Option<usize>,
    pub worst_pair: Option<PairRecord>,
    pub failure_count: usize,
    pub failures: Vec<PairRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<PairRecord>,
}

/// `e = 2^-p` as the integer `2^p`.
fn dyadic_inverse(eps: &Q) -> Result<BigInt> {
    let d = eps.denom();
    let pow2 = d.is_positive() && (d & (d - BigInt::one())).is_zero();
    if !eps.numer().is_one() || !pow2 {
        return domain(format!("resolution {} is not of the form 1/2^p", to_pq(eps)));
    }
    Ok(d.clone())
}

pub(crate) fn cell_interval(c: i64, eps: &Q) -> Interval {
    let lo = Q::from_integer(c.into()) * eps;
    let hi = &lo + eps;
    Interval::open(lo, hi)
}

fn cell_of(x: &Q, inv: &BigInt) -> Option<i64> {
    let scaled = x * Q::from_integer(inv.clone());
    if scaled.is_integer() {
        return None;
    }
    scaled.floor().to_integer().to_i64()
}

/// Boxes of open cells met by the interior of one segment.
fn segment_cells(seg: &Segment, eps: &Q, inv: &BigInt) -> Vec<Vec<i64>> {
    let (lo, hi) = (&seg.domain.0, &seg.domain.1);
    let cells_at = |x: &Q| -> Option<Vec<i64>> { seg.maps.iter().map(|m| cell_of(&m.apply(x), inv)).collect() };
    if lo == hi {
        return cells_at(lo).into_iter().collect();
    }
    let mut cuts = vec![lo.clone(), hi.clone()];
    for m in &seg.maps {
        if m.0.is_zero() {
            continue;
        }
        let (a, b) = (m.apply(lo), m.apply(hi));
        let (vmin, vmax) = if a <= b { (a, b) } else { (b, a) };
        let scale = Q::from_integer(inv.clone());
        let g0: BigInt = (&vmin * &scale).floor().to_integer() + 1;
        let g1: BigInt = (&vmax * &scale).ceil().to_integer() - 1;
        let mut g = g0;
        while g <= g1 {
            let y = Q::from_integer(g.clone()) * eps;
            cuts.push((y - &m.1) / &m.0);
            g += 1;
        }
    }
    cuts.sort();
    cuts.dedup();
    let two = Q::from_integer(2.into());
    cuts.windows(2).filter_map(|w| cells_at(&((&w[0] + &w[1]) / &two))).collect()
}

/// All cylinders of depth `m` at resolution `eps`, sorted.
pub fn cylinder_family(rel: &PLRelation, m: usize, eps: &Q, cap: usize) -> Result<Vec<Vec<i64>>> {
    let inv = dyadic_inverse(eps)?;
    let cx = mahavier_product(rel, m)?;
    let parts: Vec<Vec<Vec<i64>>> = cx.segments.par_iter().map(|s| segment_cells(s, eps, &inv)).collect();
    let set: BTreeSet<Vec<i64>> = parts.into_iter().flatten().collect();
    if set.len() > cap {
        return Err(Error::Capacity { what: format!("cylinders at depth {m} and resolution {}", to_pq(eps)), cap });
    }
    Ok(set.into_iter().collect())
}

/// Admissible values of the last coordinate of a box.
pub fn forward_trace(rel: &PLRelation, cells: &[i64], eps: &Q) -> IntervalSet {
    let mut r = IntervalSet::from_interval(cell_interval(cells[0], eps));
    for &c in &cells[1..] {
        r = image_of_set(rel, &r).intersect_interval(&cell_interval(c, eps));
        if r.is_empty() {
            break;
        }
    }
    r
}

/// Admissible values of the first coordinate of a box.
pub fn backward_trace(rel: &PLRelation, cells: &[i64], eps: &Q) -> IntervalSet {
    let last = cells.len() - 1;
    let mut s = IntervalSet::from_interval(cell_interval(cells[last], eps));
    for &c in cells[..last].iter().rev() {
        s = preimage_of_set(rel, &s).intersect_interval(&cell_interval(c, eps));
        if s.is_empty() {
            break;
        }
    }
    s
}

fn step(rel: &PLRelation, s: &IntervalSet) -> Result<IntervalSet> {
    let next = image_of_set(rel, s);
    if next.parts().len() > MAX_ORBIT_PARTS {
        return Err(Error::Capacity { what: "parts of an orbit set".into(), cap: MAX_ORBIT_PARTS });
    }
    Ok(next)
}

fn continue_trace(rel: &PLRelation, start: &IntervalSet, cells: &[i64], eps: &Q) -> bool {
    let mut r = start.clone();
    for &c in cells {
        r = image_of_set(rel, &r).intersect_interval(&cell_interval(c, eps));
        if r.is_empty() {
            return false;
        }
    }
    true
}

/// Hit pattern of one pair for `n = 1..=horizon`, computed directly.
pub fn pair_hits(rel: &PLRelation, u: &[i64], v: &[i64], eps: &Q, horizon: usize) -> Result<Vec<bool>> {
    let m = u.len() - 1;
    let a = forward_trace(rel, u, eps);
    let b = backward_trace(rel, v, eps);
    let mut out = Vec::with_capacity(horizon);
    for n in 1..=horizon.min(m) {
        let overlap = m + 1 - n;
        out.push(u[n..] == v[..overlap] && continue_trace(rel, &a, &v[overlap..], eps));
    }
    let mut orbit = a;
    for _ in m + 1..=horizon {
        orbit = step(rel, &orbit)?;
        out.push(orbit.meets(&b));
    }
    Ok(out)
}

fn classes(sets: Vec<IntervalSet>) -> (Vec<usize>, Vec<IntervalSet>) {
    let mut index: HashMap<IntervalSet, usize> = HashMap::new();
    let mut reps = Vec::new();
    let ids = sets
        .into_iter()
        .map(|s| {
            *index.entry(s.clone()).or_insert_with(|| {
                reps.push(s);
                reps.len() - 1
            })
        })
        .collect();
    (ids, reps)
}

/// First hit and last miss over `n = m+1..=horizon` for every `B` class.
///
/// Once one step gives `O_n ⊆ O_(n+1)` the orbit increases from then on, so
/// any hit from step `n` on persists. Hits before that step do not.
fn far_table(
    rel: &PLRelation,
    a: &IntervalSet,
    b_reps: &[IntervalSet],
    by_cell: &[(Interval, Vec<usize>)],
    m: usize,
    horizon: usize,
) -> Result<Vec<(Option<usize>, Option<usize>)>> {
    let mut table: Vec<(Option<usize>, Option<usize>)> = vec![(None, None); b_reps.len()];
    let mut orbit = a.clone();
    let mut increasing = false;
    let mut persist = vec![false; b_reps.len()];
    let mut prev_hit = vec![false; b_reps.len()];
    let mut n = m + 1;
    while n <= horizon {
        let next = step(rel, &orbit)?;
        let stable = next == orbit;
        if !increasing && orbit.is_subset_of(&next) {
            increasing = true;
            persist = prev_hit.clone();
        }
        orbit = next;
        let mut hit = vec![false; b_reps.len()];
        for (cell, members) in by_cell {
            if members.iter().all(|&b| persist[b]) || orbit.covers_interval(cell) {
                members.iter().for_each(|&b| hit[b] = true);
            } else if orbit.meets_interval(cell) {
                members.iter().for_each(|&b| hit[b] = persist[b] || orbit.meets(&b_reps[b]));
            }
        }
        // a fixed orbit repeats its pattern up to the horizon
        let last = if stable { horizon } else { n };
        for (b, &h) in hit.iter().enumerate() {
            if h {
                table[b].0.get_or_insert(n);
            } else {
                table[b].1 = Some(last);
            }
        }
        if increasing {
            persist.iter_mut().zip(&hit).for_each(|(p, &h)| *p |= h);
        }
        if stable || persist.iter().all(|&p| p) {
            break;
        }
        prev_hit = hit;
        n += 1;
    }
    Ok(table)
}

/// Preimages of the backward traces of the last `n` cells, `n = 1..=count`.
fn suffix_entries(rel: &PLRelation, v: &[i64], count: usize, eps: &Q) -> Vec<IntervalSet> {
    let m = v.len() - 1;
    let mut out = Vec::with_capacity(count);
    let mut s = IntervalSet::from_interval(cell_interval(v[m], eps));
    for n in 1..=count {
        let pre = preimage_of_set(rel, &s);
        if n < count {
            s = pre.intersect_interval(&cell_interval(v[m - n], eps));
        }
        out.push(pre);
    }
    out
}

#[derive(Default)]
struct Summary {
    max_first_hit: Option<usize>,
    worst: Option<(usize, usize, Option<usize>, usize)>,
    transitive_failures: Vec<(usize, usize)>,
    transitive_failure_count: usize,
    mixing_failures: Vec<(usize, usize, Option<usize>)>,
    mixing_failure_count: usize,
    records: Vec<(usize, usize, Option<usize>, Option<usize>)>,
}

pub fn check_transitive(rel: &PLRelation, params: &VerifyParams) -> Result<MixingReport> {
    verify(rel, params, Mode::Transitive)
}

pub fn check_mixing(rel: &PLRelation, params: &VerifyParams) -> Result<MixingReport> {
    verify(rel, params, Mode::Mixing)
}

pub fn verify(rel: &PLRelation, params: &VerifyParams, mode: Mode) -> Result<MixingReport> {
    let m = params.depth;
    let horizon = params.horizon;
    let eps = &params.epsilon;
    if horizon == 0 {
        return domain("the horizon must be positive");
    }
    if m >= 64 {
        return domain("depth must stay below 64");
    }
    let cyl = cylinder_family(rel, m, eps, params.cap)?;
    let a_sets: Vec<IntervalSet> = cyl.par_iter().map(|u| forward_trace(rel, u, eps)).collect();
    let b_sets: Vec<IntervalSet> = cyl.par_iter().map(|v| backward_trace(rel, v, eps)).collect();
    let (a_class, a_reps) = classes(a_sets);
    let (b_class, b_reps) = classes(b_sets);

    let mut by_cell_map: HashMap<i64, Vec<usize>> = HashMap::new();
    let mut b_cell = vec![0i64; b_reps.len()];
    for (v, cells) in cyl.iter().enumerate() {
        b_cell[b_class[v]] = cells[0];
    }
    for (b, c) in b_cell.iter().enumerate() {
        by_cell_map.entry(*c).or_default().push(b);
    }
    let mut by_cell: Vec<(Interval, Vec<usize>)> =
        by_cell_map.into_iter().map(|(c, bs)| (cell_interval(c, eps), bs)).collect();
    by_cell.sort_by(|x, y| x.0.lo.cmp(&y.0.lo));

    // prefixes of V by overlap length, for the short steps
    let small = m.min(horizon);
    let overlap_index: Vec<HashMap<&[i64], Vec<usize>>> = (1..=small)
        .map(|n| {
            let mut idx: HashMap<&[i64], Vec<usize>> = HashMap::new();
            for (v, cells) in cyl.iter().enumerate() {
                idx.entry(&cells[..m + 1 - n]).or_default().push(v);
            }
            idx
        })
        .collect();

    // entry n-1: last coordinates of U that continue through the last n cells of V
    let entry: Vec<Vec<IntervalSet>> = cyl.par_iter().map(|v| suffix_entries(rel, v, small, eps)).collect();

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); a_reps.len()];
    for (u, &a) in a_class.iter().enumerate() {
        members[a].push(u);
    }

    let per_class: Vec<Vec<(usize, Summary)>> = (0..a_reps.len())
        .into_par_iter()
        .map(|a| -> Result<Vec<(usize, Summary)>> {
            let table = far_table(rel, &a_reps[a], &b_reps, &by_cell, m, horizon)?;
            Ok(members[a]
                .iter()
                .map(|&u| {
                    let mut masks: HashMap<usize, u64> = HashMap::new();
                    for n in 1..=small {
                        if let Some(vs) = overlap_index[n - 1].get(&cyl[u][n..]) {
                            for &v in vs {
                                if a_reps[a].meets(&entry[v][n - 1]) {
                                    *masks.entry(v).or_insert(0) |= 1 << (n - 1);
                                }
                            }
                        }
                    }
                    (u, summarize(u, &cyl, &b_class, &table, &masks, small, horizon, params.detail))
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut per_u: Vec<(usize, Summary)> = per_class.into_iter().flatten().collect();
    per_u.sort_by_key(|(u, _)| *u);

    let mut total = Summary::default();
    for (_, s) in per_u {
        total.max_first_hit = total.max_first_hit.max(s.max_first_hit);
        if let Some(w) = s.worst {
            if total.worst.is_none_or(|t| w.3 > t.3) {
                total.worst = Some(w);
            }
        }
        total.transitive_failure_count += s.transitive_failure_count;
        total.mixing_failure_count += s.mixing_failure_count;
        for f in s.transitive_failures {
            if total.transitive_failures.len() < MAX_LISTED_FAILURES {
                total.transitive_failures.push(f);
            }
        }
        for f in s.mixing_failures {
            if total.mixing_failures.len() < MAX_LISTED_FAILURES {
                total.mixing_failures.push(f);
            }
        }
        total.records.extend(s.records);
    }

    let transitive = total.transitive_failure_count == 0;
    let mixing = total.mixing_failure_count == 0;
    let record = |u: usize, v: usize, first: Option<usize>, n0: Option<usize>, with_misses: bool| -> Result<PairRecord> {
        let missed = if with_misses {
            pair_hits(rel, &cyl[u], &cyl[v], eps, horizon)?
                .iter()
                .enumerate()
                .filter(|(_, h)| !**h)
                .map(|(i, _)| i + 1)
                .collect()
        } else {
            Vec::new()
        };
        Ok(PairRecord { u: cyl[u].clone(), v: cyl[v].clone(), first_hit: first, n0, missed })
    };
    let (failure_count, failures) = match mode {
        Mode::Transitive => (
            total.transitive_failure_count,
            total.transitive_failures.iter().map(|&(u, v)| record(u, v, None, None, false)).collect::<Result<_>>()?,
        ),
        Mode::Mixing => (
            total.mixing_failure_count,
            total.mixing_failures.iter().map(|&(u, v, f)| record(u, v, f, None, true)).collect::<Result<_>>()?,
        ),
    };
    let worst_pair = total.worst.map(|(u, v, f, n0)| record(u, v, f, Some(n0), false)).transpose()?;
    let records = total.records.iter().map(|&(u, v, f, n0)| record(u, v, f, n0, false)).collect::<Result<_>>()?;
    Ok(MixingReport {
        mode,
        relation: rel.clone(),
        depth: m,
        epsilon: eps.clone(),
        horizon,
        cylinders: cyl.len(),
        pairs: cyl.len() * cyl.len(),
        transitive,
        mixing,
        verdict: match mode {
            Mode::Transitive => transitive,
            Mode::Mixing => mixing,
        },
        max_first_hit: total.max_first_hit,
        max_n0: if mixing { total.worst.map(|w| w.3) } else { None },
        worst_pair: if mixing { worst_pair } else { None },
        failure_count,
        failures,
        records,
    })
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    u: usize,
    cyl: &[Vec<i64>],
    b_class: &[usize],
    table: &[(Option<usize>, Option<usize>)],
    masks: &HashMap<usize, u64>,
    small: usize,
    horizon: usize,
    detail: Detail,
) -> Summary {
    let mut s = Summary::default();
    for v in 0..cyl.len() {
        let (mut first, mut last_miss) = table[b_class[v]];
        let mask = masks.get(&v).copied().unwrap_or(0);
        let small_mask = if small == 0 { 0 } else { (u64::MAX >> (64 - small)) & !mask };
        if mask != 0 {
            first = Some(mask.trailing_zeros() as usize + 1);
        }
        if small_mask != 0 {
            let top = 64 - small_mask.leading_zeros() as usize;
            last_miss = Some(last_miss.map_or(top, |l| l.max(top)));
        }
        let n0 = match last_miss {
            None => Some(1),
            Some(l) if l < horizon => Some(l + 1),
            _ => None,
        };
        match first {
            Some(f) => s.max_first_hit = Some(s.max_first_hit.map_or(f, |x| x.max(f))),
            None => {
                s.transitive_failure_count += 1;
                if s.transitive_failures.len() < MAX_LISTED_FAILURES {
                    s.transitive_failures.push((u, v));
                }
            }
        }
        match n0 {
            Some(n0) => {
                if s.worst.is_none_or(|w| n0 > w.3) {
                    s.worst = Some((u, v, first, n0));
                }
            }
            None => {
                s.mixing_failure_count += 1;
                if s.mixing_failures.len() < MAX_LISTED_FAILURES {
                    s.mixing_failures.push((u, v, first));
                }
            }
        }
        if detail == Detail::All {
            s.records.push((u, v, first, n0));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use crate::relations::{full_relation, identity_relation, make_F_rrho, AffineBranch, BranchLabel};
    use crate::compacta::MetricSpace;

    #[test]
    fn dyadic_resolution_only() {
        assert!(dyadic_inverse(&q(1, 8)).is_ok());
        assert!(dyadic_inverse(&q(1, 6)).is_err());
        assert!(dyadic_inverse(&q(3, 8)).is_err());
        assert_eq!(dyadic_inverse(&qi(1)).unwrap(), BigInt::one());
    }

    #[test]
    fn cylinders_of_identity() {
        let id = identity_relation();
        let c = cylinder_family(&id, 2, &q(1, 4), 100).unwrap();
        assert_eq!(c, (0..4).map(|i| vec![i, i, i]).collect::<Vec<_>>());
        assert!(matches!(cylinder_family(&id, 2, &q(1, 4), 3), Err(Error::Capacity { .. })));
    }

    #[test]
    fn identity_is_neither() {
        let r = check_mixing(&identity_relation(), &VerifyParams::new(1, q(1, 4), 8)).unwrap();
        assert!(!r.transitive && !r.mixing && !r.verdict);
        assert_eq!(r.failure_count, 12);
        assert_eq!(r.failures[0].missed, (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn full_relation_mixes_at_once() {
        let r = check_mixing(&full_relation(8).unwrap(), &VerifyParams::new(0, q(1, 8), 16)).unwrap();
        assert!(r.mixing && r.transitive);
        assert_eq!(r.max_n0, Some(1));
        assert_eq!(r.max_first_hit, Some(1));
    }

    #[test]
    fn swap_is_transitive_but_not_mixing() {
        let swap = PLRelation::new(
            MetricSpace::UnitInterval,
            vec![
                AffineBranch::new(BranchLabel::Affine, qi(0), q(1, 2), qi(1), q(1, 2)),
                AffineBranch::new(BranchLabel::Affine, q(1, 2), qi(1), qi(1), q(-1, 2)),
            ],
            false,
        )
        .unwrap();
        let r = check_mixing(&swap, &VerifyParams::new(0, q(1, 2), 12)).unwrap();
        assert!(r.transitive);
        assert!(!r.mixing);
        assert_eq!(r.failures[0].missed, vec![2, 4, 6, 8, 10, 12]);
    }

    #[test]
    fn fast_path_matches_direct_pair_check() {
        let f = make_F_rrho(&q(1, 2), &qi(3)).unwrap();
        let eps = q(1, 4);
        let p = VerifyParams { detail: Detail::All, ..VerifyParams::new(2, eps.clone(), 12) };
        let r = check_mixing(&f, &p).unwrap();
        assert_eq!(r.records.len(), r.pairs);
        for rec in &r.records {
            let hits = pair_hits(&f, &rec.u, &rec.v, &eps, 12).unwrap();
            let first = hits.iter().position(|h| *h).map(|i| i + 1);
            let last_miss = hits.iter().rposition(|h| !*h).map(|i| i + 1);
            let n0 = match last_miss {
                None => Some(1),
                Some(l) if l < 12 => Some(l + 1),
                _ => None,
            };
            assert_eq!((rec.first_hit, rec.n0), (first, n0), "pair {:?} {:?}", rec.u, rec.v);
        }
    }

    #[test]
    fn hits_before_the_orbit_grows_do_not_persist() {
        let rel = PLRelation::new(
            MetricSpace::UnitInterval,
            vec![
                AffineBranch::new(BranchLabel::Affine, qi(0), q(1, 4), qi(-2), q(3, 4)),
                AffineBranch::new(BranchLabel::Affine, q(1, 4), qi(1), q(-4, 3), q(4, 3)),
            ],
            false,
        )
        .unwrap();
        let p = VerifyParams { detail: Detail::All, ..VerifyParams::new(1, q(1, 8), 16) };
        let r = check_mixing(&rel, &p).unwrap();
        let rec = r.records.iter().find(|x| x.u == [2, 7] && x.v == [0, 4]).unwrap();
        // hit at 2, missed at 3..=6 while the orbit is already growing
        assert_eq!((rec.first_hit, rec.n0), (Some(2), Some(7)));
    }
}
