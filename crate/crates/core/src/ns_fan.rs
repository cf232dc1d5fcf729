//! A fan whose non-smooth set is a given fan `F`, truncated to finitely many
//! approximating arcs.
//!
//! Coordinates: `0..3` hold a lift of `F` into `[0,1]^3` that avoids the
//! origin, coordinate `3` is the height, and block `n` consists of `2n` slots
//! of three coordinates each. Arc `A_n` visits, for `k = 1..n`, two copies of
//! the leg `L_k` at heights `1/(a_n + 2k - 2)` and `1/(a_n + 2k - 1)`, each
//! copy also written into its own slot of block `n`, where `a_n = n^2 - n + 1`.

use num_traits::Zero;

use crate::compacta::{hausdorff_distance, CompactSet, MetricSpace};
use crate::error::{domain, Error, Result};
use crate::fans::{Fan, Leg};
use crate::geometry::{meet_only_at, sample_polyline};
use crate::rational::{q, qi, Q};

pub fn schedule(n: u64) -> u64 {
    n * n - n + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NsArcSchedule {
    pub n: u64,
}

impl NsArcSchedule {
    pub fn a(&self) -> u64 {
        schedule(self.n)
    }

    /// Height denominators of the two copies of `L_k` on `A_n`.
    pub fn gap_indices(&self, k: u64) -> (u64, u64) {
        (self.a() + 2 * k - 2, self.a() + 2 * k - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NsLayout {
    pub n_max: usize,
}

impl NsLayout {
    pub const HEIGHT: usize = 3;

    pub fn dim(&self) -> usize {
        4 + 3 * self.n_max * (self.n_max + 1)
    }

    /// First coordinate of slot `j` (0-based) in block `n`.
    pub fn slot(&self, n: usize, j: usize) -> usize {
        4 + 3 * n * (n - 1) + 3 * j
    }

    fn embed(&self, base: &[Q], height: Q, slot: Option<(usize, usize, &[Q])>) -> Vec<Q> {
        let mut p = vec![Q::zero(); self.dim()];
        p[..3].clone_from_slice(base);
        p[Self::HEIGHT] = height;
        if let Some((n, j, val)) = slot {
            let s = self.slot(n, j);
            p[s..s + 3].clone_from_slice(val);
        }
        p
    }
}

#[derive(Debug, Clone)]
pub struct NsFan {
    pub layout: NsLayout,
    /// `F` lifted into the product (its legs keep their ids), together with
    /// the arcs `A_1..A_{n_max}`.
    pub fan: Fan,
    pub lifted: Vec<Leg>,
    pub arcs: Vec<Leg>,
    /// `copies[n-1][k-1]` is the position in `F.legs` of the leg used as `L_k` on `A_n`.
    pub copies: Vec<Vec<usize>>,
    /// `H(A_n, F)` on sampled point sets.
    pub distances: Vec<Q>,
    /// Least `n` from which `distances` never increases.
    pub nonincreasing_from: usize,
    base_lift: Vec<Vec<Vec<Q>>>,
}

impl NsFan {
    /// Lifted base point `x` of `F` placed at `(x, height, slot j of block n = x)`.
    pub fn copy_point(&self, n: usize, k: usize, ell: usize, x: &[Q]) -> Vec<Q> {
        let a = schedule(n as u64) as i64;
        let h = q(1, a + 2 * k as i64 - 3 + ell as i64);
        let j = 2 * k + ell - 3;
        self.layout.embed(x, h, Some((n, j, x)))
    }

    /// Endpoint `e_k^{n,ell}` (tip copy) or `f_k^{n,ell}` (top copy).
    pub fn marker(&self, n: usize, k: usize, ell: usize, tip: bool) -> Vec<Q> {
        let leg = &self.base_lift[self.copies[n - 1][k - 1]];
        let x = if tip { leg.last().unwrap() } else { &leg[0] };
        self.copy_point(n, k, ell, x)
    }

    pub fn top(&self) -> &[Q] {
        &self.fan.top
    }
}

pub const DEFAULT_SAMPLES: usize = 4;

pub fn construct_ns_fan(f: &Fan, n_max: usize, coord_budget: usize) -> Result<NsFan> {
    construct_ns_fan_with(f, n_max, coord_budget, DEFAULT_SAMPLES)
}

/// `samples` is the number of pieces each edge is cut into when measuring
/// Hausdorff distances.
pub fn construct_ns_fan_with(f: &Fan, n_max: usize, coord_budget: usize, samples: usize) -> Result<NsFan> {
    if f.legs.is_empty() {
        return domain("the fan F is degenerate");
    }
    if n_max == 0 {
        return domain("n_max must be positive");
    }
    let layout = NsLayout { n_max };
    let dim = layout.dim();
    if coord_budget < dim {
        return Err(Error::Capacity {
            what: format!("{dim} product coordinates for n_max = {n_max}"),
            cap: coord_budget,
        });
    }
    let lift: Box<dyn Fn(&[Q]) -> Vec<Q>> = match f.top.len() {
        2 => Box::new(|p: &[Q]| vec![p[0].clone(), p[1].clone(), q(1, 2)]),
        3 => Box::new(|p: &[Q]| p.iter().map(|x| (x + qi(1)) / qi(2)).collect()),
        d => return domain(format!("F must live in dimension 2 or 3, got {d}")),
    };
    let base_lift: Vec<Vec<Vec<Q>>> =
        f.legs.iter().map(|l| l.polyline.iter().map(|p| lift(p)).collect()).collect();
    let v3 = lift(&f.top);
    let ambient = MetricSpace::weighted_product(0, dim as i64 - 1, MetricSpace::UnitInterval)?;
    let v = layout.embed(&v3, Q::zero(), None);

    let lifted = f
        .legs
        .iter()
        .zip(&base_lift)
        .map(|(leg, poly)| {
            let pts = poly.iter().map(|x| layout.embed(x, Q::zero(), None)).collect();
            Leg::with_knots(leg.id, pts, leg.knots.clone())
        })
        .collect::<Result<Vec<_>>>()?;

    let m = f.legs.len();
    let mut shell = NsFan {
        layout,
        fan: Fan { ambient: ambient.clone(), top: v.clone(), legs: Vec::new() },
        lifted: lifted.clone(),
        arcs: Vec::new(),
        copies: (1..=n_max).map(|n| (0..n).map(|k| k % m).collect()).collect(),
        distances: Vec::new(),
        nonincreasing_from: 1,
        base_lift,
    };

    let next_id = f.legs.iter().map(|l| l.id).max().unwrap_or(0) + 1;
    let mut arcs = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut poly = vec![v.clone()];
        for k in 1..=n {
            let base = &shell.base_lift[shell.copies[n - 1][k - 1]];
            poly.extend(base.iter().map(|x| shell.copy_point(n, k, 1, x)));
            poly.extend(base.iter().rev().map(|x| shell.copy_point(n, k, 2, x)));
        }
        arcs.push(Leg::new(next_id + n - 1, poly)?);
    }

    let f_samples: Vec<Vec<Q>> = lifted.iter().flat_map(|l| sample_polyline(&l.polyline, samples)).collect();
    let f_set = CompactSet::from_rational_points(ambient.clone(), &f_samples)?;
    let mut distances = Vec::with_capacity(n_max);
    for arc in &arcs {
        let a_set = CompactSet::from_rational_points(ambient.clone(), &sample_polyline(&arc.polyline, samples))?;
        distances.push(hausdorff_distance(&a_set, &f_set)?);
    }
    let mut from = distances.len();
    while from > 1 && distances[from - 2] >= distances[from - 1] {
        from -= 1;
    }

    let mut legs = lifted;
    legs.extend(arcs.iter().cloned());
    shell.fan = Fan::new(ambient, v, legs)?;
    shell.arcs = arcs;
    shell.distances = distances;
    shell.nonincreasing_from = from;
    Ok(shell)
}

/// Checks `A_m ∩ A_n = {v}` for all pairs and `A_n ∩ F = {v}` exactly.
pub fn check_arc_intersections(ns: &NsFan) -> bool {
    let v = ns.top();
    let arcs_ok = ns.arcs.iter().enumerate().all(|(i, a)| {
        ns.arcs[i + 1..].iter().all(|b| meet_only_at(&a.polyline, &b.polyline, v))
    });
    arcs_ok
        && ns
            .arcs
            .iter()
            .all(|a| ns.lifted.iter().all(|l| meet_only_at(&a.polyline, &l.polyline, v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fans::make_star;

    #[test]
    fn schedule_values() {
        assert_eq!((1..=4).map(schedule).collect::<Vec<_>>(), vec![1, 3, 7, 13]);
        for n in 1..50 {
            assert_eq!(schedule(n + 1) - schedule(n), 2 * n);
        }
        let s = NsArcSchedule { n: 3 };
        assert_eq!(s.gap_indices(1), (7, 8));
        assert_eq!(s.gap_indices(3), (11, 12));
    }

    #[test]
    fn layout_offsets() {
        let l = NsLayout { n_max: 3 };
        assert_eq!(l.dim(), 40);
        assert_eq!(l.slot(1, 0), 4);
        assert_eq!(l.slot(2, 0), 10);
        assert_eq!(l.slot(3, 5), 37);
    }

    #[test]
    fn small_construction() {
        let f = make_star(2).unwrap();
        let ns = construct_ns_fan(&f, 3, 100).unwrap();
        assert_eq!(ns.arcs.len(), 3);
        assert!(check_arc_intersections(&ns));
        assert_eq!(ns.copies[2], vec![0, 1, 0]);
        // heights of the first copy dominate the distance once every leg is used
        assert_eq!(ns.distances[1], q(1, 24));
        assert_eq!(ns.distances[2], q(1, 56));
        assert!(matches!(construct_ns_fan(&f, 3, 39), Err(Error::Capacity { .. })));
    }
}
