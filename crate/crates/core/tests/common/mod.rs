#![allow(dead_code)]

use std::collections::BTreeSet;

use lelek::compacta::MetricSpace;
use lelek::rational::{q, Q};
use lelek::relations::{AffineBranch, BranchLabel, PLRelation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A relation on [0, 1] made of `2..=max_pieces` non-contracting affine
/// branches over a partition on the 1/8 grid, or `None` when a projection
/// is not full.
pub fn random_relation(seed: u64, max_pieces: usize) -> Option<PLRelation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pieces = rng.gen_range(2..=max_pieces);
    let mut cuts: BTreeSet<i64> = BTreeSet::from([0, 8]);
    while cuts.len() < pieces + 1 {
        cuts.insert(rng.gen_range(1..8));
    }
    let cuts: Vec<i64> = cuts.into_iter().collect();
    let mut branches = Vec::new();
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        let img = rng.gen_range(len..=8);
        let lo = rng.gen_range(0..=8 - img);
        let slope = Q::from_integer(img.into()) / Q::from_integer(len.into());
        let dom = (q(w[0], 8), q(w[1], 8));
        let (slope, offset) = if rng.gen_bool(0.5) {
            (slope.clone(), q(lo, 8) - &slope * &dom.0)
        } else {
            (-slope.clone(), q(lo + img, 8) + &slope * &dom.0)
        };
        branches.push(AffineBranch::new(BranchLabel::Affine, dom.0, dom.1, slope, offset));
    }
    let rel = PLRelation::new(MetricSpace::UnitInterval, branches, false).ok()?;
    rel.has_full_projections().then_some(rel)
}

pub fn relation(max_pieces: usize) -> impl Strategy<Value = PLRelation> {
    any::<u64>().prop_filter_map("projections not full", move |s| random_relation(s, max_pieces))
}
