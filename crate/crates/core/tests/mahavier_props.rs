mod common;

use std::collections::BTreeMap;

use lelek::compacta::Value;
use lelek::mahavier::{
    is_admissible, mahavier_product, shift_forward, shift_window, two_sided_window, word_point, Direction, WindowPoint,
};
use lelek::rational::{q, Q};
use lelek::relations::{make_F_rrho, PLRelation};
use num_traits::Zero;
use proptest::prelude::*;

/// Closed domain of a word by pulling back through the branches from the
/// right, or `None` when it is empty.
fn word_domain(rel: &PLRelation, word: &[usize]) -> Option<(Q, Q)> {
    let mut cur: Option<(Q, Q)> = None;
    for &id in word.iter().rev() {
        let b = &rel.branches[id];
        let (mut lo, mut hi) = b.domain.clone();
        if let Some((a, c)) = cur {
            let (u, v) = ((&a - &b.offset) / &b.slope, (&c - &b.offset) / &b.slope);
            let (u, v) = if u <= v { (u, v) } else { (v, u) };
            lo = lo.max(u);
            hi = hi.min(v);
        }
        if lo > hi {
            return None;
        }
        cur = Some((lo, hi));
    }
    cur
}

fn all_words(letters: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out.into_iter().flat_map(|w| (0..letters).map(move |l| [w.clone(), vec![l]].concat())).collect();
    }
    out
}

fn samples(seg: &lelek::mahavier::Segment) -> Vec<Q> {
    let (lo, hi) = &seg.domain;
    let mid = (lo + hi) / Q::from_integer(2.into());
    let mut out = vec![mid];
    if !seg.open.0 {
        out.push(lo.clone());
    }
    if !seg.open.1 {
        out.push(hi.clone());
    }
    out
}

fn finite(p: Vec<Q>) -> Vec<Value> {
    p.into_iter().map(Value::Finite).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn complex_matches_word_enumeration(rel in common::relation(5), m in 1usize..=4) {
        let cx = mahavier_product(&rel, m).unwrap();
        let mut got: BTreeMap<Vec<usize>, (Q, Q)> = BTreeMap::new();
        for s in &cx.segments {
            prop_assert!(got.insert(s.word.clone(), s.domain.clone()).is_none(), "word {:?} twice", s.word);
        }
        let want: BTreeMap<Vec<usize>, (Q, Q)> = all_words(rel.branches.len(), m)
            .into_iter()
            .filter_map(|w| word_domain(&rel, &w).map(|d| (w, d)))
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn segments_are_admissible(rel in common::relation(5), m in 1usize..=4) {
        let cx = mahavier_product(&rel, m).unwrap();
        for s in &cx.segments {
            for x in samples(s) {
                let p = s.point(&x);
                prop_assert_eq!(&p, &word_point(&rel, &s.word, &x).unwrap());
                prop_assert!(is_admissible(&rel, &finite(p)));
            }
        }
    }

    #[test]
    fn forward_shift_lands_one_level_down(rel in common::relation(4), m in 2usize..=4) {
        let cx = mahavier_product(&rel, m).unwrap();
        let lower = mahavier_product(&rel, m - 1).unwrap();
        for s in &cx.segments {
            for x in samples(s) {
                let (w, y) = shift_forward(&rel, &s.word, &x).unwrap();
                prop_assert_eq!(word_point(&rel, &w, &y).unwrap(), s.point(&x)[1..].to_vec());
                let hit = lower.segments.iter().any(|t| t.word == w && t.interval().contains(&y));
                prop_assert!(hit, "no segment of depth {} carries {:?}", m - 1, w);
            }
        }
    }

    #[test]
    fn forward_shifts_compose(rel in common::relation(4), m in 2usize..=4) {
        let cx = mahavier_product(&rel, m).unwrap();
        for s in &cx.segments {
            let x = samples(s).remove(0);
            let (w1, y1) = shift_forward(&rel, &s.word, &x).unwrap();
            let (w2, y2) = shift_forward(&rel, &w1, &y1).unwrap();
            prop_assert_eq!(w2.as_slice(), &s.word[2..]);
            prop_assert_eq!(&y2, &s.point(&x)[2]);
        }
    }

    #[test]
    fn window_shift_steps_invert(rel in common::relation(4)) {
        let cx = two_sided_window(&rel, -2, 2).unwrap();
        for s in &cx.segments {
            for x in samples(s) {
                let p = WindowPoint { first_index: cx.first_index, word: s.word.clone(), base: x };
                let coords = p.coordinates(&rel).unwrap();
                let right = coords.last().unwrap();
                for ext in (0..rel.branches.len()).filter(|&e| rel.branches[e].in_domain(right)) {
                    let (fwd, dropped) = shift_window(&rel, &p, Direction::Forward, ext).unwrap();
                    let (back, _) = shift_window(&rel, &fwd, Direction::Backward, dropped).unwrap();
                    prop_assert_eq!(&back, &p);
                }
                for ext in 0..rel.branches.len() {
                    let b = &rel.branches[ext];
                    if b.slope.is_zero() || !b.in_domain(&b.unapply(&p.base)) {
                        continue;
                    }
                    let (bwd, dropped) = shift_window(&rel, &p, Direction::Backward, ext).unwrap();
                    let (again, _) = shift_window(&rel, &bwd, Direction::Forward, dropped).unwrap();
                    prop_assert_eq!(&again, &p);
                }
            }
        }
    }
}

#[test]
fn f_words_all_start_at_zero() {
    let f = make_F_rrho(&q(1, 2), &q(3, 1)).unwrap();
    for m in 1..=6 {
        let cx = mahavier_product(&f, m).unwrap();
        assert_eq!(cx.segments.len(), 3usize.pow(m as u32));
        assert!(cx.segments.iter().all(|s| s.interval().contains(&Q::zero())));
    }
}

#[test]
fn f_matches_word_enumeration() {
    let f = make_F_rrho(&q(2, 3), &q(5, 2)).unwrap();
    for m in 1..=4 {
        let cx = mahavier_product(&f, m).unwrap();
        for w in all_words(3, m) {
            let s = cx.segments.iter().find(|s| s.word == w).expect("missing word");
            assert_eq!(Some(s.domain.clone()), word_domain(&f, &w));
        }
    }
}
