use lelek::fans::{detect_endpoints, leg_meets, Fan, Leg};
use lelek::geometry::{lerp, Meet};
use lelek::quotients::{
    approximants, base_fan, canonical_rep, detect_interruptions, quotient_fan, star_legs, triple_equiv,
    AlignedTriple, GluingSpec, IndexSequence, QuotientFan,
};
use lelek::rational::{q, qi, Q};
use lelek::relations::make_F_rrho;
use proptest::prelude::*;

fn triple() -> impl Strategy<Value = AlignedTriple> {
    (5i64..=120, prop::collection::btree_set(1i64..120, 4)).prop_filter_map("not inside (0, 1)", |(d, v)| {
        let v: Vec<i64> = v.into_iter().collect();
        (v[3] < d).then(|| AlignedTriple::new(q(v[0], d), q(v[1], d), q(v[2], d), q(v[3], d)).unwrap())
    })
}

/// Points of the span: whole classes of a few points of `B`, and a few
/// unrelated points.
fn span_points(t: &AlignedTriple, fractions: &[i64]) -> Vec<Q> {
    let mut out = Vec::new();
    for &f in fractions {
        let s = q(f, 64);
        let b = &t.b1 + (&t.b2 - &t.b1) * &s;
        out.extend([t.bc(&b), t.bd(&b), b]);
        out.push(&t.b1 + (&t.d2 - &t.b1) * &s);
    }
    out
}

fn index() -> impl Strategy<Value = IndexSequence> {
    prop::collection::vec(any::<bool>(), 1..=3).prop_map(|odd| {
        IndexSequence::new(odd.iter().enumerate().map(|(i, &o)| 2 * (i + 1) - usize::from(o)).collect()).unwrap()
    })
}

fn quotient(idx: &IndexSequence) -> QuotientFan {
    let base = base_fan(&make_F_rrho(&q(1, 2), &qi(3)).unwrap(), 2).unwrap();
    let star = star_legs(&base, idx.len()).unwrap();
    quotient_fan(&base, &star, idx, &GluingSpec::default_for(idx)).unwrap()
}

fn map_leg(l: &Leg, f: impl Fn(&[Q]) -> Vec<Q>) -> Leg {
    Leg::new(l.id, l.polyline.iter().map(|p| f(p)).collect()).unwrap()
}

fn subdivide(l: &Leg) -> Leg {
    let half = q(1, 2);
    let mut pts = vec![l.polyline[0].clone()];
    for w in l.polyline.windows(2) {
        pts.push(lerp(&w[0], &w[1], &half));
        pts.push(w[1].clone());
    }
    Leg::new(l.id, pts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn triple_relation_is_an_equivalence(t in triple(), fr in prop::collection::vec(0i64..=64, 1..4)) {
        let pts = span_points(&t, &fr);
        let eq = |x: &Q, y: &Q| triple_equiv(x, y, &t).unwrap();
        for x in &pts {
            prop_assert!(eq(x, x));
            for y in &pts {
                prop_assert_eq!(eq(x, y), eq(y, x));
                for z in &pts {
                    if eq(x, y) && eq(y, z) {
                        prop_assert!(eq(x, z), "{} ~ {} ~ {} on {}", x, y, z, t);
                    }
                }
            }
        }
    }

    #[test]
    fn representatives_pick_out_classes(t in triple(), fr in prop::collection::vec(0i64..=64, 1..4)) {
        let pts = span_points(&t, &fr);
        let ts = [t.clone()];
        for x in &pts {
            let rx = canonical_rep(x, &ts);
            prop_assert!(t.in_b(&rx));
            prop_assert_eq!(&canonical_rep(&rx, &ts), &rx);
            for y in &pts {
                prop_assert_eq!(rx == canonical_rep(y, &ts), triple_equiv(x, y, &t).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quotient_legs_meet_only_at_the_top(idx in index()) {
        let qf = quotient(&idx);
        let fan: &Fan = &qf.fan;
        for a in 0..fan.legs.len() {
            for b in a + 1..fan.legs.len() {
                prop_assert_eq!(leg_meets(fan, a, b), vec![Meet::Point(fan.top.clone())]);
            }
        }
    }

    #[test]
    fn endpoints_are_images_of_base_endpoints(idx in index()) {
        let qf = quotient(&idx);
        prop_assert_eq!(qf.endpoints.len(), qf.base_legs.len());
        for (e, base) in qf.endpoints.iter().zip(&qf.base_legs) {
            prop_assert_eq!(e.leg, base.id);
            prop_assert_eq!(&e.base, &base.endpoint().to_vec());
            let u = qf.fold_of(base.id).eval(&Q::from_integer(1.into()));
            prop_assert_eq!(&e.image, &lerp(base.start(), base.endpoint(), &u));
        }
        let mut images: Vec<Vec<Q>> = qf.endpoints.iter().map(|e| e.image.clone()).collect();
        images.sort();
        images.dedup();
        prop_assert_eq!(detect_endpoints(&qf.fan), images);
    }

    #[test]
    fn degrees_survive_affine_maps_and_subdivision(idx in index(), shift in prop::collection::vec(0i64..=8, 4), flip in any::<bool>()) {
        let qf = quotient(&idx);
        let tol = q(1, 16);
        let half = q(1, 2);
        // a similarity of the sup metric: scale, shift, and optionally reverse the axes
        let phi = |p: &[Q]| -> Vec<Q> {
            let mut out: Vec<Q> = p.iter().zip(&shift).map(|(x, &c)| x * &half + q(c, 16)).collect();
            if flip {
                out.reverse();
            }
            out
        };
        for n in 1..=idx.len() {
            let (target, approx) = approximants(&qf, qf.star[n - 1], 8).unwrap();
            let want = idx.get(n);
            prop_assert_eq!(detect_interruptions(&target, &approx, &tol).unwrap().degree(), want);
            let moved = detect_interruptions(
                &map_leg(&target, phi),
                &approx.iter().map(|l| map_leg(l, phi)).collect::<Vec<_>>(),
                &(&tol * &half),
            )
            .unwrap();
            prop_assert_eq!(moved.degree(), want);
            let finer = detect_interruptions(&subdivide(&target), &approx.iter().map(subdivide).collect::<Vec<_>>(), &tol).unwrap();
            prop_assert_eq!(finer.degree(), want);
        }
    }
}
