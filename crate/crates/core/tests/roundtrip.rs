mod common;

use lelek::compacta::Value;
use lelek::dynamics::{check_mixing, find_sup_one_tail, VerifyParams};
use lelek::fans::make_star;
use lelek::mahavier::{mahavier_product, two_sided_window};
use lelek::quotients::{base_fan, quotient_fan, star_legs, GluingSpec, IndexSequence};
use lelek::rational::{parse_q, q, qi, to_pq};
use lelek::relations::{make_F_rrho, make_H, never_connect};
use proptest::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn same<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(x: &T) {
    let s = serde_json::to_string(x).unwrap();
    let back: T = serde_json::from_str(&s).unwrap();
    assert_eq!(&back, x);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rationals_print_and_parse(n in -1000i64..1000, d in 1i64..1000) {
        let x = q(n, d);
        let s = to_pq(&x);
        prop_assert!(s.contains('/'));
        prop_assert_eq!(parse_q(&s).unwrap(), x);
    }

    #[test]
    fn relations_and_complexes_round_trip(rel in common::relation(4), m in 0usize..=3) {
        same(&rel);
        same(&mahavier_product(&rel, m).unwrap());
        same(&two_sided_window(&rel, -1, 1).unwrap());
    }
}

#[test]
fn reports_round_trip() {
    let f = make_F_rrho(&q(1, 2), &qi(3)).unwrap();
    let h = make_H(&q(1, 2), &qi(3), 3).unwrap();
    same(&h);
    same(&mahavier_product(&h, 2).unwrap());
    same(&check_mixing(&f, &VerifyParams::new(1, q(1, 4), 16)).unwrap());
    same(&check_mixing(&lelek::relations::identity_relation(), &VerifyParams::new(1, q(1, 4), 8)).unwrap());
    same(&find_sup_one_tail(&q(1, 3), &q(1, 2), &qi(3), &q(1, 32), 1000).unwrap());
    same(&never_connect(&q(1, 2), &qi(3)).unwrap());
    same(&never_connect(&q(1, 4), &qi(8)).unwrap());
    same(&make_star(4).unwrap());
    let idx = IndexSequence::parse("2,3").unwrap();
    same(&idx);
    let base = base_fan(&f, 2).unwrap();
    let qf = quotient_fan(&base, &star_legs(&base, 2).unwrap(), &idx, &GluingSpec::default_for(&idx)).unwrap();
    same(&qf);
    same(&vec![Value::Infinity, Value::Finite(q(5, 3))]);
}

#[test]
fn rationals_are_strings_in_json() {
    let s = serde_json::to_string(&make_F_rrho(&q(1, 2), &qi(3)).unwrap()).unwrap();
    assert!(s.contains(r#""slope":"1/2""#), "{s}");
    assert!(s.contains(r#""1/3""#), "{s}");
}
