//! Property tests on the combinatorial and arithmetic layers.

use cvolume::diagram::Diagram;
use cvolume::dilog::{mod_distance, TWO_PI_SQ};
use cvolume::io::{diagram_to_json, parse_diagram};
use cvolume::surgery::{bezout, cf_eval, cf_realizes, matrix_to_cf, GluingMatrix};
use cvolume::{ModKind, ModValue, C64};
use proptest::prelude::*;

fn braid_word(strands: usize) -> impl Strategy<Value = Vec<i32>> {
    let g = strands as i32 - 1;
    proptest::collection::vec((1..=g, any::<bool>()), 1..=8)
        .prop_map(|w| w.into_iter().map(|(x, pos)| if pos { x } else { -x }).collect::<Vec<i32>>())
        // a generator that never appears leaves a strand with no crossing
        .prop_filter("every generator used", move |w| (1..=g).all(|x| w.iter().any(|y| y.abs() == x)))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// `a1 - 1/(a2 - 1/(...))` evaluated back to front as an exact fraction.
fn minus_cf(a: &[i64]) -> Option<(i128, i128)> {
    let (mut num, mut den) = (*a.last()? as i128, 1i128);
    for &x in a.iter().rev().skip(1) {
        if num == 0 {
            return None;
        }
        (num, den) = (x as i128 * num - den, num);
    }
    if den == 0 {
        return None;
    }
    let g = gcd(num as i64, den as i64).max(1) as i128;
    let s = if den < 0 { -1 } else { 1 };
    Some((s * num / g, s * den / g))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn braid_closures_round_trip_through_json((strands, word) in (2usize..=4).prop_flat_map(|s| (Just(s), braid_word(s)))) {
        let d = Diagram::braid_closure(strands, &word).unwrap();
        let back = parse_diagram(&diagram_to_json(&d)).unwrap();
        prop_assert_eq!(back.num_crossings(), d.num_crossings());
        prop_assert_eq!(diagram_to_json(&back), diagram_to_json(&d));
    }

    #[test]
    fn braid_closures_are_planar_with_signed_writhe(word in braid_word(3)) {
        let d = Diagram::braid_closure(3, &word).unwrap();
        // one sphere per split piece
        prop_assert_eq!(d.euler_characteristic(), 2 * d.pieces() as i64);
        let signs: i64 = d.crossings().iter().map(|c| c.sign as i64).sum();
        let mut self_writhe = 0;
        for comp in 0..d.num_components() {
            self_writhe += d.writhe(comp).unwrap();
        }
        let signed_letters: i64 = word.iter().map(|x| x.signum() as i64).sum();
        prop_assert_eq!(signs, signed_letters);
        prop_assert_eq!((signs - self_writhe) % 2, 0);
        prop_assert_eq!(d.mirror().mirror(), d.clone());
    }

    #[test]
    fn matrices_round_trip_through_continued_fractions(p in 1i64..60, q in -60i64..60, t in -3i64..=3) {
        prop_assume!(gcd(p, q) == 1);
        let (r, s) = bezout(p, q).unwrap();
        let g = GluingMatrix::new(p, q, r + t * p, s + t * q).unwrap();
        let cf = matrix_to_cf(&g).unwrap();
        prop_assert!(cf_realizes(&cf, &g), "{:?} -> {:?}", (p, q, r, s), cf);
    }

    #[test]
    fn cf_eval_matches_exact_fractions(a in proptest::collection::vec(-6i64..=6, 1..6)) {
        match (cf_eval(&a), minus_cf(&a)) {
            (Ok((n, d)), Some((n2, d2))) => prop_assert_eq!((n as i128, d as i128), (n2, d2)),
            (Err(_), None) => {}
            (got, want) => prop_assert!(false, "{:?}: {:?} vs {:?}", a, got, want),
        }
    }

    #[test]
    fn mod_arithmetic_is_consistent(re in -50.0f64..50.0, im in -80.0f64..80.0, k in -5i32..5, re2 in -5.0f64..5.0, im2 in -80.0f64..80.0) {
        let u = ModValue::volume(C64::new(re, im));
        let v = ModValue::volume(C64::new(re2, im2));
        let r = u.reduced();
        prop_assert!(r.value.im >= 0.0 && r.value.im < TWO_PI_SQ);
        prop_assert!((r.value.re - re).abs() == 0.0);
        let shifted = ModValue::volume(C64::new(re, im + k as f64 * TWO_PI_SQ));
        prop_assert!(mod_distance(&u, &shifted).unwrap() < 1e-9);
        let back = u.add(&v).unwrap().sub(&v).unwrap();
        prop_assert!(mod_distance(&back, &u).unwrap() < 1e-9);
        prop_assert!((mod_distance(&u, &v).unwrap() - mod_distance(&v, &u).unwrap()).abs() < 1e-12);
        prop_assert!(mod_distance(&u, &ModValue::new(u.value, ModKind::Real2PiSq)).is_err());
    }
}
