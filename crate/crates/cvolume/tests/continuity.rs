//! The lifted dilogarithm glues continuously across its cuts and the
//! generic crossing volume tends to the pinched one.

use cvolume::dilog::{lifted_l_pq, mod_distance};
use cvolume::selftest::pinch_family_gap;
use cvolume::C64;

/// Two-sided gap at `x ± iδ`, with the lower sheet moved per the gluing.
fn gap(x: f64, p0: i64, p1: i64, delta: f64) -> f64 {
    let upper = lifted_l_pq(C64::new(x, delta), p0, p1).unwrap();
    let lower = if x < 0.0 {
        lifted_l_pq(C64::new(x, -delta), p0 + 1, p1).unwrap()
    } else {
        lifted_l_pq(C64::new(x, -delta), p0, p1 + 1).unwrap()
    };
    mod_distance(&upper, &lower).unwrap()
}

/// Numerical derivative along the imaginary direction on the upper sheet.
fn slope(x: f64, p0: i64, p1: i64) -> f64 {
    let h = 1e-4;
    let a = lifted_l_pq(C64::new(x, 2.0 * h), p0, p1).unwrap();
    let b = lifted_l_pq(C64::new(x, h), p0, p1).unwrap();
    (a.value - b.value).norm() / h
}

#[test]
fn cut_gap_is_the_slope_times_the_width() {
    for (x, p0, p1) in [(-2.0, 0, 0), (-0.3, 1, -1), (1.5, 0, 2), (4.0, -2, 1), (-5.0, 2, 2)] {
        for delta in [1e-4, 1e-5, 1e-6] {
            let g = gap(x, p0, p1, delta);
            let predicted = 2.0 * delta * slope(x, p0, p1);
            assert!((g / predicted - 1.0).abs() < 0.05, "x={x} p=({p0},{p1}) delta={delta}: {g:e} vs {predicted:e}");
        }
    }
}

#[test]
fn without_the_sheet_change_the_cut_is_a_jump() {
    let upper = lifted_l_pq(C64::new(3.0, 1e-9), 0, 0).unwrap();
    let lower = lifted_l_pq(C64::new(3.0, -1e-9), 0, 0).unwrap();
    assert!(mod_distance(&upper, &lower).unwrap() > 1.0);
}

#[test]
fn generic_branch_tends_to_the_pinched_formula() {
    let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6].iter().map(|&d| pinch_family_gap(d).unwrap()).collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0] / 5.0, "{gaps:?}");
    }
    assert!(gaps[3] < 1e-3);
}
