//! Volume invariance under diagram rewrites, flattening shifts, mirror and
//! reversal, on a handful of freshly solved diagrams.

use cvolume::dilog::mod_distance;
use cvolume::fixtures::by_name;
use cvolume::flatten::mirror_flattening;
use cvolume::selftest::{
    beta_mu_gap, check_r1, check_r2, check_r3, gamma_gap, kappa_gap, shaped_samples, union_flattening, Sample,
};
use cvolume::shapes::{mirror_shaping, Shaping};
use cvolume::volume::diagram_volume;
use cvolume::ModValue;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn samples(seed: u64) -> Vec<Sample> {
    shaped_samples(seed, 4, 8).unwrap()
}

#[test]
fn rewrites_preserve_the_volume() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for s in samples(101) {
        assert!(check_r2(&s, &mut r).unwrap() < 1e-9, "RII on {:?}", s.word);
        if let Some(g) = check_r3(&s, &mut r).unwrap() {
            assert!(g < 1e-9, "RIII on {:?}", s.word);
        }
        let (kink, shift) = check_r1(&s, &mut r).unwrap();
        assert!(kink < 1e-9 && shift < 1e-9, "RI on {:?}: {kink:e} {shift:e}", s.word);
    }
}

#[test]
fn flattening_shifts_follow_the_predictor() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    for s in samples(202) {
        assert!(kappa_gap(&s).unwrap() < 1e-11);
        assert!(gamma_gap(&s, &mut r).unwrap() < 1e-9);
        assert!(beta_mu_gap(&s, &mut r).unwrap() < 1e-9);
    }
}

#[test]
fn triangle_words_always_give_an_r3_site() {
    let d = cvolume::diagram::Diagram::braid_closure(3, &[1, 2, 1, -2]).unwrap();
    assert!(!d.r3_sites().is_empty());
}

#[test]
fn mirror_conjugates_the_figure_eight_volume() {
    let p = by_name("figure-eight").unwrap();
    let (chi, f) = (p.shaping.unwrap(), p.flattening.unwrap());
    let v = diagram_volume(&p.diagram, &chi, &f).unwrap().total;
    let vm = diagram_volume(&p.diagram.mirror(), &mirror_shaping(&chi), &mirror_flattening(&f)).unwrap().total;
    assert!(mod_distance(&vm, &v.conj()).unwrap() < 1e-9);
    // amphichiral: the mirror has the same volume
    assert!((vm.value.re - v.value.re).abs() < 1e-9);
}

#[test]
fn union_reports_concatenate() {
    let a = by_name("kink").unwrap();
    let b = by_name("figure-eight").unwrap();
    let (ca, fa) = (a.shaping.unwrap(), a.flattening.unwrap());
    let (cb, fb) = (b.shaping.unwrap(), b.flattening.unwrap());
    let u = a.diagram.disjoint_union(&b.diagram);
    let cu = Shaping::new(ca.shapes.iter().chain(&cb.shapes).copied().collect());
    let fu = union_flattening(&a.diagram, &fa, &b.diagram, &fb, &u);
    let ru = diagram_volume(&u, &cu, &fu).unwrap();
    let r1 = diagram_volume(&a.diagram, &ca, &fa).unwrap();
    let r2 = diagram_volume(&b.diagram, &cb, &fb).unwrap();
    let parts: Vec<_> = r1.per_crossing.iter().chain(&r2.per_crossing).map(|c| c.value).collect();
    let union: Vec<_> = ru.per_crossing.iter().map(|c| c.value).collect();
    assert_eq!(parts, union);
    let sum = r1.total.add(&r2.total).unwrap();
    assert!(mod_distance(&ru.total, &sum).unwrap() < 1e-12);
    assert_eq!(ModValue::volume(parts.iter().sum()).reduced(), ru.total.reduced());
}
