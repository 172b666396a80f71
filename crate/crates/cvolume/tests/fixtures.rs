//! The bundled fixtures match what the generators produce today.
//! Run with `CVOLUME_BLESS=1` to rewrite them.

use cvolume::dilog::mod_distance;
use cvolume::fixtures::{self, by_name};
use cvolume::io::{parse_json, presentation_to_json, to_text, Presentation};
use cvolume::shapes::validate_shaping;
use cvolume::volume::{diagram_volume, manifold_volume};
use cvolume::ModValue;
use std::path::PathBuf;

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn bless() -> bool {
    std::env::var("CVOLUME_BLESS").is_ok_and(|v| v == "1")
}

fn check_or_write(file: &str, fresh: serde_json::Value, bundled: &str) {
    let text = to_text(&fresh);
    if bless() {
        std::fs::write(path(file), &text).unwrap();
        return;
    }
    assert_eq!(parse_json(bundled).unwrap(), fresh, "{file} is stale; rerun with CVOLUME_BLESS=1");
}

#[test]
fn kink_is_current() {
    let fresh = presentation_to_json(&fixtures::generate_kink().unwrap());
    check_or_write("kink.json", fresh, fixtures::KINK_JSON);
}

#[test]
fn figure_eight_is_current() {
    let fresh = presentation_to_json(&fixtures::generate_figure_eight().unwrap());
    check_or_write("figure_eight.json", fresh, fixtures::FIGURE_EIGHT_JSON);
}

#[test]
fn lens_family_is_current() {
    check_or_write("lens_family.json", fixtures::generate_lens_family().unwrap(), fixtures::LENS_FAMILY_JSON);
}

#[test]
fn gluing_chain_is_current() {
    let fresh = presentation_to_json(&fixtures::generate_gluing_chain().unwrap());
    check_or_write("gluing_chain.json", fresh, fixtures::GLUING_CHAIN_JSON);
}

fn total(p: &Presentation) -> ModValue {
    let chi = p.shaping.as_ref().unwrap();
    let f = p.flattening.as_ref().unwrap();
    manifold_volume(&p.diagram, chi, f, &p.targets, 1e-9).unwrap().total
}

#[test]
fn bundled_values_match_their_expectations() {
    if bless() {
        return;
    }
    for name in ["kink", "figure-eight", "gluing-chain", "lens:7:3:2", "lens:12:5:6"] {
        let p = by_name(name).unwrap();
        let chi = p.shaping.as_ref().unwrap();
        assert!(validate_shaping(&p.diagram, chi, 1e-9).passed, "{name}");
        let expected = ModValue::volume(p.expected.unwrap());
        let got = if name == "figure-eight" || name == "kink" {
            diagram_volume(&p.diagram, chi, p.flattening.as_ref().unwrap()).unwrap().total
        } else {
            total(&p)
        };
        assert!(mod_distance(&got, &expected).unwrap() < 1e-9, "{name}: {got:?} vs {expected:?}");
    }
    assert_eq!(fixtures::lens_family().unwrap().len(), fixtures::lens_cases().len());
}
