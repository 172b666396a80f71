//! Bundled example presentations: a kink, the figure-eight knot with its
//! geometric parabolic shaping, the lens family for `p ≤ 12` and two solid
//! tori glued by a chain of length four.
//!
//! The JSON under `fixtures/` is what [`by_name`] serves; the `generate_*`
//! functions rebuild it from scratch so tests can check it is current.

use crate::diagram::{Diagram, SurgeryLabel};
use crate::dilog::{lifted_l_raw, FlattenedArg, C64};
use crate::error::{Error, Result};
use crate::flatten::{default_flattening, Flattening};
use crate::glue::{build_gluing_chain, GlueSide};
use crate::io::{parse_json, parse_presentation, Presentation};
use crate::shapes::{kink_shaping, lens_shaping, Shaping};
use crate::solver::{solve_shaping, Constraint, SolveRequest};
use crate::surgery::{bezout, lens_oracle, GluingMatrix};
use crate::volume::diagram_volume;
use std::f64::consts::PI;

pub const KINK_JSON: &str = include_str!("../fixtures/kink.json");
pub const FIGURE_EIGHT_JSON: &str = include_str!("../fixtures/figure_eight.json");
pub const LENS_FAMILY_JSON: &str = include_str!("../fixtures/lens_family.json");
pub const GLUING_CHAIN_JSON: &str = include_str!("../fixtures/gluing_chain.json");

pub const NAMES: [&str; 4] = ["kink", "figure-eight", "lens-family", "gluing-chain"];

/// Seed and start count the bundled figure-eight shaping was solved with.
pub const FIGURE_EIGHT_SEED: u64 = 1;
pub const FIGURE_EIGHT_STARTS: usize = 16;

/// The gluing fixture: `(p, q) = (4, 3)` with `(r, s)` shifted twice by
/// `(p, q)` from the Bezout pair, so the chain has four unknots, at `n = 1`.
pub const GLUING_CHAIN_CASE: (i64, i64, i64, i64) = (4, 3, 2, 1);

/// `(p, q, n)` for every lens fixture.
pub fn lens_cases() -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    for p in 2..=12i64 {
        for q in 1..p {
            if crate::diagram::gcd(p, q) != 1 {
                continue;
            }
            for n in 0..=p / 2 {
                out.push((p, q, n));
            }
        }
    }
    out
}

/// The Neumann sum `-i(𝓛 + 𝓛)` over the two regular ideal tetrahedra of
/// the figure-eight complement with zero branch integers. Only its real part
/// is the volume: those branch integers are not a flattening of the
/// triangulation, and the sum carries an extra `π²/6` in the imaginary part.
pub fn figure_eight_oracle() -> C64 {
    let z = C64::from_polar(1.0, PI / 3.0);
    let one = C64::new(1.0, 0.0);
    let arg = FlattenedArg::new(z.ln(), -(one - z).ln());
    let l = lifted_l_raw(&arg).expect("e^{iπ/3} is not degenerate");
    -C64::new(0.0, 1.0) * (l + l)
}

pub fn solid_torus(a: C64, b: C64, m: C64) -> Result<(Diagram, Shaping, Flattening)> {
    let d = Diagram::kink(1);
    let chi = kink_shaping(a, b, m)?;
    let f = default_flattening(&d, &chi)?;
    Ok((d, chi, f))
}

pub fn glue_side(s: &(Diagram, Shaping, Flattening), component: usize) -> GlueSide<'_> {
    GlueSide { diagram: &s.0, shaping: &s.1, flattening: &s.2, component }
}

pub fn generate_kink() -> Result<Presentation> {
    let (diagram, chi, f) = solid_torus(C64::new(0.3, 0.8), C64::new(1.2, -0.4), C64::new(0.7, 0.5))?;
    let expected = diagram_volume(&diagram, &chi, &f)?.total.value;
    Ok(Presentation { diagram, shaping: Some(chi), flattening: Some(f), targets: vec![], expected: Some(expected) })
}

pub fn generate_figure_eight() -> Result<Presentation> {
    let d = Diagram::figure_eight().with_label(0, SurgeryLabel::Cusp)?;
    let req = SolveRequest::new(&d, vec![Constraint::Parabolic(1)])
        .seed(FIGURE_EIGHT_SEED)
        .starts(FIGURE_EIGHT_STARTS);
    let chi = solve_shaping(&req)?.remove(0).shaping;
    let f = default_flattening(&d, &chi)?;
    Ok(Presentation {
        diagram: d,
        shaping: Some(chi),
        flattening: Some(f),
        targets: vec![],
        // the knot is amphichiral, so its Chern-Simons invariant vanishes
        expected: Some(C64::new(figure_eight_oracle().re, 0.0)),
    })
}

pub fn lens(p: i64, q: i64, n: i64) -> Result<Presentation> {
    let d = Diagram::kink(1).with_label(0, SurgeryLabel::rational(p, q)?)?;
    let chi = lens_shaping(p, n)?;
    let f = default_flattening(&d, &chi)?;
    let expected = lens_oracle(p, q, n)?.value;
    Ok(Presentation { diagram: d, shaping: Some(chi), flattening: Some(f), targets: vec![], expected: Some(expected) })
}

pub fn generate_gluing_chain() -> Result<Presentation> {
    let (p, q, t, n) = GLUING_CHAIN_CASE;
    let (r0, s0) = bezout(p, q)?;
    let g = GluingMatrix::new(p, q, r0 + t * p, s0 + t * q)?;
    let w = C64::from_polar(1.0, 2.0 * PI * n as f64 / p as f64);
    let x = C64::new(0.8, 0.3);
    let one = solid_torus(C64::new(0.6, -0.9), x, w)?;
    let two = solid_torus(C64::new(1.3, 0.4), x, w.powi(g.r as i32))?;
    let out = build_gluing_chain(glue_side(&one, 0), glue_side(&two, 0), &g)?;
    Ok(Presentation {
        diagram: out.diagram,
        shaping: Some(out.shaping),
        flattening: Some(out.flattening),
        targets: vec![],
        expected: Some(lens_oracle(p, q, n)?.value),
    })
}

/// The lens family as one document: `{"format": 1, "cases": [{"p", "q",
/// "n", "presentation"}]}`.
pub fn generate_lens_family() -> Result<serde_json::Value> {
    let mut cases = Vec::new();
    for (p, q, n) in lens_cases() {
        let pres = lens(p, q, n)?;
        cases.push(serde_json::json!({
            "p": p, "q": q, "n": n,
            "presentation": crate::io::presentation_to_json(&pres),
        }));
    }
    Ok(serde_json::json!({"format": crate::io::FORMAT, "cases": cases}))
}

/// Bundled lens fixtures as `(p, q, n, presentation)`.
pub fn lens_family() -> Result<Vec<(i64, i64, i64, Presentation)>> {
    let v = parse_json(LENS_FAMILY_JSON)?;
    let cases = v.get("cases").and_then(|c| c.as_array()).ok_or_else(|| Error::Parse("lens family: no cases".into()))?;
    cases
        .iter()
        .map(|c| {
            let int = |k: &str| c.get(k).and_then(|x| x.as_i64()).ok_or_else(|| Error::Parse(format!("lens case: {k}")));
            let pres = c.get("presentation").ok_or_else(|| Error::Parse("lens case: presentation".into()))?;
            Ok((int("p")?, int("q")?, int("n")?, parse_presentation(pres)?))
        })
        .collect()
}

/// A bundled presentation by name. `lens-family` resolves to `L(5, 1)` at
/// `n = 1`; `lens:P:Q:N` picks any member.
pub fn by_name(name: &str) -> Result<Presentation> {
    match name {
        "kink" => parse_presentation(&parse_json(KINK_JSON)?),
        "figure-eight" | "figure_eight" | "4_1" => parse_presentation(&parse_json(FIGURE_EIGHT_JSON)?),
        "gluing-chain" | "gluing_chain" => parse_presentation(&parse_json(GLUING_CHAIN_JSON)?),
        "lens-family" => by_name("lens:5:1:1"),
        _ => {
            let parts: Vec<&str> = name.split(':').collect();
            if let ["lens", p, q, n] = parts.as_slice() {
                let num = |s: &str| s.parse::<i64>().map_err(|_| Error::Parse(format!("fixture {name}")));
                let (p, q, n) = (num(p)?, num(q)?, num(n)?);
                for (pp, qq, nn, pres) in lens_family()? {
                    if (pp, qq, nn) == (p, q, n) {
                        return Ok(pres);
                    }
                }
            }
            Err(Error::Parse(format!("unknown fixture {name}; known: {}", NAMES.join(", "))))
        }
    }
}
