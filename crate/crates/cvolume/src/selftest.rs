//! The ten acceptance checks. Each one returns named measurements against
//! fixed bounds. Reports carry no timings, so equal configurations give
//! byte-identical output.

use crate::diagram::{Diagram, R1Kind, R2Site, Remap};
use crate::dilog::{
    li2, lifted_l, lifted_l_pq, lifted_l_raw, mod_distance, plog, FlattenedArg, ModKind, ModValue, C64, PI_SQ,
    TWO_PI_SQ,
};
use crate::error::{Error, Result};
use crate::fixtures::{self, figure_eight_oracle, glue_side, solid_torus};
use crate::flatten::{
    adjust_to_decoration, default_flattening, induced_decoration, log2pii, mirror_flattening, reverse_flattening,
    Flattening, LogDecoration, PINCH_TOL,
};
use crate::glue::build_gluing_chain;
use crate::io;
use crate::shapes::{
    is_pinched, kink_loop_shape, kink_shaping, longitude_eigenvalue, mirror_shaping, propagate, reverse_shaping,
    validate_shaping, Shape, Shaping,
};
use crate::solver::{solve_shaping, Constraint, SolveRequest, DEFAULT_TOL};
use crate::surgery::{bezout, lens_oracle, GluingMatrix};
use crate::volume::{
    crossing_volume, crossing_volume_generic, crossing_volume_pinched, decoration_shift, diagram_volume,
    manifold_volume, pinch_defect,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::f64::consts::{LN_2, PI};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub starts: usize,
    /// Solver tolerance.
    pub tol: f64,
    /// Random shaped diagrams in the invariance suite.
    pub samples: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config { seed: 1, starts: 16, tol: DEFAULT_TOL, samples: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Below(f64),
    AtLeast(f64),
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

impl Metric {
    fn below(name: &str, value: f64, bound: f64) -> Metric {
        Metric { name: name.into(), value, bound: Bound::Below(bound) }
    }
    fn at_least(name: &str, value: f64, bound: f64) -> Metric {
        Metric { name: name.into(), value, bound: Bound::AtLeast(bound) }
    }
    fn zero(name: &str, value: f64) -> Metric {
        Metric { name: name.into(), value, bound: Bound::Zero }
    }
    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::Below(b) => self.value < b,
            Bound::AtLeast(b) => self.value >= b,
            Bound::Zero => self.value == 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub metrics: Vec<Metric>,
    pub error: Option<String>,
}

impl Criterion {
    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.metrics.is_empty() && self.metrics.iter().all(Metric::passed)
    }
}

pub const TITLES: [&str; 10] = [
    "dilogarithm kernel",
    "flattening shift identity",
    "lens space sweep",
    "figure-eight knot",
    "invariance suite",
    "mirror and reversal",
    "gluing chains",
    "pinched continuity",
    "disjoint union additivity",
    "determinism",
];

pub fn run_criterion(id: u32, cfg: &Config) -> Criterion {
    let body = match id {
        1 => dilog_kernel(cfg),
        2 => shift_identity(cfg),
        3 => lens_sweep(),
        4 => figure_eight(cfg).map(|(m, _)| m),
        5 => invariance(cfg),
        6 => mirror_reversal(cfg),
        7 => gluing(cfg),
        8 => pinched_continuity(),
        9 => disjoint_union(cfg),
        10 => determinism(cfg),
        _ => Err(Error::Parse(format!("no criterion {id}"))),
    };
    let title = TITLES.get(id as usize - 1).copied().unwrap_or("unknown");
    match body {
        Ok(metrics) => Criterion { id, title, metrics, error: None },
        Err(e) => Criterion { id, title, metrics: vec![], error: Some(e.to_string()) },
    }
}

pub fn run_all(cfg: &Config) -> Vec<Criterion> {
    (1..=10).map(|id| run_criterion(id, cfg)).collect()
}

pub fn report_json(cfg: &Config, results: &[Criterion]) -> Value {
    let criteria: Vec<Value> = results
        .iter()
        .map(|c| {
            let metrics: Vec<Value> = c
                .metrics
                .iter()
                .map(|m| {
                    let (kind, bound) = match m.bound {
                        Bound::Below(b) => ("below", json!(b)),
                        Bound::AtLeast(b) => ("at_least", json!(b)),
                        Bound::Zero => ("zero", json!(0.0)),
                    };
                    json!({"name": m.name, "value": m.value, "bound": bound, "kind": kind, "passed": m.passed()})
                })
                .collect();
            json!({"id": c.id, "title": c.title, "passed": c.passed(), "metrics": metrics, "error": c.error})
        })
        .collect();
    json!({
        "format": io::FORMAT,
        "seed": cfg.seed,
        "starts": cfg.starts,
        "tol": cfg.tol,
        "samples": cfg.samples,
        "criteria": criteria,
        "passed": results.iter().filter(|c| c.passed()).count(),
        "total": results.len(),
    })
}

/// One line per criterion: `PASS 3 lens space sweep: name=value (< bound), ...`.
pub fn summary_line(c: &Criterion) -> String {
    let mut parts: Vec<String> = c
        .metrics
        .iter()
        .map(|m| {
            let b = match m.bound {
                Bound::Below(b) => format!("< {b:e}"),
                Bound::AtLeast(b) => format!(">= {b}"),
                Bound::Zero => "= 0".into(),
            };
            let flag = if m.passed() { "" } else { " FAILED" };
            format!("{}={:.3e} ({b}){flag}", m.name, m.value)
        })
        .collect();
    if let Some(e) = &c.error {
        parts.push(format!("error: {e}"));
    }
    format!("{} {:>2} {}: {}", if c.passed() { "PASS" } else { "FAIL" }, c.id, c.title, parts.join(", "))
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn dist(u: C64, v: C64) -> f64 {
    mod_distance(&ModValue::volume(u), &ModValue::volume(v)).expect("same modulus")
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

// ---- 1, 2: kernel ----

fn cut_gap(points: &[(f64, i64, i64)], delta: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(x, p0, p1) in points {
        let (above, below) = if x < 0.0 {
            (lifted_l_pq(C64::new(x, delta), p0, p1)?, lifted_l_pq(C64::new(x, -delta), p0 + 1, p1)?)
        } else {
            (lifted_l_pq(C64::new(x, delta), p0, p1)?, lifted_l_pq(C64::new(x, -delta), p0, p1 + 1)?)
        };
        worst = worst.max(mod_distance(&above, &below)?);
    }
    Ok(worst)
}

fn dilog_kernel(cfg: &Config) -> Result<Vec<Metric>> {
    let mut out = Vec::new();
    let want = PI_SQ / 12.0 - LN_2 * LN_2 / 2.0;
    out.push(Metric::below("li2(1/2) error", (li2(C64::new(0.5, 0.0)) - want).norm(), 1e-12));

    let mut r = rng(cfg.seed, 1);
    let one = C64::new(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let z = C64::new(r.gen_range(-4.0..5.0), r.gen_range(-4.0..4.0));
        let lhs = li2(z) + li2(one - z);
        let rhs = PI_SQ / 6.0 - plog(z) * plog(one - z);
        worst = worst.max((lhs - rhs).norm());
    }
    out.push(Metric::below("reflection residual", worst, 1e-11));

    let points: Vec<(f64, i64, i64)> = (0..200)
        .map(|i| {
            let x = if i % 2 == 0 { -r.gen_range(0.05..5.0) } else { r.gen_range(1.05..6.0) };
            (x, r.gen_range(-2..=2), r.gen_range(-2..=2))
        })
        .collect();
    let gaps = [cut_gap(&points, 1e-4)?, cut_gap(&points, 1e-5)?, cut_gap(&points, 1e-6)?];
    out.push(Metric::below("cut gap at delta 1e-6", gaps[2], 1e-7));
    // a continuous lift closes its gap linearly in delta; a jump would not
    let decay = (gaps[0] / gaps[1]).min(gaps[1] / gaps[2]);
    out.push(Metric::at_least("cut gap decay per decade", decay, 9.0));
    Ok(out)
}

fn shift_identity(cfg: &Config) -> Result<Vec<Metric>> {
    let mut r = rng(cfg.seed, 2);
    let mut worst: f64 = 0.0;
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    for _ in 0..1000 {
        let z = C64::from_polar(r.gen_range(0.2f64..5.0), r.gen_range(-PI..PI));
        let a = FlattenedArg::from_pq(z, r.gen_range(-3..=3), r.gen_range(-3..=3));
        let (k0, k1) = (r.gen_range(-3..=3) as f64, r.gen_range(-3..=3) as f64);
        let shifted = FlattenedArg::new(a.zeta0 + two_pi_i * k0, a.zeta1 + two_pi_i * k1);
        let lhs = lifted_l(&shifted)?;
        let rhs = lifted_l_raw(&a)? + C64::new(0.0, PI) * (k1 * a.zeta0 - k0 * a.zeta1);
        worst = worst.max(mod_distance(&lhs, &ModValue::new(rhs, ModKind::Real2PiSq))?);
    }
    Ok(vec![Metric::below("shift identity residual", worst, 1e-10)])
}

// ---- 3, 4: closed forms ----

fn lens_sweep() -> Result<Vec<Metric>> {
    let (mut worst, mut worst_zero, mut cases) = (0.0f64, 0.0f64, 0usize);
    for (p, q, n) in fixtures::lens_cases() {
        let pres = fixtures::lens(p, q, n)?;
        let v = manifold_volume(
            &pres.diagram,
            pres.shaping.as_ref().unwrap(),
            pres.flattening.as_ref().unwrap(),
            &[],
            1e-9,
        )?;
        worst = worst.max(mod_distance(&v.total, &lens_oracle(p, q, n)?)?);
        if n == 0 {
            worst_zero = worst_zero.max(dist(v.total.value, zero()));
        }
        cases += 1;
    }
    Ok(vec![
        Metric::below("max distance to oracle", worst, 1e-9),
        Metric::below("max distance to 0 at n = 0", worst_zero, 1e-9),
        Metric::at_least("cases", cases as f64, fixtures::lens_cases().len() as f64),
    ])
}

fn figure_eight(cfg: &Config) -> Result<(Vec<Metric>, Value)> {
    let d = Diagram::figure_eight();
    let req = SolveRequest::new(&d, vec![Constraint::Parabolic(1)]).seed(cfg.seed).starts(cfg.starts).tol(cfg.tol);
    let results = solve_shaping(&req)?;
    let chi = &results[0].shaping;
    let f = default_flattening(&d, chi)?;
    let v = diagram_volume(&d, chi, &f)?.total.value;
    let oracle = figure_eight_oracle();
    let metrics = vec![
        Metric::below("|Re V - Neumann oracle|", (v.re - oracle.re).abs(), 1e-8),
        Metric::below("|Re V - 2.029883212819|", (v.re - 2.029883212819).abs(), 1e-8),
        Metric::below("Im V mod 2pi^2", dist(C64::new(0.0, v.im), zero()), 1e-8),
    ];
    Ok((metrics, io::solve_results_to_json(&req, &results)))
}

// ---- random shaped diagrams ----

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub strands: usize,
    pub word: Vec<i32>,
    pub diagram: Diagram,
    pub shaping: Shaping,
    pub flattening: Flattening,
}

/// A braid word on 2 or 3 strands with at most 8 letters using every
/// generator. Half of the 3-strand words start with an RIII triangle.
pub fn random_word(r: &mut ChaCha8Rng) -> (usize, Vec<i32>) {
    let strands = if r.gen_bool(0.5) { 2 } else { 3 };
    loop {
        let len = r.gen_range(strands..=8);
        let mut w: Vec<i32> = Vec::new();
        if strands == 3 && r.gen_bool(0.5) {
            let e = if r.gen_bool(0.5) { 1 } else { -1 };
            w = vec![e, 2 * e, e];
        }
        while w.len() < len {
            let g = r.gen_range(1..strands as i32);
            w.push(if r.gen_bool(0.5) { g } else { -g });
        }
        if (1..strands as i32).all(|g| w.iter().any(|x| x.abs() == g)) {
            return (strands, w);
        }
    }
}

fn random_meridian(r: &mut ChaCha8Rng) -> C64 {
    loop {
        let m = C64::from_polar(r.gen_range(0.7f64..1.4), r.gen_range(-PI..PI));
        if (m - 1.0).norm() > 0.2 && (m + 1.0).norm() > 0.2 {
            return m;
        }
    }
}

fn generic_enough(d: &Diagram, chi: &Shaping) -> bool {
    let sizes_ok = chi.shapes.iter().all(|s| [s.a, s.b].iter().all(|z| z.norm() > 1e-2 && z.norm() < 1e2));
    let unpinched = (0..d.num_crossings()).all(|c| pinch_defect(d, c, chi) > 1e-3);
    sizes_ok && unpinched
}

/// `count` solved diagrams with generic meridians and no pinched crossings.
pub fn shaped_samples(seed: u64, count: usize, starts: usize) -> Result<Vec<Sample>> {
    let mut r = rng(seed, 5);
    let mut out = Vec::new();
    for attempt in 0..20 * count.max(1) {
        if out.len() == count {
            break;
        }
        let (strands, word) = random_word(&mut r);
        let d = Diagram::braid_closure(strands, &word)?;
        let cons = (0..d.num_components()).map(|_| Constraint::FixedMeridian(random_meridian(&mut r))).collect();
        let req = SolveRequest::new(&d, cons).seed(seed.wrapping_add(attempt as u64)).starts(starts);
        let Ok(results) = solve_shaping(&req) else { continue };
        for res in results {
            if !generic_enough(&d, &res.shaping) {
                continue;
            }
            let Ok(f) = default_flattening(&d, &res.shaping) else { continue };
            if diagram_volume(&d, &res.shaping, &f).is_err() {
                continue;
            }
            out.push(Sample { strands, word: word.clone(), diagram: d.clone(), shaping: res.shaping, flattening: f });
            break;
        }
    }
    if out.len() < count {
        return Err(Error::NoSolutionFound { starts, best: f64::NAN });
    }
    Ok(out)
}

fn volume(d: &Diagram, chi: &Shaping, f: &Flattening) -> Result<C64> {
    Ok(diagram_volume(d, chi, f)?.total.value)
}

/// Carries shapes through a rewrite and propagates into the new segments.
/// `extra` pre-assigns shapes to new ids; `forget` drops old ones.
fn transport(
    chi: &Shaping,
    new: &Diagram,
    remap: &Remap,
    extra: &[(usize, Shape)],
    forget: &[usize],
) -> Result<Shaping> {
    let mut known: Vec<Option<Shape>> = vec![None; new.num_segments()];
    for (old, n) in remap.segments.iter().enumerate() {
        if let (Some(n), false) = (n, forget.contains(&old)) {
            known[*n] = Some(*chi.get(old));
        }
    }
    for &(s, x) in extra {
        known[s] = Some(x);
    }
    propagate(new, &mut known)?;
    if known.iter().any(|k| k.is_none()) {
        return Err(Error::IllegalSite("shapes do not propagate across the rewrite".into()));
    }
    let out = Shaping::new(known.into_iter().map(Option::unwrap).collect());
    if !validate_shaping(new, &out, 1e-8).passed {
        return Err(Error::DegenerateBraiding { crossing: None });
    }
    Ok(out)
}

fn remap_decoration(dec: &LogDecoration, remap: &Remap) -> LogDecoration {
    let mut out = dec.clone();
    for (old, &new) in remap.components.iter().enumerate() {
        out.mu[new] = dec.mu[old];
        out.lambda[new] = dec.lambda[old];
    }
    out
}

/// 𝒱 of the rewritten diagram with its flattening moved to the original
/// log-decoration, against the original 𝒱.
fn rewritten_distance(s: &Sample, d2: &Diagram, remap: &Remap, chi2: &Shaping) -> Result<f64> {
    let dec = induced_decoration(&s.diagram, &s.shaping, &s.flattening)?;
    let f2 = adjust_to_decoration(d2, chi2, &default_flattening(d2, chi2)?, &remap_decoration(&dec, remap))?;
    Ok(dist(volume(d2, chi2, &f2)?, volume(&s.diagram, &s.shaping, &s.flattening)?))
}

pub fn check_r2(s: &Sample, r: &mut ChaCha8Rng) -> Result<f64> {
    let d = &s.diagram;
    let ns = d.num_segments();
    let mut sites = Vec::new();
    for region in 0..d.num_regions() {
        let b = d.region_boundary(region);
        for &(u, _) in &b {
            for &(t, _) in &b {
                if u != t {
                    sites.push(R2Site { s: u, t, region, s_over: r.gen_bool(0.5) });
                }
            }
        }
    }
    // only co-oriented pairs propagate; try sites in a random order
    while !sites.is_empty() {
        let site = sites.swap_remove(r.gen_range(0..sites.len()));
        let Ok((d2, remap)) = d.apply_r2(site) else { continue };
        let extra = [(ns + 1, *s.shaping.get(site.s)), (ns + 3, *s.shaping.get(site.t))];
        let Ok(chi2) = transport(&s.shaping, &d2, &remap, &extra, &[]) else { continue };
        let gap = rewritten_distance(s, &d2, &remap, &chi2)?;
        let n = d2.num_crossings();
        let bigon = (0..d2.num_regions())
            .find(|&q| {
                let cs: Vec<usize> = d2.regions()[q].iter().map(|c| c.0).collect();
                cs.len() == 2 && cs.contains(&(n - 2)) && cs.contains(&(n - 1))
            })
            .ok_or_else(|| Error::IllegalSite("no bigon after RII".into()))?;
        let (back, _) = d2.remove_r2(bigon)?;
        if back != *d {
            return Err(Error::IllegalSite("RII removal does not restore the diagram".into()));
        }
        return Ok(gap);
    }
    Err(Error::IllegalSite("no RII site propagates".into()))
}

pub fn check_r3(s: &Sample, r: &mut ChaCha8Rng) -> Result<Option<f64>> {
    let d = &s.diagram;
    let sites = d.r3_sites();
    if sites.is_empty() {
        return Ok(None);
    }
    let region = sites[r.gen_range(0..sites.len())];
    let (d2, remap) = d.apply_r3(region)?;
    let inner: Vec<usize> = d.region_boundary(region).iter().map(|x| x.0).collect();
    let chi2 = transport(&s.shaping, &d2, &remap, &[], &inner)?;
    // the six outer segments keep their shapes
    for (old, n) in remap.segments.iter().enumerate() {
        if let (Some(n), false) = (n, inner.contains(&old)) {
            if chi2.get(*n).distance(s.shaping.get(old)) > 1e-9 {
                return Err(Error::IllegalSite("RIII changed an outer shape".into()));
            }
        }
    }
    rewritten_distance(s, &d2, &remap, &chi2).map(Some)
}

/// `(|V' - V - kink value|, |V' - decoration_shift(V)|)` for a random kink.
pub fn check_r1(s: &Sample, r: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let d = &s.diagram;
    let seg = r.gen_range(0..d.num_segments());
    let kind = R1Kind::ALL[r.gen_range(0..4)];
    let (d2, remap) = d.apply_r1(seg, kind)?;
    let ns = d.num_segments();
    let x = *s.shaping.get(seg);
    let chi2 = [true, false]
        .iter()
        .find_map(|&at2| {
            let mut shapes = vec![Shape::trivial(); d2.num_segments()];
            for (old, n) in remap.segments.iter().enumerate() {
                if let Some(n) = n {
                    shapes[*n] = *s.shaping.get(old);
                }
            }
            shapes[ns] = x;
            shapes[ns + 1] = kink_loop_shape(&x, at2);
            let chi = Shaping::new(shapes);
            validate_shaping(&d2, &chi, 1e-9).passed.then_some(chi)
        })
        .ok_or_else(|| Error::DegenerateBraiding { crossing: Some(d2.num_crossings() - 1) })?;
    // carry μ and β over, with β'' = β on the second half
    let mut f2 = default_flattening(&d2, &chi2)?;
    for (old, &new) in remap.components.iter().enumerate() {
        f2.mu[new] = s.flattening.mu[old];
    }
    for (old, n) in remap.segments.iter().enumerate() {
        if let Some(n) = n {
            f2.beta[*n] = s.flattening.beta[old];
        }
    }
    f2.beta[ns] = s.flattening.beta[seg];
    let comp = remap.components[d.segment(seg).component];
    f2.beta[ns + 1] = log2pii(chi2.get(ns + 1).b);

    let dec = remap_decoration(&induced_decoration(d, &s.shaping, &s.flattening)?, &remap);
    let dec2 = induced_decoration(&d2, &chi2, &f2)?;
    let (v, v2) = (volume(d, &s.shaping, &s.flattening)?, volume(&d2, &chi2, &f2)?);
    let kink = 2.0 * TWO_PI_SQ * I * dec2.mu[comp] * (dec2.lambda[comp] - dec.lambda[comp]);
    let predicted = decoration_shift(&ModValue::volume(v), &dec, &dec2)?;
    let (back, _) = d2.remove_r1(d2.num_crossings() - 1)?;
    if back != *d {
        return Err(Error::IllegalSite("RI removal does not restore the diagram".into()));
    }
    Ok((dist(v2, v + kink), mod_distance(&ModValue::volume(v2), &predicted)?))
}

pub fn kappa_gap(s: &Sample) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for c in 0..s.diagram.num_crossings() {
        let base = crossing_volume_generic(&s.diagram, c, &s.shaping, &s.flattening, 0)?;
        for k in [-2, -1, 1, 3] {
            let v = crossing_volume_generic(&s.diagram, c, &s.shaping, &s.flattening, k)?;
            worst = worst.max(dist(v, base));
        }
    }
    Ok(worst)
}

pub fn gamma_gap(s: &Sample, r: &mut ChaCha8Rng) -> Result<f64> {
    let v = volume(&s.diagram, &s.shaping, &s.flattening)?;
    let mut f = s.flattening.clone();
    for region in 0..s.diagram.num_regions() {
        f = f.shift_gamma(region, r.gen_range(-3..=3));
    }
    Ok(dist(volume(&s.diagram, &s.shaping, &f)?, v))
}

/// Random β and μ shift against the decoration predictor.
pub fn beta_mu_gap(s: &Sample, r: &mut ChaCha8Rng) -> Result<f64> {
    let d = &s.diagram;
    let v = ModValue::volume(volume(d, &s.shaping, &s.flattening)?);
    let dec = induced_decoration(d, &s.shaping, &s.flattening)?;
    let nonzero = |r: &mut ChaCha8Rng| if r.gen_bool(0.5) { r.gen_range(1..=3) } else { -r.gen_range(1..=3) };
    let f = s
        .flattening
        .shift_beta(r.gen_range(0..d.num_segments()), nonzero(r))
        .shift_mu(r.gen_range(0..d.num_components()), nonzero(r));
    let dec2 = induced_decoration(d, &s.shaping, &f)?;
    let predicted = decoration_shift(&v, &dec, &dec2)?;
    Ok(mod_distance(&ModValue::volume(volume(d, &s.shaping, &f)?), &predicted)?)
}

fn invariance(cfg: &Config) -> Result<Vec<Metric>> {
    let samples = shaped_samples(cfg.seed, cfg.samples, cfg.starts.min(8))?;
    let mut r = rng(cfg.seed, 6);
    let (mut r2, mut r3, mut r3n, mut k1, mut k2, mut kap, mut gam, mut bm) = (0.0f64, 0.0f64, 0, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut max_crossings = 0;
    for s in &samples {
        max_crossings = max_crossings.max(s.diagram.num_crossings());
        r2 = r2.max(check_r2(s, &mut r)?);
        if let Some(g) = check_r3(s, &mut r)? {
            r3 = r3.max(g);
            r3n += 1;
        }
        let (a, b) = check_r1(s, &mut r)?;
        k1 = k1.max(a);
        k2 = k2.max(b);
        kap = kap.max(kappa_gap(s)?);
        gam = gam.max(gamma_gap(s, &mut r)?);
        bm = bm.max(beta_mu_gap(s, &mut r)?);
    }
    Ok(vec![
        Metric::at_least("diagrams", samples.len() as f64, 20.0),
        Metric::below("max crossings", max_crossings as f64, 9.0),
        Metric::below("RII change", r2, 1e-9),
        Metric::below("RI against kink value", k1, 1e-9),
        Metric::below("RI against decoration shift", k2, 1e-9),
        Metric::at_least("RIII sites used", r3n as f64, 1.0),
        Metric::below("RIII change", r3, 1e-9),
        Metric::below("kappa shift change", kap, 1e-11),
        Metric::below("gamma shift change", gam, 1e-9),
        Metric::below("beta/mu shift against predictor", bm, 1e-9),
    ])
}

// ---- 6: orientation ----

fn mirror_reversal(cfg: &Config) -> Result<Vec<Metric>> {
    let mut samples = shaped_samples(cfg.seed.wrapping_add(1), 8, cfg.starts.min(8))?;
    let fig = fixtures::by_name("figure-eight")?;
    samples.push(Sample {
        strands: 3,
        word: vec![1, -2, 1, -2],
        diagram: fig.diagram.clone(),
        shaping: fig.shaping.clone().unwrap(),
        flattening: fig.flattening.clone().unwrap(),
    });
    let (mut rev, mut mir, mut flips) = (0.0f64, 0.0f64, 0.0f64);
    for s in &samples {
        let d = &s.diagram;
        for comp in 0..d.num_components() {
            let d2 = d.reverse_component(comp)?;
            let chi2 = reverse_shaping(d, &s.shaping, comp)?;
            let f2 = reverse_flattening(d, &d2, &s.flattening, comp)?;
            for c in 0..d.num_crossings() {
                let u = crossing_volume(d, c, &s.shaping, &s.flattening)?;
                let v = crossing_volume(&d2, c, &chi2, &f2)?;
                if u.pinched != v.pinched {
                    flips += 1.0;
                }
                rev = rev.max(dist(u.value, v.value));
            }
        }
        let dm = d.mirror();
        let v = volume(d, &s.shaping, &s.flattening)?;
        let vm = volume(&dm, &mirror_shaping(&s.shaping), &mirror_flattening(&s.flattening))?;
        mir = mir.max(mod_distance(&ModValue::volume(vm), &ModValue::volume(v).conj())?);
    }
    Ok(vec![
        Metric::below("reversal per-crossing change", rev, 1e-12),
        Metric::zero("reversal branch flips", flips),
        Metric::below("mirror against conjugate", mir, 1e-9),
    ])
}

// ---- 7: gluing ----

fn gluing(cfg: &Config) -> Result<Vec<Metric>> {
    let (mut worst, mut add, mut longest, mut unpinched) = (0.0f64, 0.0f64, 0usize, 0usize);
    // (r, s) is only fixed up to multiples of (p, q); t shifts it
    for (p, q, t) in [(3, 1, 0), (5, 2, 0), (7, 3, 0), (4, 3, 0), (4, 3, 2)] {
        let (r0, s0) = bezout(p, q)?;
        let g = GluingMatrix::new(p, q, r0 + t * p, s0 + t * q)?;
        for n in 0..=p / 2 {
            let w = C64::from_polar(1.0, 2.0 * PI * n as f64 / p as f64);
            let x = C64::new(0.8, 0.3);
            let one = solid_torus(C64::new(0.6, -0.9), x, w)?;
            let two = solid_torus(C64::new(1.3, 0.4), x, w.powi(g.r as i32))?;
            let out = build_gluing_chain(glue_side(&one, 0), glue_side(&two, 0), &g)?;
            longest = longest.max(out.cf.len());
            for &c in &out.new_crossings {
                if !is_pinched(&out.diagram, c, &out.shaping, PINCH_TOL)? {
                    unpinched += 1;
                }
            }
            let v = manifold_volume(&out.diagram, &out.shaping, &out.flattening, &[], 1e-9)?.total;
            worst = worst.max(mod_distance(&v, &lens_oracle(p, q, n)?)?);
            add = add.max(additivity_gap(&one, &two, &g, &v)?);
        }
    }
    let (fig_gap, fig_direct) = figure_eight_gluing(cfg)?;
    Ok(vec![
        Metric::below("max distance to lens oracle", worst, 1e-9),
        Metric::at_least("longest continued fraction", longest as f64, 3.0),
        Metric::zero("unpinched chain crossings", unpinched as f64),
        Metric::below("solid tori additivity residual", add, 1e-9),
        Metric::below("figure-eight filling additivity residual", fig_gap, 1e-9),
        Metric::below("figure-eight glued against direct filling", fig_direct, 1e-9),
    ])
}

type Side = (Diagram, Shaping, Flattening);

/// `|V(glued) - V1(s) - V2(s')|` with `s'` the decoration the gluing
/// imposes on the second side.
fn additivity_gap(one: &Side, two: &Side, g: &GluingMatrix, glued: &ModValue) -> Result<f64> {
    let dec = induced_decoration(&one.0, &one.1, &one.2)?;
    let (mu, lambda) = (dec.mu[0], dec.lambda[0]);
    let v1 = manifold_volume(&one.0, &one.1, &one.2, &[(0, mu, lambda)], 1e-9)?.total;
    let t2 = (0, g.r as f64 * mu + g.s as f64 * lambda, g.p as f64 * mu + g.q as f64 * lambda);
    let v2 = manifold_volume(&two.0, &two.1, &two.2, &[t2], 1e-9)?.total;
    mod_distance(glued, &v1.add(&v2)?)
}

/// The 5/1 filling of the figure-eight, glued from a solid torus.
fn figure_eight_gluing(cfg: &Config) -> Result<(f64, f64)> {
    let (p, q) = (5, 1);
    let (r, s) = bezout(p, q)?;
    let g = GluingMatrix::new(p, q, r, s)?;
    let d = Diagram::figure_eight();
    let req = SolveRequest::new(&d, vec![Constraint::Filling { p, q }]).seed(cfg.seed).starts(cfg.starts.max(8));
    // m = ±1 meets m^5 l = 1 trivially; take a genuine deformation
    let chi = solve_shaping(&req)?
        .into_iter()
        .map(|res| res.shaping)
        .find(|c| {
            let m = c.meridian(&d, 0).unwrap_or(C64::new(1.0, 0.0));
            (m - 1.0).norm() > 1e-3 && (m + 1.0).norm() > 1e-3
        })
        .ok_or(Error::NoSolutionFound { starts: req.starts, best: f64::NAN })?;
    let f = default_flattening(&d, &chi)?;
    let m = chi.meridian(&d, 0)?;
    let l = longitude_eigenvalue(&d, &chi, 0)?;
    let x = chi.get(d.components()[0][0]).b;
    let two = solid_torus(C64::new(1.3, 0.4), x, m.powi(r as i32) * l.powi(s as i32))?;
    let one = (d.clone(), chi.clone(), f.clone());
    let out = build_gluing_chain(glue_side(&one, 0), glue_side(&two, 0), &g)?;
    let glued = manifold_volume(&out.diagram, &out.shaping, &out.flattening, &[], 1e-9)?.total;
    let gap = additivity_gap(&one, &two, &g, &glued)?;
    let filled = d.with_label(0, crate::diagram::SurgeryLabel::rational(p, q)?)?;
    let direct = manifold_volume(&filled, &chi, &f, &[], 1e-9)?.total;
    Ok((gap, mod_distance(&glued, &direct)?))
}

// ---- 8: pinched continuity ----

/// Two kinks joined by an RII bigon, the second kink's `b` scaled by
/// `lambda`. Returns the diagram, its shaping and the first bigon crossing.
fn pinch_family(site: R2Site, lambda: C64) -> Result<(Diagram, Shaping, usize)> {
    let kink_a = kink_shaping(C64::new(0.7, 0.4), C64::new(1.1, -0.3), C64::new(0.9, 0.5))?;
    let kink_b = kink_shaping(C64::new(1.2, -0.6), lambda, C64::new(0.6, -0.8))?;
    let base = Diagram::kink(1).disjoint_union(&Diagram::kink(1));
    let (d2, remap) = base.apply_r2(site)?;
    let chi = Shaping::new(kink_a.shapes.iter().chain(kink_b.shapes.iter()).copied().collect());
    let ns = base.num_segments();
    let extra = [(ns + 1, *chi.get(site.s)), (ns + 3, *chi.get(site.t))];
    let chi2 = transport(&chi, &d2, &remap, &extra, &[])?;
    Ok((d2, chi2, base.num_crossings()))
}

/// `b_out2 / b_in1 - 1` at the first bigon crossing.
fn pinch_ratio(site: R2Site, lambda: C64) -> Result<C64> {
    let (d, chi, c) = pinch_family(site, lambda)?;
    let x = d.crossing(c);
    Ok(chi.get(x.arms[3]).b / chi.get(x.arms[0]).b - 1.0)
}

/// `|generic - pinched|` at a bigon crossing sitting at pinch defect
/// `delta`, found by a secant search on the second kink's scale.
pub fn pinch_family_gap(delta: f64) -> Result<f64> {
    let base = Diagram::kink(1).disjoint_union(&Diagram::kink(1));
    let outer = base.outer_region();
    let site = [(0, 2), (0, 3), (1, 2), (1, 3)]
        .iter()
        .flat_map(|&(s, t)| [true, false].map(|s_over| R2Site { s, t, region: outer, s_over }))
        .find(|&site| pinch_family(site, C64::new(1.0, 0.0)).is_ok())
        .ok_or_else(|| Error::IllegalSite("no co-oriented site between the kinks".into()))?;
    let target = C64::new(-delta, 0.0);
    let (mut l0, mut l1) = (C64::new(1.0, 0.0), C64::new(1.1, 0.05));
    let (mut g0, mut g1) = (pinch_ratio(site, l0)? - target, pinch_ratio(site, l1)? - target);
    for _ in 0..60 {
        if g1.norm() < 1e-15 {
            break;
        }
        let l2 = l1 - g1 * (l1 - l0) / (g1 - g0);
        (l0, g0) = (l1, g1);
        l1 = l2;
        g1 = pinch_ratio(site, l1)? - target;
    }
    let (d, chi, c) = pinch_family(site, l1)?;
    let got = pinch_defect(&d, c, &chi);
    if (got - delta).abs() > 1e-6 * delta {
        return Err(Error::IllegalSite(format!("pinch family misplaced: defect {got:e} for {delta:e}")));
    }
    let f = default_flattening(&d, &chi)?;
    let generic = crossing_volume_generic(&d, c, &chi, &f, 0)?;
    let pinched = crossing_volume_pinched(&d, c, &f);
    Ok(dist(generic, pinched))
}

fn pinched_continuity() -> Result<Vec<Metric>> {
    let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5].iter().map(|&d| pinch_family_gap(d)).collect::<Result<_>>()?;
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    Ok(vec![
        Metric::below("gap at distance 1e-5", gaps[3], 1e-3),
        Metric::at_least("monotone over 1e-2..1e-5", if monotone { 1.0 } else { 0.0 }, 1.0),
    ])
}

// ---- 9, 10 ----

/// Flattening of `d1 ⊔ d2` restricting to `f1` and `f2`.
pub fn union_flattening(d1: &Diagram, f1: &Flattening, d2: &Diagram, f2: &Flattening, u: &Diagram) -> Flattening {
    let n1 = d1.num_crossings();
    let gamma = u
        .regions()
        .iter()
        .map(|corners| {
            let (c, k) = corners[0];
            if c < n1 {
                f1.gamma[d1.crossing(c).region_at_corner(k)]
            } else {
                f2.gamma[d2.crossing(c - n1).region_at_corner(k)]
            }
        })
        .collect();
    Flattening {
        mu: f1.mu.iter().chain(&f2.mu).copied().collect(),
        beta: f1.beta.iter().chain(&f2.beta).copied().collect(),
        gamma,
    }
}

fn disjoint_union(cfg: &Config) -> Result<Vec<Metric>> {
    let mut parts: Vec<(Diagram, Shaping, Flattening)> = shaped_samples(cfg.seed.wrapping_add(2), 6, cfg.starts.min(8))?
        .into_iter()
        .map(|s| (s.diagram, s.shaping, s.flattening))
        .collect();
    for name in ["figure-eight", "kink"] {
        let p = fixtures::by_name(name)?;
        parts.push((p.diagram, p.shaping.unwrap(), p.flattening.unwrap()));
    }
    let (mut per, mut total, mut summed) = (0.0f64, 0.0f64, 0.0f64);
    for pair in parts.chunks(2) {
        let [(d1, c1, f1), (d2, c2, f2)] = pair else { continue };
        let u = d1.disjoint_union(d2);
        let cu = Shaping::new(c1.shapes.iter().chain(&c2.shapes).copied().collect());
        let fu = union_flattening(d1, f1, d2, f2, &u);
        let (r1, r2, ru) = (diagram_volume(d1, c1, f1)?, diagram_volume(d2, c2, f2)?, diagram_volume(&u, &cu, &fu)?);
        for (a, b) in r1.per_crossing.iter().chain(&r2.per_crossing).zip(&ru.per_crossing) {
            per = per.max((a.value - b.value).norm());
            if a.pinched != b.pinched {
                per = f64::INFINITY;
            }
        }
        let concatenated: C64 = r1.per_crossing.iter().chain(&r2.per_crossing).map(|c| c.value).sum();
        total = total.max((ModValue::volume(concatenated).reduced().value - ru.total.value).norm());
        summed = summed.max(mod_distance(&ru.total, &r1.total.add(&r2.total)?)?);
    }
    Ok(vec![
        Metric::zero("per-crossing difference", per),
        Metric::zero("total against summed per-crossing reports", total),
        Metric::below("total against V1 + V2", summed, 1e-12),
    ])
}

fn determinism(cfg: &Config) -> Result<Vec<Metric>> {
    let (_, a) = figure_eight(cfg)?;
    let (_, b) = figure_eight(cfg)?;
    let solve_diff = (io::to_text(&a) != io::to_text(&b)) as u8 as f64;
    let sample_text = |s: &[Sample]| {
        s.iter()
            .map(|x| io::to_text(&io::shaping_to_json(&x.diagram, &x.shaping)))
            .collect::<String>()
    };
    let s1 = shaped_samples(cfg.seed, 3, cfg.starts.min(8))?;
    let s2 = shaped_samples(cfg.seed, 3, cfg.starts.min(8))?;
    let sample_diff = (sample_text(&s1) != sample_text(&s2)) as u8 as f64;
    Ok(vec![
        Metric::zero("figure-eight solve reports differing", solve_diff),
        Metric::zero("sampled shapings differing", sample_diff),
    ])
}
