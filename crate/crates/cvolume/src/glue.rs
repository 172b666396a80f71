//! Gluing two boundary tori through a chain of surgered unknots.
//!
//! The exposed components `T` and `T'` are clasped to a linear chain
//! `T - U_0 - U_1 - … - U_k - U_{k+1} - T'` labelled `T: 0`, `U_0: 0`,
//! `U_i: -a_i`, `U_{k+1}: 0`, `T': 0`. With `lk(T, U_0) = e`,
//! `lk(U_i, U_{i+1}) = +1` and `lk(U_{k+1}, T') = e'` the filling relations
//! read `μ_0 = -eλ`, `μ_1 = -eμ` and `μ_{i+1} = a_i μ_i - μ_{i-1}`, so the
//! chain identifies `μ' = rμ + sλ`, `λ' = pμ + qλ` when its continued
//! fraction realizes `[[-r, s], [-p, q]]` and `e e'` is the sign of the last
//! convergent.
//!
//! Every new crossing is pinched. At a pinched crossing the b-variables are
//! `x` on `in1` and `out2`, `m1 x` on `in2` and `m2 x` on `out1`, so a clasp
//! passes both strands' b-variables through unchanged and only fixes their
//! ratio. Placing the clasps so the ratios are `1/m_0`, `m_i/m_{i+1}` and
//! `m_{k+1}` carries the exposed value `x` from `T` to `T'`.

use crate::diagram::{Diagram, Remap, Side, SurgeryLabel, IN1, IN2, OUT1, OUT2};
use crate::dilog::C64;
use crate::error::{Error, Result};
use crate::flatten::{default_flattening, exp2pii, induced_decoration, Flattening};
use crate::shapes::{is_pinched, longitude_eigenvalue, propagate, validate_shaping, Shape, Shaping};
use crate::solver::{solve_shaping, Constraint, Pin, PinVar, SolveRequest};
use crate::surgery::{cf_convergents, matrix_to_cf, GluingMatrix};

/// One side of a gluing: a presentation with its shaping and flattening, and
/// the Boundary-labelled component to glue.
#[derive(Debug, Clone, Copy)]
pub struct GlueSide<'a> {
    pub diagram: &'a Diagram,
    pub shaping: &'a Shaping,
    pub flattening: &'a Flattening,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GluedPresentation {
    pub diagram: Diagram,
    pub shaping: Shaping,
    pub flattening: Flattening,
    pub cf: Vec<i64>,
    /// Output components of `T` and `T'`.
    pub first: usize,
    pub second: usize,
    /// Output components `U_0, …, U_{k+1}`.
    pub chain: Vec<usize>,
    pub new_crossings: Vec<usize>,
    /// Output segment ids of the input segments, side 1 then side 2.
    pub segment_map: Vec<usize>,
}

const EIG_TOL: f64 = 1e-8;

fn rel(x: C64, y: C64) -> f64 {
    (x - y).norm() / y.norm().max(1.0)
}

fn powi(z: C64, n: i64) -> C64 {
    z.powi(n as i32)
}

/// Output of a chain of rewrites with ids followed through each remap.
struct Tracker {
    d: Diagram,
    /// Current id of every segment of the starting diagram.
    segs: Vec<usize>,
    /// Current ids of crossings we care about.
    cross: Vec<usize>,
    /// Meridian eigenvalue of each current component.
    comp_m: Vec<C64>,
    /// Starting component index to current.
    comps: Vec<usize>,
}

impl Tracker {
    fn step(&mut self, d: Diagram, remap: &Remap, added: usize) {
        for s in self.segs.iter_mut() {
            *s = remap.segments[*s].expect("rewrite keeps tracked segments");
        }
        for c in self.cross.iter_mut() {
            *c = remap.crossings[*c].expect("rewrite keeps tracked crossings");
        }
        let mut comp_m = vec![C64::new(1.0, 0.0); d.num_components()];
        for (old, &new) in remap.components.iter().enumerate() {
            comp_m[new] = self.comp_m[old];
        }
        for c in self.comps.iter_mut() {
            *c = remap.components[*c];
        }
        let nc = d.num_crossings();
        self.cross.extend(nc - added..nc);
        self.comp_m = comp_m;
        self.d = d;
    }

    fn meridian_of_segment(&self, d: &Diagram, remap: &Remap, s: usize) -> C64 {
        // components are unchanged by a clasp, only renumbered
        let comp = d.segment(s).component;
        let old = remap.components.iter().position(|&c| c == comp).expect("component survives");
        self.comp_m[old]
    }
}

/// Fills b-variables through pinched crossings from the known ones.
/// Returns `None` on an inconsistency.
fn pinch_propagate(
    d: &Diagram,
    crossings: &[usize],
    mer: &dyn Fn(usize) -> C64,
    b: &mut [Option<C64>],
) -> Option<()> {
    loop {
        let mut changed = false;
        for &c in crossings {
            let arms = d.crossing(c).arms;
            let (m1, m2) = (mer(arms[IN1]), mer(arms[IN2]));
            // every arm in terms of x = b(in1)
            let factor = |slot: usize| match slot {
                IN1 | OUT2 => C64::new(1.0, 0.0),
                IN2 => m1,
                _ => m2,
            };
            let x = (0..4).find_map(|j| b[arms[j]].map(|v| v / factor(j)));
            let Some(x) = x else { continue };
            for j in [IN1, IN2, OUT1, OUT2] {
                let want = x * factor(j);
                match b[arms[j]] {
                    Some(v) if rel(v, want) > 1e-9 => return None,
                    Some(_) => {}
                    None => {
                        b[arms[j]] = Some(want);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return Some(());
        }
    }
}

/// Glues `T` (side 1) to `T'` (side 2) along `𝔩' = p𝔪 + q𝔩`,
/// `𝔪' = r𝔪 + s𝔩`. The exposed arcs are the first segments of the two
/// components; their b-variables must agree.
pub fn build_gluing_chain(one: GlueSide, two: GlueSide, g: &GluingMatrix) -> Result<GluedPresentation> {
    GluingMatrix::new(g.p, g.q, g.r, g.s)?;
    if g.det() != -1 {
        return Err(Error::InvalidMatrix(format!("rq - ps = {}, expected -1", g.det())));
    }
    for side in [&one, &two] {
        side.diagram.check_component(side.component)?;
        if side.diagram.labels()[side.component] != SurgeryLabel::Boundary {
            return Err(Error::BadLabel(format!(
                "component {} must be a boundary component to glue",
                side.component
            )));
        }
    }
    let (d1, d2) = (one.diagram, two.diagram);
    let (t1, t2) = (one.component, two.component);
    let m = one.shaping.meridian(d1, t1)?;
    let l = longitude_eigenvalue(d1, one.shaping, t1)?;
    let mp = two.shaping.meridian(d2, t2)?;
    let lp = longitude_eigenvalue(d2, two.shaping, t2)?;
    for (what, got, want) in [
        ("meridian", mp, powi(m, g.r) * powi(l, g.s)),
        ("longitude", lp, powi(m, g.p) * powi(l, g.q)),
    ] {
        if rel(got, want) > EIG_TOL {
            return Err(Error::IncompatibleTarget {
                component: t2,
                detail: format!("{what} eigenvalue {got} does not match the glued value {want}"),
            });
        }
    }
    let e1 = d1.components()[t1][0];
    let e2 = d2.components()[t2][0];
    let x = one.shaping.get(e1).b;
    if rel(two.shaping.get(e2).b, x) > EIG_TOL {
        return Err(Error::BVariableMismatch(format!(
            "b = {} on the first arc of side 1, {} on side 2",
            x,
            two.shaping.get(e2).b
        )));
    }

    let flipped = GluingMatrix { p: -g.p, q: g.q, r: -g.r, s: g.s };
    let cf = matrix_to_cf(&flipped)?;
    let k = cf.len();
    let (pc, qc) = cf_convergents(&cf);
    let sigma: i8 = if (pc[k + 1], qc[k + 1]) == (-g.p, g.q) { 1 } else { -1 };
    let (e_first, e_second) = (-1i8, -sigma);

    let dec1 = induced_decoration(d1, one.shaping, one.flattening)?;
    let (mu, lambda) = (dec1.mu[t1], dec1.lambda[t1]);
    let ef = e_first as f64;
    let mut mus = vec![-ef * lambda, -ef * mu];
    for i in 1..=k {
        let next = cf[i - 1] as f64 * mus[i] - mus[i - 1];
        mus.push(next);
    }
    let n_chain = mus.len();
    let ms: Vec<C64> = mus.iter().map(|&u| exp2pii(u)).collect();

    // D1, D2, then one kink per chain component
    let n1 = d1.num_segments();
    let mut d = d1.disjoint_union(d2);
    let mut kink_seg = Vec::new();
    for _ in 0..n_chain {
        kink_seg.push(d.num_segments());
        d = d.disjoint_union(&Diagram::kink(1));
    }
    let mut comp_m = Vec::new();
    for c in 0..d1.num_components() {
        comp_m.push(one.shaping.meridian(d1, c)?);
    }
    for c in 0..d2.num_components() {
        comp_m.push(two.shaping.meridian(d2, c)?);
    }
    comp_m.extend_from_slice(&ms);
    let nc0 = d.num_crossings();
    let comps: Vec<usize> = (0..d.num_components()).collect();
    let mut tr = Tracker {
        segs: (0..d.num_segments()).collect(),
        cross: (nc0 - n_chain..nc0).collect(),
        comp_m,
        comps,
        d,
    };
    let first_comp = t1;
    let second_comp = d1.num_components() + t2;
    let chain_comp0 = d1.num_components() + d2.num_components();

    let mut clasps = vec![(e1, kink_seg[0], e_first)];
    for i in 0..n_chain - 1 {
        clasps.push((kink_seg[i], kink_seg[i + 1], 1));
    }
    clasps.push((kink_seg[n_chain - 1], n1 + e2, e_second));
    // b on the right outer arc over b on the left one
    let mut ratio = vec![ms[0].inv()];
    for i in 0..n_chain - 1 {
        ratio.push(ms[i] / ms[i + 1]);
    }
    ratio.push(ms[n_chain - 1]);

    for (j, &(ls, rs, lk)) in clasps.iter().enumerate() {
        let (ls, rs) = (tr.segs[ls], tr.segs[rs]);
        let mut chosen = None;
        'search: for s_side in [Side::Right, Side::Left] {
            for t_side in [Side::Right, Side::Left] {
                for over in [true, false] {
                    let (cand, remap) = tr.d.clasp(ls, s_side, rs, t_side, over)?;
                    let c1 = cand.num_crossings() - 2;
                    if cand.crossing(c1).sign != lk {
                        continue;
                    }
                    let mer = |s: usize| tr.meridian_of_segment(&cand, &remap, s);
                    let mut b = vec![None; cand.num_segments()];
                    let (lseg, rseg) = (remap.segments[ls].unwrap(), remap.segments[rs].unwrap());
                    b[lseg] = Some(C64::new(1.0, 0.0));
                    let ok = pinch_propagate(&cand, &[c1, c1 + 1], &mer, &mut b).is_some()
                        && b[rseg].map(|v| rel(v, ratio[j]) < 1e-9).unwrap_or(false);
                    if ok {
                        chosen = Some((cand, remap));
                        break 'search;
                    }
                }
            }
        }
        let (cand, remap) = chosen.ok_or_else(|| {
            Error::BVariableMismatch(format!("no clasp placement carries the b-variables at clasp {j}"))
        })?;
        tr.step(cand, &remap, 2);
    }

    // drop the kinks; they sit at the front of the tracked crossings
    for _ in 0..n_chain {
        let x = tr.cross.remove(0);
        let (nd, remap) = tr.d.remove_r1(x)?;
        tr.step(nd, &remap, 0);
    }
    let new_crossings = tr.cross[..].to_vec();
    let mut d = tr.d.clone();

    let first = tr.comps[first_comp];
    let second = tr.comps[second_comp];
    let chain: Vec<usize> = (0..n_chain).map(|i| tr.comps[chain_comp0 + i]).collect();
    d = d.with_label(first, SurgeryLabel::Rational { p: 0, q: 1 })?;
    d = d.with_label(second, SurgeryLabel::Rational { p: 0, q: 1 })?;
    for (i, &c) in chain.iter().enumerate() {
        let a = if i == 0 || i == n_chain - 1 { 0 } else { -cf[i - 1] };
        d = d.with_label(c, SurgeryLabel::Rational { p: a, q: 1 })?;
    }

    // known shapes: every input segment
    let mut known: Vec<Option<Shape>> = vec![None; d.num_segments()];
    let segment_map: Vec<usize> = tr.segs[..n1 + d2.num_segments()].to_vec();
    for (s, &id) in segment_map.iter().enumerate() {
        known[id] = Some(if s < n1 { *one.shaping.get(s) } else { *two.shaping.get(s - n1) });
    }
    let comp_m = tr.comp_m.clone();
    let mer = |s: usize| comp_m[d.segment(s).component];
    let mut b: Vec<Option<C64>> = known.iter().map(|k| k.map(|x| x.b)).collect();
    pinch_propagate(&d, &new_crossings, &mer, &mut b)
        .ok_or_else(|| Error::BVariableMismatch("pinched b-variables do not close up".into()))?;

    let shaping = solve_chain_a(&d, &known, &b, &comp_m)?;
    for &c in &new_crossings {
        if !is_pinched(&d, c, &shaping, 1e-8)? {
            return Err(Error::InconsistentPinch {
                crossing: c,
                residuals: crate::shapes::pinch_relations(&d, c, &shaping),
            });
        }
    }

    // flattening: inputs' logs where they exist, the μ-recursion on the chain
    let mut f = default_flattening(&d, &shaping)?;
    for (s, &id) in segment_map.iter().enumerate() {
        f.beta[id] = if s < n1 { one.flattening.beta[s] } else { two.flattening.beta[s - n1] };
    }
    for c in 0..d1.num_components() {
        f.mu[tr.comps[c]] = one.flattening.mu[c];
    }
    for c in 0..d2.num_components() {
        f.mu[tr.comps[d1.num_components() + c]] = two.flattening.mu[c];
    }
    for (i, &c) in chain.iter().enumerate() {
        f.mu[c] = mus[i];
    }
    Ok(GluedPresentation {
        diagram: d,
        shaping,
        flattening: f,
        cf,
        first,
        second,
        chain,
        new_crossings,
        segment_map,
    })
}

/// The a-variables of the new segments, all other data pinned.
fn solve_chain_a(
    d: &Diagram,
    known: &[Option<Shape>],
    b: &[Option<C64>],
    comp_m: &[C64],
) -> Result<Shaping> {
    let mut full = known.to_vec();
    propagate(d, &mut full)?;
    if full.iter().all(|k| k.is_some()) {
        return Ok(Shaping::new(full.into_iter().map(|k| k.unwrap()).collect()));
    }
    let constraints = comp_m.iter().map(|&m| Constraint::FixedMeridian(m)).collect();
    let mut req = SolveRequest::new(d, constraints).starts(64);
    for s in 0..d.num_segments() {
        if let Some(x) = known[s] {
            req.pins.push(Pin { segment: s, var: PinVar::A, value: x.a });
        }
        if let Some(v) = b[s] {
            req.pins.push(Pin { segment: s, var: PinVar::B, value: v });
        }
    }
    let res = solve_shaping(&req)?;
    let best = res
        .into_iter()
        .min_by(|u, v| u.residual.partial_cmp(&v.residual).unwrap())
        .expect("solve_shaping returns at least one result");
    if !validate_shaping(d, &best.shaping, 1e-9).passed {
        return Err(Error::NoSolutionFound { starts: 64, best: best.residual });
    }
    Ok(best.shaping)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilog::{mod_distance, ModValue};
    use crate::shapes::kink_shaping;
    use crate::surgery::{bezout, lens_oracle};
    use crate::volume::manifold_volume;
    use std::f64::consts::PI;

    fn solid_torus(a: C64, b: C64, m: C64) -> (Diagram, Shaping, Flattening) {
        let d = Diagram::kink(1);
        let chi = kink_shaping(a, b, m).unwrap();
        let f = default_flattening(&d, &chi).unwrap();
        (d, chi, f)
    }

    fn side<'a>(x: &'a (Diagram, Shaping, Flattening), component: usize) -> GlueSide<'a> {
        GlueSide { diagram: &x.0, shaping: &x.1, flattening: &x.2, component }
    }

    #[test]
    fn two_solid_tori_give_lens_spaces() {
        let mut longest = 0;
        // (r, s) is only fixed up to adding multiples of (p, q)
        for (p, q, t) in [(3, 1, 0), (5, 2, 0), (7, 3, 0), (4, 3, 0), (4, 3, 2), (5, 2, -2)] {
            let (r0, s0) = bezout(p, q).unwrap();
            let (r, s) = (r0 + t * p, s0 + t * q);
            let g = GluingMatrix::new(p, q, r, s).unwrap();
            for n in 0..=p / 2 {
                let w = C64::from_polar(1.0, 2.0 * PI * n as f64 / p as f64);
                let x = C64::new(0.8, 0.3);
                let one = solid_torus(C64::new(0.6, -0.9), x, w);
                let two = solid_torus(C64::new(1.3, 0.4), x, w.powi(r as i32));
                let out = build_gluing_chain(side(&one, 0), side(&two, 0), &g).unwrap();
                longest = longest.max(out.cf.len());
                let v = manifold_volume(&out.diagram, &out.shaping, &out.flattening, &[], 1e-9).unwrap();
                let o = lens_oracle(p, q, n).unwrap();
                assert!(mod_distance(&v.total, &o).unwrap() < 1e-9, "{p}/{q} n={n}: {:?} vs {:?}", v.total, o);
                for &c in &out.new_crossings {
                    assert!(is_pinched(&out.diagram, c, &out.shaping, 1e-8).unwrap());
                }
            }
        }
        assert!(longest >= 3);
    }

    #[test]
    fn figure_eight_filling_is_additive() {
        let (p, q) = (5, 1);
        let (r, s) = bezout(p, q).unwrap();
        let g = GluingMatrix::new(p, q, r, s).unwrap();
        let d1 = Diagram::figure_eight();
        let req = SolveRequest::new(&d1, vec![Constraint::Filling { p, q }]).seed(3).starts(32);
        // m = 1 satisfies m^5 l = 1 trivially; skip the parabolic solutions
        let chi1 = solve_shaping(&req)
            .unwrap()
            .into_iter()
            .map(|r| r.shaping)
            .find(|c| (c.meridian(&d1, 0).unwrap() - 1.0).norm() > 1e-3 && (c.meridian(&d1, 0).unwrap() + 1.0).norm() > 1e-3)
            .unwrap();
        let f1 = default_flattening(&d1, &chi1).unwrap();
        let dec = induced_decoration(&d1, &chi1, &f1).unwrap();
        let (mu, lambda) = (dec.mu[0], dec.lambda[0]);
        let m = chi1.meridian(&d1, 0).unwrap();
        let l = longitude_eigenvalue(&d1, &chi1, 0).unwrap();
        let x = chi1.get(d1.components()[0][0]).b;
        let two = solid_torus(C64::new(1.3, 0.4), x, powi(m, r) * powi(l, s));
        let one = (d1.clone(), chi1.clone(), f1.clone());
        let out = build_gluing_chain(side(&one, 0), side(&two, 0), &g).unwrap();
        let glued = manifold_volume(&out.diagram, &out.shaping, &out.flattening, &[], 1e-9).unwrap();

        let v1 = manifold_volume(&d1, &chi1, &f1, &[(0, mu, lambda)], 1e-9).unwrap();
        let t2 = (0, r as f64 * mu + s as f64 * lambda, p as f64 * mu + q as f64 * lambda);
        let v2 = manifold_volume(&two.0, &two.1, &two.2, &[t2], 1e-9).unwrap();
        let sum = v1.total.add(&v2.total).unwrap();
        assert!(mod_distance(&glued.total, &sum).unwrap() < 1e-9, "{:?} vs {:?}", glued.total, sum);

        let filled = d1.with_label(0, SurgeryLabel::Rational { p, q }).unwrap();
        let direct = manifold_volume(&filled, &chi1, &f1, &[], 1e-9).unwrap();
        assert!(mod_distance(&glued.total, &direct.total).unwrap() < 1e-9);
        // volume of the Meyerhoff manifold, the 5/1 filling of the figure-eight
        assert!((glued.total.value.re - 0.981368828892).abs() < 1e-9, "{:?}", glued.total);
    }

    #[test]
    fn mismatched_b_is_refused() {
        let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let one = solid_torus(C64::new(0.6, -0.9), C64::new(1.0, 0.0), w);
        let two = solid_torus(C64::new(1.3, 0.4), C64::new(2.0, 0.0), w.powi(2));
        let g = GluingMatrix::new(3, 1, 2, 1).unwrap();
        let err = build_gluing_chain(side(&one, 0), side(&two, 0), &g).unwrap_err();
        assert!(matches!(err, Error::BVariableMismatch(_)));
    }

    #[test]
    fn trivial_shaping_glues_to_zero() {
        let t = C64::new(1.0, 0.0);
        let one = solid_torus(t, t, t);
        let two = solid_torus(t, t, t);
        let g = GluingMatrix::new(5, 2, 2, 1).unwrap();
        let out = build_gluing_chain(side(&one, 0), side(&two, 0), &g).unwrap();
        let v = manifold_volume(&out.diagram, &out.shaping, &out.flattening, &[], 1e-9).unwrap();
        assert!(mod_distance(&v.total, &ModValue::volume(C64::new(0.0, 0.0))).unwrap() < 1e-9);
    }
}
