//! Shapes, the braiding map, and shaping validation.

use crate::diagram::{Diagram, IN1, IN2, OUT1, OUT2};
use crate::dilog::C64;
use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Minimal arithmetic needed to evaluate the braiding; implemented for plain
/// complex numbers and for the solver's dual numbers.
pub trait Field:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(z: C64) -> Self;
    fn value(&self) -> C64;
    fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }
}

impl Field for C64 {
    fn constant(z: C64) -> Self {
        z
    }
    fn value(&self) -> C64 {
        *self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub a: C64,
    pub b: C64,
    pub m: C64,
}

impl Shape {
    pub fn new(a: C64, b: C64, m: C64) -> Self {
        Shape { a, b, m }
    }

    pub fn trivial() -> Self {
        let one = C64::new(1.0, 0.0);
        Shape { a: one, b: one, m: one }
    }

    /// `(a⁻¹, bm, m⁻¹)`, the shape seen after reversing orientation.
    pub fn inverse(&self) -> Shape {
        Shape { a: self.a.inv(), b: self.b * self.m, m: self.m.inv() }
    }

    pub fn conj(&self) -> Shape {
        Shape { a: self.a.conj(), b: self.b.conj(), m: self.m.conj() }
    }

    pub fn is_admissible(&self) -> bool {
        [self.a, self.b, self.m].iter().all(|z| z.is_finite() && z.norm() > 1e-300)
    }

    pub fn distance(&self, other: &Shape) -> f64 {
        rel(self.a, other.a).max(rel(self.b, other.b)).max(rel(self.m, other.m))
    }
}

pub(crate) fn rel(x: C64, y: C64) -> f64 {
    (x - y).norm() / y.norm().max(1.0)
}

/// Positive braiding on raw components. Returns `(a1', b1', a2', b2')`.
pub fn braid_pos_raw<F: Field>(a1: F, b1: F, m1: F, a2: F, b2: F, m2: F) -> (F, F, F, F, F) {
    let one = F::one();
    let big_a = one - (m1 * b1 / b2) * (one - a1 / m1) * (one - one / (m2 * a2));
    let a1p = a1 / big_a;
    let a2p = a2 * big_a;
    let t = one - b2 / (m1 * b1);
    let b1p = (m2 * b2 / m1) / (one - m2 * a2 * t);
    let b2p = b1 * (one - (m1 / a1) * t);
    (a1p, b1p, a2p, b2p, big_a)
}

/// Negative braiding on raw components. Returns `(a1', b1', a2', b2')`.
pub fn braid_neg_raw<F: Field>(a1: F, b1: F, m1: F, a2: F, b2: F, m2: F) -> (F, F, F, F, F) {
    let one = F::one();
    let big_a = one - (b2 / (m1 * b1)) * (one - m1 * a1) * (one - m2 / a2);
    let a1p = a1 / big_a;
    let a2p = a2 * big_a;
    let t = one - m1 * b1 / b2;
    let b1p = (m2 * b2 / m1) * (one - (a2 / m2) * t);
    let b2p = b1 / (one - (one / (m1 * a1)) * t);
    (a1p, b1p, a2p, b2p, big_a)
}

fn finish(
    x1: &Shape,
    x2: &Shape,
    out: (C64, C64, C64, C64, C64),
) -> Result<(Shape, Shape)> {
    let (a1p, b1p, a2p, b2p, big_a) = out;
    let c1 = Shape::new(a1p, b1p, x1.m);
    let c2 = Shape::new(a2p, b2p, x2.m);
    if big_a.norm() < 1e-14 || !big_a.is_finite() || !c1.is_admissible() || !c2.is_admissible() {
        return Err(Error::DegenerateBraiding { crossing: None });
    }
    Ok((c2, c1))
}

/// `B(χ1, χ2) = (χ2', χ1')`. Strand 1 carries `χ1 -> χ1'`.
pub fn braid_pos(x1: &Shape, x2: &Shape) -> Result<(Shape, Shape)> {
    if !x1.is_admissible() || !x2.is_admissible() {
        return Err(Error::DegenerateBraiding { crossing: None });
    }
    finish(x1, x2, braid_pos_raw(x1.a, x1.b, x1.m, x2.a, x2.b, x2.m))
}

/// `B⁻¹(χ1, χ2) = (χ2', χ1')`.
pub fn braid_neg(x1: &Shape, x2: &Shape) -> Result<(Shape, Shape)> {
    if !x1.is_admissible() || !x2.is_admissible() {
        return Err(Error::DegenerateBraiding { crossing: None });
    }
    finish(x1, x2, braid_neg_raw(x1.a, x1.b, x1.m, x2.a, x2.b, x2.m))
}

pub fn braid(sign: i8, x1: &Shape, x2: &Shape) -> Result<(Shape, Shape)> {
    if sign > 0 {
        braid_pos(x1, x2)
    } else {
        braid_neg(x1, x2)
    }
}

pub fn inverse_shape(x: &Shape) -> Shape {
    x.inverse()
}

/// Shapes indexed by segment id.
#[derive(Debug, Clone, PartialEq)]
pub struct Shaping {
    pub shapes: Vec<Shape>,
}

impl Shaping {
    pub fn new(shapes: Vec<Shape>) -> Self {
        Shaping { shapes }
    }

    pub fn trivial(d: &Diagram) -> Self {
        Shaping { shapes: vec![Shape::trivial(); d.num_segments()] }
    }

    pub fn get(&self, s: usize) -> &Shape {
        &self.shapes[s]
    }

    /// Meridian eigenvalue, read off the first segment of the component.
    pub fn meridian(&self, d: &Diagram, comp: usize) -> Result<C64> {
        d.check_component(comp)?;
        Ok(self.shapes[d.components()[comp][0]].m)
    }

    fn check_len(&self, d: &Diagram) -> Result<()> {
        if self.shapes.len() != d.num_segments() {
            return Err(Error::UnknownSegment(self.shapes.len()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Per crossing: max relative error of the four output components, or
    /// infinity if the braiding is undefined there.
    pub crossing_residuals: Vec<f64>,
    /// Per component: max deviation of `m` from the first segment's value.
    pub meridian_residuals: Vec<f64>,
    pub degenerate: Vec<usize>,
    pub max_residual: f64,
    pub passed: bool,
}

/// Residual of the braiding relation at crossing `c`.
pub fn crossing_residual(d: &Diagram, c: usize, chi: &Shaping) -> Result<f64> {
    let x = d.crossing(c);
    let [i1, i2, o1, o2] = x.arms.map(|s| *chi.get(s));
    let (c2, c1) = braid(x.sign, &i1, &i2).map_err(|_| Error::DegenerateBraiding { crossing: Some(c) })?;
    Ok([rel(c1.a, o1.a), rel(c1.b, o1.b), rel(c2.a, o2.a), rel(c2.b, o2.b)]
        .into_iter()
        .fold(0.0, f64::max))
}

pub fn validate_shaping(d: &Diagram, chi: &Shaping, tol: f64) -> ValidationReport {
    let mut crossing_residuals = Vec::new();
    let mut degenerate = Vec::new();
    if chi.check_len(d).is_err() {
        return ValidationReport {
            crossing_residuals,
            meridian_residuals: vec![],
            degenerate,
            max_residual: f64::INFINITY,
            passed: false,
        };
    }
    for c in 0..d.num_crossings() {
        match crossing_residual(d, c, chi) {
            Ok(r) => crossing_residuals.push(r),
            Err(_) => {
                degenerate.push(c);
                crossing_residuals.push(f64::INFINITY);
            }
        }
    }
    let meridian_residuals: Vec<f64> = d
        .components()
        .iter()
        .map(|cyc| {
            let m0 = chi.get(cyc[0]).m;
            cyc.iter().map(|&s| rel(chi.get(s).m, m0)).fold(0.0, f64::max)
        })
        .collect();
    let max_residual = crossing_residuals
        .iter()
        .chain(meridian_residuals.iter())
        .cloned()
        .fold(0.0, f64::max);
    ValidationReport {
        crossing_residuals,
        meridian_residuals,
        degenerate,
        max_residual,
        passed: max_residual < tol,
    }
}

/// Relative residuals of the four pinch relations
/// `b2' = b1`, `b2 = m1 b1`, `m2 b2 = m1 b1'`, `m2 b2' = b1'`.
pub fn pinch_relations(d: &Diagram, c: usize, chi: &Shaping) -> [f64; 4] {
    let x = d.crossing(c);
    let (s1, s2, s1p, s2p) =
        (chi.get(x.arms[IN1]), chi.get(x.arms[IN2]), chi.get(x.arms[OUT1]), chi.get(x.arms[OUT2]));
    let (m1, m2) = (s1.m, s2.m);
    [
        (s2p.b / s1.b - 1.0).norm(),
        (s2.b / (m1 * s1.b) - 1.0).norm(),
        (m2 * s2.b / (m1 * s1p.b) - 1.0).norm(),
        (m2 * s2p.b / s1p.b - 1.0).norm(),
    ]
}

/// Pinch detection on `|b2'/b1 - 1| < tol`; the other three relations must
/// then hold too.
pub fn is_pinched(d: &Diagram, c: usize, chi: &Shaping, tol: f64) -> Result<bool> {
    let r = pinch_relations(d, c, chi);
    let derived = (tol * 1e4).max(1e-6);
    let any = r.iter().any(|&x| x < tol);
    if any && r.iter().any(|&x| x > derived) {
        return Err(Error::InconsistentPinch { crossing: c, residuals: r });
    }
    Ok(r[0] < tol)
}

/// `m^{-w} ∏ b^η` over the component's segments.
pub fn longitude_eigenvalue(d: &Diagram, chi: &Shaping, comp: usize) -> Result<C64> {
    let w = d.writhe(comp)?;
    let m = chi.meridian(d, comp)?;
    let mut l = m.powi(-(w as i32));
    for &s in &d.components()[comp] {
        match d.segment_eta(s)? {
            1 => l *= chi.get(s).b,
            -1 => l /= chi.get(s).b,
            _ => {}
        }
    }
    Ok(l)
}

/// Inverts the shapes on one component; valid on `d.reverse_component(comp)`.
pub fn reverse_shaping(d: &Diagram, chi: &Shaping, comp: usize) -> Result<Shaping> {
    d.check_component(comp)?;
    let mut out = chi.clone();
    for &s in &d.components()[comp] {
        out.shapes[s] = chi.shapes[s].inverse();
    }
    Ok(out)
}

/// Shaping on `d.mirror()`: `(conj a, 1/conj b, 1/conj m)`.
pub fn mirror_shaping(chi: &Shaping) -> Shaping {
    Shaping {
        shapes: chi
            .shapes
            .iter()
            .map(|x| Shape::new(x.a.conj(), x.b.conj().inv(), x.m.conj().inv()))
            .collect(),
    }
}

/// Shape of a kink loop whose external strand carries `(a, b, m)`: the loop
/// sits at the in2/out1 arms ("right") or the in1/out2 arms ("left").
pub fn kink_loop_shape(external: &Shape, loop_at_strand2: bool) -> Shape {
    let Shape { a, b, m } = *external;
    if loop_at_strand2 {
        Shape::new(m + m.inv() - a.inv(), m * b, m)
    } else {
        Shape::new((m + m.inv() - a).inv(), b / m, m)
    }
}

/// Kink diagram shaping with segment 0 carrying `(a, b, m)`.
pub fn kink_shaping(a: C64, b: C64, m: C64) -> Result<Shaping> {
    let x = Shape::new(a, b, m);
    let chi = Shaping::new(vec![x, kink_loop_shape(&x, true)]);
    let report = validate_shaping(&Diagram::kink(1), &chi, 1e-9);
    if !report.passed {
        return Err(Error::DegenerateBraiding { crossing: Some(0) });
    }
    Ok(chi)
}

/// `χ = (ωⁿ, 1, ωⁿ)` on segment 0 and `χ' = (ωⁿ, ωⁿ, ωⁿ)` on segment 1
/// of the positive kink, `ω = e^{2πi/p}`.
pub fn lens_shaping(p: i64, n: i64) -> Result<Shaping> {
    if p < 1 || n < 0 || 2 * n > p {
        return Err(Error::InvalidMatrix(format!("lens parameters p={p}, n={n}")));
    }
    let w = C64::from_polar(1.0, 2.0 * PI * n as f64 / p as f64);
    kink_shaping(w, C64::new(1.0, 0.0), w)
}

/// Fills in unknown shapes by pushing through crossings where both inputs
/// (or both outputs) are known.
pub fn propagate(d: &Diagram, known: &mut [Option<Shape>]) -> Result<()> {
    loop {
        let mut changed = false;
        for c in 0..d.num_crossings() {
            let x = d.crossing(c);
            let [i1, i2, o1, o2] = x.arms;
            let err = |_| Error::DegenerateBraiding { crossing: Some(c) };
            if let (Some(s1), Some(s2)) = (known[i1], known[i2]) {
                if known[o1].is_none() || known[o2].is_none() {
                    let (c2, c1) = braid(x.sign, &s1, &s2).map_err(err)?;
                    known[o1].get_or_insert(c1);
                    known[o2].get_or_insert(c2);
                    changed = true;
                }
            }
            if let (Some(t1), Some(t2)) = (known[o1], known[o2]) {
                if known[i1].is_none() || known[i2].is_none() {
                    // B^{∓1}(χ2', χ1') = (χ1, χ2)
                    let (r1, r2) = braid(-x.sign, &t2, &t1).map_err(err)?;
                    known[i1].get_or_insert(r1);
                    known[i2].get_or_insert(r2);
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn trivial_is_fixed() {
        let t = Shape::trivial();
        assert_eq!(braid_pos(&t, &t).unwrap(), (t, t));
        assert_eq!(braid_neg(&t, &t).unwrap(), (t, t));
    }

    #[test]
    fn inverse_example() {
        let x = Shape::new(c(2.0, 0.0), c(3.0, 0.0), c(5.0, 0.0));
        let y = x.inverse();
        assert!(y.distance(&Shape::new(c(0.5, 0.0), c(15.0, 0.0), c(0.2, 0.0))) < 1e-15);
        assert!(y.inverse().distance(&x) < 1e-15);
    }

    #[test]
    fn round_trip() {
        let x1 = Shape::new(c(0.7, 0.4), c(1.3, -0.2), c(0.9, 0.8));
        let x2 = Shape::new(c(-0.5, 1.1), c(0.6, 0.3), c(1.4, -0.3));
        let (y2, y1) = braid_pos(&x1, &x2).unwrap();
        let (z1, z2) = braid_neg(&y2, &y1).unwrap();
        assert!(z1.distance(&x1) < 1e-12 && z2.distance(&x2) < 1e-12);
    }

    #[test]
    fn kink_fixed_point_both_signs() {
        let x = Shape::new(c(0.3, 0.9), c(1.7, 0.2), c(0.8, -0.6));
        for sign in [1, -1] {
            let y = kink_loop_shape(&x, true);
            let (o2, o1) = braid(sign, &x, &y).unwrap();
            assert!(o2.distance(&x) < 1e-12 && o1.distance(&y) < 1e-12, "sign {sign}");
            let y = kink_loop_shape(&x, false);
            let (o2, o1) = braid(sign, &y, &x).unwrap();
            assert!(o2.distance(&y) < 1e-12 && o1.distance(&x) < 1e-12, "sign {sign}");
        }
    }

    #[test]
    fn lens_shapings_validate_and_pinch() {
        let d = Diagram::kink(1);
        for p in 1..=12 {
            for n in 0..=p / 2 {
                let chi = lens_shaping(p, n).unwrap();
                assert!(validate_shaping(&d, &chi, 1e-12).passed);
                assert!(is_pinched(&d, 0, &chi, 1e-8).unwrap());
                assert!((longitude_eigenvalue(&d, &chi, 0).unwrap() - 1.0).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn literal_lens_shaping_fails() {
        // (ω⁻ⁿ, ωⁿ, ωⁿ) on the loop does not satisfy the kink relation
        let w = C64::from_polar(1.0, 2.0 * PI / 5.0);
        let chi = Shaping::new(vec![Shape::new(w, c(1.0, 0.0), w), Shape::new(w.inv(), w, w)]);
        assert!(!validate_shaping(&Diagram::kink(1), &chi, 1e-9).passed);
    }

    #[test]
    fn perturbation_is_detected() {
        let d = Diagram::kink(1);
        let mut chi = kink_shaping(c(0.4, 0.7), c(1.0, 0.0), c(2.0, 0.0)).unwrap();
        assert!(validate_shaping(&d, &chi, 1e-9).passed);
        chi.shapes[0].b += 1e-3;
        let r = validate_shaping(&d, &chi, 1e-9);
        assert!(!r.passed);
        assert!(r.max_residual > 1e-4 && r.max_residual < 1e-2, "{}", r.max_residual);
    }

    #[test]
    fn propagation_fills_figure_eight_from_all_but_none() {
        let d = Diagram::figure_eight();
        let mut known = vec![None; d.num_segments()];
        known[0] = Some(Shape::trivial());
        known[1] = Some(Shape::trivial());
        known[2] = Some(Shape::trivial());
        propagate(&d, &mut known).unwrap();
        assert!(known.iter().all(|k| k.is_some()));
    }
}
