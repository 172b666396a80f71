//! Dilogarithm kernel: principal Li2, the Rogers dilogarithm, the lifted
//! dilogarithm on flattened arguments, and arithmetic on classes modulo 2π²
//! (real direction) or 2π²i (imaginary direction).

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub type C64 = Complex64;

/// π².
pub const PI_SQ: f64 = PI * PI;
/// The period 2π² of the lifted dilogarithm and of volume classes.
pub const TWO_PI_SQ: f64 = 2.0 * PI * PI;

/// B_{2k} / (2k+1)! for k = 1..15; coefficients of Li2 as a series in
/// u = -log(1-z).
const BERNOULLI_COEFFS: [f64; 15] = [
    0.027777777777777776,
    -0.0002777777777777778,
    4.72411186696901e-06,
    -9.185773074661964e-08,
    1.8978869988971e-09,
    -4.0647616451442256e-11,
    8.921691020456452e-13,
    -1.9939295860721074e-14,
    4.518980029619918e-16,
    -1.0356517612181247e-17,
    2.395218621026187e-19,
    -5.581785874325009e-21,
    1.3091507554183213e-22,
    -3.0874198024267403e-24,
    7.315975652702203e-26,
];

/// Principal logarithm with arguments in (-π, π]. Unlike `Complex64::ln`,
/// a negative real number with a negative-zero imaginary part still gets
/// argument +π.
pub fn plog(z: C64) -> C64 {
    let mut l = z.ln();
    if z.im == 0.0 && z.re < 0.0 {
        l.im = PI;
    }
    l
}

fn li2_series(u: C64) -> C64 {
    // u - u^2/4 + sum_k c_k u^(2k+1)
    let u2 = u * u;
    let mut acc = C64::new(0.0, 0.0);
    for c in BERNOULLI_COEFFS.iter().rev() {
        acc = acc * u2 + *c;
    }
    u - 0.25 * u2 + acc * u2 * u
}

/// Principal branch of the dilogarithm. The cut is [1, ∞); on the cut the
/// value agrees with the limit from below, matching the principal log.
pub fn li2(z: C64) -> C64 {
    let nz = z.norm_sqr();
    if nz == 0.0 {
        return C64::new(0.0, 0.0);
    }
    if z == C64::new(1.0, 0.0) {
        return C64::new(PI_SQ / 6.0, 0.0);
    }
    let one = C64::new(1.0, 0.0);
    if z.re <= 0.5 {
        if nz > 1.0 {
            // inversion: Li2(z) = -Li2(1/z) - π²/6 - ½ log²(-z)
            let l = plog(-z);
            -li2_series(-plog(one - one / z)) - 0.5 * l * l - PI_SQ / 6.0
        } else {
            li2_series(-plog(one - z))
        }
    } else if nz <= 2.0 * z.re {
        // reflection: Li2(z) = -Li2(1-z) + π²/6 - log z log(1-z)
        let l = plog(z);
        -li2_series(-l) - l * plog(one - z) + PI_SQ / 6.0
    } else {
        let l = plog(-z);
        -li2_series(-plog(one - one / z)) - 0.5 * l * l - PI_SQ / 6.0
    }
}

fn check_nondegenerate(z: C64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() || z.norm() == 0.0 || z == C64::new(1.0, 0.0) {
        return Err(Error::DegenerateShape(format!("argument {z} is 0, 1 or infinite")));
    }
    Ok(())
}

/// Rogers dilogarithm R(z) = Li2(z) + ½ log z log(1-z).
pub fn rogers(z: C64) -> Result<C64> {
    check_nondegenerate(z)?;
    Ok(li2(z) + 0.5 * plog(z) * plog(C64::new(1.0, 0.0) - z))
}

/// Flattening logs (ζ⁰, ζ¹) of a tetrahedron; ζ² = -ζ⁰ - ζ¹ is implicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlattenedArg {
    pub zeta0: C64,
    pub zeta1: C64,
}

impl FlattenedArg {
    pub fn new(zeta0: C64, zeta1: C64) -> Self {
        FlattenedArg { zeta0, zeta1 }
    }

    /// The argument (z; p⁰, p¹) with p⁰ = p¹ = chosen branch integers.
    pub fn from_pq(z: C64, p0: i64, p1: i64) -> Self {
        let tpi = C64::new(0.0, 2.0 * PI);
        FlattenedArg {
            zeta0: plog(z) + tpi * p0 as f64,
            zeta1: -plog(C64::new(1.0, 0.0) - z) + tpi * p1 as f64,
        }
    }

    pub fn shape(&self) -> C64 {
        self.zeta0.exp()
    }
}

/// Unreduced value of R(e^ζ⁰) - π²/6 + ½(ζ⁰ log(1-z) + ζ¹ log z).
pub fn lifted_l_raw(arg: &FlattenedArg) -> Result<C64> {
    let z = arg.zeta0.exp();
    check_nondegenerate(z)?;
    let one = C64::new(1.0, 0.0);
    Ok(rogers(z)? - PI_SQ / 6.0 + 0.5 * (arg.zeta0 * plog(one - z) + arg.zeta1 * plog(z)))
}

/// Lifted dilogarithm as a class in ℂ/2π²ℤ.
pub fn lifted_l(arg: &FlattenedArg) -> Result<ModValue> {
    Ok(ModValue::new(lifted_l_raw(arg)?, ModKind::Real2PiSq))
}

/// Lifted dilogarithm in (z; p⁰, p¹) coordinates.
pub fn lifted_l_pq(z: C64, p0: i64, p1: i64) -> Result<ModValue> {
    check_nondegenerate(z)?;
    let one = C64::new(1.0, 0.0);
    let v = rogers(z)? - PI_SQ / 6.0
        + C64::new(0.0, PI) * (p0 as f64 * plog(one - z) + p1 as f64 * plog(z));
    Ok(ModValue::new(v, ModKind::Real2PiSq))
}

/// Direction of the lattice a class is reduced by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModKind {
    /// ℂ / 2π²ℤ, the codomain of the lifted dilogarithm.
    Real2PiSq,
    /// ℂ / 2π²iℤ, the codomain of complex volumes.
    Imag2PiSq,
}

/// A complex number taken modulo 2π² in one coordinate direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModValue {
    pub value: C64,
    pub kind: ModKind,
}

fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI_SQ);
    // rem_euclid can return exactly the modulus for tiny negative inputs
    if r >= TWO_PI_SQ {
        0.0
    } else {
        r
    }
}

fn wrap_centered(x: f64) -> f64 {
    let r = wrap(x);
    if r > PI_SQ {
        r - TWO_PI_SQ
    } else {
        r
    }
}

impl ModValue {
    pub fn new(value: C64, kind: ModKind) -> Self {
        ModValue { value, kind }
    }

    pub fn volume(value: C64) -> Self {
        ModValue::new(value, ModKind::Imag2PiSq)
    }

    pub fn zero(kind: ModKind) -> Self {
        ModValue::new(C64::new(0.0, 0.0), kind)
    }

    /// Canonical representative: wrapped coordinate in [0, 2π²).
    pub fn reduced(&self) -> ModValue {
        let v = match self.kind {
            ModKind::Real2PiSq => C64::new(wrap(self.value.re), self.value.im),
            ModKind::Imag2PiSq => C64::new(self.value.re, wrap(self.value.im)),
        };
        ModValue::new(v, self.kind)
    }

    /// Representative with the wrapped coordinate in (-π², π].
    pub fn centered(&self) -> ModValue {
        let v = match self.kind {
            ModKind::Real2PiSq => C64::new(wrap_centered(self.value.re), self.value.im),
            ModKind::Imag2PiSq => C64::new(self.value.re, wrap_centered(self.value.im)),
        };
        ModValue::new(v, self.kind)
    }

    pub fn add(&self, other: &ModValue) -> Result<ModValue> {
        if self.kind != other.kind {
            return Err(Error::ModulusMismatch);
        }
        Ok(ModValue::new(self.value + other.value, self.kind))
    }

    pub fn sub(&self, other: &ModValue) -> Result<ModValue> {
        if self.kind != other.kind {
            return Err(Error::ModulusMismatch);
        }
        Ok(ModValue::new(self.value - other.value, self.kind))
    }

    /// Complex conjugate class. For Real2PiSq this negates Im; for
    /// Imag2PiSq the lattice is preserved as well.
    pub fn conj(&self) -> ModValue {
        ModValue::new(self.value.conj(), self.kind)
    }
}

pub fn mod_reduce(v: &ModValue) -> ModValue {
    v.reduced()
}

/// Distance between two classes, minimized over the lattice.
pub fn mod_distance(u: &ModValue, v: &ModValue) -> Result<f64> {
    let d = u.sub(v)?.centered();
    Ok(d.value.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn li2_special_values() {
        assert_eq!(li2(c(0.0, 0.0)), c(0.0, 0.0));
        assert!((li2(c(1.0, 0.0)) - PI_SQ / 6.0).norm() < 1e-15);
        let want = PI_SQ / 12.0 - 2f64.ln().powi(2) / 2.0;
        assert!((li2(c(0.5, 0.0)) - want).norm() < 1e-15);
        assert!((li2(c(-1.0, 0.0)) + PI_SQ / 12.0).norm() < 1e-15);
    }

    #[test]
    fn li2_on_cut_matches_limit_from_below() {
        for x in [1.5, 2.5, 7.0, 120.0] {
            let on = li2(c(x, 0.0));
            let below = li2(c(x, -1e-12));
            let above = li2(c(x, 1e-12));
            assert!((on - below).norm() < 1e-9, "x={x}");
            assert!((above - below).im > 1.0);
            assert!((on.im + PI * f64::ln(x)).abs() < 1e-12);
        }
    }

    // Simpson quadrature of Li2(z) = ∫₀¹ -log(1 - tz)/t dt
    fn li2_quadrature(z: C64) -> C64 {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let f = |t: f64| if t == 0.0 { z } else { -(C64::new(1.0, 0.0) - z * t).ln() / t };
        let mut acc = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn li2_matches_quadrature_in_every_branch() {
        // series, reflection and both inversion regions
        for z in [c(0.3, 0.2), c(-0.7, 0.6), c(0.9, 0.5), c(0.6, -0.2), c(1.5, -0.7), c(3.0, 2.0), c(-4.0, 0.1), c(0.2, -3.0)] {
            let (got, want) = (li2(z), li2_quadrature(z));
            assert!((got - want).norm() < 1e-10 * want.norm().max(1.0), "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn plog_branch() {
        assert!((plog(c(-1.0, -0.0)).im - PI).abs() < 1e-15);
        assert!((plog(c(-1.0, 0.0)).im - PI).abs() < 1e-15);
    }

    #[test]
    fn rogers_half() {
        assert!((rogers(c(0.5, 0.0)).unwrap() - PI_SQ / 12.0).norm() < 1e-14);
        assert!(rogers(c(1.0, 0.0)).is_err());
        assert!(rogers(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn lifted_half() {
        let v = lifted_l_pq(c(0.5, 0.0), 0, 0).unwrap();
        let want = ModValue::new(c(-PI_SQ / 12.0, 0.0), ModKind::Real2PiSq);
        assert!(mod_distance(&v, &want).unwrap() < 1e-14);
        let arg = FlattenedArg::new(c(0.5f64.ln(), 0.0), c(-(0.5f64.ln()), 0.0));
        assert!(mod_distance(&lifted_l(&arg).unwrap(), &want).unwrap() < 1e-14);
    }

    #[test]
    fn mod_examples() {
        let v = ModValue::volume(c(1.0, TWO_PI_SQ + 0.3)).reduced();
        assert!((v.value - c(1.0, 0.3)).norm() < 1e-12);
        let x = ModValue::volume(c(0.2, 0.1));
        let y = ModValue::volume(c(0.2, 0.1 + 7.0 * TWO_PI_SQ));
        assert!(mod_distance(&x, &y).unwrap() < 1e-12);
        let h = ModValue::volume(c(0.0, PI_SQ));
        let z = ModValue::zero(ModKind::Imag2PiSq);
        assert!((mod_distance(&z, &h).unwrap() - PI_SQ).abs() < 1e-12);
        let r = ModValue::zero(ModKind::Real2PiSq);
        assert_eq!(mod_distance(&r, &z), Err(Error::ModulusMismatch));
    }

    #[test]
    fn reduced_is_in_range() {
        for k in -5..5 {
            let v = ModValue::volume(c(0.0, k as f64 * 3.3 - 1e-18)).reduced();
            assert!(v.value.im >= 0.0 && v.value.im < TWO_PI_SQ);
        }
    }
}
