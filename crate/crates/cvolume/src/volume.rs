//! Crossing-by-crossing complex volume and its assembly into manifold volumes.

use crate::diagram::{Diagram, SurgeryLabel, E, N, S, W};
use crate::dilog::{lifted_l_raw, FlattenedArg, ModValue, C64, TWO_PI_SQ};
use crate::error::{Error, Result};
use crate::flatten::{
    adjust_to_decoration, crossing_logs, crossing_zetas, induced_decoration, FlattenedTetrahedron,
    Flattening, LogDecoration, PINCH_GUARD, PINCH_TOL,
};
use crate::shapes::Shaping;
use crate::surgery::bezout;
use std::f64::consts::PI;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingVolume {
    pub crossing: usize,
    /// Unreduced value; reduce through [`ModValue`] for comparisons.
    pub value: C64,
    pub pinched: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeReport {
    pub total: ModValue,
    pub per_crossing: Vec<CrossingVolume>,
    /// Solid torus terms of Dehn-filled components, `(component, value)`.
    pub fillings: Vec<(usize, C64)>,
    pub decoration: LogDecoration,
    pub warnings: Vec<String>,
}

/// `|b2'/b1 - 1|` at a crossing.
pub fn pinch_defect(d: &Diagram, c: usize, chi: &Shaping) -> f64 {
    let x = d.crossing(c);
    (chi.get(x.arms[3]).b / chi.get(x.arms[0]).b - 1.0).norm()
}

/// Generic branch: `-iε[𝓛_N - 𝓛_W + 𝓛_S - 𝓛_E]`.
pub fn crossing_volume_generic(
    d: &Diagram,
    c: usize,
    chi: &Shaping,
    f: &Flattening,
    kappa_shift: i64,
) -> Result<C64> {
    let tets = crossing_zetas(d, c, chi, f, kappa_shift, 0.0)?;
    neumann_sum(&tets)
}

/// Pinched branch: the limit of the generic formula as `b2' -> b1`.
pub fn crossing_volume_pinched(d: &Diagram, c: usize, f: &Flattening) -> C64 {
    let l = crossing_logs(d, c, f);
    let e = l.eps;
    let (gn, gw, gs, ge) = (l.gamma[N], l.gamma[W], l.gamma[S], l.gamma[E]);
    let bracket = l.b1 * (gw - gn) - l.b1p * (gs - ge) + l.b2 * (gs - gw) - l.b2p * (ge - gn)
        - l.mu1 * (e * (l.b1 - l.b1p + l.mu2) + gs - gw)
        - l.mu2 * (e * (l.b2p - l.b2 + l.mu1) + ge - gs);
    I * TWO_PI_SQ * bracket
}

/// Volume of one crossing, switching to the pinched formula below
/// [`PINCH_TOL`].
pub fn crossing_volume(d: &Diagram, c: usize, chi: &Shaping, f: &Flattening) -> Result<CrossingVolume> {
    if pinch_defect(d, c, chi) < PINCH_TOL {
        Ok(CrossingVolume { crossing: c, value: crossing_volume_pinched(d, c, f), pinched: true })
    } else {
        let value = crossing_volume_generic(d, c, chi, f, 0)?;
        Ok(CrossingVolume { crossing: c, value, pinched: false })
    }
}

/// `-i Σ sign·𝓛(ζ0, ζ1)`.
pub fn neumann_sum(tets: &[FlattenedTetrahedron]) -> Result<C64> {
    let mut v = C64::new(0.0, 0.0);
    for t in tets {
        let l = lifted_l_raw(&FlattenedArg::new(t.zeta0, t.zeta1))?;
        v += -I * t.sign as f64 * l;
    }
    Ok(v)
}

/// Sum of crossing volumes in crossing order.
pub fn diagram_volume(d: &Diagram, chi: &Shaping, f: &Flattening) -> Result<VolumeReport> {
    let decoration = induced_decoration(d, chi, f)?;
    let mut per_crossing = Vec::with_capacity(d.num_crossings());
    let mut warnings = Vec::new();
    let mut total = C64::new(0.0, 0.0);
    for c in 0..d.num_crossings() {
        let defect = pinch_defect(d, c, chi);
        if (PINCH_TOL..PINCH_GUARD).contains(&defect) {
            warnings.push(format!(
                "ConditioningWarning: crossing {c} is {defect:.3e} from pinched"
            ));
        }
        let cv = crossing_volume(d, c, chi, f)?;
        total += cv.value;
        per_crossing.push(cv);
    }
    Ok(VolumeReport {
        total: ModValue::volume(total).reduced(),
        per_crossing,
        fillings: vec![],
        decoration,
        warnings,
    })
}

/// The tetrahedra of every crossing; fails on pinched crossings.
pub fn octahedral_export(
    d: &Diagram,
    chi: &Shaping,
    f: &Flattening,
) -> Result<Vec<(usize, [FlattenedTetrahedron; 4])>> {
    (0..d.num_crossings())
        .map(|c| crossing_zetas(d, c, chi, f, 0, PINCH_TOL).map(|t| (c, t)))
        .collect()
}

/// Volume change predicted when the log-decoration moves from `s` to `s2`:
/// `4π²i Σ (Δλ·μ - Δμ·λ)` with `μ, λ` taken from `s`.
pub fn decoration_shift(v: &ModValue, s: &LogDecoration, s2: &LogDecoration) -> Result<ModValue> {
    if s.len() != s2.len() {
        return Err(Error::IncompatibleTarget {
            component: s.len(),
            detail: "decorations have different lengths".into(),
        });
    }
    let mut shift = C64::new(0.0, 0.0);
    for j in 0..s.len() {
        let dm = s2.mu[j] - s.mu[j];
        let dl = s2.lambda[j] - s.lambda[j];
        for (x, what) in [(dm, "meridian"), (dl, "longitude")] {
            if (x - x.re.round()).norm() > 1e-8 {
                return Err(Error::IncompatibleTarget {
                    component: j,
                    detail: format!("{what} change {x} is not an integer"),
                });
            }
        }
        shift += dl * s.mu[j] - dm * s.lambda[j];
    }
    Ok(ModValue::volume(v.value + 2.0 * TWO_PI_SQ * I * shift).reduced())
}

/// `4π²i 𝔱(𝔪) 𝔱(𝔩)` for a solid torus with meridian log `tm`.
pub fn solid_torus_volume(tm: C64, tl: C64) -> ModValue {
    ModValue::volume(solid_torus_raw(tm, tl)).reduced()
}

fn solid_torus_raw(tm: C64, tl: C64) -> C64 {
    2.0 * TWO_PI_SQ * I * tm * tl
}

/// Complex volume of the manifold presented by `d` with its labels.
/// `targets` gives `(𝔰(𝔪), 𝔰(𝔩))` for boundary-labelled components, in
/// component order.
pub fn manifold_volume(
    d: &Diagram,
    chi: &Shaping,
    f: &Flattening,
    targets: &[(usize, C64, C64)],
    tol: f64,
) -> Result<VolumeReport> {
    let mut target = induced_decoration(d, chi, f)?;
    for (comp, label) in d.labels().iter().enumerate() {
        match label {
            SurgeryLabel::Boundary => {
                let &(_, mu, lambda) = targets
                    .iter()
                    .find(|t| t.0 == comp)
                    .ok_or(Error::MissingTarget(comp))?;
                target.mu[comp] = mu;
                target.lambda[comp] = lambda;
            }
            SurgeryLabel::Cusp => {
                let m = chi.meridian(d, comp)?;
                if (m - 1.0).norm() > tol.max(1e-9) && (m + 1.0).norm() > tol.max(1e-9) {
                    return Err(Error::NotParabolic { component: comp, m_re: m.re, m_im: m.im });
                }
            }
            SurgeryLabel::Rational { .. } => {}
        }
    }
    let g = adjust_to_decoration(d, chi, f, &target)?;
    let mut report = diagram_volume(d, chi, &g)?;
    let mut total = report.total.value;
    for (comp, label) in d.labels().iter().enumerate() {
        if let SurgeryLabel::Rational { p, q } = *label {
            let (mu, lambda) = (report.decoration.mu[comp], report.decoration.lambda[comp]);
            let tm = p as f64 * mu + q as f64 * lambda;
            let defect = (tm - tm.re.round()).norm();
            if defect > 1e-7 {
                return Err(Error::FillingIncompatible { component: comp, defect });
            }
            let (r, s) = bezout(p, q)?;
            let tl = r as f64 * mu + s as f64 * lambda;
            let v = solid_torus_raw(tm, tl);
            report.fillings.push((comp, v));
            total += v;
        }
    }
    report.total = ModValue::volume(total).reduced();
    Ok(report)
}

/// `2π²` as used in reported imaginary parts.
pub const CS_PERIOD: f64 = 2.0 * PI * PI;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilog::mod_distance;
    use crate::flatten::default_flattening;
    use crate::shapes::{kink_shaping, lens_shaping};

    #[test]
    fn trivial_volume_is_zero() {
        let d = Diagram::figure_eight();
        let chi = Shaping::trivial(&d);
        let f = default_flattening(&d, &chi).unwrap();
        let v = diagram_volume(&d, &chi, &f).unwrap();
        assert!(mod_distance(&v.total, &ModValue::volume(C64::new(0.0, 0.0))).unwrap() < 1e-12);
        assert!(v.per_crossing.iter().all(|c| c.pinched));
    }

    #[test]
    fn kink_value() {
        for sign in [1, -1] {
            let d = Diagram::kink(sign);
            let x = crate::shapes::Shape::new(C64::new(0.3, 0.8), C64::new(1.2, -0.4), C64::new(0.7, 0.5));
            let chi = Shaping::new(vec![x, crate::shapes::kink_loop_shape(&x, true)]);
            let f = default_flattening(&d, &chi).unwrap();
            let dec = induced_decoration(&d, &chi, &f).unwrap();
            let v = diagram_volume(&d, &chi, &f).unwrap();
            let expect = ModValue::volume(2.0 * TWO_PI_SQ * I * dec.mu[0] * dec.lambda[0]);
            assert!(mod_distance(&v.total, &expect).unwrap() < 1e-12, "sign {sign}");
        }
        let _ = kink_shaping;
    }

    #[test]
    fn lens_5_1_1() {
        let d = Diagram::kink(1).with_label(0, SurgeryLabel::Rational { p: 5, q: 1 }).unwrap();
        let chi = lens_shaping(5, 1).unwrap();
        let f = default_flattening(&d, &chi).unwrap();
        let v = manifold_volume(&d, &chi, &f, &[], 1e-9).unwrap();
        let expect = ModValue::volume(C64::new(0.0, 1.2 * PI * PI));
        assert!(mod_distance(&v.total, &expect).unwrap() < 1e-12, "{:?}", v.total);
    }

    #[test]
    fn solid_torus_examples() {
        assert!(solid_torus_volume(C64::new(0.0, 0.0), C64::new(0.7, 0.1)).value.norm() < 1e-15);
        let v = solid_torus_volume(C64::new(2.0, 0.0), C64::new(1.0 / 3.0, 0.0));
        let expect = ModValue::volume(C64::new(0.0, 2.0 / 3.0 * PI * PI));
        assert!(mod_distance(&v, &expect).unwrap() < 1e-12);
    }
}
