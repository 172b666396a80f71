//! Log-lifts of a shaping: μ per component, β per segment, γ per region.

use crate::diagram::{Diagram, E, IN1, IN2, N, OUT1, OUT2, S, W};
use crate::dilog::{plog, C64};
use crate::error::{Error, Result};
use crate::shapes::Shaping;
use std::collections::VecDeque;
use std::f64::consts::PI;

const TWO_PI_I: C64 = C64::new(0.0, 2.0 * PI);

/// `log(z) / 2πi` on the principal branch.
pub fn log2pii(z: C64) -> C64 {
    plog(z) / TWO_PI_I
}

/// `exp(2πi x)`.
pub fn exp2pii(x: C64) -> C64 {
    (TWO_PI_I * x).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flattening {
    pub mu: Vec<C64>,
    pub beta: Vec<C64>,
    pub gamma: Vec<C64>,
}

/// `(𝔰(𝔪), 𝔰(𝔩))` per component.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDecoration {
    pub mu: Vec<C64>,
    pub lambda: Vec<C64>,
}

impl LogDecoration {
    pub fn len(&self) -> usize {
        self.mu.len()
    }
    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TetLabel {
    N,
    W,
    S,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlattenedTetrahedron {
    pub label: TetLabel,
    pub sign: i8,
    pub zeta0: C64,
    pub zeta1: C64,
    pub z0: C64,
}

impl FlattenedTetrahedron {
    /// Relative error of `exp(sign ζ0) = z0` and `exp(sign ζ1) = z1`.
    pub fn residual(&self) -> f64 {
        let s = self.sign as f64;
        let one = C64::new(1.0, 0.0);
        // negative tetrahedra use z¹ = 1 - 1/z⁰
        let z1 = if self.sign > 0 { (one - self.z0).inv() } else { one - self.z0.inv() };
        let r0 = ((self.zeta0 * s).exp() - self.z0).norm() / self.z0.norm().max(1.0);
        let r1 = ((self.zeta1 * s).exp() - z1).norm() / z1.norm().max(1.0);
        r0.max(r1)
    }
}

/// Principal-log flattening; γ is propagated from the outer region.
pub fn default_flattening(d: &Diagram, chi: &Shaping) -> Result<Flattening> {
    let mu: Vec<C64> =
        (0..d.num_components()).map(|c| chi.meridian(d, c).map(log2pii)).collect::<Result<_>>()?;
    let beta: Vec<C64> = chi.shapes.iter().map(|x| log2pii(x.b)).collect();
    let nr = d.num_regions();
    let mut gamma = vec![None; nr];
    let mut adj: Vec<Vec<(usize, C64)>> = vec![Vec::new(); nr];
    for (s, seg) in d.segments().iter().enumerate() {
        // exp(2πi(γ_right - γ_left)) = a
        let la = log2pii(chi.get(s).a);
        adj[seg.left].push((seg.right, la));
        adj[seg.right].push((seg.left, -la));
    }
    let outer = d.outer_region();
    gamma[outer] = Some(C64::new(0.0, 0.0));
    let mut queue = VecDeque::from([outer]);
    while let Some(r) = queue.pop_front() {
        let g = gamma[r].unwrap();
        for &(q, step) in &adj[r] {
            if gamma[q].is_none() {
                gamma[q] = Some(g + step);
                queue.push_back(q);
            }
        }
    }
    let gamma: Vec<C64> = gamma.into_iter().map(|g| g.unwrap_or_default()).collect();
    for (s, seg) in d.segments().iter().enumerate() {
        let a = chi.get(s).a;
        let defect = (exp2pii(gamma[seg.right] - gamma[seg.left]) - a).norm() / a.norm().max(1.0);
        if defect > 1e-8 {
            return Err(Error::InconsistentRegionHolonomy { region: seg.right, defect });
        }
    }
    Ok(Flattening { mu, beta, gamma })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatteningReport {
    pub mu_residual: f64,
    pub beta_residual: f64,
    pub region_residual: f64,
    pub tetrahedron_residual: f64,
    pub passed: bool,
}

pub fn validate_flattening(d: &Diagram, chi: &Shaping, f: &Flattening, tol: f64) -> FlatteningReport {
    let rel = |x: C64, y: C64| (x - y).norm() / y.norm().max(1.0);
    let shapes_ok = f.mu.len() == d.num_components()
        && f.beta.len() == d.num_segments()
        && f.gamma.len() == d.num_regions()
        && chi.shapes.len() == d.num_segments();
    if !shapes_ok {
        return FlatteningReport {
            mu_residual: f64::INFINITY,
            beta_residual: f64::INFINITY,
            region_residual: f64::INFINITY,
            tetrahedron_residual: f64::INFINITY,
            passed: false,
        };
    }
    let mut mu_residual: f64 = 0.0;
    for (c, cyc) in d.components().iter().enumerate() {
        for &s in cyc {
            mu_residual = mu_residual.max(rel(exp2pii(f.mu[c]), chi.get(s).m));
        }
    }
    let beta_residual = (0..d.num_segments())
        .map(|s| rel(exp2pii(f.beta[s]), chi.get(s).b))
        .fold(0.0, f64::max);
    let region_residual = d
        .segments()
        .iter()
        .enumerate()
        .map(|(s, seg)| rel(exp2pii(f.gamma[seg.right] - f.gamma[seg.left]), chi.get(s).a))
        .fold(0.0, f64::max);
    let mut tetrahedron_residual: f64 = 0.0;
    for c in 0..d.num_crossings() {
        if let Ok(tets) = crossing_zetas(d, c, chi, f, 0, PINCH_TOL) {
            for t in tets {
                tetrahedron_residual = tetrahedron_residual.max(t.residual());
            }
        }
    }
    let passed = [mu_residual, beta_residual, region_residual, tetrahedron_residual]
        .iter()
        .all(|&r| r < tol);
    FlatteningReport { mu_residual, beta_residual, region_residual, tetrahedron_residual, passed }
}

/// `|b2'/b1 - 1|` below this makes a crossing pinched.
pub const PINCH_TOL: f64 = 1e-8;
/// Above the pinch threshold but below this, the generic formula is
/// evaluated with a conditioning warning.
pub const PINCH_GUARD: f64 = 1e-5;

/// Log-parameters of the crossing's strands, `(ε, β1, β2, β1', β2', μ1, μ2, [γN, γW, γS, γE])`.
#[derive(Debug, Clone, Copy)]
pub struct CrossingLogs {
    pub eps: f64,
    pub b1: C64,
    pub b2: C64,
    pub b1p: C64,
    pub b2p: C64,
    pub mu1: C64,
    pub mu2: C64,
    pub gamma: [C64; 4],
}

pub fn crossing_logs(d: &Diagram, c: usize, f: &Flattening) -> CrossingLogs {
    let x = d.crossing(c);
    let comp = |slot: usize| d.segment(x.arms[slot]).component;
    CrossingLogs {
        eps: x.sign as f64,
        b1: f.beta[x.arms[IN1]],
        b2: f.beta[x.arms[IN2]],
        b1p: f.beta[x.arms[OUT1]],
        b2p: f.beta[x.arms[OUT2]],
        mu1: f.mu[comp(IN1)],
        mu2: f.mu[comp(IN2)],
        gamma: x.regions.map(|r| f.gamma[r]),
    }
}

/// The four flattened tetrahedra of a non-pinched crossing, in N, W, S, E
/// order. `kappa_shift` adds an integer to κ.
pub fn crossing_zetas(
    d: &Diagram,
    c: usize,
    chi: &Shaping,
    f: &Flattening,
    kappa_shift: i64,
    pinch_tol: f64,
) -> Result<[FlattenedTetrahedron; 4]> {
    let x = d.crossing(c);
    let [s1, s2, s1p, s2p] = x.arms.map(|s| *chi.get(s));
    let ratio = s2p.b / s1.b;
    if (ratio - 1.0).norm() < pinch_tol {
        return Err(Error::PinchedCrossing(c));
    }
    let lg = crossing_logs(d, c, f);
    let e = lg.eps;
    let [gn, gw, gs, ge] = [lg.gamma[N], lg.gamma[W], lg.gamma[S], lg.gamma[E]];
    let one = C64::new(1.0, 0.0);
    let big_k = exp2pii(gn) / (one - ratio.powf(e));
    let kappa = log2pii(big_k) + kappa_shift as f64;
    let (m1, m2) = (s1.m, s2.m);
    let z = [
        ratio,
        m1 * s1.b / s2.b,
        m2 * s2.b / (m1 * s1p.b),
        s1p.b / (m2 * s2p.b),
    ];
    let z0 = [
        TWO_PI_I * e * (lg.b2p - lg.b1),
        TWO_PI_I * e * (lg.b2 - lg.b1 - lg.mu1),
        TWO_PI_I * e * (lg.b2 - lg.b1p + lg.mu2 - lg.mu1),
        TWO_PI_I * e * (lg.b2p - lg.b1p + lg.mu2),
    ];
    let z1 = [
        TWO_PI_I * (kappa - gn),
        TWO_PI_I * (kappa - gw + e * lg.mu1),
        TWO_PI_I * (kappa - gs + e * (lg.mu1 - lg.mu2)),
        TWO_PI_I * (kappa - ge - e * lg.mu2),
    ];
    let labels = [TetLabel::N, TetLabel::W, TetLabel::S, TetLabel::E];
    let sgn = x.sign;
    let signs = [sgn, -sgn, sgn, -sgn];
    Ok([0, 1, 2, 3].map(|i| FlattenedTetrahedron {
        label: labels[i],
        sign: signs[i],
        zeta0: z0[i],
        zeta1: z1[i],
        z0: z[i],
    }))
}

/// `𝔰(𝔪) = μ`, `𝔰(𝔩) = -wμ + Σ ηβ`, checked against the longitude eigenvalue.
pub fn induced_decoration(d: &Diagram, chi: &Shaping, f: &Flattening) -> Result<LogDecoration> {
    let mut lambda = Vec::new();
    for comp in 0..d.num_components() {
        let l = log_longitude(d, f, comp)?;
        let ell = crate::shapes::longitude_eigenvalue(d, chi, comp)?;
        let defect = (exp2pii(l) - ell).norm() / ell.norm().max(1.0);
        if defect > 1e-7 {
            return Err(Error::LongitudeMismatch { component: comp, defect });
        }
        lambda.push(l);
    }
    Ok(LogDecoration { mu: f.mu.clone(), lambda })
}

fn log_longitude(d: &Diagram, f: &Flattening, comp: usize) -> Result<C64> {
    let w = d.writhe(comp)? as f64;
    let mut l = -f.mu[comp] * w;
    for &s in &d.components()[comp] {
        l += f.beta[s] * d.segment_eta(s)? as f64;
    }
    Ok(l)
}

fn integer_offset(x: C64, comp: usize, what: &str) -> Result<i64> {
    let k = x.re.round();
    if (x - k).norm() > 1e-8 {
        return Err(Error::IncompatibleTarget {
            component: comp,
            detail: format!("{what} offset {x} is not an integer"),
        });
    }
    Ok(k as i64)
}

/// Shifts μ, then one β per component, by integers so the induced
/// decoration equals `target`.
pub fn adjust_to_decoration(
    d: &Diagram,
    chi: &Shaping,
    f: &Flattening,
    target: &LogDecoration,
) -> Result<Flattening> {
    if target.len() != d.num_components() {
        return Err(Error::IncompatibleTarget {
            component: target.len(),
            detail: "target has the wrong number of components".into(),
        });
    }
    let mut out = f.clone();
    for comp in 0..d.num_components() {
        integer_offset(target.mu[comp] - f.mu[comp], comp, "meridian")?;
        out.mu[comp] = target.mu[comp];
        let l = log_longitude(d, &out, comp)?;
        let j = integer_offset(target.lambda[comp] - l, comp, "longitude")?;
        if j != 0 {
            let s = d.components()[comp]
                .iter()
                .copied()
                .find(|&s| d.segment_eta(s).map(|e| e != 0).unwrap_or(false))
                .ok_or_else(|| Error::IncompatibleTarget {
                    component: comp,
                    detail: "no over-under segment to carry the longitude shift".into(),
                })?;
            out.beta[s] += (j * d.segment_eta(s)? as i64) as f64;
        }
        // land exactly on the target value
        let l = log_longitude(d, &out, comp)?;
        debug_assert!((l - target.lambda[comp]).norm() < 1e-8);
    }
    induced_decoration(d, chi, &out)?;
    Ok(out)
}

/// Flattening of `d.mirror()` matching [`crate::shapes::mirror_shaping`].
pub fn mirror_flattening(f: &Flattening) -> Flattening {
    Flattening {
        mu: f.mu.iter().map(|x| x.conj()).collect(),
        beta: f.beta.iter().map(|x| x.conj()).collect(),
        gamma: f.gamma.iter().map(|x| -x.conj()).collect(),
    }
}

/// Flattening of `d.reverse_component(comp)`: μ → -μ, β → β + μ on the
/// component, γ carried over through the region correspondence.
pub fn reverse_flattening(
    d: &Diagram,
    reversed: &Diagram,
    f: &Flattening,
    comp: usize,
) -> Result<Flattening> {
    d.check_component(comp)?;
    let mut out = f.clone();
    out.mu[comp] = -f.mu[comp];
    for &s in &d.components()[comp] {
        out.beta[s] = f.beta[s] + f.mu[comp];
    }
    let map = d.reversal_region_map(reversed, comp);
    out.gamma = map.iter().map(|&old| f.gamma[old]).collect();
    Ok(out)
}

impl Flattening {
    pub fn shift_gamma(&self, r: usize, k: i64) -> Flattening {
        let mut f = self.clone();
        f.gamma[r] += k as f64;
        f
    }
    pub fn shift_beta(&self, s: usize, k: i64) -> Flattening {
        let mut f = self.clone();
        f.beta[s] += k as f64;
        f
    }
    pub fn shift_mu(&self, c: usize, k: i64) -> Flattening {
        let mut f = self.clone();
        f.mu[c] += k as f64;
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{kink_shaping, lens_shaping};

    #[test]
    fn trivial_flattening_is_zero() {
        let d = Diagram::figure_eight();
        let chi = Shaping::trivial(&d);
        let f = default_flattening(&d, &chi).unwrap();
        assert!(f.mu.iter().chain(&f.beta).chain(&f.gamma).all(|z| z.norm() == 0.0));
        let dec = induced_decoration(&d, &chi, &f).unwrap();
        assert_eq!(dec.lambda[0], C64::new(0.0, 0.0));
    }

    #[test]
    fn lens_default_flattening() {
        let d = Diagram::kink(1);
        let chi = lens_shaping(7, 2).unwrap();
        let f = default_flattening(&d, &chi).unwrap();
        assert!((f.mu[0] - 2.0 / 7.0).norm() < 1e-15);
        assert!(f.beta[0].norm() < 1e-15);
        assert!((f.beta[1] - 2.0 / 7.0).norm() < 1e-15);
        let dec = induced_decoration(&d, &chi, &f).unwrap();
        assert!(dec.lambda[0].norm() < 1e-15);
        assert!(validate_flattening(&d, &chi, &f, 1e-10).passed);
    }

    #[test]
    fn gamma_shifts() {
        let d = Diagram::kink(1);
        let chi = kink_shaping(C64::new(0.3, 0.8), C64::new(1.2, -0.4), C64::new(0.7, 0.5)).unwrap();
        let f = default_flattening(&d, &chi).unwrap();
        assert!(validate_flattening(&d, &chi, &f, 1e-10).passed);
        assert!(validate_flattening(&d, &chi, &f.shift_gamma(1, 1), 1e-10).passed);
        let mut g = f.clone();
        g.gamma[1] += 0.3;
        let r = validate_flattening(&d, &chi, &g, 1e-10);
        assert!(!r.passed && r.region_residual > 0.1);
    }

    #[test]
    fn kink_crossing_is_pinched() {
        let d = Diagram::kink(1);
        let chi = kink_shaping(C64::new(0.3, 0.8), C64::new(1.2, -0.4), C64::new(0.7, 0.5)).unwrap();
        let f = default_flattening(&d, &chi).unwrap();
        assert!(matches!(crossing_zetas(&d, 0, &chi, &f, 0, PINCH_TOL), Err(Error::PinchedCrossing(0))));
    }

    #[test]
    fn adjust_hits_target() {
        let d = Diagram::kink(1);
        let chi = lens_shaping(5, 1).unwrap();
        let f = default_flattening(&d, &chi).unwrap();
        let mut t = induced_decoration(&d, &chi, &f).unwrap();
        assert_eq!(adjust_to_decoration(&d, &chi, &f, &t).unwrap(), f);
        t.lambda[0] += 1.0;
        let g = adjust_to_decoration(&d, &chi, &f, &t).unwrap();
        let changed: Vec<usize> = (0..2).filter(|&s| g.beta[s] != f.beta[s]).collect();
        assert_eq!(changed.len(), 1);
        assert_eq!(induced_decoration(&d, &chi, &g).unwrap(), t);
        t.mu[0] += 0.5;
        assert!(matches!(
            adjust_to_decoration(&d, &chi, &f, &t),
            Err(Error::IncompatibleTarget { .. })
        ));
    }
}
