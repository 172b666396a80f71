//! Damped least squares for the braiding equations.
//!
//! Unknowns are `(a, b)` per segment, plus `m` per component for Dehn
//! filling constraints. Residuals are written generically over [`Field`] so
//! that one forward-mode dual pass per unknown gives a Jacobian column.

use crate::diagram::Diagram;
use crate::dilog::C64;
use crate::error::{Error, Result};
use crate::flatten::default_flattening;
use crate::shapes::{braid_neg_raw, braid_pos_raw, validate_shaping, Field, Shape, Shaping};
use crate::volume::diagram_volume;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    FixedMeridian(C64),
    /// `m = ±1`.
    Parabolic(i8),
    /// `m^p ℓ^q = 1`.
    Filling { p: i64, q: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PinVar {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pin {
    pub segment: usize,
    pub var: PinVar,
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveRequest {
    pub diagram: Diagram,
    pub constraints: Vec<Constraint>,
    pub pins: Vec<Pin>,
    pub seed: u64,
    pub starts: usize,
    pub tol: f64,
}

impl SolveRequest {
    pub fn new(diagram: &Diagram, constraints: Vec<Constraint>) -> Self {
        SolveRequest {
            diagram: diagram.clone(),
            constraints,
            pins: vec![],
            seed: 0,
            starts: 32,
            tol: DEFAULT_TOL,
        }
    }
    pub fn pin(mut self, segment: usize, var: PinVar, value: C64) -> Self {
        self.pins.push(Pin { segment, var, value });
        self
    }
    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
    pub fn starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }
    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

pub const DEFAULT_TOL: f64 = 1e-12;
const DEDUP: f64 = 1e-6;
const POLISH_ITERS: usize = 50;
const LM_ITERS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub shaping: Shaping,
    pub residual: f64,
    pub start: usize,
    pub pinched: Vec<bool>,
    /// Unknowns minus numerical Jacobian rank at the solution.
    pub rank_deficiency: usize,
    /// Diagram volume under the default flattening, if defined.
    pub volume: Option<C64>,
}

/// Forward-mode dual number over ℂ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: C64,
    pub d: C64,
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
}
impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}
impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
}
impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let q = self.v / o.v;
        Dual { v: q, d: (self.d - q * o.d) / o.v }
    }
}
impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: -self.d }
    }
}
impl Field for Dual {
    fn constant(z: C64) -> Self {
        Dual { v: z, d: C64::new(0.0, 0.0) }
    }
    fn value(&self) -> C64 {
        self.v
    }
}

fn powi<F: Field>(x: F, n: i64) -> F {
    let mut acc = F::one();
    let base = if n < 0 { F::one() / x } else { x };
    for _ in 0..n.unsigned_abs() {
        acc = acc * base;
    }
    acc
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Fixed(C64),
    Var(usize),
}

/// Where each shape component comes from.
#[derive(Debug, Clone)]
struct Layout {
    a: Vec<Slot>,
    b: Vec<Slot>,
    m: Vec<Slot>,
    unknowns: usize,
}

impl Layout {
    fn new(req: &SolveRequest) -> Result<Layout> {
        let d = &req.diagram;
        if req.constraints.len() != d.num_components() {
            return Err(Error::UnknownComponent(req.constraints.len()));
        }
        let ns = d.num_segments();
        let mut a = vec![None; ns];
        let mut b = vec![None; ns];
        for p in &req.pins {
            d.check_segment(p.segment)?;
            if p.value.norm() == 0.0 || !p.value.is_finite() {
                return Err(Error::DegenerateShape(format!("pin on segment {} is zero", p.segment)));
            }
            match p.var {
                PinVar::A => a[p.segment] = Some(p.value),
                PinVar::B => b[p.segment] = Some(p.value),
            }
        }
        // fix the b-scaling gauge on every connected piece without a b pin
        let mut piece_pinned = vec![false; d.num_crossings()];
        let piece_of = crossing_pieces(d);
        for s in 0..ns {
            if b[s].is_some() {
                piece_pinned[piece_of[d.segment(s).tail.0]] = true;
            }
        }
        for s in 0..ns {
            let p = piece_of[d.segment(s).tail.0];
            if !piece_pinned[p] {
                b[s] = Some(C64::new(1.0, 0.0));
                piece_pinned[p] = true;
            }
        }
        let mut unknowns = 0;
        let mut slot = |v: Option<C64>| match v {
            Some(z) => Slot::Fixed(z),
            None => {
                unknowns += 1;
                Slot::Var(unknowns - 1)
            }
        };
        let a: Vec<Slot> = a.into_iter().map(&mut slot).collect();
        let b: Vec<Slot> = b.into_iter().map(&mut slot).collect();
        let m: Vec<Slot> = req
            .constraints
            .iter()
            .map(|c| match c {
                Constraint::FixedMeridian(m) => slot(Some(*m)),
                Constraint::Parabolic(s) => slot(Some(C64::new(*s as f64, 0.0))),
                Constraint::Filling { .. } => slot(None),
            })
            .collect();
        Ok(Layout { a, b, m, unknowns })
    }

    fn get<F: Field>(&self, s: Slot, x: &[F]) -> F {
        match s {
            Slot::Fixed(z) => F::constant(z),
            Slot::Var(i) => x[i],
        }
    }

    fn shapes(&self, d: &Diagram, x: &[C64]) -> Shaping {
        Shaping::new(
            (0..d.num_segments())
                .map(|s| {
                    Shape::new(
                        self.get(self.a[s], x),
                        self.get(self.b[s], x),
                        self.get(self.m[d.segment(s).component], x),
                    )
                })
                .collect(),
        )
    }
}

fn crossing_pieces(d: &Diagram) -> Vec<usize> {
    let n = d.num_crossings();
    let mut piece = vec![usize::MAX; n];
    let mut count = 0;
    for c0 in 0..n {
        if piece[c0] != usize::MAX {
            continue;
        }
        piece[c0] = count;
        let mut stack = vec![c0];
        while let Some(c) = stack.pop() {
            for &s in &d.crossing(c).arms {
                for e in [d.segment(s).tail.0, d.segment(s).head.0] {
                    if piece[e] == usize::MAX {
                        piece[e] = count;
                        stack.push(e);
                    }
                }
            }
        }
        count += 1;
    }
    piece
}

/// Residual vector: four relative braiding errors per crossing, then one
/// equation per filled component.
fn equations<F: Field>(req: &SolveRequest, lay: &Layout, x: &[F]) -> Vec<F> {
    let d = &req.diagram;
    let one = F::one();
    let seg = |s: usize| {
        (
            lay.get(lay.a[s], x),
            lay.get(lay.b[s], x),
            lay.get(lay.m[d.segment(s).component], x),
        )
    };
    let mut out = Vec::with_capacity(4 * d.num_crossings() + d.num_components());
    for c in 0..d.num_crossings() {
        let cr = d.crossing(c);
        let (a1, b1, m1) = seg(cr.arms[0]);
        let (a2, b2, m2) = seg(cr.arms[1]);
        let (o1a, o1b, _) = seg(cr.arms[2]);
        let (o2a, o2b, _) = seg(cr.arms[3]);
        let (a1p, b1p, a2p, b2p, _) = if cr.sign > 0 {
            braid_pos_raw(a1, b1, m1, a2, b2, m2)
        } else {
            braid_neg_raw(a1, b1, m1, a2, b2, m2)
        };
        out.push(a1p / o1a - one);
        out.push(b1p / o1b - one);
        out.push(a2p / o2a - one);
        out.push(b2p / o2b - one);
    }
    for (comp, con) in req.constraints.iter().enumerate() {
        if let Constraint::Filling { p, q } = *con {
            let m = lay.get(lay.m[comp], x);
            let w = d.writhe(comp).unwrap_or(0);
            let mut ell = powi(m, -w);
            for &s in &d.components()[comp] {
                let b = lay.get(lay.b[s], x);
                match d.segment_eta(s).unwrap_or(0) {
                    1 => ell = ell * b,
                    -1 => ell = ell / b,
                    _ => {}
                }
            }
            out.push(powi(m, p) * powi(ell, q) - one);
        }
    }
    out
}

fn max_norm(r: &[C64]) -> f64 {
    r.iter().map(|z| if z.is_finite() { z.norm() } else { f64::INFINITY }).fold(0.0, f64::max)
}

struct System<'a> {
    req: &'a SolveRequest,
    lay: Layout,
}

impl System<'_> {
    fn residual(&self, x: &[C64]) -> Vec<C64> {
        equations(self.req, &self.lay, x)
    }

    fn jacobian(&self, x: &[C64]) -> (Vec<C64>, DMatrix<f64>) {
        let n = x.len();
        let r = self.residual(x);
        let m = r.len();
        let mut j = DMatrix::zeros(2 * m, 2 * n);
        let mut dx: Vec<Dual> = x.iter().map(|&v| Dual::constant(v)).collect();
        for k in 0..n {
            dx[k].d = C64::new(1.0, 0.0);
            let col = equations(self.req, &self.lay, &dx);
            dx[k].d = C64::new(0.0, 0.0);
            for (i, f) in col.iter().enumerate() {
                let g = f.d;
                j[(2 * i, 2 * k)] = g.re;
                j[(2 * i, 2 * k + 1)] = -g.im;
                j[(2 * i + 1, 2 * k)] = g.im;
                j[(2 * i + 1, 2 * k + 1)] = g.re;
            }
        }
        (r, j)
    }
}

fn to_real(r: &[C64]) -> DVector<f64> {
    DVector::from_iterator(2 * r.len(), r.iter().flat_map(|z| [z.re, z.im]))
}

fn cost(r: &[C64]) -> f64 {
    r.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

fn apply(x: &[C64], step: &DVector<f64>) -> Vec<C64> {
    x.iter().enumerate().map(|(k, z)| z + C64::new(step[2 * k], step[2 * k + 1])).collect()
}

fn finite(r: &[C64]) -> bool {
    r.iter().all(|z| z.is_finite())
}

/// Levenberg–Marquardt followed by a pseudo-inverse Newton polish.
fn run_start(sys: &System, mut x: Vec<C64>, tol: f64) -> (Vec<C64>, f64) {
    let mut lambda = 1e-3;
    let mut r = sys.residual(&x);
    if !finite(&r) {
        return (x, f64::INFINITY);
    }
    let mut c = cost(&r);
    for _ in 0..LM_ITERS {
        if x.is_empty() || max_norm(&r) < tol * 0.1 {
            break;
        }
        let (_, j) = sys.jacobian(&x);
        let rv = to_real(&r);
        let jt = j.transpose();
        let h = &jt * &j;
        let g = &jt * &rv;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = h.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * (h[(i, i)].max(1e-12));
            }
            let Some(ch) = a.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step = -ch.solve(&g);
            let xn = apply(&x, &step);
            let rn = sys.residual(&xn);
            let cn = cost(&rn);
            if finite(&rn) && cn < c {
                x = xn;
                r = rn;
                c = cn;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    for _ in 0..POLISH_ITERS {
        if x.is_empty() || max_norm(&r) < tol * 1e-3 {
            break;
        }
        let (_, j) = sys.jacobian(&x);
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        let Ok(step) = svd.solve(&to_real(&r), smax * 1e-12) else {
            break;
        };
        let xn = apply(&x, &(-step));
        let rn = sys.residual(&xn);
        if !finite(&rn) || cost(&rn) >= c {
            break;
        }
        x = xn;
        r = rn;
        c = cost(&r);
    }
    let res = max_norm(&r);
    (x, res)
}

fn rank_deficiency(sys: &System, x: &[C64]) -> usize {
    if x.is_empty() {
        return 0;
    }
    let (_, j) = sys.jacobian(x);
    let sv = j.svd(false, false).singular_values;
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > smax * 1e-8).count();
    (2 * x.len()).saturating_sub(rank) / 2
}

fn random_start(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let (lo, hi) = (0.2f64.ln(), 5.0f64.ln());
    (0..n)
        .map(|_| {
            let r = rng.gen_range(lo..hi).exp();
            let t = rng.gen_range(-PI..PI);
            C64::from_polar(r, t)
        })
        .collect()
}

/// Runs `req.starts` seeded starts and returns the distinct solutions,
/// largest real volume first.
pub fn solve_shaping(req: &SolveRequest) -> Result<Vec<SolveResult>> {
    let lay = Layout::new(req)?;
    let n = lay.unknowns;
    let sys = System { req, lay };
    let d = &req.diagram;
    let mut results: Vec<SolveResult> = Vec::new();
    let mut best = f64::INFINITY;
    let mut best_x: Option<Vec<C64>> = None;
    for start in 0..req.starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
        rng.set_stream(start as u64);
        let x0 = random_start(&mut rng, n);
        let (x, res) = run_start(&sys, x0, req.tol);
        if res < best {
            best = res;
            best_x = Some(x.clone());
        }
        if res >= req.tol {
            continue;
        }
        let shaping = sys.lay.shapes(d, &x);
        let degenerate = shaping.shapes.iter().any(|s| {
            [s.a, s.b, s.m].iter().any(|z| z.norm() < 1e-8 || z.norm() > 1e8)
        });
        if degenerate || !validate_shaping(d, &shaping, 10.0 * req.tol.max(1e-12)).passed {
            continue;
        }
        let duplicate = results.iter().any(|r| {
            r.shaping
                .shapes
                .iter()
                .zip(&shaping.shapes)
                .all(|(u, v)| u.distance(v) < DEDUP)
        });
        if duplicate {
            continue;
        }
        let pinched = (0..d.num_crossings())
            .map(|c| crate::volume::pinch_defect(d, c, &shaping) < crate::flatten::PINCH_TOL)
            .collect();
        let volume = default_flattening(d, &shaping)
            .and_then(|f| diagram_volume(d, &shaping, &f))
            .ok()
            .map(|v| v.total.value);
        results.push(SolveResult {
            rank_deficiency: rank_deficiency(&sys, &x),
            shaping,
            residual: res,
            start,
            pinched,
            volume,
        });
    }
    if results.is_empty() {
        if let Some(x) = best_x {
            if n > 0 && best.is_finite() {
                let def = rank_deficiency(&sys, &x);
                if def > 0 && best < 1e-6 {
                    return Err(Error::GaugeDeficient { rank: 2 * n - 2 * def, unknowns: 2 * n });
                }
            }
        }
        return Err(Error::NoSolutionFound { starts: req.starts, best });
    }
    results.sort_by(|u, v| {
        let ru = u.volume.map(|z| z.re).unwrap_or(f64::NEG_INFINITY);
        let rv = v.volume.map(|z| z.re).unwrap_or(f64::NEG_INFINITY);
        rv.partial_cmp(&ru)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(u.residual.partial_cmp(&v.residual).unwrap_or(std::cmp::Ordering::Equal))
            .then(u.start.cmp(&v.start))
    });
    Ok(results)
}

/// Max residual of a shaping against the braiding and the constraints.
pub fn residual(d: &Diagram, chi: &Shaping, constraints: &[Constraint]) -> Result<f64> {
    let req = SolveRequest::new(d, constraints.to_vec());
    if constraints.len() != d.num_components() {
        return Err(Error::UnknownComponent(constraints.len()));
    }
    let mut worst: f64 = 0.0;
    for c in 0..d.num_crossings() {
        let cr = d.crossing(c);
        let [i1, i2, o1, o2] = cr.arms.map(|s| *chi.get(s));
        let (a1p, b1p, a2p, b2p, _) = if cr.sign > 0 {
            braid_pos_raw(i1.a, i1.b, i1.m, i2.a, i2.b, i2.m)
        } else {
            braid_neg_raw(i1.a, i1.b, i1.m, i2.a, i2.b, i2.m)
        };
        for (u, v) in [(a1p, o1.a), (b1p, o1.b), (a2p, o2.a), (b2p, o2.b)] {
            let e = (u - v).norm();
            worst = worst.max(if e.is_finite() { e } else { f64::INFINITY });
        }
    }
    for (comp, con) in constraints.iter().enumerate() {
        let m = chi.meridian(d, comp)?;
        for &s in &d.components()[comp] {
            worst = worst.max((chi.get(s).m - m).norm());
        }
        let e = match *con {
            Constraint::FixedMeridian(t) => (m - t).norm(),
            Constraint::Parabolic(s) => (m - s as f64).norm(),
            Constraint::Filling { p, q } => {
                let ell = crate::shapes::longitude_eigenvalue(d, chi, comp)?;
                (powi(m, p) * powi(ell, q) - 1.0).norm()
            }
        };
        worst = worst.max(e);
    }
    let _ = req;
    Ok(worst)
}

/// Completes a partial shaping: propagates through crossings, then solves
/// for whatever is left with every known shape pinned.
pub fn complete_shaping(d: &Diagram, known: &[Option<Shape>], seed: u64) -> Result<Shaping> {
    let mut known = known.to_vec();
    crate::shapes::propagate(d, &mut known)?;
    if known.iter().all(|k| k.is_some()) {
        return Ok(Shaping::new(known.into_iter().map(|k| k.unwrap()).collect()));
    }
    let mut constraints = Vec::new();
    for cyc in d.components() {
        let m = cyc
            .iter()
            .find_map(|&s| known[s].map(|x| x.m))
            .ok_or_else(|| Error::MissingTarget(d.segment(cyc[0]).component))?;
        constraints.push(Constraint::FixedMeridian(m));
    }
    let mut req = SolveRequest::new(d, constraints).seed(seed).starts(48);
    for (s, k) in known.iter().enumerate() {
        if let Some(x) = k {
            req.pins.push(Pin { segment: s, var: PinVar::A, value: x.a });
            req.pins.push(Pin { segment: s, var: PinVar::B, value: x.b });
        }
    }
    let mut res = solve_shaping(&req)?;
    res.sort_by(|u, v| u.residual.partial_cmp(&v.residual).unwrap());
    Ok(res.swap_remove(0).shaping)
}
