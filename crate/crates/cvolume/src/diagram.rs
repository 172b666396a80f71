//! Oriented 4-valent planar diagrams.
//!
//! A crossing stores its four segments in counter-clockwise order as
//! `[in1, in2, out1, out2]`. Strand 1 runs `in1 -> out1` and strand 2 runs
//! `in2 -> out2`, so slot `s` continues to slot `s + 2`. Corner `k` sits
//! between arms `k` and `k + 1`; corners 0..4 are the W, S, E, N regions.

use crate::error::{Error, Result};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;

pub const IN1: usize = 0;
pub const IN2: usize = 1;
pub const OUT1: usize = 2;
pub const OUT2: usize = 3;

/// Indices into [`Crossing::regions`].
pub const N: usize = 0;
pub const W: usize = 1;
pub const S: usize = 2;
pub const E: usize = 3;

/// Region role of corner `k` (the face between arms `k` and `k + 1`).
pub const CORNER_ROLE: [usize; 4] = [W, S, E, N];

/// Strand index (0 for strand 1, 1 for strand 2) that passes over at a
/// positive crossing. Frozen by the kink fixed point `chi1 = chi2'` under
/// the positive braiding.
pub const OVER_STRAND_AT_POSITIVE: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurgeryLabel {
    Rational { p: i64, q: i64 },
    Cusp,
    Boundary,
}

impl SurgeryLabel {
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        let l = SurgeryLabel::Rational { p, q };
        l.check()?;
        Ok(l)
    }

    pub fn check(&self) -> Result<()> {
        if let SurgeryLabel::Rational { p, q } = *self {
            if q <= 0 {
                return Err(Error::BadLabel(format!(
                    "{p}/{q}: denominator must be positive (use Cusp for 1/0)"
                )));
            }
            if gcd(p, q) != 1 {
                return Err(Error::BadLabel(format!("{p}/{q} is not in lowest terms")));
            }
        }
        Ok(())
    }

    /// Parses `"p/q"`, `"p"`, `"inf"` or `null`-like empty strings.
    pub fn parse(s: Option<&str>) -> Result<Self> {
        let Some(s) = s else {
            return Ok(SurgeryLabel::Boundary);
        };
        let t = s.trim();
        match t {
            "" | "none" | "null" => return Ok(SurgeryLabel::Boundary),
            "inf" | "infinity" | "∞" | "cusp" => return Ok(SurgeryLabel::Cusp),
            _ => {}
        }
        let (p, q) = match t.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (t, "1"),
        };
        let p: i64 = p.parse().map_err(|_| Error::BadLabel(s.to_string()))?;
        let q: i64 = q.parse().map_err(|_| Error::BadLabel(s.to_string()))?;
        if q == 0 && p.abs() == 1 {
            return Ok(SurgeryLabel::Cusp);
        }
        SurgeryLabel::rational(p, q)
    }
}

impl fmt::Display for SurgeryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurgeryLabel::Rational { p, q } if *q == 1 => write!(f, "{p}"),
            SurgeryLabel::Rational { p, q } => write!(f, "{p}/{q}"),
            SurgeryLabel::Cusp => write!(f, "inf"),
            SurgeryLabel::Boundary => write!(f, "none"),
        }
    }
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A crossing as given by a user: arbitrary segment names.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingRecord {
    pub sign: i8,
    pub in1: String,
    pub in2: String,
    pub out1: String,
    pub out2: String,
    /// Optional region names in N, W, S, E order; verified if present.
    pub regions: Option<[String; 4]>,
}

impl CrossingRecord {
    pub fn new(sign: i8, ins: [&str; 2], outs: [&str; 2]) -> Self {
        CrossingRecord {
            sign,
            in1: ins[0].into(),
            in2: ins[1].into(),
            out1: outs[0].into(),
            out2: outs[1].into(),
            regions: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crossing {
    pub sign: i8,
    /// Segment ids in slot order `[in1, in2, out1, out2]`.
    pub arms: [usize; 4],
    /// Region ids in `[N, W, S, E]` order.
    pub regions: [usize; 4],
}

impl Crossing {
    /// Strand index (0 or 1) passing over.
    pub fn over_strand(&self) -> usize {
        if self.sign > 0 {
            OVER_STRAND_AT_POSITIVE
        } else {
            1 - OVER_STRAND_AT_POSITIVE
        }
    }

    pub fn region_at_corner(&self, k: usize) -> usize {
        self.regions[CORNER_ROLE[k % 4]]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// `(crossing, slot)` where the segment starts; slot is OUT1 or OUT2.
    pub tail: (usize, usize),
    /// `(crossing, slot)` where the segment ends; slot is IN1 or IN2.
    pub head: (usize, usize),
    pub component: usize,
    pub left: usize,
    pub right: usize,
}

/// Old-to-new id tables returned by rewrites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Remap {
    pub segments: Vec<Option<usize>>,
    pub crossings: Vec<Option<usize>>,
    pub components: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Which side of the segment the new RI loop sits on, plus its sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct R1Kind {
    pub sign: i8,
    pub side: Side,
}

impl R1Kind {
    pub const ALL: [R1Kind; 4] = [
        R1Kind { sign: 1, side: Side::Right },
        R1Kind { sign: 1, side: Side::Left },
        R1Kind { sign: -1, side: Side::Right },
        R1Kind { sign: -1, side: Side::Left },
    ];
}

/// Two distinct segments bordering a common region; `s_over` picks which one
/// passes over the other in the new bigon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct R2Site {
    pub s: usize,
    pub t: usize,
    pub region: usize,
    pub s_over: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    crossings: Vec<Crossing>,
    segments: Vec<Segment>,
    components: Vec<Vec<usize>>,
    /// Corners `(crossing, k)` of each region. The outer region of every
    /// connected piece is merged into one.
    regions: Vec<Vec<(usize, usize)>>,
    outer: usize,
    pieces: usize,
    labels: Vec<SurgeryLabel>,
    names: Vec<String>,
}

impl Diagram {
    /// Builds from canonical data: per crossing a sign and arms; segment ids
    /// must be dense `0..nseg`.
    pub fn from_arms(cross: &[(i8, [usize; 4])], nseg: usize) -> Result<Diagram> {
        let names = (0..nseg).map(|i| i.to_string()).collect();
        Diagram::assemble(cross, names)
    }

    fn assemble(cross: &[(i8, [usize; 4])], names: Vec<String>) -> Result<Diagram> {
        let nseg = names.len();
        let mut tails = vec![None; nseg];
        let mut heads = vec![None; nseg];
        for (c, (sign, arms)) in cross.iter().enumerate() {
            if *sign != 1 && *sign != -1 {
                return Err(Error::Parse(format!("crossing {c}: sign must be +1 or -1")));
            }
            for (slot, &s) in arms.iter().enumerate() {
                if s >= nseg {
                    return Err(Error::UnknownSegment(s));
                }
                let end = if slot >= 2 { &mut tails[s] } else { &mut heads[s] };
                if end.is_some() {
                    return Err(Error::DanglingSegment(format!(
                        "segment {} used twice as {}",
                        names[s],
                        if slot >= 2 { "an outgoing arm" } else { "an incoming arm" }
                    )));
                }
                *end = Some((c, slot));
            }
        }
        let mut ends = Vec::with_capacity(nseg);
        for s in 0..nseg {
            match (tails[s], heads[s]) {
                (Some(t), Some(h)) => ends.push((t, h)),
                _ => {
                    return Err(Error::DanglingSegment(format!(
                        "segment {} is missing an endpoint",
                        names[s]
                    )))
                }
            }
        }
        if cross.is_empty() {
            return Err(Error::DanglingSegment("diagram has no crossings".into()));
        }

        // components
        let mut comp_of = vec![usize::MAX; nseg];
        let mut components = Vec::new();
        for s0 in 0..nseg {
            if comp_of[s0] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut cyc = Vec::new();
            let mut s = s0;
            loop {
                comp_of[s] = id;
                cyc.push(s);
                let (c, j) = ends[s].1;
                s = cross[c].1[j + 2];
                if s == s0 {
                    break;
                }
            }
            components.push(cyc);
        }

        // faces
        let nc = cross.len();
        let mut face_of = vec![[usize::MAX; 4]; nc];
        let mut faces: Vec<Vec<(usize, usize)>> = Vec::new();
        for c in 0..nc {
            for k in 0..4 {
                if face_of[c][k] != usize::MAX {
                    continue;
                }
                let id = faces.len();
                let mut f = Vec::new();
                let (mut cc, mut kk) = (c, k);
                loop {
                    face_of[cc][kk] = id;
                    f.push((cc, kk));
                    let slot = (kk + 1) % 4;
                    let s = cross[cc].1[slot];
                    let next = if slot >= 2 { ends[s].1 } else { ends[s].0 };
                    (cc, kk) = next;
                    if (cc, kk) == (c, k) {
                        break;
                    }
                    if face_of[cc][kk] != usize::MAX {
                        return Err(Error::NonPlanar { euler: 0, expected: 2 });
                    }
                }
                faces.push(f);
            }
        }

        // connected pieces of the crossing graph
        let mut piece = vec![usize::MAX; nc];
        let mut pieces = 0;
        for c0 in 0..nc {
            if piece[c0] != usize::MAX {
                continue;
            }
            let mut stack = vec![c0];
            piece[c0] = pieces;
            while let Some(c) = stack.pop() {
                for &s in &cross[c].1 {
                    for (d, _) in [ends[s].0, ends[s].1] {
                        if piece[d] == usize::MAX {
                            piece[d] = pieces;
                            stack.push(d);
                        }
                    }
                }
            }
            pieces += 1;
        }
        let mut outer_face = vec![usize::MAX; pieces];
        for (id, f) in faces.iter().enumerate() {
            let p = piece[f[0].0];
            let cur = outer_face[p];
            if cur == usize::MAX || f.len() > faces[cur].len() {
                outer_face[p] = id;
            }
        }
        let mut region_of_face = vec![usize::MAX; faces.len()];
        let mut regions: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut outer = usize::MAX;
        for (id, f) in faces.iter().enumerate() {
            let is_outer = outer_face.contains(&id);
            let r = if is_outer && outer != usize::MAX {
                outer
            } else {
                regions.push(Vec::new());
                regions.len() - 1
            };
            if is_outer {
                outer = r;
            }
            region_of_face[id] = r;
            regions[r].extend_from_slice(f);
        }

        let euler = nc as i64 - nseg as i64 + regions.len() as i64;
        let expected = 1 + pieces as i64;
        if euler != expected {
            return Err(Error::NonPlanar { euler, expected });
        }

        let crossings: Vec<Crossing> = cross
            .iter()
            .enumerate()
            .map(|(c, (sign, arms))| {
                let mut regs = [0; 4];
                for k in 0..4 {
                    regs[CORNER_ROLE[k]] = region_of_face[face_of[c][k]];
                }
                Crossing { sign: *sign, arms: *arms, regions: regs }
            })
            .collect();
        let segments = (0..nseg)
            .map(|s| {
                let (t, h) = ends[s];
                let here = &crossings[t.0];
                Segment {
                    tail: t,
                    head: h,
                    component: comp_of[s],
                    left: here.region_at_corner(t.1),
                    right: here.region_at_corner(t.1 + 3),
                }
            })
            .collect();
        let labels = vec![SurgeryLabel::Boundary; components.len()];
        Ok(Diagram { crossings, segments, components, regions, outer, pieces, labels, names })
    }

    /// Builds from user records. Segment names that are all integers are
    /// ordered numerically, otherwise by first appearance.
    pub fn build(
        records: &[CrossingRecord],
        labels: &BTreeMap<String, SurgeryLabel>,
    ) -> Result<Diagram> {
        let mut order: Vec<String> = Vec::new();
        let mut seen = HashMap::new();
        for r in records {
            for s in [&r.in1, &r.in2, &r.out1, &r.out2] {
                if !seen.contains_key(s) {
                    seen.insert(s.clone(), order.len());
                    order.push(s.clone());
                }
            }
        }
        if order.iter().all(|s| s.parse::<i64>().is_ok()) {
            order.sort_by_key(|s| s.parse::<i64>().unwrap());
        }
        let index: HashMap<&str, usize> =
            order.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let cross: Vec<(i8, [usize; 4])> = records
            .iter()
            .map(|r| {
                (r.sign, [index[r.in1.as_str()], index[r.in2.as_str()], index[r.out1.as_str()], index[r.out2.as_str()]])
            })
            .collect();
        let mut d = Diagram::assemble(&cross, order.clone())?;

        // supplied regions must induce the derived partition of corners
        let mut fwd: HashMap<&str, usize> = HashMap::new();
        let mut back: HashMap<usize, &str> = HashMap::new();
        for (c, r) in records.iter().enumerate() {
            if let Some(names) = &r.regions {
                for role in 0..4 {
                    let derived = d.crossings[c].regions[role];
                    let given = names[role].as_str();
                    let ok_f = *fwd.entry(given).or_insert(derived) == derived;
                    let ok_b = *back.entry(derived).or_insert(given) == given;
                    if !ok_f || !ok_b {
                        return Err(Error::NonPlanar {
                            euler: d.euler_characteristic(),
                            expected: 1 + d.pieces as i64,
                        });
                    }
                }
            }
        }

        for (key, label) in labels {
            label.check()?;
            let comp = d.component_by_key(key)?;
            d.labels[comp] = *label;
        }
        Ok(d)
    }

    /// Accepts `"comp3"`, `"3"`, or the name of a segment on the component.
    pub fn component_by_key(&self, key: &str) -> Result<usize> {
        if let Some(n) = key.strip_prefix("comp") {
            if let Ok(i) = n.parse::<usize>() {
                return if i < self.components.len() { Ok(i) } else { Err(Error::UnknownComponent(i)) };
            }
        }
        if let Some(s) = self.names.iter().position(|n| n == key) {
            return Ok(self.segments[s].component);
        }
        match key.parse::<usize>() {
            Ok(i) if i < self.components.len() => Ok(i),
            Ok(i) => Err(Error::UnknownComponent(i)),
            Err(_) => Err(Error::BadLabel(format!("unknown component key {key}"))),
        }
    }

    pub fn with_labels(mut self, labels: &[SurgeryLabel]) -> Result<Diagram> {
        if labels.len() != self.components.len() {
            return Err(Error::UnknownComponent(labels.len()));
        }
        for l in labels {
            l.check()?;
        }
        self.labels = labels.to_vec();
        Ok(self)
    }

    pub fn with_label(mut self, comp: usize, label: SurgeryLabel) -> Result<Diagram> {
        label.check()?;
        self.check_component(comp)?;
        self.labels[comp] = label;
        Ok(self)
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }
    pub fn crossing(&self, c: usize) -> &Crossing {
        &self.crossings[c]
    }
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }
    pub fn segment(&self, s: usize) -> &Segment {
        &self.segments[s]
    }
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }
    pub fn regions(&self) -> &[Vec<(usize, usize)>] {
        &self.regions
    }
    pub fn labels(&self) -> &[SurgeryLabel] {
        &self.labels
    }
    pub fn names(&self) -> &[String] {
        &self.names
    }
    pub fn outer_region(&self) -> usize {
        self.outer
    }
    pub fn pieces(&self) -> usize {
        self.pieces
    }
    pub fn num_crossings(&self) -> usize {
        self.crossings.len()
    }
    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }
    pub fn num_components(&self) -> usize {
        self.components.len()
    }
    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }
    pub fn euler_characteristic(&self) -> i64 {
        self.crossings.len() as i64 - self.segments.len() as i64 + self.regions.len() as i64
    }

    pub fn check_component(&self, comp: usize) -> Result<()> {
        if comp < self.components.len() {
            Ok(())
        } else {
            Err(Error::UnknownComponent(comp))
        }
    }

    pub fn check_segment(&self, s: usize) -> Result<()> {
        if s < self.segments.len() {
            Ok(())
        } else {
            Err(Error::UnknownSegment(s))
        }
    }

    /// Component of strand 0 or 1 at crossing `c`.
    pub fn strand_component(&self, c: usize, strand: usize) -> usize {
        self.segments[self.crossings[c].arms[strand]].component
    }

    pub fn is_self_crossing(&self, c: usize, comp: usize) -> bool {
        self.strand_component(c, 0) == comp && self.strand_component(c, 1) == comp
    }

    pub fn writhe(&self, comp: usize) -> Result<i64> {
        self.check_component(comp)?;
        Ok((0..self.crossings.len())
            .filter(|&c| self.is_self_crossing(c, comp))
            .map(|c| self.crossings[c].sign as i64)
            .sum())
    }

    pub fn self_crossings(&self, comp: usize) -> Result<usize> {
        self.check_component(comp)?;
        Ok((0..self.crossings.len()).filter(|&c| self.is_self_crossing(c, comp)).count())
    }

    /// Crossings between two distinct components.
    pub fn mixed_crossings(&self, a: usize, b: usize) -> Result<usize> {
        self.check_component(a)?;
        self.check_component(b)?;
        Ok((0..self.crossings.len())
            .filter(|&c| {
                let (x, y) = (self.strand_component(c, 0), self.strand_component(c, 1));
                a != b && ((x, y) == (a, b) || (x, y) == (b, a))
            })
            .count())
    }

    /// Whether the segment passes over at its `(crossing, slot)` end.
    pub fn is_over_at(&self, (c, slot): (usize, usize)) -> bool {
        slot % 2 == self.crossings[c].over_strand()
    }

    /// +1 over at the start and under at the end, -1 the reverse, else 0.
    pub fn segment_eta(&self, s: usize) -> Result<i8> {
        self.check_segment(s)?;
        let seg = &self.segments[s];
        Ok(match (self.is_over_at(seg.tail), self.is_over_at(seg.head)) {
            (true, false) => 1,
            (false, true) => -1,
            _ => 0,
        })
    }

    /// Segments bounding a region, with the side the region lies on.
    pub fn region_boundary(&self, r: usize) -> Vec<(usize, Side)> {
        let mut out = Vec::new();
        for &(c, k) in &self.regions[r] {
            let slot = (k + 1) % 4;
            let s = self.crossings[c].arms[slot];
            // leaving the corner along arm k+1: the region is to the right
            // when that arm is outgoing, to the left when incoming
            out.push((s, if slot >= 2 { Side::Right } else { Side::Left }));
        }
        out
    }

    // ---- constructors ----

    /// Closure of a braid word on `strands` strands; letter `±i` is
    /// `σ_i^{±1}` acting on positions `i-1, i` (position 0 on top).
    pub fn braid_closure(strands: usize, word: &[i32]) -> Result<Diagram> {
        let mut cur: Vec<usize> = (0..strands).collect();
        let mut next = strands;
        let mut cross = Vec::new();
        for &g in word {
            let i = g.unsigned_abs() as usize;
            if g == 0 || i >= strands {
                return Err(Error::Parse(format!("bad braid letter {g}")));
            }
            let (top, bot) = (next, next + 1);
            next += 2;
            cross.push((g.signum() as i8, [cur[i - 1], cur[i], bot, top]));
            cur[i - 1] = top;
            cur[i] = bot;
        }
        // glue the last segment at each position to the first
        let mut map: Vec<usize> = (0..next).collect();
        for (pos, &s) in cur.iter().enumerate() {
            if s == pos {
                return Err(Error::DanglingSegment(format!(
                    "braid position {pos} carries no crossing"
                )));
            }
            map[s] = pos;
        }
        let mut dense = vec![usize::MAX; next];
        let mut count = 0;
        for s in 0..next {
            if map[s] == s {
                dense[s] = count;
                count += 1;
            }
        }
        for s in 0..next {
            if map[s] != s {
                dense[s] = dense[map[s]];
            }
        }
        for (_, arms) in cross.iter_mut() {
            for a in arms.iter_mut() {
                *a = dense[*a];
            }
        }
        Diagram::from_arms(&cross, count)
    }

    /// The one-crossing kink diagram of the unknot. Segment 0 runs
    /// `out2 -> in1`, segment 1 runs `out1 -> in2`.
    pub fn kink(sign: i8) -> Diagram {
        Diagram::from_arms(&[(sign, [0, 1, 1, 0])], 2).expect("kink diagram is valid")
    }

    /// Standard alternating figure-eight diagram, closure of `σ1 σ2⁻¹ σ1 σ2⁻¹`.
    pub fn figure_eight() -> Diagram {
        Diagram::braid_closure(3, &[1, -2, 1, -2]).expect("figure-eight is valid")
    }

    /// Side-by-side union; the second diagram's ids are shifted.
    pub fn disjoint_union(&self, other: &Diagram) -> Diagram {
        let ns = self.segments.len();
        let mut cross: Vec<(i8, [usize; 4])> =
            self.crossings.iter().map(|c| (c.sign, c.arms)).collect();
        cross.extend(other.crossings.iter().map(|c| (c.sign, c.arms.map(|a| a + ns))));
        // on a clash every name of `other` gets the first suffix `#k` that
        // keeps all names distinct
        let taken: std::collections::HashSet<&String> = self.names.iter().collect();
        let clash = other.names.iter().any(|n| taken.contains(n));
        let mut names = self.names.clone();
        if clash {
            let k = (2..)
                .find(|k| other.names.iter().all(|n| !taken.contains(&format!("{n}#{k}"))))
                .expect("some suffix is free");
            names.extend(other.names.iter().map(|n| format!("{n}#{k}")));
        } else {
            names.extend(other.names.iter().cloned());
        }
        let mut d = Diagram::assemble(&cross, names).expect("union of valid diagrams");
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        // components of the union are ordered by min segment id, so the
        // first diagram's come first in their original order
        d.labels = labels;
        d
    }

    /// Switches every crossing; the rotation system is kept.
    pub fn mirror(&self) -> Diagram {
        let cross: Vec<(i8, [usize; 4])> =
            self.crossings.iter().map(|c| (-c.sign, c.arms)).collect();
        let mut d = Diagram::assemble(&cross, self.names.clone()).expect("mirror is valid");
        d.labels = self.labels.clone();
        d
    }

    pub fn reverse_component(&self, comp: usize) -> Result<Diagram> {
        self.check_component(comp)?;
        let cross: Vec<(i8, [usize; 4])> = (0..self.crossings.len())
            .map(|c| {
                let x = &self.crossings[c];
                let [a, b, cc, dd] = x.arms;
                let r1 = self.strand_component(c, 0) == comp;
                let r2 = self.strand_component(c, 1) == comp;
                match (r1, r2) {
                    (true, true) => (x.sign, [cc, dd, a, b]),
                    (true, false) => (-x.sign, [b, cc, dd, a]),
                    (false, true) => (-x.sign, [dd, a, b, cc]),
                    (false, false) => (x.sign, x.arms),
                }
            })
            .collect();
        let mut d = Diagram::assemble(&cross, self.names.clone())?;
        d.labels = self.labels.clone();
        Ok(d)
    }

    /// For `reversed = self.reverse_component(comp)`, the old region id of
    /// each new region.
    pub fn reversal_region_map(&self, reversed: &Diagram, comp: usize) -> Vec<usize> {
        reversed
            .regions
            .iter()
            .map(|corners| {
                let (c, i) = corners[0];
                let r1 = self.strand_component(c, 0) == comp;
                let r2 = self.strand_component(c, 1) == comp;
                let rot = match (r1, r2) {
                    (true, true) => 2,
                    (true, false) => 1,
                    (false, true) => 3,
                    (false, false) => 0,
                };
                self.crossings[c].region_at_corner(i + rot)
            })
            .collect()
    }

    // ---- rewrites ----

    /// Rebuilds from crossings over an extended segment id space, keeping
    /// old ids that survive in order and appending new ones.
    fn reassemble(
        &self,
        cross: Vec<(i8, [usize; 4])>,
        crossing_origin: Vec<Option<usize>>,
        ext_count: usize,
        rep_of_old: impl Fn(usize) -> Option<usize>,
    ) -> Result<(Diagram, Remap)> {
        let mut used = vec![false; ext_count];
        for (_, arms) in &cross {
            for &a in arms {
                used[a] = true;
            }
        }
        let mut dense = vec![usize::MAX; ext_count];
        let mut names = Vec::new();
        for s in 0..ext_count {
            if used[s] {
                dense[s] = names.len();
                let name = if s < self.names.len() {
                    self.names[s].clone()
                } else {
                    let mut n = format!("{s}");
                    while self.names.contains(&n) || names.contains(&n) {
                        n.push('\'');
                    }
                    n
                };
                names.push(name);
            }
        }
        let cross: Vec<(i8, [usize; 4])> =
            cross.into_iter().map(|(sg, arms)| (sg, arms.map(|a| dense[a]))).collect();
        let mut d = Diagram::assemble(&cross, names)?;
        let segments: Vec<Option<usize>> = (0..self.segments.len())
            .map(|s| rep_of_old(s).filter(|&e| used[e]).map(|e| dense[e]))
            .collect();
        let mut components = Vec::new();
        for (i, cyc) in self.components.iter().enumerate() {
            let newc = cyc
                .iter()
                .find_map(|&s| segments[s])
                .map(|s| d.segments[s].component)
                .ok_or_else(|| Error::IllegalSite(format!("component {i} would vanish")))?;
            d.labels[newc] = self.labels[i];
            components.push(newc);
        }
        let mut crossings = vec![None; self.crossings.len()];
        for (newc, o) in crossing_origin.iter().enumerate() {
            if let Some(o) = o {
                crossings[*o] = Some(newc);
            }
        }
        Ok((d, Remap { segments, crossings, components }))
    }

    /// Inserts a kink on segment `s`. The old id names the first half, the
    /// new crossing is appended, the second half and the loop are appended
    /// in that order.
    pub fn apply_r1(&self, s: usize, kind: R1Kind) -> Result<(Diagram, Remap)> {
        self.check_segment(s)?;
        if kind.sign != 1 && kind.sign != -1 {
            return Err(Error::IllegalSite("kink sign must be ±1".into()));
        }
        let ns = self.segments.len();
        let (sb, lp) = (ns, ns + 1);
        let x = self.crossings.len();
        let mut cross: Vec<(i8, [usize; 4])> =
            self.crossings.iter().map(|c| (c.sign, c.arms)).collect();
        let (hc, hj) = self.segments[s].head;
        cross[hc].1[hj] = sb;
        let arms = match kind.side {
            Side::Right => [s, lp, lp, sb],
            Side::Left => [lp, s, sb, lp],
        };
        cross.push((kind.sign, arms));
        let mut origin: Vec<Option<usize>> = (0..x).map(Some).collect();
        origin.push(None);
        self.reassemble(cross, origin, ns + 2, Some)
    }

    /// Whether crossing `x` is a removable kink: its two strands are joined
    /// by a segment bounding a monogon. Returns `(loop, incoming, outgoing)`.
    pub fn kink_at(&self, x: usize) -> Option<(usize, usize, usize)> {
        let arms = self.crossings[x].arms;
        // loop out1 -> in2 bounds the S monogon, out2 -> in1 the N monogon
        for (lo, li, ein, eout) in [(OUT1, IN2, IN1, OUT2), (OUT2, IN1, IN2, OUT1)] {
            let l = arms[lo];
            if arms[li] == l && arms[ein] != l {
                let corner = if lo == OUT1 { 1 } else { 3 };
                let r = self.crossings[x].region_at_corner(corner);
                if self.regions[r].len() == 1 {
                    return Some((l, arms[ein], arms[eout]));
                }
            }
        }
        None
    }

    /// Deletes crossings, splicing the strands through them. Segments that
    /// become equivalent keep the smallest id.
    fn splice(&self, delete: &[usize]) -> Result<(Diagram, Remap)> {
        let ns = self.segments.len();
        let mut parent: Vec<usize> = (0..ns).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &c in delete {
            let arms = self.crossings[c].arms;
            for j in 0..2 {
                let (a, b) = (find(&mut parent, arms[j]), find(&mut parent, arms[j + 2]));
                let (lo, hi) = (a.min(b), a.max(b));
                parent[hi] = lo;
            }
        }
        let mut cross = Vec::new();
        let mut origin = Vec::new();
        for (c, x) in self.crossings.iter().enumerate() {
            if delete.contains(&c) {
                continue;
            }
            cross.push((x.sign, x.arms.map(|a| find(&mut parent, a))));
            origin.push(Some(c));
        }
        let mut live = vec![false; ns];
        for (_, arms) in &cross {
            for &a in arms {
                live[a] = true;
            }
        }
        for s in 0..ns {
            let r = find(&mut parent, s);
            if !live[r] {
                return Err(Error::IllegalSite(
                    "removal would leave a crossingless circle".into(),
                ));
            }
        }
        let reps: Vec<usize> = (0..ns).map(|s| find(&mut parent, s)).collect();
        // only the representative of a class maps to a segment
        self.reassemble(cross, origin, ns, |s| if reps[s] == s { Some(s) } else { None })
            .map(|(d, mut remap)| {
                for s in 0..ns {
                    if reps[s] != s && remap.segments[s].is_none() {
                        remap.segments[s] = remap.segments[reps[s]];
                    }
                }
                (d, remap)
            })
    }

    /// Removes the kink at crossing `x`.
    pub fn remove_r1(&self, x: usize) -> Result<(Diagram, Remap)> {
        if x >= self.crossings.len() {
            return Err(Error::IllegalSite(format!("no crossing {x}")));
        }
        if self.kink_at(x).is_none() {
            return Err(Error::IllegalSite(format!("crossing {x} is not a kink")));
        }
        self.splice(&[x])
    }

    /// Pushes segment `s` across `t` through `region`, creating a bigon. The
    /// two new crossings are appended; the middle and final pieces of `s`
    /// and then of `t` are appended as new segments.
    pub fn apply_r2(&self, site: R2Site) -> Result<(Diagram, Remap)> {
        let R2Site { s, t, region, s_over } = site;
        self.check_segment(s)?;
        self.check_segment(t)?;
        if s == t {
            return Err(Error::IllegalSite("RII needs two distinct segments".into()));
        }
        if region >= self.regions.len() {
            return Err(Error::IllegalSite(format!("no region {region}")));
        }
        let side = |x: usize| -> Result<Side> {
            let seg = &self.segments[x];
            if seg.right == region {
                Ok(Side::Right)
            } else if seg.left == region {
                Ok(Side::Left)
            } else {
                Err(Error::IllegalSite(format!(
                    "segment {} does not border region {region}",
                    self.names[x]
                )))
            }
        };
        let (ss, ts) = (side(s)?, side(t)?);
        let over = if s_over { s } else { t };
        self.insert_bigon(s, ss, t, ts, [over, over])
    }

    /// Links segment `s` with segment `t` of another connected piece by a
    /// clasp: a bigon whose over strand switches. `s` passes over at the
    /// first crossing when `s_over_first`. Ids follow [`Diagram::apply_r2`].
    pub fn clasp(
        &self,
        s: usize,
        s_side: Side,
        t: usize,
        t_side: Side,
        s_over_first: bool,
    ) -> Result<(Diagram, Remap)> {
        self.check_segment(s)?;
        self.check_segment(t)?;
        if s == t {
            return Err(Error::IllegalSite("a clasp needs two distinct segments".into()));
        }
        let over = if s_over_first { [s, t] } else { [t, s] };
        self.insert_bigon(s, s_side, t, t_side, over)
    }

    /// Bigon between `s` and `t` on the given sides; `over[i]` names the
    /// segment whose strand is over at new crossing `i`.
    fn insert_bigon(
        &self,
        s: usize,
        ss: Side,
        t: usize,
        ts: Side,
        over: [usize; 2],
    ) -> Result<(Diagram, Remap)> {
        let ns = self.segments.len();
        let (s1, s2, t1, t2) = (ns, ns + 1, ns + 2, ns + 3);
        // local models: P runs up on the left, Q on the right
        struct Line {
            pieces: [usize; 3],
        }
        let sl = Line { pieces: [s, s1, s2] };
        let tl = Line { pieces: [t, t1, t2] };
        let deg = |a: f64| a * PI / 180.0;
        let mut arms_c1: Vec<Arm>;
        let mut arms_c2: Vec<Arm>;
        let (p, q, reflect, anti) = match (ss, ts) {
            (Side::Right, Side::Left) => (&sl, &tl, false, false),
            (Side::Left, Side::Right) => (&tl, &sl, false, false),
            (Side::Right, Side::Right) => (&sl, &tl, false, true),
            (Side::Left, Side::Left) => (&sl, &tl, true, true),
        };
        let (ptag, qtag) = (p.pieces[0], q.pieces[0]);
        if !anti {
            // c1 below c2; both strands run upward
            arms_c1 = vec![
                Arm::new(deg(225.0), p.pieces[0], true, ptag),
                Arm::new(deg(45.0), p.pieces[1], false, ptag),
                Arm::new(deg(315.0), q.pieces[0], true, qtag),
                Arm::new(deg(135.0), q.pieces[1], false, qtag),
            ];
            arms_c2 = vec![
                Arm::new(deg(315.0), p.pieces[1], true, ptag),
                Arm::new(deg(135.0), p.pieces[2], false, ptag),
                Arm::new(deg(225.0), q.pieces[1], true, qtag),
                Arm::new(deg(45.0), q.pieces[2], false, qtag),
            ];
        } else {
            // P runs up on the left, Q runs down on the right
            arms_c1 = vec![
                Arm::new(deg(225.0), p.pieces[0], true, ptag),
                Arm::new(deg(45.0), p.pieces[1], false, ptag),
                Arm::new(deg(135.0), q.pieces[1], true, qtag),
                Arm::new(deg(315.0), q.pieces[2], false, qtag),
            ];
            arms_c2 = vec![
                Arm::new(deg(315.0), p.pieces[1], true, ptag),
                Arm::new(deg(135.0), p.pieces[2], false, ptag),
                Arm::new(deg(45.0), q.pieces[0], true, qtag),
                Arm::new(deg(225.0), q.pieces[1], false, qtag),
            ];
        }
        if reflect {
            for a in arms_c1.iter_mut().chain(arms_c2.iter_mut()) {
                a.angle = PI - a.angle;
            }
        }
        let c1 = crossing_from_geometry(&arms_c1, over[0])?;
        let c2 = crossing_from_geometry(&arms_c2, over[1])?;

        let mut cross: Vec<(i8, [usize; 4])> =
            self.crossings.iter().map(|c| (c.sign, c.arms)).collect();
        let (hc, hj) = self.segments[s].head;
        cross[hc].1[hj] = s2;
        let (hc, hj) = self.segments[t].head;
        cross[hc].1[hj] = t2;
        cross.push(c1);
        cross.push(c2);
        let nc = self.crossings.len();
        let mut origin: Vec<Option<usize>> = (0..nc).map(Some).collect();
        origin.extend([None, None]);
        self.reassemble(cross, origin, ns + 4, Some)
    }

    /// Removes the two crossings around a bigon region when one strand is
    /// over at both.
    pub fn remove_r2(&self, region: usize) -> Result<(Diagram, Remap)> {
        if region >= self.regions.len() {
            return Err(Error::IllegalSite(format!("no region {region}")));
        }
        let corners = &self.regions[region];
        if corners.len() != 2 || corners[0].0 == corners[1].0 {
            return Err(Error::IllegalSite(format!("region {region} is not a bigon")));
        }
        let sides = self.region_boundary(region);
        let (c1, c2) = (corners[0].0, corners[1].0);
        // the over strand at each crossing must be the same side of the bigon
        let side_seg = |c: usize| -> Option<usize> {
            let x = &self.crossings[c];
            let o = x.over_strand();
            let pair = [x.arms[o], x.arms[o + 2]];
            sides.iter().map(|&(s, _)| s).find(|s| pair.contains(s))
        };
        match (side_seg(c1), side_seg(c2)) {
            (Some(a), Some(b)) if a == b => self.splice(&[c1, c2]),
            _ => Err(Error::IllegalSite(format!(
                "bigon {region} is not an RII bigon (over strand changes)"
            ))),
        }
    }

    /// Triangle faces where an RIII move applies.
    pub fn r3_sites(&self) -> Vec<usize> {
        (0..self.regions.len()).filter(|&r| self.r3_plan(r).is_ok()).collect()
    }

    /// Slides one strand across the crossing of the other two at a triangle
    /// face. Crossing and segment ids are preserved.
    pub fn apply_r3(&self, region: usize) -> Result<(Diagram, Remap)> {
        let plan = self.r3_plan(region)?;
        let mut cross: Vec<(i8, [usize; 4])> =
            self.crossings.iter().map(|c| (c.sign, c.arms)).collect();
        for (c, x) in plan {
            cross[c] = x;
        }
        let nc = self.crossings.len();
        self.reassemble(cross, (0..nc).map(Some).collect(), self.segments.len(), Some)
    }

    fn r3_plan(&self, region: usize) -> Result<Vec<(usize, (i8, [usize; 4]))>> {
        let bad = |why: &str| Error::IllegalSite(format!("region {region}: {why}"));
        if region >= self.regions.len() {
            return Err(bad("no such region"));
        }
        let corners = &self.regions[region];
        if corners.len() != 3 {
            return Err(bad("not a triangle"));
        }
        let cs: Vec<usize> = corners.iter().map(|c| c.0).collect();
        if cs[0] == cs[1] || cs[1] == cs[2] || cs[0] == cs[2] {
            return Err(bad("triangle corners are not distinct crossings"));
        }
        // side i leaves corner i and reaches corner i+1
        let sides: Vec<usize> =
            corners.iter().map(|&(c, k)| self.crossings[c].arms[(k + 1) % 4]).collect();
        if sides[0] == sides[1] || sides[1] == sides[2] || sides[0] == sides[2] {
            return Err(bad("triangle sides are not distinct segments"));
        }
        let ext_in = |e: usize| {
            let (c, j) = self.segments[e].tail;
            self.crossings[c].arms[j - 2]
        };
        let ext_out = |e: usize| {
            let (c, j) = self.segments[e].head;
            self.crossings[c].arms[j + 2]
        };
        // crossing shared by sides i and i+1 is corner i+1
        let shared = |i: usize, j: usize| -> usize {
            if (i + 1) % 3 == j {
                cs[j]
            } else {
                cs[i]
            }
        };

        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for perm in perms {
            for obits in 0..8u32 {
                let o: [f64; 3] =
                    [0, 1, 2].map(|k| if obits >> k & 1 == 1 { -1.0 } else { 1.0 });
                for reflect in [false, true] {
                    let map = |label: usize| -> usize {
                        let e = sides[perm[label % 10]];
                        match label / 10 {
                            1 => ext_in(e),
                            2 => e,
                            _ => ext_out(e),
                        }
                    };
                    let before = triangle_model(1.0, o, reflect);
                    let matches = before.iter().all(|(j, k, arms)| {
                        let c = shared_sorted(&shared, perm[*j], perm[*k]);
                        let mapped = arms.map(map);
                        mapped == self.crossings[c].arms
                    });
                    if !matches {
                        continue;
                    }
                    // which model line is over at each vertex
                    let mut over_count = [0; 3];
                    let mut over_at = Vec::new();
                    for (j, k, arms) in &before {
                        let c = shared_sorted(&shared, perm[*j], perm[*k]);
                        let x = &self.crossings[c];
                        let label = arms[x.over_strand()];
                        let line = label % 10;
                        over_count[line] += 1;
                        over_at.push((*j, *k, c, line));
                    }
                    if over_count.iter().all(|&n| n == 1) {
                        return Err(bad("over/under pattern is cyclic"));
                    }
                    let after = triangle_model(-1.0, o, reflect);
                    let mut plan = Vec::new();
                    for (j, k, arms) in after {
                        let &(_, _, c, line) = over_at
                            .iter()
                            .find(|(a, b, _, _)| (*a, *b) == (j, k))
                            .expect("same vertex set");
                        let tagged = triangle_vertex_arms(-1.0, o, reflect, j, k);
                        let (sign, _) = crossing_from_geometry(&tagged, 100 + line)?;
                        plan.push((c, (sign, arms.map(map))));
                    }
                    return Ok(plan);
                }
            }
        }
        Err(bad("no local model matches"))
    }
}

fn shared_sorted(shared: &dyn Fn(usize, usize) -> usize, a: usize, b: usize) -> usize {
    // `shared` expects consecutive sides; either order works
    if (a + 1) % 3 == b {
        shared(a, b)
    } else {
        shared(b, a)
    }
}

/// One arm of a crossing in a local geometric model.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Arm {
    pub angle: f64,
    pub seg: usize,
    pub incoming: bool,
    /// Any tag identifying the strand the arm belongs to.
    pub strand: usize,
}

impl Arm {
    pub fn new(angle: f64, seg: usize, incoming: bool, strand: usize) -> Self {
        Arm { angle, seg, incoming, strand }
    }
}

/// Orders four arms counter-clockwise into `[in1, in2, out1, out2]` and
/// derives the sign from which strand passes over.
pub(crate) fn crossing_from_geometry(arms: &[Arm], over_strand: usize) -> Result<(i8, [usize; 4])> {
    let mut a: Vec<Arm> = arms.to_vec();
    let norm = |x: f64| x.rem_euclid(2.0 * PI);
    a.sort_by(|x, y| norm(x.angle).partial_cmp(&norm(y.angle)).unwrap());
    let bad = || Error::IllegalSite("local model is not a transverse crossing".into());
    let i = (0..4).find(|&i| a[i].incoming && a[(i + 1) % 4].incoming).ok_or_else(bad)?;
    let order = [a[i], a[(i + 1) % 4], a[(i + 2) % 4], a[(i + 3) % 4]];
    if order[2].incoming
        || order[3].incoming
        || order[0].strand != order[2].strand
        || order[1].strand != order[3].strand
        || order[0].strand == order[1].strand
    {
        return Err(bad());
    }
    let strand1_over = order[0].strand == over_strand;
    if !strand1_over && order[1].strand != over_strand {
        return Err(bad());
    }
    let sign = if strand1_over == (OVER_STRAND_AT_POSITIVE == 0) { 1 } else { -1 };
    Ok((sign, [order[0].seg, order[1].seg, order[2].seg, order[3].seg]))
}

/// Arms at the vertex of lines `j < k` in the three-line model, labelled
/// `10 + line` (incoming external), `20 + line` (inner), `30 + line`
/// (outgoing external); strand tags are `100 + line`.
fn triangle_vertex_arms(d: f64, o: [f64; 3], reflect: bool, j: usize, k: usize) -> Vec<Arm> {
    let phi = |l: usize| PI / 2.0 + 2.0 * PI * l as f64 / 3.0;
    let normal = |l: usize| (phi(l).cos(), phi(l).sin());
    let dir = |l: usize| {
        let (c, s) = (phi(l).cos(), phi(l).sin());
        (o[l] * s, -o[l] * c)
    };
    let vertex = |a: usize, b: usize| {
        let (n1, n2) = (normal(a), normal(b));
        let det = n1.0 * n2.1 - n1.1 * n2.0;
        ((d * n2.1 - n1.1 * d) / det, (n1.0 * d - d * n2.0) / det)
    };
    let param = |l: usize, v: (f64, f64)| {
        let u = dir(l);
        v.0 * u.0 + v.1 * u.1
    };
    let third = 3 - j - k;
    let v = vertex(j, k);
    let mut arms = Vec::new();
    for l in [j, k] {
        let w = vertex(l.min(third), l.max(third));
        let first = param(l, v) < param(l, w);
        let u = dir(l);
        let out_angle = u.1.atan2(u.0);
        let in_angle = (-u.1).atan2(-u.0);
        let (in_label, out_label) = if first { (10 + l, 20 + l) } else { (20 + l, 30 + l) };
        arms.push(Arm::new(in_angle, in_label, true, 100 + l));
        arms.push(Arm::new(out_angle, out_label, false, 100 + l));
    }
    if reflect {
        for a in arms.iter_mut() {
            a.angle = PI - a.angle;
        }
    }
    arms
}

fn triangle_model(d: f64, o: [f64; 3], reflect: bool) -> Vec<(usize, usize, [usize; 4])> {
    [(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .map(|(j, k)| {
            let arms = triangle_vertex_arms(d, o, reflect, j, k);
            let (_, order) = crossing_from_geometry(&arms, 100 + j).expect("model is transverse");
            (j, k, order)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kink_counts() {
        let d = Diagram::kink(1);
        assert_eq!(d.num_crossings(), 1);
        assert_eq!(d.num_components(), 1);
        assert_eq!(d.num_regions(), 3);
        assert_eq!(d.writhe(0).unwrap(), 1);
        assert_eq!(d.segment_eta(0).unwrap(), -1);
        assert_eq!(d.segment_eta(1).unwrap(), 1);
    }

    #[test]
    fn figure_eight_counts() {
        let d = Diagram::figure_eight();
        assert_eq!((d.num_crossings(), d.num_segments(), d.num_regions()), (4, 8, 6));
        assert_eq!(d.num_components(), 1);
        assert_eq!(d.writhe(0).unwrap(), 0);
    }

    #[test]
    fn two_kinks_share_outer_region() {
        let d = Diagram::kink(1).disjoint_union(&Diagram::kink(1));
        assert_eq!(d.num_components(), 2);
        assert_eq!(d.pieces(), 2);
        // 2 monogons each, plus one shared outside
        assert_eq!(d.num_regions(), 5);
    }

    #[test]
    fn repeated_unions_keep_names_distinct() {
        let k = Diagram::kink(1);
        let d = k.disjoint_union(&k).disjoint_union(&k).disjoint_union(&k);
        let names: std::collections::HashSet<&String> = d.names().iter().collect();
        assert_eq!(names.len(), d.num_segments());
        assert_eq!(d.num_components(), 4);
    }

    #[test]
    fn hopf_link_mixed_only() {
        let d = Diagram::braid_closure(2, &[1, 1]).unwrap();
        assert_eq!(d.num_components(), 2);
        assert_eq!(d.writhe(0).unwrap(), 0);
        assert_eq!(d.writhe(1).unwrap(), 0);
        assert_eq!(d.mixed_crossings(0, 1).unwrap(), 2);
    }

    #[test]
    fn region_sides_agree_with_boundary_walk() {
        let d = Diagram::figure_eight();
        for r in 0..d.num_regions() {
            for (s, side) in d.region_boundary(r) {
                let seg = d.segment(s);
                match side {
                    Side::Left => assert_eq!(seg.left, r),
                    Side::Right => assert_eq!(seg.right, r),
                }
            }
        }
    }

    #[test]
    fn labels_parse() {
        assert_eq!(SurgeryLabel::parse(Some("3/1")).unwrap(), SurgeryLabel::Rational { p: 3, q: 1 });
        assert_eq!(SurgeryLabel::parse(Some("inf")).unwrap(), SurgeryLabel::Cusp);
        assert_eq!(SurgeryLabel::parse(None).unwrap(), SurgeryLabel::Boundary);
        assert!(matches!(SurgeryLabel::parse(Some("4/2")), Err(Error::BadLabel(_))));
    }

    #[test]
    fn dangling_segment_rejected() {
        let r = [CrossingRecord::new(1, ["a", "b"], ["b", "c"])];
        assert!(matches!(Diagram::build(&r, &BTreeMap::new()), Err(Error::DanglingSegment(_))));
    }

    #[test]
    fn nonplanar_rejected() {
        // the kink with one crossing's outputs swapped is not planar
        let err = Diagram::from_arms(&[(1, [0, 1, 0, 1])], 2).unwrap_err();
        assert!(matches!(err, Error::NonPlanar { .. }), "{err:?}");
    }

    #[test]
    fn r1_insert_remove_round_trip() {
        let d = Diagram::figure_eight();
        for s in 0..d.num_segments() {
            for kind in R1Kind::ALL {
                let (k, _) = d.apply_r1(s, kind).unwrap();
                assert_eq!(k.num_crossings(), 5);
                let x = k.num_crossings() - 1;
                assert!(k.kink_at(x).is_some());
                let (back, _) = k.remove_r1(x).unwrap();
                assert_eq!(back, d);
            }
        }
    }

    #[test]
    fn r2_insert_remove_round_trip() {
        let d = Diagram::figure_eight();
        for r in 0..d.num_regions() {
            let b = d.region_boundary(r);
            for &(s, _) in &b {
                for &(t, _) in &b {
                    if s == t {
                        continue;
                    }
                    for s_over in [true, false] {
                        let (e, _) = d.apply_r2(R2Site { s, t, region: r, s_over }).unwrap();
                        assert_eq!(e.num_crossings(), 6);
                        let bigon = (0..e.num_regions())
                            .find(|&q| {
                                let cs: Vec<usize> = e.regions()[q].iter().map(|c| c.0).collect();
                                cs.len() == 2 && cs.contains(&4) && cs.contains(&5)
                            })
                            .expect("bigon");
                        let (back, _) = e.remove_r2(bigon).unwrap();
                        assert_eq!(back, d);
                    }
                }
            }
        }
    }

    #[test]
    fn r3_on_braid_triangle() {
        let d = Diagram::braid_closure(3, &[1, 2, 1]).unwrap();
        let sites = d.r3_sites();
        assert!(!sites.is_empty());
        let (e, _) = d.apply_r3(sites[0]).unwrap();
        assert_eq!(e.num_crossings(), 3);
        assert_ne!(e, d);
        // σ1σ2σ1 and σ2σ1σ2 close up to the same trefoil-type counts
        assert_eq!(e.num_regions(), d.num_regions());
        assert_eq!(e.writhe(0).unwrap(), d.writhe(0).unwrap());
    }

    #[test]
    fn alternating_triangles_rejected() {
        // faces of an alternating diagram have cyclic over/under patterns
        let d = Diagram::braid_closure(3, &[1, -2, 1, -2]).unwrap();
        let tri: Vec<usize> = (0..d.num_regions()).filter(|&r| d.regions()[r].len() == 3).collect();
        assert!(!tri.is_empty());
        for r in tri {
            assert!(matches!(d.apply_r3(r), Err(Error::IllegalSite(_))));
        }
    }

    #[test]
    fn mirror_and_reverse_are_involutions() {
        let d = Diagram::figure_eight();
        assert_eq!(d.mirror().mirror(), d);
        assert_eq!(d.reverse_component(0).unwrap().reverse_component(0).unwrap(), d);
        assert_eq!(Diagram::kink(1).mirror(), Diagram::kink(-1));
    }

    #[test]
    fn reversal_negates_eta() {
        let d = Diagram::figure_eight();
        let r = d.reverse_component(0).unwrap();
        for s in 0..d.num_segments() {
            assert_eq!(r.segment_eta(s).unwrap(), -d.segment_eta(s).unwrap());
        }
    }

    #[test]
    fn geometry_builder_matches_braid_convention() {
        let deg = |a: f64| a * PI / 180.0;
        let arms = [
            Arm::new(deg(135.0), 10, true, 0),
            Arm::new(deg(225.0), 11, true, 1),
            Arm::new(deg(315.0), 12, false, 0),
            Arm::new(deg(45.0), 13, false, 1),
        ];
        assert_eq!(crossing_from_geometry(&arms, 0).unwrap(), (1, [10, 11, 12, 13]));
        assert_eq!(crossing_from_geometry(&arms, 1).unwrap(), (-1, [10, 11, 12, 13]));
    }
}
