//! JSON documents. Complex numbers are `[re, im]` pairs and every document
//! carries `"format": 1`.
//!
//! Segments are always keyed by their user-facing names, components by
//! `"comp<i>"` (or any key [`Diagram::component_by_key`] accepts), regions
//! by their dense internal index.

use crate::diagram::{CrossingRecord, Diagram, SurgeryLabel};
use crate::dilog::{ModKind, ModValue, C64, TWO_PI_SQ};
use crate::error::{Error, Result};
use crate::flatten::{FlatteningReport, Flattening, LogDecoration};
use crate::shapes::{Shape, Shaping, ValidationReport};
use crate::solver::{Constraint, Pin, PinVar, SolveRequest, SolveResult};
use crate::volume::VolumeReport;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

pub const FORMAT: u64 = 1;

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn cx(z: C64) -> Value {
    json!([z.re, z.im])
}

/// `[re, im]`, or a bare number for a real value.
pub fn parse_cx(v: &Value, what: &str) -> Result<C64> {
    if let Some(x) = v.as_f64() {
        return Ok(C64::new(x, 0.0));
    }
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(C64::new(re, im)),
            _ => Err(perr(format!("{what}: expected [re, im] numbers"))),
        },
        _ => Err(perr(format!("{what}: expected [re, im]"))),
    }
}

fn cx_list(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| cx(z)).collect())
}

fn parse_cx_list(v: &Value, what: &str) -> Result<Vec<C64>> {
    v.as_array()
        .ok_or_else(|| perr(format!("{what}: expected a list")))?
        .iter()
        .enumerate()
        .map(|(i, x)| parse_cx(x, &format!("{what}[{i}]")))
        .collect()
}

/// A value stays the "same" reduced class whichever representative sits in
/// the report, so volumes are always written reduced. Rounding just below
/// `2π²` is written as 0.
pub fn volume_value(v: &ModValue) -> Value {
    let mut z = v.reduced().value;
    let w = match v.kind {
        ModKind::Real2PiSq => &mut z.re,
        ModKind::Imag2PiSq => &mut z.im,
    };
    if TWO_PI_SQ - *w < 1e-12 {
        *w = 0.0;
    }
    cx(z)
}

fn id_string(v: &Value, what: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(perr(format!("{what}: segment ids must be strings or integers"))),
    }
}

/// Rejects documents tagged with a format other than 1.
pub fn check_format(v: &Value) -> Result<()> {
    match v.get("format") {
        None => Ok(()),
        Some(f) if f.as_u64() == Some(FORMAT) => Ok(()),
        Some(f) => Err(perr(format!("unsupported format {f}, expected {FORMAT}"))),
    }
}

fn with_format(mut m: Map<String, Value>) -> Value {
    m.insert("format".into(), json!(FORMAT));
    Value::Object(m)
}

fn obj(v: &Value, what: &str) -> Result<Map<String, Value>> {
    v.as_object().cloned().ok_or_else(|| perr(format!("{what}: expected an object")))
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| perr(e.to_string()))
}

// ---- diagrams ----

pub fn parse_diagram(v: &Value) -> Result<Diagram> {
    check_format(v)?;
    let crossings = v
        .get("crossings")
        .and_then(|c| c.as_array())
        .ok_or_else(|| perr("diagram: missing \"crossings\" list"))?;
    let mut records = Vec::with_capacity(crossings.len());
    for (i, c) in crossings.iter().enumerate() {
        let what = format!("crossings[{i}]");
        let sign = c.get("sign").and_then(|s| s.as_i64()).ok_or_else(|| perr(format!("{what}: missing sign")))?;
        if sign != 1 && sign != -1 {
            return Err(perr(format!("{what}: sign must be 1 or -1")));
        }
        let pair = |key: &str| -> Result<[String; 2]> {
            match c.get(key).and_then(|x| x.as_array()).map(|a| a.as_slice()) {
                Some([x, y]) => Ok([id_string(x, &what)?, id_string(y, &what)?]),
                _ => Err(perr(format!("{what}: \"{key}\" must list two segments"))),
            }
        };
        let [in1, in2] = pair("in")?;
        let [out1, out2] = pair("out")?;
        let regions = match c.get("regions") {
            None | Some(Value::Null) => None,
            Some(r) => match r.as_array().map(|a| a.as_slice()) {
                Some([n, w, s, e]) => {
                    Some([id_string(n, &what)?, id_string(w, &what)?, id_string(s, &what)?, id_string(e, &what)?])
                }
                _ => return Err(perr(format!("{what}: \"regions\" must list N, W, S, E"))),
            },
        };
        records.push(CrossingRecord { sign: sign as i8, in1, in2, out1, out2, regions });
    }
    let mut labels = BTreeMap::new();
    if let Some(l) = v.get("labels") {
        for (key, val) in obj(l, "labels")? {
            let label = match &val {
                Value::Null => SurgeryLabel::Boundary,
                Value::String(s) => SurgeryLabel::parse(Some(s))?,
                Value::Number(n) => SurgeryLabel::parse(Some(&n.to_string()))?,
                _ => return Err(Error::BadLabel(format!("{key}: {val}"))),
            };
            labels.insert(key, label);
        }
    }
    Diagram::build(&records, &labels)
}

fn label_value(l: &SurgeryLabel) -> Value {
    match l {
        SurgeryLabel::Boundary => Value::Null,
        other => json!(other.to_string()),
    }
}

pub fn diagram_to_json(d: &Diagram) -> Value {
    let name = |s: usize| -> Value {
        let n = &d.names()[s];
        match n.parse::<i64>() {
            Ok(i) if i.to_string() == *n => json!(i),
            _ => json!(n),
        }
    };
    let crossings: Vec<Value> = d
        .crossings()
        .iter()
        .map(|c| {
            json!({
                "sign": c.sign,
                "in": [name(c.arms[0]), name(c.arms[1])],
                "out": [name(c.arms[2]), name(c.arms[3])],
                "regions": c.regions,
            })
        })
        .collect();
    let mut labels = Map::new();
    for (i, l) in d.labels().iter().enumerate() {
        labels.insert(format!("comp{i}"), label_value(l));
    }
    let mut m = Map::new();
    m.insert("crossings".into(), Value::Array(crossings));
    m.insert("labels".into(), Value::Object(labels));
    with_format(m)
}

/// Counts, writhes and the Euler check.
pub fn diagram_summary(d: &Diagram) -> Value {
    let comps: Vec<Value> = (0..d.num_components())
        .map(|i| {
            json!({
                "component": format!("comp{i}"),
                "segments": d.components()[i].iter().map(|&s| d.names()[s].clone()).collect::<Vec<_>>(),
                "writhe": d.writhe(i).unwrap_or(0),
                "label": label_value(&d.labels()[i]),
            })
        })
        .collect();
    json!({
        "crossings": d.num_crossings(),
        "segments": d.num_segments(),
        "regions": d.num_regions(),
        "components": comps,
        "euler": d.euler_characteristic(),
    })
}

// ---- shapings ----

pub fn parse_shaping(d: &Diagram, v: &Value) -> Result<Shaping> {
    check_format(v)?;
    let segs = obj(v.get("segments").ok_or_else(|| perr("shaping: missing \"segments\""))?, "segments")?;
    let mut shapes: Vec<Option<Shape>> = vec![None; d.num_segments()];
    for (key, val) in &segs {
        let s = d
            .names()
            .iter()
            .position(|n| n == key)
            .ok_or_else(|| perr(format!("shaping: unknown segment {key}")))?;
        let get = |k: &str| -> Result<C64> {
            parse_cx(val.get(k).ok_or_else(|| perr(format!("segment {key}: missing {k}")))?, &format!("segment {key}.{k}"))
        };
        shapes[s] = Some(Shape::new(get("a")?, get("b")?, get("m")?));
    }
    let missing: Vec<&str> = (0..d.num_segments())
        .filter(|&s| shapes[s].is_none())
        .map(|s| d.names()[s].as_str())
        .collect();
    if !missing.is_empty() {
        return Err(perr(format!("shaping: no shape for segments {}", missing.join(", "))));
    }
    Ok(Shaping::new(shapes.into_iter().map(|s| s.unwrap()).collect()))
}

pub fn shaping_to_json(d: &Diagram, chi: &Shaping) -> Value {
    let mut segs = Map::new();
    for s in 0..d.num_segments() {
        let x = chi.get(s);
        segs.insert(d.names()[s].clone(), json!({"a": cx(x.a), "b": cx(x.b), "m": cx(x.m)}));
    }
    let mut m = Map::new();
    m.insert("segments".into(), Value::Object(segs));
    with_format(m)
}

pub fn validation_to_json(d: &Diagram, r: &ValidationReport) -> Value {
    let num = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
    json!({
        "passed": r.passed,
        "max_residual": num(r.max_residual),
        "crossing_residuals": r.crossing_residuals.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "meridian_residuals": r.meridian_residuals.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "degenerate": r.degenerate,
        "components": d.num_components(),
    })
}

// ---- flattenings and decorations ----

pub fn parse_flattening(d: &Diagram, v: &Value) -> Result<Flattening> {
    check_format(v)?;
    let mu = parse_cx_list(v.get("mu").ok_or_else(|| perr("flattening: missing mu"))?, "mu")?;
    let gamma = parse_cx_list(v.get("gamma").ok_or_else(|| perr("flattening: missing gamma"))?, "gamma")?;
    let beta_obj = obj(v.get("beta").ok_or_else(|| perr("flattening: missing beta"))?, "beta")?;
    let mut beta = vec![None; d.num_segments()];
    for (key, val) in &beta_obj {
        let s = d
            .names()
            .iter()
            .position(|n| n == key)
            .ok_or_else(|| perr(format!("flattening: unknown segment {key}")))?;
        beta[s] = Some(parse_cx(val, &format!("beta.{key}"))?);
    }
    if mu.len() != d.num_components() || gamma.len() != d.num_regions() || beta.iter().any(|b| b.is_none()) {
        return Err(perr(format!(
            "flattening: expected {} mu, {} beta and {} gamma values",
            d.num_components(),
            d.num_segments(),
            d.num_regions()
        )));
    }
    Ok(Flattening { mu, beta: beta.into_iter().map(|b| b.unwrap()).collect(), gamma })
}

pub fn flattening_to_json(d: &Diagram, f: &Flattening) -> Value {
    let mut beta = Map::new();
    for s in 0..d.num_segments() {
        beta.insert(d.names()[s].clone(), cx(f.beta[s]));
    }
    let mut m = Map::new();
    m.insert("mu".into(), cx_list(&f.mu));
    m.insert("beta".into(), Value::Object(beta));
    m.insert("gamma".into(), cx_list(&f.gamma));
    with_format(m)
}

pub fn flattening_report_to_json(r: &FlatteningReport) -> Value {
    json!({
        "passed": r.passed,
        "mu_residual": r.mu_residual,
        "beta_residual": r.beta_residual,
        "region_residual": r.region_residual,
        "tetrahedron_residual": r.tetrahedron_residual,
    })
}

pub fn decoration_to_json(dec: &LogDecoration) -> Value {
    let comps: Vec<Value> = (0..dec.len())
        .map(|i| json!({"component": format!("comp{i}"), "mu": cx(dec.mu[i]), "lambda": cx(dec.lambda[i])}))
        .collect();
    Value::Array(comps)
}

/// `{"comp0": {"mu": [..], "lambda": [..]}, ...}`, optionally wrapped in
/// `{"targets": ...}`.
pub fn parse_targets(d: &Diagram, v: &Value) -> Result<Vec<(usize, C64, C64)>> {
    check_format(v)?;
    let inner = v.get("targets").unwrap_or(v);
    let mut out = Vec::new();
    for (key, val) in obj(inner, "targets")? {
        if key == "format" {
            continue;
        }
        let comp = d.component_by_key(&key)?;
        let mu = parse_cx(val.get("mu").ok_or_else(|| perr(format!("target {key}: missing mu")))?, "mu")?;
        let lambda =
            parse_cx(val.get("lambda").ok_or_else(|| perr(format!("target {key}: missing lambda")))?, "lambda")?;
        out.push((comp, mu, lambda));
    }
    out.sort_by_key(|t| t.0);
    Ok(out)
}

pub fn volume_report_to_json(r: &VolumeReport) -> Value {
    let per: Vec<Value> = r
        .per_crossing
        .iter()
        .map(|c| {
            json!({
                "crossing": c.crossing,
                "value": volume_value(&ModValue::volume(c.value)),
                "pinched": c.pinched,
            })
        })
        .collect();
    let fillings: Vec<Value> = r
        .fillings
        .iter()
        .map(|(c, v)| json!({"component": format!("comp{c}"), "value": volume_value(&ModValue::volume(*v))}))
        .collect();
    let mut m = Map::new();
    m.insert("volume".into(), volume_value(&r.total));
    m.insert("per_crossing".into(), Value::Array(per));
    m.insert("fillings".into(), Value::Array(fillings));
    m.insert("decoration".into(), decoration_to_json(&r.decoration));
    m.insert("warnings".into(), json!(r.warnings));
    with_format(m)
}

// ---- solver ----

/// `{"parabolic": 1}`, `{"meridian": [re, im]}` or `{"filling": [p, q]}`.
pub fn parse_constraint(v: &Value) -> Result<Constraint> {
    if let Some(s) = v.get("parabolic") {
        return match s.as_i64() {
            Some(1) => Ok(Constraint::Parabolic(1)),
            Some(-1) => Ok(Constraint::Parabolic(-1)),
            _ => Err(perr("parabolic sign must be 1 or -1")),
        };
    }
    if let Some(m) = v.get("meridian") {
        return Ok(Constraint::FixedMeridian(parse_cx(m, "meridian")?));
    }
    if let Some(f) = v.get("filling") {
        return match f.as_array().map(|a| a.as_slice()) {
            Some([p, q]) => match (p.as_i64(), q.as_i64()) {
                (Some(p), Some(q)) => Ok(Constraint::Filling { p, q }),
                _ => Err(perr("filling: expected integers [p, q]")),
            },
            _ => Err(perr("filling: expected [p, q]")),
        };
    }
    Err(perr(format!("unknown constraint {v}")))
}

pub fn constraint_to_json(c: &Constraint) -> Value {
    match *c {
        Constraint::FixedMeridian(m) => json!({"meridian": cx(m)}),
        Constraint::Parabolic(s) => json!({"parabolic": s}),
        Constraint::Filling { p, q } => json!({"filling": [p, q]}),
    }
}

/// The diagram is either inline under `"diagram"` or passed separately.
pub fn parse_solve_request(v: &Value, diagram: Option<Diagram>) -> Result<SolveRequest> {
    check_format(v)?;
    let d = match (diagram, v.get("diagram")) {
        (Some(d), _) => d,
        (None, Some(dv)) => parse_diagram(dv)?,
        (None, None) => return Err(perr("solve request: missing diagram")),
    };
    let cons = obj(v.get("constraints").ok_or_else(|| perr("solve request: missing constraints"))?, "constraints")?;
    let mut per: Vec<Option<Constraint>> = vec![None; d.num_components()];
    for (key, val) in &cons {
        per[d.component_by_key(key)?] = Some(parse_constraint(val)?);
    }
    if let Some(i) = per.iter().position(|c| c.is_none()) {
        return Err(perr(format!("solve request: no constraint for comp{i}")));
    }
    let mut req = SolveRequest::new(&d, per.into_iter().map(|c| c.unwrap()).collect());
    if let Some(pins) = v.get("pins") {
        for (i, p) in pins.as_array().ok_or_else(|| perr("pins: expected a list"))?.iter().enumerate() {
            let what = format!("pins[{i}]");
            let seg = id_string(p.get("segment").ok_or_else(|| perr(format!("{what}: missing segment")))?, &what)?;
            let segment = d
                .names()
                .iter()
                .position(|n| *n == seg)
                .ok_or_else(|| perr(format!("{what}: unknown segment {seg}")))?;
            let var = match p.get("var").and_then(|x| x.as_str()) {
                Some("a") => PinVar::A,
                Some("b") => PinVar::B,
                _ => return Err(perr(format!("{what}: var must be \"a\" or \"b\""))),
            };
            let value = parse_cx(p.get("value").ok_or_else(|| perr(format!("{what}: missing value")))?, &what)?;
            req.pins.push(Pin { segment, var, value });
        }
    }
    if let Some(s) = v.get("seed") {
        req.seed = s.as_u64().ok_or_else(|| perr("seed must be a nonnegative integer"))?;
    }
    if let Some(s) = v.get("starts") {
        req.starts = s.as_u64().ok_or_else(|| perr("starts must be a nonnegative integer"))? as usize;
    }
    if let Some(t) = v.get("tol") {
        req.tol = t.as_f64().ok_or_else(|| perr("tol must be a number"))?;
    }
    Ok(req)
}

pub fn solve_results_to_json(req: &SolveRequest, results: &[SolveResult]) -> Value {
    let d = &req.diagram;
    let list: Vec<Value> = results
        .iter()
        .map(|r| {
            json!({
                "shaping": shaping_to_json(d, &r.shaping),
                "residual": r.residual,
                "start": r.start,
                "pinched": r.pinched,
                "rank_deficiency": r.rank_deficiency,
                "volume": r.volume.map(|v| volume_value(&ModValue::volume(v))),
            })
        })
        .collect();
    let mut cons = Map::new();
    for (i, c) in req.constraints.iter().enumerate() {
        cons.insert(format!("comp{i}"), constraint_to_json(c));
    }
    let mut m = Map::new();
    m.insert("constraints".into(), Value::Object(cons));
    m.insert("seed".into(), json!(req.seed));
    m.insert("starts".into(), json!(req.starts));
    m.insert("tol".into(), json!(req.tol));
    m.insert("results".into(), Value::Array(list));
    with_format(m)
}

// ---- presentations ----

/// A diagram with optional shaping, flattening and boundary targets, as
/// stored in one document.
#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    pub diagram: Diagram,
    pub shaping: Option<Shaping>,
    pub flattening: Option<Flattening>,
    pub targets: Vec<(usize, C64, C64)>,
    pub expected: Option<C64>,
}

pub fn parse_presentation(v: &Value) -> Result<Presentation> {
    check_format(v)?;
    let diagram = parse_diagram(v.get("diagram").ok_or_else(|| perr("presentation: missing diagram"))?)?;
    let shaping = match v.get("shaping") {
        Some(s) if !s.is_null() => Some(parse_shaping(&diagram, s)?),
        _ => None,
    };
    let flattening = match v.get("flattening") {
        Some(f) if !f.is_null() => Some(parse_flattening(&diagram, f)?),
        _ => None,
    };
    let targets = match v.get("targets") {
        Some(t) if !t.is_null() => parse_targets(&diagram, t)?,
        _ => vec![],
    };
    let expected = match v.get("expected") {
        Some(e) if !e.is_null() => Some(parse_cx(e, "expected")?),
        _ => None,
    };
    Ok(Presentation { diagram, shaping, flattening, targets, expected })
}

pub fn presentation_to_json(p: &Presentation) -> Value {
    let d = &p.diagram;
    let mut m = Map::new();
    m.insert("diagram".into(), diagram_to_json(d));
    if let Some(s) = &p.shaping {
        m.insert("shaping".into(), shaping_to_json(d, s));
    }
    if let Some(f) = &p.flattening {
        m.insert("flattening".into(), flattening_to_json(d, f));
    }
    if !p.targets.is_empty() {
        let mut t = Map::new();
        for &(c, mu, lambda) in &p.targets {
            t.insert(format!("comp{c}"), json!({"mu": cx(mu), "lambda": cx(lambda)}));
        }
        m.insert("targets".into(), Value::Object(t));
    }
    if let Some(e) = p.expected {
        m.insert("expected".into(), cx(e));
    }
    with_format(m)
}

pub fn error_to_json(e: &Error) -> Value {
    json!({"format": FORMAT, "error": {"kind": e.kind(), "message": e.to_string()}})
}

/// Pretty JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::lens_shaping;

    #[test]
    fn spec_diagram_format_parses() {
        let v = parse_json(r#"{"crossings":[{"sign":1,"in":[1,2],"out":[2,1]}],"labels":{"comp0":"3/1"}}"#).unwrap();
        let d = parse_diagram(&v).unwrap();
        assert_eq!(d.num_crossings(), 1);
        assert_eq!(d.num_regions(), 3);
        assert_eq!(d.labels()[0], SurgeryLabel::Rational { p: 3, q: 1 });
    }

    #[test]
    fn diagram_round_trip() {
        let d = Diagram::figure_eight().with_label(0, SurgeryLabel::Cusp).unwrap();
        let back = parse_diagram(&diagram_to_json(&d)).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn shaping_round_trip_is_exact() {
        let d = Diagram::kink(1);
        let chi = lens_shaping(7, 2).unwrap();
        let text = to_text(&shaping_to_json(&d, &chi));
        assert_eq!(parse_shaping(&d, &parse_json(&text).unwrap()).unwrap(), chi);
    }

    #[test]
    fn wrong_format_and_missing_shapes_are_refused() {
        let d = Diagram::kink(1);
        let bad = json!({"format": 2, "segments": {}});
        assert!(matches!(parse_shaping(&d, &bad), Err(Error::Parse(_))));
        let partial = json!({"segments": {"0": {"a": [1, 0], "b": [1, 0], "m": [1, 0]}}});
        assert!(matches!(parse_shaping(&d, &partial), Err(Error::Parse(_))));
    }

    #[test]
    fn bad_label_is_reported() {
        let v = json!({"crossings":[{"sign":1,"in":[1,2],"out":[2,1]}],"labels":{"comp0":"4/2"}});
        assert!(matches!(parse_diagram(&v), Err(Error::BadLabel(_))));
    }

    #[test]
    fn solve_request_parses() {
        let v = json!({
            "diagram": diagram_to_json(&Diagram::kink(1)),
            "constraints": {"comp0": {"meridian": [2, 0]}},
            "pins": [{"segment": 0, "var": "b", "value": [1, 0]}],
            "seed": 7, "starts": 3
        });
        let req = parse_solve_request(&v, None).unwrap();
        assert_eq!(req.constraints, vec![Constraint::FixedMeridian(C64::new(2.0, 0.0))]);
        assert_eq!(req.pins.len(), 1);
        assert_eq!((req.seed, req.starts), (7, 3));
    }
}
