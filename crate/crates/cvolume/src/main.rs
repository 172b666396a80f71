use clap::{Args, Parser, Subcommand};
use cvolume::diagram::{Diagram, SurgeryLabel};
use cvolume::flatten::{default_flattening, induced_decoration, validate_flattening, Flattening};
use cvolume::glue::{build_gluing_chain, GlueSide};
use cvolume::io::{self, Presentation};
use cvolume::selftest::{self, Config};
use cvolume::shapes::{lens_shaping, validate_shaping, Shaping};
use cvolume::solver::{solve_shaping, Constraint, SolveRequest, DEFAULT_TOL};
use cvolume::surgery::{lens_oracle, GluingMatrix};
use cvolume::volume::manifold_volume;
use cvolume::{Error, Result, C64};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Complex volumes of 3-manifolds from shaped, flattened link diagrams.
#[derive(Parser)]
#[command(name = "cvolume", version)]
struct Cli {
    /// Numerical tolerance for the solver and label checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Random starts for the shape solver.
    #[arg(long, global = true)]
    starts: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Presentation document (diagram, optional shaping, flattening, targets).
    input: Option<PathBuf>,
    /// Use a bundled presentation instead: kink, figure-eight, lens-family,
    /// gluing-chain or lens:P:Q:N.
    #[arg(long, conflicts_with = "input")]
    fixture: Option<String>,
    /// Separate shaping document, overriding the presentation's.
    #[arg(long)]
    shaping: Option<PathBuf>,
    /// Separate flattening document, overriding the presentation's.
    #[arg(long)]
    flattening: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a diagram and, when present, its shaping and flattening.
    Validate(Source),
    /// Solve for shapes. Constraints are `comp0=parabolic`, `comp0=parabolic:-1`,
    /// `comp0=meridian:RE,IM` or `comp0=filling:P,Q`.
    Solve {
        /// Full solve request document.
        #[arg(long, conflicts_with = "diagram")]
        request: Option<PathBuf>,
        /// Diagram or presentation document.
        #[arg(long)]
        diagram: Option<PathBuf>,
        #[arg(long = "constraint", short = 'c')]
        constraints: Vec<String>,
    },
    /// Complex volume of a shaped presentation.
    Volume {
        #[command(flatten)]
        source: Source,
        /// Print only the volume.
        #[arg(long, conflicts_with = "cs")]
        re: bool,
        /// Print only the Chern-Simons part, in [0, 2pi^2).
        #[arg(long)]
        cs: bool,
    },
    /// Solve for a p/q filling of one component and report its volume.
    Fill {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        component: usize,
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
    },
    /// Glue two shaped presentations along a boundary component each.
    Glue {
        #[arg(long)]
        one: PathBuf,
        #[arg(long)]
        two: PathBuf,
        #[arg(long, default_value_t = 0)]
        comp_one: usize,
        #[arg(long, default_value_t = 0)]
        comp_two: usize,
        /// `p,q,r,s` with `ps - qr = 1`.
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// The lens space L(p, q) from a shaped kink, against the closed form.
    Lens {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        q: i64,
        #[arg(long, default_value_t = 1)]
        n: i64,
    },
    /// Run the acceptance checks.
    Selftest {
        /// Only these criteria (1 to 10).
        #[arg(long = "criterion")]
        criteria: Vec<u32>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// One line per criterion instead of JSON.
        #[arg(long)]
        summary: bool,
    },
}

fn read(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    io::parse_json(&text)
}

fn load(src: &Source) -> Result<Presentation> {
    let mut p = match (&src.input, &src.fixture) {
        (_, Some(name)) => cvolume::fixtures::by_name(name)?,
        (Some(path), None) => {
            let v = read(path)?;
            // a bare diagram is a presentation with nothing else
            if v.get("diagram").is_some() {
                io::parse_presentation(&v)?
            } else {
                let diagram = io::parse_diagram(&v)?;
                Presentation { diagram, shaping: None, flattening: None, targets: vec![], expected: None }
            }
        }
        (None, None) => return Err(Error::Parse("give an input document or --fixture".into())),
    };
    if let Some(path) = &src.shaping {
        p.shaping = Some(io::parse_shaping(&p.diagram, &read(path)?)?);
    }
    if let Some(path) = &src.flattening {
        p.flattening = Some(io::parse_flattening(&p.diagram, &read(path)?)?);
    }
    Ok(p)
}

fn shaped(p: &Presentation) -> Result<(&Shaping, Flattening)> {
    let chi = p.shaping.as_ref().ok_or_else(|| Error::Parse("presentation has no shaping".into()))?;
    let f = match &p.flattening {
        Some(f) => f.clone(),
        None => default_flattening(&p.diagram, chi)?,
    };
    Ok((chi, f))
}

fn parse_constraint(text: &str) -> Result<(String, Constraint)> {
    let bad = || Error::Parse(format!("constraint {text}: expected comp=parabolic[:±1], comp=meridian:RE,IM or comp=filling:P,Q"));
    let (comp, rest) = text.split_once('=').ok_or_else(bad)?;
    let (kind, args) = rest.split_once(':').unwrap_or((rest, ""));
    let nums: Vec<&str> = if args.is_empty() { vec![] } else { args.split(',').collect() };
    let c = match (kind, nums.as_slice()) {
        ("parabolic", []) => Constraint::Parabolic(1),
        ("parabolic", [s]) => Constraint::Parabolic(s.parse().map_err(|_| bad())?),
        ("meridian", [re, im]) => {
            Constraint::FixedMeridian(C64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
        }
        ("filling", [p, q]) => Constraint::Filling { p: p.parse().map_err(|_| bad())?, q: q.parse().map_err(|_| bad())? },
        _ => return Err(bad()),
    };
    Ok((comp.to_string(), c))
}

fn apply_globals(cli: &Cli, req: &mut SolveRequest) {
    if let Some(s) = cli.seed {
        req.seed = s;
    }
    if let Some(n) = cli.starts {
        req.starts = n;
    }
    if let Some(t) = cli.tol {
        req.tol = t;
    }
}

fn solve(cli: &Cli, request: &Option<PathBuf>, diagram: &Option<PathBuf>, constraints: &[String]) -> Result<Value> {
    let mut req = match (request, diagram) {
        (Some(path), _) => io::parse_solve_request(&read(path)?, None)?,
        (None, Some(path)) => {
            let v = read(path)?;
            let d = io::parse_diagram(v.get("diagram").unwrap_or(&v))?;
            let mut per: Vec<Option<Constraint>> = vec![None; d.num_components()];
            for text in constraints {
                let (key, c) = parse_constraint(text)?;
                per[d.component_by_key(&key)?] = Some(c);
            }
            // unconstrained components default to the complete structure
            let cons = per.into_iter().map(|c| c.unwrap_or(Constraint::Parabolic(1))).collect();
            SolveRequest::new(&d, cons)
        }
        (None, None) => return Err(Error::Parse("solve needs --request or --diagram".into())),
    };
    apply_globals(cli, &mut req);
    let results = solve_shaping(&req)?;
    Ok(io::solve_results_to_json(&req, &results))
}

fn validate(src: &Source, tol: f64) -> Result<(Value, bool)> {
    let p = load(src)?;
    let d = &p.diagram;
    let mut ok = true;
    let mut out = json!({"format": io::FORMAT, "diagram": io::diagram_summary(d)});
    if let Some(chi) = &p.shaping {
        let r = validate_shaping(d, chi, tol);
        ok &= r.passed;
        out["shaping"] = io::validation_to_json(d, &r);
        if let Some(f) = &p.flattening {
            let r = validate_flattening(d, chi, f, tol);
            ok &= r.passed;
            out["flattening"] = io::flattening_report_to_json(&r);
        }
    }
    out["valid"] = json!(ok);
    Ok((out, ok))
}

/// Missing boundary targets fall back to the induced log-decoration.
fn volume(p: &Presentation, tol: f64) -> Result<Value> {
    let d = &p.diagram;
    let (chi, f) = shaped(p)?;
    let dec = induced_decoration(d, chi, &f)?;
    let mut targets = p.targets.clone();
    let mut warnings = Vec::new();
    for (comp, label) in d.labels().iter().enumerate() {
        if *label == SurgeryLabel::Boundary && !targets.iter().any(|t| t.0 == comp) {
            targets.push((comp, dec.mu[comp], dec.lambda[comp]));
            warnings.push(format!("comp{comp}: no boundary target, using the induced log-decoration"));
        }
    }
    let report = manifold_volume(d, chi, &f, &targets, tol)?;
    let mut v = io::volume_report_to_json(&report);
    if let Some(w) = v.get_mut("warnings").and_then(|w| w.as_array_mut()) {
        w.extend(warnings.into_iter().map(Value::from));
    }
    Ok(v)
}

fn fill(cli: &Cli, src: &Source, component: usize, p: i64, q: i64) -> Result<Value> {
    let pres = load(src)?;
    let d = pres.diagram.with_label(component, SurgeryLabel::rational(p, q)?)?;
    let cons = d
        .labels()
        .iter()
        .map(|l| match *l {
            SurgeryLabel::Rational { p, q } => Constraint::Filling { p, q },
            _ => Constraint::Parabolic(1),
        })
        .collect();
    let mut req = SolveRequest::new(&d, cons);
    apply_globals(cli, &mut req);
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    // m = ±1 satisfies m^p l^q = 1 trivially; that is the unfilled cusp
    let genuine = |chi: &Shaping| {
        d.labels().iter().enumerate().all(|(c, l)| match l {
            SurgeryLabel::Rational { .. } => {
                chi.meridian(&d, c).is_ok_and(|m| (m - 1.0).norm() > 1e-6 && (m + 1.0).norm() > 1e-6)
            }
            _ => true,
        })
    };
    let results = solve_shaping(&req)?;
    for res in &results {
        if !genuine(&res.shaping) {
            continue;
        }
        let f = default_flattening(&d, &res.shaping)?;
        let one = Presentation { diagram: d.clone(), shaping: Some(res.shaping.clone()), flattening: Some(f), targets: vec![], expected: None };
        let Ok(v) = volume(&one, tol.max(1e-9)) else { continue };
        return Ok(json!({
            "format": io::FORMAT,
            "component": component,
            "p": p,
            "q": q,
            "volume": v["volume"],
            "report": v,
            "presentation": io::presentation_to_json(&one),
        }));
    }
    Err(Error::NoSolutionFound { starts: req.starts, best: results.first().map_or(f64::NAN, |r| r.residual) })
}

fn glue(one: &Path, two: &Path, comp_one: usize, comp_two: usize, matrix: &str, tol: f64) -> Result<Value> {
    let nums: Vec<i64> = matrix
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::InvalidMatrix(matrix.to_string())))
        .collect::<Result<_>>()?;
    let [p, q, r, s] = nums[..] else { return Err(Error::InvalidMatrix(format!("{matrix}: need p,q,r,s"))) };
    let g = GluingMatrix::new(p, q, r, s)?;
    let load_side = |path: &Path| -> Result<Presentation> {
        load(&Source { input: Some(path.to_path_buf()), fixture: None, shaping: None, flattening: None })
    };
    let (a, b) = (load_side(one)?, load_side(two)?);
    let (ca, fa) = shaped(&a)?;
    let (cb, fb) = shaped(&b)?;
    let out = build_gluing_chain(
        GlueSide { diagram: &a.diagram, shaping: ca, flattening: &fa, component: comp_one },
        GlueSide { diagram: &b.diagram, shaping: cb, flattening: &fb, component: comp_two },
        &g,
    )?;
    let pres = Presentation {
        diagram: out.diagram,
        shaping: Some(out.shaping),
        flattening: Some(out.flattening),
        targets: vec![],
        expected: None,
    };
    let v = volume(&pres, tol)?;
    Ok(json!({
        "format": io::FORMAT,
        "matrix": [p, q, r, s],
        "continued_fraction": out.cf,
        "volume": v["volume"],
        "report": v,
        "presentation": io::presentation_to_json(&pres),
    }))
}

fn lens(p: i64, q: i64, n: i64) -> Result<Value> {
    let d = Diagram::kink(1).with_label(0, SurgeryLabel::rational(p, q)?)?;
    let chi = lens_shaping(p, n)?;
    let f = default_flattening(&d, &chi)?;
    let v = manifold_volume(&d, &chi, &f, &[], 1e-9)?.total;
    let oracle = lens_oracle(p, q, n)?;
    Ok(json!({
        "format": io::FORMAT,
        "p": p,
        "q": q,
        "n": n,
        "volume": io::volume_value(&v),
        "oracle": io::volume_value(&oracle),
        "distance": cvolume::dilog::mod_distance(&v, &oracle)?,
    }))
}

fn print(v: &Value) {
    print!("{}", io::to_text(v));
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let tol = cli.tol.unwrap_or(1e-9);
    match &cli.command {
        Command::Validate(src) => {
            let (v, ok) = validate(src, tol)?;
            print(&v);
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Solve { request, diagram, constraints } => print(&solve(cli, request, diagram, constraints)?),
        Command::Volume { source, re, cs } => {
            let v = volume(&load(source)?, tol)?;
            let part = |i: usize| v["volume"][i].as_f64().unwrap_or(f64::NAN);
            if *re {
                println!("{}", part(0));
            } else if *cs {
                println!("{}", part(1));
            } else {
                print(&v);
            }
        }
        Command::Fill { source, component, p, q } => print(&fill(cli, source, *component, *p, *q)?),
        Command::Glue { one, two, comp_one, comp_two, matrix } => {
            print(&glue(one, two, *comp_one, *comp_two, matrix, tol)?)
        }
        Command::Lens { p, q, n } => print(&lens(*p, *q, *n)?),
        Command::Selftest { criteria, samples, summary } => {
            let defaults = Config::default();
            let cfg = Config {
                seed: cli.seed.unwrap_or(defaults.seed),
                starts: cli.starts.unwrap_or(defaults.starts),
                tol: cli.tol.unwrap_or(defaults.tol),
                samples: *samples,
            };
            let ids: Vec<u32> = if criteria.is_empty() { (1..=10).collect() } else { criteria.clone() };
            let results: Vec<_> = ids.iter().map(|&id| selftest::run_criterion(id, &cfg)).collect();
            if *summary {
                for c in &results {
                    println!("{}", selftest::summary_line(c));
                }
            } else {
                print(&selftest::report_json(&cfg, &results));
            }
            let ok = results.iter().all(|c| c.passed());
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            print(&json!({"format": io::FORMAT, "error": {"kind": "UsageError", "message": message.trim_end()}}));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            print(&io::error_to_json(&e));
            ExitCode::from(2)
        }
    }
}
