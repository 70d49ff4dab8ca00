use crate::args::{Command, Common};
use crate::error::{CliError, CliResult, StageExt};
use nlhopf::amplitude::{bifurcation_lines, classify_unfolding, predict, region_map, region_map_csv, regions, PlanarSystem, Prediction};
use nlhopf::eigen::build_basis;
use nlhopf::linstab::{
    certify_double_hopf, critical_lambdas, curves_csv, double_hopf, ell_star, lambda_hh, model_at, n_star, DoubleHopfPoint,
};
use nlhopf::model::{Kinetics, ModelSpec, ParamPoint};
use nlhopf::normalform::{normal_form, NormalFormReport, PolarCoeffs};
use nlhopf::pdesim::{
    classify_attractor, diameter, fields_csv, poincare_csv, poincare_section, preset, probes_csv, simulate,
    AttractorClass, Grid, InitialCondition, PoincareLevel, SimConfig, SimulationTrace, PRESET_NAMES,
};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

pub fn run(cmd: &Command) -> CliResult<()> {
    let c = cmd.common();
    fs::create_dir_all(&c.out).map_err(|source| CliError::Io { path: c.out.clone(), source })?;
    let spec = load_model(c)?;
    match cmd {
        Command::Analyze(_) => analyze(c, &spec),
        Command::Normalform(_) => cmd_normalform(c, &spec),
        Command::Classify(_) => classify(c, &spec),
        Command::Simulate(_) => cmd_simulate(c, &spec, false),
        Command::Poincare(_) => cmd_simulate(c, &spec, true),
        Command::Sweep(_) => sweep(c, &spec),
    }
}

fn load_model(c: &Common) -> CliResult<ModelSpec> {
    let text = if c.model == "holling_tanner" {
        r#"{"kind": "holling_tanner"}"#.to_string()
    } else {
        let path = Path::new(&c.model);
        fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?
    };
    if c.overrides.is_empty() {
        return ModelSpec::from_json_str(&text).stage("model");
    }
    let mut root: Value = serde_json::from_str(&text)
        .map_err(|e| nlhopf::Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
        .stage("model")?;
    let obj = root
        .as_object_mut()
        .ok_or_else(|| CliError::Usage("model: top level must be an object".into()))?;
    let params = obj.entry("params").or_insert_with(|| json!({}));
    let params = params
        .as_object_mut()
        .ok_or_else(|| CliError::Usage("model: params must be an object".into()))?;
    for item in &c.overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{item}'")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--set {key}: '{value}' is not a number")))?;
        params.insert(key.trim().to_string(), json!(v));
    }
    ModelSpec::from_json_str(&root.to_string()).stage("model")
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

fn write_json(dir: &Path, name: &str, v: &Value) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialise");
    s.push('\n');
    write(dir, name, &s)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialise")
}

struct Point {
    spec: ModelSpec,
    dh: DoubleHopfPoint,
}

fn locate(spec: &ModelSpec, n: u32) -> CliResult<Point> {
    let dh = double_hopf(spec, n).stage("double_hopf")?;
    let spec = model_at(spec, &dh).stage("model")?;
    Ok(Point { spec, dh })
}

fn reduce(p: &Point) -> CliResult<NormalFormReport> {
    let basis = build_basis(&p.spec, &p.dh).stage("eigen")?;
    normal_form(&p.spec, &basis, &p.dh).stage("normalform")
}

fn polar_of(report: &NormalFormReport) -> CliResult<PolarCoeffs> {
    report.polar.ok_or_else(|| CliError::Stage {
        stage: "polar_reduce",
        source: nlhopf::Error::DegenerateCubic(report.polar_error.clone().unwrap_or_default()),
    })
}

fn analyze(c: &Common, spec: &ModelSpec) -> CliResult<()> {
    let mut critical = serde_json::Map::new();
    critical.insert("model".into(), json!(spec.labels));
    let mut found = Vec::new();
    let mut rejected = Vec::new();
    match &spec.kinetics {
        Kinetics::HollingTanner(h) => {
            let cl = critical_lambdas(spec).stage("linstab")?;
            let ns = n_star(spec).stage("linstab")?;
            let ls = ell_star(spec).stage("linstab")?;
            critical.insert("lambda_p".into(), json!(cl.lambda_p));
            critical.insert("lambda_0".into(), json!(cl.lambda_0));
            critical.insert("lambda_d".into(), json!(cl.lambda_d));
            critical.insert("ell".into(), json!(spec.ell));
            critical.insert("ell_star".into(), json!(ls));
            critical.insert("ell_star_squared".into(), json!(ls * ls));
            critical.insert("n_star".into(), json!(ns));
            let mut hh = Vec::new();
            for n in 1..=ns {
                let l = lambda_hh(spec, n).stage("linstab")?;
                hh.push(json!({"n": n, "lambda": l}));
                match double_hopf(spec, n) {
                    Ok(dh) => found.push(to_value(&dh)),
                    Err(e) => rejected.push(json!({"n": n, "error": e.to_string()})),
                }
            }
            critical.insert("lambda_hh".into(), Value::Array(hh));
            if c.format.csv() {
                let top = 1.0 / h.beta;
                let count = 400;
                let lambdas: Vec<f64> = (0..count).map(|i| (i as f64 + 0.5) / count as f64 * top).collect();
                write(&c.out, "curves.csv", &curves_csv(spec, &lambdas, ns).stage("linstab")?)?;
            }
        }
        Kinetics::Custom => {
            let (l, cc) = spec.base;
            match certify_double_hopf(spec, l, cc, 0, c.mode) {
                Ok(dh) => found.push(to_value(&dh)),
                Err(e) => rejected.push(json!({"n": c.mode, "error": e.to_string()})),
            }
        }
    }
    println!("double Hopf points: {}", found.len());
    for p in &found {
        println!("  lambda0 = {}, c0 = {}, modes ({}, {})", p["lambda0"], p["c0"], p["n1"], p["n2"]);
    }
    critical.insert("double_hopf_points".into(), Value::Array(found));
    critical.insert("rejected".into(), Value::Array(rejected));
    if c.format.json() {
        write_json(&c.out, "critical.json", &Value::Object(critical))?;
    }
    Ok(())
}

fn normalform_value(report: &NormalFormReport, dump: bool) -> Value {
    let mut v = to_value(report);
    if !dump {
        v.as_object_mut().expect("report is an object").remove("intermediates");
    }
    if let Some(p) = &report.polar {
        match classify_unfolding(p) {
            Ok(u) => {
                v["unfolding"] = json!(u.case_id.to_string());
                v["unfolding_signs"] = json!(u.signs);
            }
            Err(e) => v["unfolding_error"] = json!(e.to_string()),
        }
        v["discriminant"] = json!(p.discriminant());
        match bifurcation_lines(p) {
            Ok(lines) => v["lines"] = to_value(&lines),
            Err(e) => v["lines_error"] = json!(e.to_string()),
        }
        if let Ok(s) = regions(p, report.double_hopf.n1, report.double_hopf.n2) {
            v["regions"] = to_value(&s);
        }
    }
    v
}

fn cmd_normalform(c: &Common, spec: &ModelSpec) -> CliResult<()> {
    let point = locate(spec, c.mode)?;
    let report = reduce(&point)?;
    let v = normalform_value(&report, c.dump_intermediates);
    if c.format.json() {
        write_json(&c.out, "normalform.json", &v)?;
    }
    for (name, b) in [
        ("B2100", report.third_order.c2100),
        ("B1011", report.third_order.c1011),
        ("B0021", report.third_order.c0021),
        ("B1110", report.third_order.c1110),
    ] {
        println!("{name} = {:.10} {:+.10}i", b.re, b.im);
    }
    let p = polar_of(&report)?;
    println!(
        "kappa1 = {:.6} mu1 {:+.6} mu2, kappa2 = {:.6} mu1 {:+.6} mu2",
        p.kappa1[0], p.kappa1[1], p.kappa2[0], p.kappa2[1]
    );
    println!("b0 = {:.6}, c0 = {:.6}, d0 = {}, eps = ({}, {})", p.b0, p.c0_coupling, p.d0, p.eps1, p.eps2);
    let case = classify_unfolding(&p).stage("classify_unfolding")?;
    println!("unfolding: {}", case.case_id);
    Ok(())
}

fn mu_of(c: &Common) -> Option<ParamPoint> {
    c.mu.as_ref().map(|m| ParamPoint::new(m[0], m[1]))
}

fn prediction_value(p: &Prediction) -> Value {
    json!({
        "region": p.region,
        "on_boundary": p.on_boundary,
        "attractor": p.attractor_str(),
        "stable": p.stable,
        "equilibria": p.equilibria,
    })
}

fn classify(c: &Common, spec: &ModelSpec) -> CliResult<()> {
    let point = locate(spec, c.mode)?;
    let report = reduce(&point)?;
    let p = polar_of(&report)?;
    let runs = runs(c, point.dh.lambda0)?;
    let mut out = Vec::new();
    for r in &runs {
        let pred = predict(&PlanarSystem::new(p, r.mu, point.dh.n1, point.dh.n2)).stage("amplitude")?;
        println!("{}: mu = ({}, {}), region {}, attractor {}", r.name, r.mu.mu1, r.mu.mu2, pred.region, pred.attractor_str());
        out.push(json!({"name": r.name, "mu": r.mu, "prediction": prediction_value(&pred)}));
    }
    if c.format.json() {
        write_json(&c.out, "prediction.json", &json!({"polar": p, "points": out}))?;
    }
    Ok(())
}

struct Run {
    name: String,
    mu: ParamPoint,
    ic: InitialCondition,
}

fn runs(c: &Common, lambda0: f64) -> CliResult<Vec<Run>> {
    let ic = match &c.ic {
        Some(s) => Some(InitialCondition::parse(s).stage("initial condition")?),
        None => None,
    };
    match (&c.preset, mu_of(c)) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --preset or --mu, not both".into())),
        (Some(list), None) => {
            let names: Vec<&str> = if list == "all" { PRESET_NAMES.to_vec() } else { list.split(',').map(str::trim).collect() };
            names
                .into_iter()
                .map(|n| {
                    let p = preset(n, lambda0)
                        .ok_or_else(|| CliError::Usage(format!("unknown preset '{n}'; known: {}", PRESET_NAMES.join(", "))))?;
                    Ok(Run { name: p.name, mu: p.mu, ic: ic.clone().unwrap_or(p.ic) })
                })
                .collect()
        }
        (None, Some(mu)) => Ok(vec![Run { name: "run".into(), mu, ic: ic.unwrap_or(InitialCondition::Equilibrium) }]),
        (None, None) => Err(CliError::Usage("give --mu MU1 MU2 or --preset NAME".into())),
    }
}

fn sim_config(c: &Common, run: &Run, omega1: Option<f64>) -> CliResult<SimConfig> {
    let dt = match c.dt.as_str() {
        "auto" => None,
        s => Some(s.parse::<f64>().map_err(|_| CliError::Usage(format!("--dt: '{s}' is neither a number nor auto")))?),
    };
    Ok(SimConfig {
        dt,
        t_end: c.t_end,
        ic: run.ic.clone(),
        level: c.level.map_or(PoincareLevel::Mean, PoincareLevel::Fixed),
        delay: omega1.map(|w| 2.0 * PI / w),
        ..SimConfig::default()
    })
}

struct Outcome {
    run: Run,
    cfg: SimConfig,
    trace: SimulationTrace,
    class: AttractorClass,
}

fn cmd_simulate(c: &Common, spec: &ModelSpec, section: bool) -> CliResult<()> {
    // simulate around the double Hopf point when there is one
    let point = locate(spec, c.mode).ok();
    let (sim_spec, lambda0) = match &point {
        Some(p) => (p.spec.clone(), p.dh.lambda0),
        None => (spec.clone(), spec.base.0),
    };
    let polar = point.as_ref().and_then(|p| reduce(p).ok()).and_then(|r| r.polar);
    let grid = Grid::new(c.grid, sim_spec.ell).stage("grid")?;
    let omega1 = point.as_ref().map(|p| p.dh.omega1);
    let runs = runs(c, lambda0)?;
    let outcomes: Vec<CliResult<Outcome>> = runs
        .into_par_iter()
        .map(|run| {
            let cfg = sim_config(c, &run, omega1)?;
            let trace = simulate(&sim_spec, run.mu, grid, &cfg).stage("simulate")?;
            let class = classify_attractor(&trace, &cfg).stage("classify_attractor")?;
            Ok(Outcome { run, cfg, trace, class })
        })
        .collect();
    let mut failure = None;
    for o in outcomes {
        let o = match o {
            Ok(o) => o,
            Err(e) => {
                eprintln!("error: {e}");
                failure.get_or_insert(e);
                continue;
            }
        };
        let dir = c.out.join(&o.run.name);
        fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        let prediction = match (&polar, &point) {
            (Some(p), Some(pt)) => predict(&PlanarSystem::new(*p, o.run.mu, pt.dh.n1, pt.dh.n2)).ok(),
            _ => None,
        };
        let kind = o.class.kind.as_str();
        // no verdict on the boundary lines, where the prediction is degenerate
        let agreement = prediction.as_ref().filter(|p| !p.on_boundary).map(|p| p.attractor_str() == kind);
        println!(
            "{}: mu = ({}, {}), simulation {}, prediction {}",
            o.run.name,
            o.run.mu.mu1,
            o.run.mu.mu2,
            kind,
            prediction.as_ref().map_or("unavailable", |p| p.attractor_str())
        );
        if section {
            let m = &o.class.metrics;
            let pts = poincare_section(&o.trace, m.poincare_level, m.poincare_delay);
            if c.format.csv() {
                write(&dir, "poincare.csv", &poincare_csv(&pts))?;
            }
            if c.format.json() {
                write_json(
                    &dir,
                    "poincare.json",
                    &json!({"level": m.poincare_level, "delay": m.poincare_delay, "points": pts.len(), "diameter": diameter(&pts)}),
                )?;
            }
            continue;
        }
        if c.format.csv() {
            write(&dir, "u.csv", &fields_csv(&o.trace, false))?;
            write(&dir, "v.csv", &fields_csv(&o.trace, true))?;
            let every = ((0.1 / o.trace.dt).round() as usize).max(1);
            write(&dir, "probes.csv", &probes_csv(&o.trace, every))?;
        }
        if c.format.json() {
            write_json(
                &dir,
                "classification.json",
                &json!({
                    "name": o.run.name,
                    "mu": o.run.mu,
                    "initial_condition": o.run.ic,
                    "grid": c.grid,
                    "dt": o.trace.dt,
                    "t_end": o.trace.t_end,
                    "transient_fraction": o.cfg.transient_fraction,
                    "equilibrium": o.trace.equilibrium,
                    "classification": kind,
                    "metrics": o.class.metrics,
                    "prediction": prediction.as_ref().map(prediction_value),
                    "agreement": agreement,
                }),
            )?;
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn sweep(c: &Common, spec: &ModelSpec) -> CliResult<()> {
    let point = locate(spec, c.mode)?;
    let report = reduce(&point)?;
    let p = polar_of(&report)?;
    let r1 = c.mu1_range.clone().unwrap_or(vec![-0.1, 0.1]);
    let r2 = c.mu2_range.clone().unwrap_or(vec![-0.05, 0.05]);
    let n = c.samples.clone().unwrap_or(vec![101, 51]);
    let (n1, n2) = (point.dh.n1, point.dh.n2);
    let samples = region_map(&p, n1, n2, (r1[0], r1[1]), (r2[0], r2[1]), n[0], n[1]).stage("amplitude")?;
    if c.format.csv() {
        write(&c.out, "region_map.csv", &region_map_csv(&samples))?;
    }
    let sectors = regions(&p, n1, n2).stage("amplitude")?;
    for s in &sectors {
        println!("{}: {:.6} .. {:.6} rad", s.label, s.start, s.end);
    }
    if c.format.json() {
        let lines = bifurcation_lines(&p).stage("amplitude")?;
        write_json(&c.out, "regions.json", &json!({"polar": p, "lines": lines, "regions": sectors}))?;
    }
    Ok(())
}
