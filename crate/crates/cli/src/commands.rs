use geometa::csvout;
use geometa::geom::{
    check_hyperbolic_type, check_linear_axioms, default_t_grid, random_triples, AxiomReport,
    GeodesicSpace, Point,
};
use geometa::glformula::{builtin, evaluate, parse, FiniteStructure, Predicate};
use geometa::iterate::{detect_fixed_point, mann_iterate, DEFAULT_TRACE_LENGTH};
use geometa::maps::{
    check_condition_c, check_condition_d, check_condition_e, check_directional_nonexpansive,
    check_nonexpansive, ConditionReport, MapUnderTest,
};
use geometa::metastab::{
    trace_witness, uniform_bound, uniform_bound_fixedpoint, MetastabSettings, SequenceMode,
};
use geometa::tbound::{alpha_net, best_net, beta_profile};

use crate::config::{self, invalid, ExperimentConfig, PredicateConfig, DEFAULT_K};
use crate::report::{csv_error, emit};
use crate::{Common, EvalArgs, Failure};

/// Loads the config and applies the command-line overrides.
fn prepare(c: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = config::load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = Some(s);
    }
    if let Some(n) = c.cap {
        cfg.cap = Some(n);
    }
    if let Some(e) = &c.eps {
        cfg.epsilon = Some(e.clone());
    }
    if let Some(f) = &c.f {
        cfg.f = Some(f.parse().map_err(invalid("F"))?);
    }
    Ok(cfg)
}

fn out_path<'a>(c: &'a Common, cfg: &'a ExperimentConfig) -> Option<&'a std::path::Path> {
    c.out.as_deref().or(cfg.out.as_deref())
}

pub fn iterate(c: &Common) -> Result<(), Failure> {
    let mut cfg = prepare(c)?;
    let space = cfg.space()?;
    let map = cfg.map()?;
    let x1 = cfg.x1(&space)?;
    let lambda = cfg.lambda()?;
    let tol = cfg.tolerance()?;
    let n = *cfg.trace_length.get_or_insert(DEFAULT_TRACE_LENGTH);
    let trace = mann_iterate(&space, &map, &x1, lambda, n)?;
    let mut body = Vec::new();
    trace.write_csv(&mut body).map_err(csv_error)?;
    emit("iterate", &cfg, out_path(c, &cfg), &body)?;
    match detect_fixed_point(&trace, tol) {
        Some((k, p)) => eprintln!("fixed point within {tol} at n = {k}: x = {p}"),
        None => eprintln!(
            "no residual <= {tol} in {n} iterates; last r_n = {}",
            trace.residual(n)
        ),
    }
    Ok(())
}

/// `name(param)` or a bare `name`.
fn split_check(spec: &str) -> Result<(&str, Option<f64>), Failure> {
    let bad = || Failure::Validation(format!("checks: cannot read `{spec}`"));
    match spec.find('(') {
        None => Ok((spec.trim(), None)),
        Some(open) => {
            let inner = spec[open + 1..].strip_suffix(')').ok_or_else(bad)?;
            let p = inner.trim().parse::<f64>().map_err(|_| bad())?;
            Ok((spec[..open].trim(), Some(p)))
        }
    }
}

struct Row {
    label: String,
    parameter: Option<f64>,
    worst: f64,
    passed: bool,
    witness: String,
    samples: usize,
    tolerance: f64,
}

impl From<ConditionReport> for Row {
    fn from(r: ConditionReport) -> Self {
        Row {
            label: r.condition.to_string(),
            parameter: r.parameter,
            worst: r.worst_violation,
            passed: r.passed,
            witness: r.witness.map(|w| w.to_string()).unwrap_or_default(),
            samples: r.samples_checked,
            tolerance: r.tolerance,
        }
    }
}

fn axiom_row(label: &str, r: AxiomReport) -> Row {
    Row {
        label: label.to_string(),
        parameter: None,
        worst: r.worst_violation,
        passed: r.passed(),
        witness: r.witness.map(|w| w.to_string()).unwrap_or_default(),
        samples: r.samples_checked,
        tolerance: r.tolerance,
    }
}

/// Pairs for the linear axioms are capped so the t x t' grid stays small.
const LINEAR_AXIOM_PAIRS: usize = 200;

pub fn check(c: &Common) -> Result<(), Failure> {
    let mut cfg = prepare(c)?;
    let space = cfg.space()?;
    let sample = cfg.sample(&space)?;
    let tol = cfg.tolerance()?;
    let seed = cfg.seed();
    let checks = cfg.checks.get_or_insert_with(Vec::new).clone();
    let mut map: Option<MapUnderTest> = None;
    let mut rows = Vec::new();
    for spec in &checks {
        let (name, param) = split_check(spec)?;
        let need = |p: Option<f64>| {
            p.ok_or_else(|| Failure::Validation(format!("checks: `{spec}` needs a parameter")))
        };
        let mut the_map = || -> Result<MapUnderTest, Failure> {
            if map.is_none() {
                map = Some(cfg.map()?);
            }
            Ok(map.clone().expect("set above"))
        };
        let row: Row = match name {
            "C" => check_condition_c(&space, &the_map()?, need(param)?, &sample, tol)?.into(),
            "D" => check_condition_d(&space, &the_map()?, need(param)?, &sample, tol)?.into(),
            "E" => check_condition_e(&space, &the_map()?, need(param)?, &sample, tol)?.into(),
            "nonexpansive" => check_nonexpansive(&space, &the_map()?, &sample, tol)?.into(),
            "directional" => {
                let grid: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
                check_directional_nonexpansive(&space, &the_map()?, &grid, &sample, tol)?.into()
            }
            "hyperbolic_type" => {
                let triples = random_triples(&space, sample.len(), seed)?;
                let grid = default_t_grid(cfg.lambda);
                axiom_row(name, check_hyperbolic_type(&space, &triples, &grid, tol)?)
            }
            "linear_axioms" => {
                let pairs: Vec<(Point, Point)> =
                    random_triples(&space, sample.len().min(LINEAR_AXIOM_PAIRS), seed)?
                        .into_iter()
                        .map(|(x, y, _)| (x, y))
                        .collect();
                let grid = default_t_grid(cfg.lambda);
                axiom_row(name, check_linear_axioms(&space, &pairs, &grid, tol)?)
            }
            _ => {
                return Err(Failure::Validation(format!(
                    "checks: unknown checker `{spec}`"
                )))
            }
        };
        rows.push(row);
    }
    let mut body = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut body);
        w.write_record([
            "check",
            "parameter",
            "worst_violation",
            "passed",
            "witness",
            "samples_checked",
            "tolerance",
        ])
        .map_err(csv_error)?;
        for r in &rows {
            w.write_record([
                r.label.clone(),
                csvout::opt_real(r.parameter),
                csvout::real(r.worst),
                r.passed.to_string(),
                r.witness.clone(),
                r.samples.to_string(),
                csvout::real(r.tolerance),
            ])
            .map_err(csv_error)?;
        }
        w.flush().map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    emit("check", &cfg, out_path(c, &cfg), &body)?;
    let failed: Vec<&str> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.label.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::CheckFailed(failed.join(", ")))
    }
}

pub fn metastab(c: &Common) -> Result<(), Failure> {
    let mut cfg = prepare(c)?;
    if cfg.family.is_some() {
        return run_family(c, cfg, "metastab");
    }
    let space = cfg.space()?;
    let map = cfg.map()?;
    let x1 = cfg.x1(&space)?;
    let lambda = cfg.lambda()?;
    let f = cfg.f();
    let epsilons = cfg.epsilons()?;
    let cap = cfg.cap()?;
    let n = match cfg.trace_length {
        Some(n) => n,
        None => f.required_length(cap).map_err(invalid("F"))? + 1,
    };
    cfg.trace_length = Some(n);
    let trace = mann_iterate(&space, &map, &x1, lambda, n)?;
    let mut body = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut body);
        w.write_record([
            "mode",
            "epsilon",
            "F",
            "witness_n",
            "oscillation_at_witness",
            "exhausted",
            "cap",
        ])
        .map_err(csv_error)?;
        for &eps in &epsilons {
            for mode in [
                SequenceMode::Residual,
                SequenceMode::Step,
                SequenceMode::Points,
            ] {
                let r = trace_witness(&space, &trace, mode, &f, eps, cap)?;
                w.write_record([
                    mode.name().to_string(),
                    csvout::real(eps),
                    f.to_string(),
                    csvout::opt_count(r.witness_n),
                    csvout::opt_real(r.oscillation_at_witness),
                    r.exhausted.to_string(),
                    cap.to_string(),
                ])
                .map_err(csv_error)?;
            }
        }
        w.flush().map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    emit("metastab", &cfg, out_path(c, &cfg), &body)
}

pub fn family(c: &Common) -> Result<(), Failure> {
    let cfg = prepare(c)?;
    run_family(c, cfg, "family")
}

fn run_family(c: &Common, mut cfg: ExperimentConfig, command: &str) -> Result<(), Failure> {
    let fam = cfg.family()?;
    let f = cfg.f();
    let epsilons = cfg.epsilons()?;
    let cap = cfg.cap()?;
    let mode = *cfg.mode.get_or_insert(SequenceMode::Residual);
    let fixedpoint = mode == SequenceMode::Points && fam.mu.is_some();
    let mut probe = MetastabSettings::new(f.clone(), epsilons[0], cap);
    probe.trace_length = cfg.trace_length;
    cfg.trace_length = Some(probe.trace_length().map_err(invalid("F"))?);
    let mut body = Vec::new();
    for (i, &eps) in epsilons.iter().enumerate() {
        let mut settings = MetastabSettings::new(f.clone(), eps, cap).with_mode(mode);
        settings.trace_length = cfg.trace_length;
        let result = if fixedpoint {
            uniform_bound_fixedpoint(&fam, &settings, None)?
        } else {
            uniform_bound(&fam, &settings, None)?
        };
        let mut part = Vec::new();
        result.write_csv(&mut part).map_err(csv_error)?;
        // one header for the whole file
        let skip = if i == 0 {
            0
        } else {
            part.iter()
                .position(|&b| b == b'\n')
                .map_or(part.len(), |p| p + 1)
        };
        body.extend_from_slice(&part[skip..]);
        if let Some(beta) = &result.beta {
            eprintln!("epsilon {eps}: beta(0..) = {beta:?}");
        }
        eprintln!(
            "epsilon {eps}: empirical uniform bound {}, {} exhausted",
            result
                .uniform_bound
                .map_or("none".to_string(), |b| b.to_string()),
            result.failures.len()
        );
    }
    emit(command, &cfg, out_path(c, &cfg), &body)
}

pub fn net(c: &Common) -> Result<(), Failure> {
    let mut cfg = prepare(c)?;
    let space = cfg.space()?;
    let sample = cfg.sample(&space)?;
    let k = *cfg.k.get_or_insert(DEFAULT_K);
    let profile = beta_profile(&space, &sample, k)?;
    let mut body = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut body);
        w.write_record([
            "k",
            "radius",
            "net_size",
            "beta",
            "max_uncovered_distance",
            "covered",
        ])
        .map_err(csv_error)?;
        for (j, beta) in profile.iter().enumerate() {
            let radius = 1.0 / (j as f64 + 1.0);
            let net = best_net(&space, &sample, radius)?;
            w.write_record([
                j.to_string(),
                csvout::real(radius),
                net.centers.len().to_string(),
                beta.to_string(),
                csvout::real(net.max_uncovered_distance),
                net.covered.to_string(),
            ])
            .map_err(csv_error)?;
        }
        w.flush().map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let alpha = cfg
        .big_k
        .map(|big_k| alpha_net(&space, &sample, big_k))
        .transpose()?;
    emit("net", &cfg, out_path(c, &cfg), &body)?;
    if let Some(a) = alpha {
        eprintln!(
            "K = {}: k = {}, beta(k) = {}, {} centers cover at 1/(K+1): {}",
            a.big_k,
            a.k,
            a.beta_k,
            a.net.centers.len(),
            a.covers_target
        );
        if !a.covers_target {
            return Err(Failure::CheckFailed(format!(
                "alpha net for K = {}",
                a.big_k
            )));
        }
    }
    Ok(())
}

fn parse_binding(text: &str) -> Result<(String, Point), Failure> {
    let bad = || Failure::Validation(format!("--bind: expected name=c1,c2,..., got `{text}`"));
    let (name, coords) = text.split_once('=').ok_or_else(bad)?;
    let coords = coords
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    Ok((name.trim().to_string(), Point::new(coords)))
}

pub fn eval_formula(a: &EvalArgs) -> Result<(), Failure> {
    let mut cfg = prepare(&a.common)?;
    let formula = match (&a.formula, &a.builtin) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Runtime(format!("reading {}: {e}", path.display())))?;
            cfg.formula = Some(text);
            parse(cfg.formula.as_deref().expect("set above"))
                .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?
        }
        (None, Some(spec)) => {
            let f = builtin(spec)?;
            cfg.formula = Some(f.to_string());
            f
        }
        (None, None) => {
            let text = cfg.formula.clone().ok_or_else(|| {
                Failure::Validation(
                    "formula: give --formula, --builtin or a `formula` field".into(),
                )
            })?;
            parse(&text).map_err(|e| Failure::Validation(format!("formula: {e}")))?
        }
    };
    for b in &a.bindings {
        let (name, p) = parse_binding(b)?;
        cfg.bindings.insert(name, p);
    }
    let space = cfg.space()?;
    let sample = cfg.sample(&space)?;
    let mut st = FiniteStructure::new(space.clone(), sample)?;
    if cfg.map.is_some() {
        st = st.with_map("T", cfg.map()?);
    }
    for (sym, kind) in &cfg.maps {
        let m = MapUnderTest::new(kind.clone()).map_err(invalid("maps"))?;
        st = st.with_map(sym, m);
    }
    for (sym, PredicateConfig::DistanceToSet(set)) in &cfg.predicates {
        st = st.with_predicate(sym, Predicate::DistanceToSet(set.clone()));
    }
    for (name, p) in &cfg.constants {
        st = st.with_constant(name, p.clone());
    }
    let bindings: Vec<(String, Point)> = cfg.bindings.clone().into_iter().collect();
    for (_, p) in &bindings {
        space.validate(p).map_err(invalid("bindings"))?;
    }
    let e = evaluate(&formula, &st, &bindings)?;
    let mesh = st.mesh();
    let mut body = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut body);
        w.write_record(["item", "name", "value"])
            .map_err(csv_error)?;
        w.write_record(["value", "", &csvout::real(e.value)])
            .map_err(csv_error)?;
        let how = if mesh.exact { "exact" } else { "estimated" };
        w.write_record(["mesh", how, &csvout::real(mesh.covering_radius)])
            .map_err(csv_error)?;
        for (name, p) in &e.witnesses {
            let coords: Vec<String> = p.coords().iter().map(|c| csvout::real(*c)).collect();
            w.write_record(["witness", name, &coords.join(" ")])
                .map_err(csv_error)?;
        }
        w.flush().map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    emit("eval-formula", &cfg, out_path(&a.common, &cfg), &body)
}
