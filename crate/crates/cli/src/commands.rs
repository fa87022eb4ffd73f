//! The four subcommands.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use cfheat::bases::{eigenvalue, max_off_identity, pairing_matrix, SpatialQuadrature};
use cfheat::bvp::{solve_bvp_with, BvProblem, ProblemKind, SeriesSolution, SolverConfig};
use cfheat::dsl::{parse, parse_time, EvalMode, ExprForcing};
use cfheat::ivp::{solve_ivp, volterra_oracle, IvProblem};
use cfheat::operators::{uniform_knots, CfParams, Forcing, TimeForcing};
use cfheat::verify::{check_hypotheses, grid_residual, pde_residual, GridSpec};
use serde_json::{json, Map, Value};

use crate::config::{BasesConfig, BvpConfig, Format, IvpConfig, VerifyConfig, VerifySource};
use crate::output::{emit, fmt_g17, to_csv, to_json};
use crate::CliError;

fn mode(lenient: bool) -> EvalMode {
    if lenient {
        EvalMode::Lenient
    } else {
        EvalMode::Strict
    }
}

fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    emit(path, text)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.map_or("stdout".into(), |p| p.display().to_string()))))
}

/// Fails if the forcing hit a domain error anywhere during the run.
fn forcing_ok(f: &ExprForcing) -> Result<(), CliError> {
    match f.error() {
        Some(e) => Err(CliError::Eval(format!("forcing {}: {e}", f.expr()))),
        None => Ok(()),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn document(kind: &str, fields: Vec<(&str, Value)>) -> Value {
    let mut map = Map::new();
    map.insert("schema".into(), json!(1));
    map.insert("kind".into(), json!(kind));
    for (k, v) in fields {
        map.insert(k.into(), v);
    }
    Value::Object(map)
}

pub fn run_ivp(cfg: IvpConfig) -> Result<(), CliError> {
    let expr = parse_time(&cfg.f).map_err(|e| CliError::Parse(format!("--f {:?}: {e}", cfg.f)))?;
    let forcing = Arc::new(ExprForcing::new(expr, mode(cfg.lenient)));
    let f: Arc<dyn TimeForcing> = forcing.clone();
    let params = CfParams::with_lambda(cfg.alpha, cfg.lambda)?;
    let p = IvProblem::new(params, f, cfg.t_max)?.with_initial_value(cfg.u0);
    let result = solve_ivp(&p);
    forcing_ok(&forcing)?;
    let u = result?;
    let ts = uniform_knots(cfg.t_max, cfg.t_steps);
    let us = u.sample(&ts);
    forcing_ok(&forcing)?;
    if us.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Solver("solution is not finite".into()));
    }

    let oracle_dev = if cfg.oracle {
        let oracle = volterra_oracle(&p, cfg.oracle_steps);
        forcing_ok(&forcing)?;
        let oracle = oracle?;
        let dev = oracle.knots().iter().zip(oracle.values()).map(|(&t, &v)| (u.eval(t) - v).abs()).fold(0.0, f64::max);
        Some(dev)
    } else {
        None
    };

    let text = match cfg.format {
        Format::Csv => {
            if let Some(d) = oracle_dev {
                eprintln!("oracle max deviation: {}", fmt_g17(d));
            }
            to_csv(&["t", "u"], ts.iter().zip(&us).map(|(&t, &v)| vec![t, v]))
        }
        Format::Json => {
            let mut fields = vec![
                (
                    "params",
                    json!({
                        "alpha": cfg.alpha, "lambda": cfg.lambda, "u0": cfg.u0, "f": cfg.f,
                        "t-max": cfg.t_max, "t-steps": cfg.t_steps, "lenient": cfg.lenient,
                    }),
                ),
                ("branch", json!(u.branch().to_string())),
                ("samples", json!({"t": ts, "u": us})),
            ];
            if let Some(d) = oracle_dev {
                fields.push(("oracle_max_dev", json!(d)));
                fields.push(("oracle_steps", json!(cfg.oracle_steps)));
            }
            to_json(&document("ivp", fields))
        }
    };
    write(cfg.out.as_deref(), &text)
}

struct Prepared {
    forcing: Arc<ExprForcing>,
    problem: BvProblem,
}

fn prepare(cfg: &BvpConfig) -> Result<Prepared, CliError> {
    let expr = parse(&cfg.g).map_err(|e| CliError::Parse(format!("--g {:?}: {e}", cfg.g)))?;
    let forcing = Arc::new(ExprForcing::new(expr, mode(cfg.lenient)));
    let kind = ProblemKind::from_number(cfg.problem).expect("validated problem number");
    let g: Arc<dyn Forcing> = forcing.clone();
    let problem = BvProblem::new(kind, cfg.alpha, g, cfg.t_max, cfg.modes)?;
    Ok(Prepared { forcing, problem })
}

fn solve(prep: &Prepared) -> Result<SeriesSolution, CliError> {
    let config = SolverConfig { check_hypotheses: false, ..SolverConfig::default() };
    let s = solve_bvp_with(&prep.problem, &config);
    forcing_ok(&prep.forcing)?;
    Ok(s?)
}

fn bvp_config_json(cfg: &BvpConfig) -> Value {
    json!({
        "problem": cfg.problem, "alpha": cfg.alpha, "g": cfg.g, "t-max": cfg.t_max, "modes": cfg.modes,
        "x-steps": cfg.x_steps, "t-steps": cfg.t_steps, "lenient": cfg.lenient,
    })
}

pub fn run_bvp(cfg: BvpConfig) -> Result<(), CliError> {
    let prep = prepare(&cfg)?;
    let hypotheses = if cfg.check_hypotheses {
        let report = check_hypotheses(&prep.problem);
        forcing_ok(&prep.forcing)?;
        if !report.all_pass() {
            return Err(CliError::Hypothesis(report.failures().join("; ")));
        }
        Some(report)
    } else {
        None
    };
    let s = solve(&prep)?;
    let xs = uniform_knots(1.0, cfg.x_steps);
    let ts = uniform_knots(cfg.t_max, cfg.t_steps);
    let grid = s.grid(&xs, &ts)?;
    let residual = if cfg.residual {
        let spec = GridSpec::new(cfg.x_steps + 1, cfg.t_steps + 1, cfg.t_max)?;
        let r = pde_residual(&s, prep.forcing.as_ref(), &spec, cfg.alpha);
        forcing_ok(&prep.forcing)?;
        Some(r?)
    } else {
        None
    };
    forcing_ok(&prep.forcing)?;

    let text = match cfg.format {
        Format::Csv => {
            if let Some(r) = &residual {
                eprintln!("residual max_abs: {}", fmt_g17(r.max_abs));
            }
            let rows = ts.iter().zip(&grid).flat_map(|(&t, row)| xs.iter().zip(row).map(move |(&x, &u)| vec![x, t, u]));
            to_csv(&["x", "t", "u"], rows)
        }
        Format::Json => {
            let mut fields = vec![("config", bvp_config_json(&cfg))];
            if let Some(h) = &hypotheses {
                fields.push(("hypothesis_report", to_value(h)));
            }
            if let Some(r) = &residual {
                fields.push(("residual_report", to_value(r)));
            }
            fields.push(("grid", json!({"x": xs, "t": ts, "u": grid})));
            to_json(&document("bvp", fields))
        }
    };
    write(cfg.out.as_deref(), &text)
}

fn field<'a>(v: &'a Value, path: &[&str]) -> Result<&'a Value, CliError> {
    let mut cur = v;
    for key in path {
        cur = cur.get(key).ok_or_else(|| CliError::Input(format!("missing field {}", path.join("."))))?;
    }
    Ok(cur)
}

fn numbers(v: &Value, what: &str) -> Result<Vec<f64>, CliError> {
    v.as_array()
        .ok_or_else(|| CliError::Input(format!("{what} must be an array")))?
        .iter()
        .map(|n| n.as_f64().ok_or_else(|| CliError::Input(format!("{what} must hold numbers"))))
        .collect()
}

fn verify_file(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if doc.get("kind").and_then(Value::as_str) != Some("bvp") {
        return Err(CliError::Input(format!("{}: expected a document with \"kind\": \"bvp\"", path.display())));
    }
    let problem = field(&doc, &["config", "problem"])?
        .as_u64()
        .and_then(|n| ProblemKind::from_number(n as u32))
        .ok_or_else(|| CliError::Input("config.problem must be 1, 2, 3 or 4".into()))?;
    let alpha = field(&doc, &["config", "alpha"])?
        .as_f64()
        .ok_or_else(|| CliError::Input("config.alpha must be a number".into()))?;
    let src =
        field(&doc, &["config", "g"])?.as_str().ok_or_else(|| CliError::Input("config.g must be a string".into()))?;
    let lenient = doc.pointer("/config/lenient").and_then(Value::as_bool).unwrap_or(false);
    let xs = numbers(field(&doc, &["grid", "x"])?, "grid.x")?;
    let ts = numbers(field(&doc, &["grid", "t"])?, "grid.t")?;
    let u = field(&doc, &["grid", "u"])?
        .as_array()
        .ok_or_else(|| CliError::Input("grid.u must be an array of rows".into()))?
        .iter()
        .map(|r| numbers(r, "grid.u rows"))
        .collect::<Result<Vec<_>, _>>()?;

    let expr = parse(src).map_err(|e| CliError::Input(format!("config.g {src:?}: {e}")))?;
    let forcing = ExprForcing::new(expr, mode(lenient));
    let report = grid_residual(problem, alpha, &forcing, &xs, &ts, &u).map_err(|e| CliError::Input(e.to_string()))?;
    forcing_ok(&forcing)?;
    Ok(document("verify", vec![("source", json!("file")), ("residual_report", to_value(&report))]))
}

fn verify_solve(cfg: &BvpConfig) -> Result<Value, CliError> {
    let prep = prepare(cfg)?;
    let hypotheses = check_hypotheses(&prep.problem);
    forcing_ok(&prep.forcing)?;
    if cfg.check_hypotheses && !hypotheses.all_pass() {
        return Err(CliError::Hypothesis(hypotheses.failures().join("; ")));
    }
    let s = solve(&prep)?;
    let spec = GridSpec::new(cfg.x_steps + 1, cfg.t_steps + 1, cfg.t_max)?;
    let residual = pde_residual(&s, prep.forcing.as_ref(), &spec, cfg.alpha);
    forcing_ok(&prep.forcing)?;
    Ok(document(
        "verify",
        vec![
            ("source", json!("solve")),
            ("config", bvp_config_json(cfg)),
            ("hypothesis_report", to_value(&hypotheses)),
            ("residual_report", to_value(&residual?)),
        ],
    ))
}

pub fn run_verify(cfg: VerifyConfig) -> Result<(), CliError> {
    let doc = match &cfg.source {
        VerifySource::File(path) => verify_file(path)?,
        VerifySource::Solve(b) => verify_solve(b)?,
    };
    write(cfg.out.as_deref(), &to_json(&doc))
}

pub fn run_bases(cfg: BasesConfig) -> Result<(), CliError> {
    let modes = cfg.family.modes(cfg.k_max);
    let matrix = pairing_matrix(cfg.family, cfg.k_max, &SpatialQuadrature::default());
    let labels: Vec<String> = modes.iter().map(|m| m.label()).collect();
    let doc = document(
        "bases",
        vec![
            ("family", json!(cfg.family.name())),
            ("k_max", json!(cfg.k_max)),
            ("modes", json!(labels)),
            ("eigenvalues", json!(modes.iter().map(eigenvalue).collect::<Vec<_>>())),
            ("matrix", json!(matrix)),
            ("max_off_identity", json!(max_off_identity(&matrix))),
        ],
    );
    if let Some(path) = &cfg.matrix_out {
        let header: Vec<&str> = labels.iter().map(String::as_str).collect();
        write(Some(path), &to_csv(&header, matrix.iter().cloned()))?;
    }
    write(cfg.out.as_deref(), &to_json(&doc))
}
