//! `geomech`: simulate catalog systems, audit integrability and compare closed forms.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geomech::catalog;
use geomech::elliptic::{ym_curve_residual_at, EulerSolution};
use geomech::fields::sample_box;
use geomech::flows::{flow, trace, Integrator, Trajectory};
use geomech::kowalewski::{
    euler_relation, integral_fields, report_csv, residual_report, EulerRelationConfig, KowalewskiConstants,
};
use geomech::poisson::{audit, AuditConfig, VERDICT_NOT_CERTIFIED};
use geomech::{Error, FdConfig};
use serde_json::json;

const EXACT_TOL: f64 = 1e-6;
const KUMMER_TOL: f64 = 1e-6;
const DRIFT_TOL: f64 = 1e-7;
const EULER_RELATION_TOL: f64 = 1e-3;
const CURVE_TOL: f64 = 1e-6;
/// Spacing of the rows in the closed-form comparison table.
const EXACT_ROW_DT: f64 = 0.05;

#[derive(Parser)]
#[command(name = "geomech", version, about = "Poisson structures, Hamiltonian flows and integrability checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the system registry.
    List(ListArgs),
    /// Integrate a system and write the trajectory with its integrals.
    Simulate(RunArgs),
    /// Audit the Liouville hypotheses at seeded random probes.
    Check(RunArgs),
    /// Compare the free rigid body with its elliptic-function solution.
    EulerExact(RunArgs),
    /// Kummer residuals and integral drift along a Kowalewski trajectory.
    KowalewskiVerify(RunArgs),
    /// Residual of the Yang-Mills spectral curve along a trajectory.
    YmCurve(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ListArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Catalog name; see `geomech list`.
    #[arg(long)]
    system: Option<String>,
    /// Parameter override `name=value`, repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    /// Final time.
    #[arg(long)]
    t1: Option<f64>,
    /// RK4 step.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Seed for probe sampling (ChaCha8).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of audit probes.
    #[arg(long, default_value_t = 30)]
    probes: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

enum Failure {
    Usage(String),
    Blowup { time: f64, last_good: f64 },
    Tolerance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Blowup { time, last_good } => Failure::Blowup { time, last_good },
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("cannot write output: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn emit(out: &Option<PathBuf>, body: &str) -> Outcome {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_table(header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Usage(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| num(*v))).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_table(header: &[String], rows: impl Iterator<Item = Vec<f64>>, extra: serde_json::Value) -> String {
    let rows: Vec<Vec<f64>> = rows.collect();
    let mut v = json!({ "columns": header, "rows": rows });
    if let serde_json::Value::Object(extra) = extra {
        v.as_object_mut().expect("object").extend(extra);
    }
    format!("{}\n", serde_json::to_string_pretty(&v).expect("table serializes"))
}

fn table(args: &RunArgs, header: &[String], rows: Vec<Vec<f64>>, extra: serde_json::Value) -> Result<String, Failure> {
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_table(header, rows.into_iter()),
        Format::Json => Ok(json_table(header, rows.into_iter(), extra)),
    }
}

fn fixed_system(args: &RunArgs, name: &str) -> Result<(), Failure> {
    match &args.system {
        Some(s) if s != name => Err(Failure::Usage(format!("this command runs `{name}`, not `{s}`"))),
        _ => Ok(()),
    }
}

fn start_state(args: &RunArgs, name: &str) -> Result<Vec<f64>, Failure> {
    match &args.x0 {
        Some(x0) => Ok(x0.clone()),
        None => Ok(catalog::reference_initial_conditions(name, &args.params)?.remove(0)),
    }
}

fn final_time(args: &RunArgs, default: f64) -> Result<f64, Failure> {
    let t1 = args.t1.unwrap_or(default);
    if !(t1 >= 0.0 && t1.is_finite()) {
        return Err(Failure::Usage(format!("--t1 must be finite and non-negative, got {t1}")));
    }
    Ok(t1)
}

fn list(args: &ListArgs) -> Outcome {
    let body = match args.format {
        Format::Json => format!("{}\n", catalog::registry_json()),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Failure::Usage(format!("csv: {e}"));
            w.write_record(["name", "dim", "n", "k", "description"]).map_err(io)?;
            for s in catalog::list() {
                w.write_record([s.name, s.dim.to_string(), s.n.to_string(), s.k.to_string(), s.description]).map_err(io)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Failure::Usage(format!("csv: {e}")))?).expect("utf-8")
        }
    };
    emit(&args.out, &body)
}

fn simulate(args: &RunArgs) -> Outcome {
    let name = args.system.as_deref().unwrap_or("euler-top");
    let sys = catalog::get(name, &args.params)?;
    let x0 = start_state(args, name)?;
    let t1 = final_time(args, 10.0)?;
    let conserved = sys.conserved();
    let fields: Vec<_> = conserved.iter().map(|n| n.field.clone()).collect();
    let tr = trace(&sys.vector_field(&FdConfig::default())?, &x0, t1, &Integrator::rk4(args.step)?, &fields)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=sys.dim()).map(|i| format!("x{i}")));
    header.extend(conserved.iter().map(|n| n.name.clone()));
    let rows = (0..tr.len()).map(|s| {
        let mut row = vec![tr.times[s]];
        row.extend_from_slice(&tr.states[s]);
        row.extend(tr.invariant_log.iter().map(|log| log[s]));
        row
    });
    let drift: Vec<f64> = (0..conserved.len()).map(|i| tr.drift(i)).collect();
    let body = table(args, &header, rows.collect(), json!({ "system": name, "drift": drift }))?;
    emit(&args.out, &body)
}

fn check(args: &RunArgs) -> Outcome {
    if args.format == Some(Format::Csv) {
        return Err(Failure::Usage("check writes JSON only".into()));
    }
    let name = args.system.as_deref().unwrap_or("euler-top");
    let sys = catalog::get(name, &args.params)?;
    if args.probes == 0 {
        return Err(Failure::Usage("--probes must be positive".into()));
    }
    let cfg = AuditConfig { seed: args.seed, ..AuditConfig::default() };
    let probes = sample_box(sys.dim(), args.probes, cfg.box_half_width, args.seed);
    let report = audit(&sys, &probes, &cfg)?;
    emit(&args.out, &format!("{}\n", report.to_json()))?;
    if report.verdict == VERDICT_NOT_CERTIFIED {
        let failed = [
            (report.skew_ok, "skew symmetry"),
            (report.jacobi_ok, "Jacobi identity"),
            (report.casimirs_ok, "Casimir annihilation"),
            (report.involution_ok, "involution"),
            (report.independence_ok, "independence"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map_or("audit", |(_, what)| what);
        return Err(Failure::Tolerance(format!("{name}: {failed} check failed")));
    }
    Ok(())
}

fn euler_lambda(params: &[(String, f64)]) -> Result<[f64; 3], Failure> {
    let info = catalog::info("euler-top")?;
    let value = |k: &str| {
        params.iter().rev().find(|(n, _)| n == k).map(|(_, v)| *v).or_else(|| info.params.iter().find(|p| p.name == k).map(|p| p.default))
    };
    let mut out = [0.0; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = value(&format!("lambda{}", i + 1)).expect("euler-top declares three moments");
    }
    Ok(out)
}

fn euler_exact(args: &RunArgs) -> Outcome {
    fixed_system(args, "euler-top")?;
    let sys = catalog::get("euler-top", &args.params)?;
    let lambda = euler_lambda(&args.params)?;
    let x0 = start_state(args, "euler-top")?;
    if x0.len() != 3 {
        return Err(Failure::Usage(format!("euler-top needs 3 coordinates, got {}", x0.len())));
    }
    let t1 = final_time(args, 5.0)?;
    let m0 = [x0[0], x0[1], x0[2]];
    let exact = EulerSolution::new(lambda, m0)?;
    let x = sys.vector_field(&FdConfig::default())?;
    let integ = Integrator::rk4(args.step)?;
    let n = ((t1 / EXACT_ROW_DT).round() as usize).max(1);
    let dt = t1 / n as f64;
    let mut state = x0.clone();
    let mut rows = Vec::with_capacity(n + 1);
    let mut worst = 0.0f64;
    for i in 0..=n {
        if i > 0 {
            state = flow(&x, &state, dt, &integ)?;
        }
        let t = i as f64 * dt;
        let e = exact.eval(t)?;
        let err = state.iter().zip(e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        rows.push(vec![t, state[0], state[1], state[2], e[0], e[1], e[2], err]);
    }
    let header = ["t", "m1", "m2", "m3", "m1_exact", "m2_exact", "m3_exact", "abs_err"].map(String::from);
    let body = table(args, &header, rows, json!({ "lambda": lambda, "max_abs_err": worst, "tolerance": EXACT_TOL }))?;
    emit(&args.out, &body)?;
    eprintln!("max |closed - numeric| = {worst:e}");
    if worst > EXACT_TOL {
        return Err(Failure::Tolerance(format!("closed form deviates by {worst:e} > {EXACT_TOL:e}")));
    }
    Ok(())
}

fn thinned(tr: &Trajectory, every: usize) -> Trajectory {
    Trajectory {
        times: tr.times.iter().step_by(every).copied().collect(),
        states: tr.states.iter().step_by(every).cloned().collect(),
        invariant_log: vec![],
    }
}

fn kowalewski_verify(args: &RunArgs) -> Outcome {
    fixed_system(args, "kowalewski")?;
    let sys = catalog::get("kowalewski", &args.params)?;
    let x0 = start_state(args, "kowalewski")?;
    let t1 = final_time(args, 10.0)?;
    let consts = KowalewskiConstants::from_state(&x0)?;
    let x = sys.vector_field(&FdConfig::default())?;
    let tr = trace(&x, &x0, t1, &Integrator::rk4(args.step)?, &integral_fields()?)?;
    let rows = residual_report(&tr, consts)?;
    let kummer = rows.iter().map(|r| r.r1.max(r.r2)).fold(0.0, f64::max);
    let drift = rows.iter().flat_map(|r| r.drift).fold(0.0, f64::max);
    let every = ((0.02 / args.step).round() as usize).max(1);
    let samples = euler_relation(&x, &thinned(&tr, every), consts, &EulerRelationConfig::default())?;
    let relation = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    let body = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => report_csv(&rows)?,
        Format::Json => {
            let v = json!({
                "constants": { "h1": consts.h1, "h2": consts.h2, "k2": consts.k2 },
                "max_kummer": kummer,
                "max_drift": drift,
                "max_euler_relation": relation,
                "euler_relation_samples": samples.len(),
                "rows": rows,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("report serializes"))
        }
    };
    emit(&args.out, &body)?;
    eprintln!("max Kummer residual {kummer:e}, max drift {drift:e}, Euler relation {relation:e} over {} samples", samples.len());
    if kummer > KUMMER_TOL {
        return Err(Failure::Tolerance(format!("Kummer residual {kummer:e} > {KUMMER_TOL:e}")));
    }
    if drift > DRIFT_TOL {
        return Err(Failure::Tolerance(format!("integral drift {drift:e} > {DRIFT_TOL:e}")));
    }
    if relation > EULER_RELATION_TOL {
        return Err(Failure::Tolerance(format!("Euler relation residual {relation:e} > {EULER_RELATION_TOL:e}")));
    }
    Ok(())
}

fn ym_curve(args: &RunArgs) -> Outcome {
    fixed_system(args, "yang-mills")?;
    let sys = catalog::get("yang-mills", &args.params)?;
    let x0 = start_state(args, "yang-mills")?;
    let t1 = final_time(args, 10.0)?;
    let tr = trace(&sys.vector_field(&FdConfig::default())?, &x0, t1, &Integrator::rk4(args.step)?, &[])?;
    let c1 = sys.hamiltonian.eval(&x0);
    let c2 = sys.integrals[1].field.eval(&x0);
    let mut worst = 0.0f64;
    let rows: Vec<Vec<f64>> = tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(t, s)| {
            let z = s[0] * s[0] + s[1] * s[1];
            let w = s[0] * s[2] + s[1] * s[3];
            let r = ym_curve_residual_at(s, c1, c2);
            worst = worst.max(r);
            vec![*t, z, w, r]
        })
        .collect();
    let header = ["t", "z", "w", "residual"].map(String::from);
    let body = table(args, &header, rows, json!({ "c1": c1, "c2": c2, "max_residual": worst, "tolerance": CURVE_TOL }))?;
    emit(&args.out, &body)?;
    eprintln!("curve w^2 + z^3/2 - 2 c1 z + c2^2 with c1 = {c1}, c2 = {c2}: max residual {worst:e}");
    if worst > CURVE_TOL {
        return Err(Failure::Tolerance(format!("curve residual {worst:e} > {CURVE_TOL:e}")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::List(a) => list(a),
        Command::Simulate(a) => simulate(a),
        Command::Check(a) => check(a),
        Command::EulerExact(a) => euler_exact(a),
        Command::KowalewskiVerify(a) => kowalewski_verify(a),
        Command::YmCurve(a) => ym_curve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Blowup { time, last_good }) => {
            eprintln!("error: integration blew up at t = {time}; last good time {last_good}");
            ExitCode::from(3)
        }
        Err(Failure::Tolerance(msg)) => {
            eprintln!("tolerance failure: {msg}");
            ExitCode::from(4)
        }
    }
}
