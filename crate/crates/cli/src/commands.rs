use std::io::Write;
use std::path::Path;

use struct_wdro::conic::{SolveStatus, SolverSettings};
use struct_wdro::distributions::{wasserstein_exact, DiscreteDistribution, TransportCost};
use struct_wdro::oracles::{cases_for, generate_fixtures, reference_case, reference_value};
use struct_wdro::program::{
    multitransport_value, relaxation_value, sweep_outer, sweep_relaxation, unstructured_value,
    InstanceFile, PointStatus,
};
use struct_wdro::Error;

use crate::output::{fmt_value, CompareRecord, OracleRecord, UqRecord, WassersteinRecord};
use crate::{Command, OracleArgs, RunConfig, WassersteinArgs};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } => 3,
            Error::SolverFailure(_) | Error::NumericalFailure(_) => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Uq(c) => cmd_uq(&c),
        Command::Sweep(c) => cmd_sweep(&c),
        Command::Dro(c) => cmd_dro(&c),
        Command::Wasserstein(a) => cmd_wasserstein(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Compare(c) => cmd_compare(&c),
        Command::Fixtures(c) => cmd_fixtures(&c),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_instance(cfg: &RunConfig) -> Result<InstanceFile, Failure> {
    let path = cfg
        .instance
        .as_ref()
        .ok_or_else(|| usage("--instance is required"))?;
    let mut file: InstanceFile = read_json(path)?;
    if let Some(rho) = cfg.rho {
        file.radius = rho;
    }
    if let Some(norm) = cfg.norm {
        file.norm = norm;
    }
    Ok(file)
}

fn settings(cfg: &RunConfig) -> Result<SolverSettings<f64>, Failure> {
    if !(cfg.tol > 0.0 && cfg.tol <= 1e-2) {
        return Err(usage(format!(
            "--tol must lie in (0, 1e-2], got {}",
            cfg.tol
        )));
    }
    if cfg.cap == 0 {
        return Err(usage("--cap must be positive"));
    }
    Ok(SolverSettings::with_tolerance(cfg.tol))
}

/// Parses `a..b`, `a..=b`, `a-b` (all inclusive), `a,b,c` or a single level.
pub fn parse_m_range(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || usage(format!("cannot parse M range '{s}'"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let ms: Vec<usize> = if let Some((a, b)) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .or_else(|| s.split_once('-'))
    {
        let (a, b) = (num(a)?, num(b)?);
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    if ms.is_empty() {
        return Err(usage(format!("M range '{s}' is empty")));
    }
    Ok(ms)
}

fn m_levels(
    cfg: &RunConfig,
    default: std::ops::RangeInclusive<usize>,
) -> Result<Vec<usize>, Failure> {
    match (&cfg.m_range, cfg.m) {
        (Some(r), _) => parse_m_range(r),
        (None, Some(m)) => Ok(vec![m]),
        (None, None) => Ok(default.collect()),
    }
}

fn check_levels(ms: &[usize], arity: usize) -> Result<(), Failure> {
    match ms.iter().find(|&&m| m < arity) {
        Some(m) => Err(usage(format!(
            "lifting level M = {m} is below the arity N = {arity}"
        ))),
        None => Ok(()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| usage(format!("writing output: {e}")))
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("records serialize");
    s.push('\n');
    s
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::IterationLimit => 4,
        _ => 0,
    }
}

fn cmd_uq(cfg: &RunConfig) -> Outcome {
    let file = load_instance(cfg)?;
    let s = settings(cfg)?;
    let inst = file.to_instance()?;
    let m = cfg.m.unwrap_or(inst.arity());
    check_levels(&[m], inst.arity())?;
    let e = relaxation_value(&inst, m, &s, cfg.cap)?;
    println!(
        "M={m} value={} status={} n_vars={} n_rows={}",
        fmt_value(e.value),
        e.status,
        e.n_vars,
        e.n_rows
    );
    if let Some(out) = &cfg.out {
        let rec = UqRecord {
            m,
            value: e.value,
            status: e.status.to_string(),
            n_vars: e.n_vars,
            n_rows: e.n_rows,
            iterations: e.iterations,
            solve_ms: (!cfg.no_timing).then_some(e.solve_ms),
        };
        emit(Some(out), &to_json(&rec))?;
    }
    Ok(status_code(e.status))
}

fn sweep_exit(statuses: impl Iterator<Item = PointStatus>) -> u8 {
    let all: Vec<PointStatus> = statuses.collect();
    if all.iter().any(|s| s.is_solved()) {
        0
    } else if all.iter().all(|&s| s == PointStatus::CapExceeded) {
        3
    } else {
        4
    }
}

fn cmd_sweep(cfg: &RunConfig) -> Outcome {
    let file = load_instance(cfg)?;
    let s = settings(cfg)?;
    let inst = file.to_instance()?;
    let n = inst.arity();
    let ms = m_levels(cfg, n..=n + 8)?;
    check_levels(&ms, n)?;
    let curve = sweep_relaxation(&inst, &ms, &s, cfg.cap, cfg.jobs)?;
    let mut buf = Vec::new();
    curve.write_csv(&mut buf, !cfg.no_timing)?;
    let mut text = String::from_utf8(buf).expect("CSV is UTF-8");
    let baseline = match unstructured_value(&inst, &s, cfg.cap) {
        Ok(e) => format!(
            "unstructured,{},{},{},{},{}\n",
            fmt_value(e.value),
            e.status,
            e.n_vars,
            e.n_rows,
            if cfg.no_timing {
                String::new()
            } else {
                format!("{:.3}", e.solve_ms)
            }
        ),
        Err(err) => {
            let status = if matches!(err, Error::CapExceeded { .. }) {
                "CapExceeded"
            } else {
                "Failed"
            };
            eprintln!("unstructured baseline: {err}");
            format!("unstructured,,{status},0,0,\n")
        }
    };
    text.push_str(&baseline);
    for p in &curve.points {
        if let Some(e) = &p.error {
            eprintln!("M={}: {e}", p.m);
        }
    }
    if !curve.monotone {
        eprintln!("warning: relaxation values are not nonincreasing within tolerance");
    }
    emit(cfg.out.as_deref(), &text)?;
    Ok(sweep_exit(curve.points.iter().map(|p| p.status)))
}

fn cmd_dro(cfg: &RunConfig) -> Outcome {
    let file = load_instance(cfg)?;
    let s = settings(cfg)?;
    if !file.is_parametric() {
        return Err(usage(
            "dro needs a parametric loss with \"G\", \"g0\" and \"theta_box\"",
        ));
    }
    let ploss = file.to_parametric()?;
    let n = file.arity;
    let ms = m_levels(cfg, 2.max(n)..=8.max(n))?;
    check_levels(&ms, n)?;
    let curve = sweep_outer(
        &ploss,
        &file.nominal,
        file.radius,
        &file.cost(),
        &ms,
        &s,
        cfg.cap,
        cfg.jobs,
    )?;
    let mut buf = Vec::new();
    curve.write_csv(&mut buf, !cfg.no_timing)?;
    for p in &curve.points {
        if let Some(e) = &p.error {
            eprintln!("M={}: {e}", p.m);
        }
    }
    if !curve.monotone {
        eprintln!("warning: outer values are not nonincreasing within tolerance");
    }
    emit(
        cfg.out.as_deref(),
        &String::from_utf8(buf).expect("CSV is UTF-8"),
    )?;
    Ok(sweep_exit(curve.points.iter().map(|p| p.status)))
}

fn cmd_wasserstein(a: &WassersteinArgs) -> Outcome {
    let p: DiscreteDistribution = read_json(&a.first)?;
    let q: DiscreteDistribution = read_json(&a.second)?;
    if p.dim() != q.dim() {
        return Err(Error::dim(p.dim(), q.dim()).into());
    }
    let (value, plan) = wasserstein_exact(&p, &q, &TransportCost::new(a.norm, p.dim()))?;
    println!("{}", fmt_value(value));
    let rows: Vec<Vec<f64>> = (0..p.len())
        .map(|i| (0..q.len()).map(|j| plan.get(i, j)).collect())
        .collect();
    if a.plan {
        for r in &rows {
            let cells: Vec<String> = r.iter().map(|&v| fmt_value(v)).collect();
            println!("{}", cells.join(","));
        }
    }
    if let Some(out) = &a.out {
        let rec = WassersteinRecord {
            value,
            plan: a.plan.then_some(rows),
        };
        emit(Some(out), &to_json(&rec))?;
    }
    Ok(0)
}

fn cmd_oracle(a: &OracleArgs) -> Outcome {
    let cases = if a.case.contains('/') {
        vec![reference_case(&a.case)?]
    } else {
        cases_for(&a.case)?
    };
    let mut records = Vec::new();
    for c in &cases {
        let value = reference_value(c, a.rho, a.m)?;
        println!("{} {}", c.name(), fmt_value(value));
        records.push(OracleRecord {
            case: c.name(),
            rho: a.rho,
            m: a.m,
            value,
        });
    }
    if let Some(out) = &a.out {
        emit(Some(out), &to_json(&records))?;
    }
    Ok(0)
}

fn cmd_compare(cfg: &RunConfig) -> Outcome {
    let file = load_instance(cfg)?;
    let s = settings(cfg)?;
    let inst = file.to_instance()?;
    let m = cfg.m.unwrap_or(inst.arity());
    check_levels(&[m], inst.arity())?;
    let u = unstructured_value(&inst, &s, cfg.cap)?;
    let sym = relaxation_value(&inst, m, &s, cfg.cap)?;
    let mt = multitransport_value(&inst, &s, cfg.cap)?;
    println!("unstructured {}", fmt_value(u.value));
    println!("symmetrized_M{m} {}", fmt_value(sym.value));
    println!("multitransport {}", fmt_value(mt.value));
    if let Some(out) = &cfg.out {
        let rec = CompareRecord {
            m,
            unstructured: u.value,
            symmetrized: sym.value,
            multitransport: mt.value,
        };
        emit(Some(out), &to_json(&rec))?;
    }
    Ok([u.status, sym.status, mt.status]
        .into_iter()
        .map(status_code)
        .max()
        .unwrap_or(0))
}

fn cmd_fixtures(cfg: &RunConfig) -> Outcome {
    let s = settings(cfg)?;
    let fixtures = generate_fixtures(&s, cfg.jobs)?;
    let mut text = fixtures.to_json();
    text.push('\n');
    emit(cfg.out.as_deref(), &text)?;
    eprintln!("{} fixture entries", fixtures.entries.len());
    Ok(0)
}
