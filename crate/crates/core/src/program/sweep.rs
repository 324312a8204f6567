use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{SolveStatus, SolverSettings};
use crate::distributions::{DiscreteDistribution, TransportCost};
use crate::error::{Error, Result};
use crate::losses::ParametricPolyhedralLoss;
use crate::scalar::Real;

use super::{build_outer_dro, evaluate, relaxation_value, UQInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointStatus {
    Optimal,
    Unbounded,
    Infeasible,
    IterationLimit,
    CapExceeded,
    Failed,
}

impl From<SolveStatus> for PointStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => PointStatus::Optimal,
            SolveStatus::Unbounded => PointStatus::Unbounded,
            SolveStatus::Infeasible => PointStatus::Infeasible,
            SolveStatus::IterationLimit => PointStatus::IterationLimit,
        }
    }
}

impl std::fmt::Display for PointStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

impl PointStatus {
    fn of_error(e: &Error) -> Self {
        match e {
            Error::CapExceeded { .. } => PointStatus::CapExceeded,
            _ => PointStatus::Failed,
        }
    }

    pub fn is_solved(self) -> bool {
        matches!(
            self,
            PointStatus::Optimal | PointStatus::Unbounded | PointStatus::Infeasible
        )
    }
}

/// One lifting level of a relaxation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CurvePoint<T = f64> {
    pub m: usize,
    pub value: Option<T>,
    pub status: PointStatus,
    pub n_vars: usize,
    pub n_rows: usize,
    pub solve_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// `U_M^sym(ℓ)` over a range of `M`, ordered by `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RelaxationCurve<T = f64> {
    pub points: Vec<CurvePoint<T>>,
    /// Whether the solved values are nonincreasing within ten times the solver tolerance.
    pub monotone: bool,
}

pub(crate) fn fmt_value<T: Real>(v: Option<T>) -> String {
    match v.map(|v| v.to_f64_lossy()) {
        None => String::new(),
        Some(v) if v == f64::INFINITY => "inf".into(),
        Some(v) if v == f64::NEG_INFINITY => "-inf".into(),
        Some(v) => format!("{v}"),
    }
}

fn fmt_ms(ms: f64, timing: bool) -> String {
    if timing {
        format!("{ms:.3}")
    } else {
        String::new()
    }
}

fn nonincreasing<T: Real>(values: impl Iterator<Item = T>, tol: T) -> bool {
    let mut prev: Option<T> = None;
    for v in values {
        if let Some(p) = prev {
            if v > p + tol * (T::one() + p.abs()) {
                return false;
            }
        }
        prev = Some(v);
    }
    true
}

fn with_pool<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if jobs > 0 {
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

impl<T: Real> RelaxationCurve<T> {
    /// CSV with columns `M,value,status,n_vars,n_rows,solve_ms`; the timing
    /// column is left empty when `timing` is false.
    pub fn write_csv<W: Write>(&self, out: W, timing: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidInput(format!("writing CSV: {e}"));
        w.write_record(["M", "value", "status", "n_vars", "n_rows", "solve_ms"])
            .map_err(io)?;
        for p in &self.points {
            w.write_record([
                p.m.to_string(),
                fmt_value(p.value),
                p.status.to_string(),
                p.n_vars.to_string(),
                p.n_rows.to_string(),
                fmt_ms(p.solve_ms, timing),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidInput(format!("writing CSV: {e}")))?;
        Ok(())
    }

    pub fn solved(&self) -> impl Iterator<Item = &CurvePoint<T>> {
        self.points.iter().filter(|p| p.status.is_solved())
    }
}

/// Solves the relaxation at every `M` in `ms`, up to `jobs` at a time.
/// Failures are recorded per point and do not stop the sweep.
pub fn sweep_relaxation<T: Real>(
    instance: &UQInstance<T>,
    ms: &[usize],
    settings: &SolverSettings<T>,
    cap: usize,
    jobs: usize,
) -> Result<RelaxationCurve<T>> {
    if ms.is_empty() {
        return Err(Error::InvalidInput("empty M range".into()));
    }
    let mut ms = ms.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let points: Vec<CurvePoint<T>> = with_pool(jobs, || {
        ms.par_iter()
            .map(|&m| match relaxation_value(instance, m, settings, cap) {
                Ok(e) => CurvePoint {
                    m,
                    value: Some(e.value),
                    status: e.status.into(),
                    n_vars: e.n_vars,
                    n_rows: e.n_rows,
                    solve_ms: e.solve_ms,
                    error: None,
                },
                Err(err) => CurvePoint {
                    m,
                    value: None,
                    status: PointStatus::of_error(&err),
                    n_vars: 0,
                    n_rows: 0,
                    solve_ms: 0.0,
                    error: Some(err.to_string()),
                },
            })
            .collect()
    })?;
    let tol = settings.tolerance * T::of(10.0);
    let monotone = nonincreasing(
        points
            .iter()
            .filter(|p| p.status == PointStatus::Optimal)
            .filter_map(|p| p.value),
        tol,
    );
    Ok(RelaxationCurve { points, monotone })
}

/// One lifting level of the outer decision sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OuterPoint<T = f64> {
    pub m: usize,
    pub theta: Vec<T>,
    /// `Ψ_U^M(θ*_M)`.
    pub value: Option<T>,
    /// `Ψ_U^{M_max}(θ*_M)`, the stand-in for the true objective at `θ*_M`.
    pub proxy: Option<T>,
    pub status: PointStatus,
    pub n_vars: usize,
    pub n_rows: usize,
    pub solve_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OuterCurve<T = f64> {
    pub points: Vec<OuterPoint<T>>,
    pub m_max: usize,
    /// Lifting level whose decision has the smallest proxy value; among values
    /// within the monotonicity tolerance the smallest `M` wins.
    pub m_star: Option<usize>,
    /// Whether `Ψ_U^M(θ*_M)` is nonincreasing within ten times the solver tolerance.
    pub monotone: bool,
    /// Whether the proxy sequence is nonincreasing within the same tolerance.
    pub proxy_monotone: bool,
}

impl<T: Real> OuterCurve<T> {
    /// CSV with columns `M,theta,value,proxy,status,n_vars,n_rows,solve_ms`
    /// followed by a final `M*` line. Multi-dimensional decisions are joined by `;`.
    pub fn write_csv<W: Write>(&self, out: W, timing: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        let io = |e: csv::Error| Error::InvalidInput(format!("writing CSV: {e}"));
        w.write_record([
            "M", "theta", "value", "proxy", "status", "n_vars", "n_rows", "solve_ms",
        ])
        .map_err(io)?;
        for p in &self.points {
            let theta: Vec<String> = p.theta.iter().map(|&t| fmt_value(Some(t))).collect();
            w.write_record([
                p.m.to_string(),
                theta.join(";"),
                fmt_value(p.value),
                fmt_value(p.proxy),
                p.status.to_string(),
                p.n_vars.to_string(),
                p.n_rows.to_string(),
                fmt_ms(p.solve_ms, timing),
            ])
            .map_err(io)?;
        }
        let star = self.m_star.map(|m| m.to_string()).unwrap_or_default();
        w.write_record(["M*", star.as_str()]).map_err(io)?;
        w.flush()
            .map_err(|e| Error::InvalidInput(format!("writing CSV: {e}")))?;
        Ok(())
    }
}

fn clamp_to_box<T: Real>(theta: &[T], bounds: &[(T, T)]) -> Vec<T> {
    theta
        .iter()
        .zip(bounds)
        .map(|(&t, &(lo, hi))| t.max(lo).min(hi))
        .collect()
}

/// Solves the joint outer program for every `M` in `ms`, then re-evaluates
/// each decision at the largest `M` and picks `M*` minimizing that proxy.
#[allow(clippy::too_many_arguments)]
pub fn sweep_outer<T: Real>(
    ploss: &ParametricPolyhedralLoss<T>,
    nominal: &DiscreteDistribution<T>,
    radius: T,
    cost: &TransportCost,
    ms: &[usize],
    settings: &SolverSettings<T>,
    cap: usize,
    jobs: usize,
) -> Result<OuterCurve<T>> {
    if ms.is_empty() {
        return Err(Error::InvalidInput("empty M range".into()));
    }
    let mut ms = ms.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let m_max = *ms.last().expect("nonempty");
    let mut points: Vec<OuterPoint<T>> = with_pool(jobs, || {
        ms.par_iter()
            .map(|&m| {
                let solved = build_outer_dro(ploss, nominal, radius, cost, m, cap)
                    .and_then(|op| evaluate(&op.program, settings).map(|e| (op, e)));
                match solved {
                    Ok((op, e)) => OuterPoint {
                        m,
                        theta: clamp_to_box(
                            &op.theta
                                .iter()
                                .map(|&i| e.x.get(i).copied().unwrap_or(T::nan()))
                                .collect::<Vec<_>>(),
                            ploss.theta_box(),
                        ),
                        value: Some(e.value),
                        proxy: None,
                        status: e.status.into(),
                        n_vars: e.n_vars,
                        n_rows: e.n_rows,
                        solve_ms: e.solve_ms,
                        error: None,
                    },
                    Err(err) => OuterPoint {
                        m,
                        theta: Vec::new(),
                        value: None,
                        proxy: None,
                        status: PointStatus::of_error(&err),
                        n_vars: 0,
                        n_rows: 0,
                        solve_ms: 0.0,
                        error: Some(err.to_string()),
                    },
                }
            })
            .collect()
    })?;
    let proxies: Vec<Option<T>> = with_pool(jobs, || {
        points
            .par_iter()
            .map(|p| {
                if p.status != PointStatus::Optimal {
                    return None;
                }
                let frozen = ploss.with_singleton(&p.theta).ok()?;
                let op = build_outer_dro(&frozen, nominal, radius, cost, m_max, cap).ok()?;
                let e = evaluate(&op.program, settings).ok()?;
                (e.status == SolveStatus::Optimal).then_some(e.value)
            })
            .collect()
    })?;
    for (p, q) in points.iter_mut().zip(proxies) {
        p.proxy = q;
    }
    let tol = settings.tolerance * T::of(10.0);
    let m_star = points
        .iter()
        .filter_map(|p| p.proxy.map(|q| (p.m, q)))
        .fold(None, |best: Option<(usize, T)>, (m, q)| match best {
            Some((_, bq)) if bq <= q + tol * (T::one() + q.abs()) => best,
            _ => Some((m, q)),
        })
        .map(|(m, _)| m);
    let optimal = || points.iter().filter(|p| p.status == PointStatus::Optimal);
    let monotone = nonincreasing(optimal().filter_map(|p| p.value), tol);
    let proxy_monotone = nonincreasing(optimal().filter_map(|p| p.proxy), tol);
    Ok(OuterCurve {
        points,
        m_max,
        m_star,
        monotone,
        proxy_monotone,
    })
}
