//! Assembly of the finite convex programs: the lifted relaxation, the
//! unstructured and multitransport bounds, and the outer decision problem.

mod build;
mod instance;
mod sweep;

pub use build::{
    build_multitransport, build_outer_dro, build_relaxation, build_relaxation_with_selector,
    build_unstructured, OuterProgram,
};
pub use instance::{InstanceFile, ThetaSpec, UQInstance};
pub use sweep::{
    sweep_outer, sweep_relaxation, CurvePoint, OuterCurve, OuterPoint, PointStatus, RelaxationCurve,
};

use serde::{Deserialize, Serialize};

use crate::conic::{solve_with, ConicProgram, SolveStatus, SolverSettings};
use crate::error::Result;
use crate::scalar::Real;

/// Outcome of solving one assembled program. The value is the optimal value,
/// `+∞` when the dual program is infeasible (the worst case is unbounded)
/// and `−∞` when it is unbounded below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Evaluation<T = f64> {
    pub value: T,
    pub status: SolveStatus,
    pub n_vars: usize,
    pub n_rows: usize,
    pub iterations: usize,
    pub solve_ms: f64,
    #[serde(skip)]
    pub x: Vec<T>,
}

pub fn evaluate<T: Real>(
    program: &ConicProgram<T>,
    settings: &SolverSettings<T>,
) -> Result<Evaluation<T>> {
    let r = solve_with(program, settings)?;
    Ok(Evaluation {
        value: r.value,
        status: r.status,
        n_vars: program.n_vars(),
        n_rows: program.n_rows(),
        iterations: r.iterations,
        solve_ms: r.solve_time.as_secs_f64() * 1e3,
        x: r.x,
    })
}

/// Solves `U_M^sym(ℓ)`.
pub fn relaxation_value<T: Real>(
    instance: &UQInstance<T>,
    m: usize,
    settings: &SolverSettings<T>,
    cap: usize,
) -> Result<Evaluation<T>> {
    evaluate(&build_relaxation(instance, m, cap)?, settings)
}

/// Solves the unstructured bound `U(ℓ)`.
pub fn unstructured_value<T: Real>(
    instance: &UQInstance<T>,
    settings: &SolverSettings<T>,
    cap: usize,
) -> Result<Evaluation<T>> {
    evaluate(&build_unstructured(instance, cap)?, settings)
}

/// Solves the multitransport dual.
pub fn multitransport_value<T: Real>(
    instance: &UQInstance<T>,
    settings: &SolverSettings<T>,
    cap: usize,
) -> Result<Evaluation<T>> {
    evaluate(&build_multitransport(instance, cap)?, settings)
}
