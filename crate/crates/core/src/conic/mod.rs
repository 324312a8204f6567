//! Linear programs with optional norm-cone blocks, and the solvers behind them.
//!
//! A [`ConicProgram`] is assembled with a small builder API and handed to
//! [`solve`]. Pure linear programs of moderate size go to a dense two-phase
//! simplex; everything else goes to a homogeneous self-dual interior-point
//! method with Mehrotra steps over the nonnegative orthant and second-order
//! cones.

mod cones;
mod ipm;
mod ldl;
mod lower;
pub mod lp_format;
mod simplex;
mod sparse;
pub mod transport;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::distributions::NormKind;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use lp_format::to_lp_string;
pub use transport::{solve_transport, solve_transport_lp, TransportSolution};

/// An affine expression `Σ coef·x_var + constant`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LinExpr<T> {
    pub terms: Vec<(usize, T)>,
    pub constant: T,
}

impl<T: Real> LinExpr<T> {
    pub fn new(terms: Vec<(usize, T)>, constant: T) -> Self {
        LinExpr { terms, constant }
    }

    pub fn linear(terms: Vec<(usize, T)>) -> Self {
        LinExpr {
            terms,
            constant: T::zero(),
        }
    }

    pub fn var(v: usize) -> Self {
        Self::linear(vec![(v, T::one())])
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(v, c)| acc + c * x[v])
    }
}

/// A linear row `Σ coef·x_var (= or ≤) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Row<T> {
    pub terms: Vec<(usize, T)>,
    pub rhs: T,
}

impl<T: Real> Row<T> {
    pub fn activity(&self, x: &[T]) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, &(v, c)| acc + c * x[v])
    }
}

/// `‖(e_1(x), .., e_k(x))‖ ≤ x_bound` in the given norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConeBlock<T> {
    pub norm: NormKind,
    pub entries: Vec<LinExpr<T>>,
    pub bound: usize,
}

/// Minimize a linear objective over linear rows, variable bounds and norm cones.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConicProgram<T = f64> {
    pub objective: Vec<T>,
    pub objective_offset: T,
    pub lower: Vec<Option<T>>,
    pub upper: Vec<Option<T>>,
    pub eq_rows: Vec<Row<T>>,
    pub le_rows: Vec<Row<T>>,
    pub cones: Vec<ConeBlock<T>>,
}

impl<T: Real> ConicProgram<T> {
    pub fn new() -> Self {
        ConicProgram {
            objective: Vec::new(),
            objective_offset: T::zero(),
            lower: Vec::new(),
            upper: Vec::new(),
            eq_rows: Vec::new(),
            le_rows: Vec::new(),
            cones: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    /// Rows counted after expanding each cone block into its entries plus the bound.
    pub fn n_rows(&self) -> usize {
        let bounds = self.lower.iter().filter(|b| b.is_some()).count()
            + self.upper.iter().filter(|b| b.is_some()).count();
        self.eq_rows.len()
            + self.le_rows.len()
            + bounds
            + self
                .cones
                .iter()
                .map(|c| c.entries.len() + 1)
                .sum::<usize>()
    }

    pub fn n_nonzeros(&self) -> usize {
        self.eq_rows
            .iter()
            .chain(&self.le_rows)
            .map(|r| r.terms.len())
            .sum::<usize>()
            + self
                .cones
                .iter()
                .map(|c| 1 + c.entries.iter().map(|e| e.terms.len()).sum::<usize>())
                .sum::<usize>()
    }

    pub fn add_var(&mut self, lower: Option<T>, upper: Option<T>) -> usize {
        self.objective.push(T::zero());
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_free(&mut self) -> usize {
        self.add_var(None, None)
    }

    pub fn add_nonneg(&mut self) -> usize {
        self.add_var(Some(T::zero()), None)
    }

    /// Adds `k` free variables and returns the index of the first.
    pub fn add_free_block(&mut self, k: usize) -> usize {
        let first = self.n_vars();
        for _ in 0..k {
            self.add_free();
        }
        first
    }

    pub fn set_objective(&mut self, var: usize, coef: T) {
        self.objective[var] = coef;
    }

    pub fn add_eq(&mut self, terms: Vec<(usize, T)>, rhs: T) {
        self.eq_rows.push(Row { terms, rhs });
    }

    pub fn add_le(&mut self, terms: Vec<(usize, T)>, rhs: T) {
        self.le_rows.push(Row { terms, rhs });
    }

    pub fn add_ge(&mut self, terms: Vec<(usize, T)>, rhs: T) {
        let terms = terms.into_iter().map(|(v, c)| (v, -c)).collect();
        self.le_rows.push(Row { terms, rhs: -rhs });
    }

    pub fn add_norm_cone(&mut self, norm: NormKind, entries: Vec<LinExpr<T>>, bound: usize) {
        self.cones.push(ConeBlock {
            norm,
            entries,
            bound,
        });
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        self.objective
            .iter()
            .zip(x)
            .fold(self.objective_offset, |acc, (&c, &v)| acc + c * v)
    }

    /// Checks index ranges and finiteness of all coefficients.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidInput(
                "bound vectors do not match variable count".into(),
            ));
        }
        let check_terms = |terms: &[(usize, T)]| -> Result<()> {
            for &(v, c) in terms {
                if v >= n {
                    return Err(Error::InvalidInput(format!(
                        "variable index {v} out of range"
                    )));
                }
                if !c.is_finite() {
                    return Err(Error::InvalidInput("non-finite coefficient".into()));
                }
            }
            Ok(())
        };
        for r in self.eq_rows.iter().chain(&self.le_rows) {
            check_terms(&r.terms)?;
            if !r.rhs.is_finite() {
                return Err(Error::InvalidInput("non-finite right-hand side".into()));
            }
        }
        for c in &self.cones {
            if c.bound >= n {
                return Err(Error::InvalidInput(format!(
                    "cone bound index {} out of range",
                    c.bound
                )));
            }
            if c.entries.is_empty() {
                return Err(Error::InvalidInput("empty cone block".into()));
            }
            for e in &c.entries {
                check_terms(&e.terms)?;
            }
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if let (Some(l), Some(u)) = (l, u) {
                if l > u {
                    return Err(Error::InvalidInput(
                        "lower bound exceeds upper bound".into(),
                    ));
                }
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(
                "non-finite objective coefficient".into(),
            ));
        }
        Ok(())
    }

    /// Largest violation of rows, bounds and cones at `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut v = T::zero();
        for r in &self.eq_rows {
            v = v.max((r.activity(x) - r.rhs).abs());
        }
        for r in &self.le_rows {
            v = v.max(r.activity(x) - r.rhs);
        }
        for (i, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if let Some(l) = l {
                v = v.max(*l - x[i]);
            }
            if let Some(u) = u {
                v = v.max(x[i] - *u);
            }
        }
        for c in &self.cones {
            let vals: Vec<T> = c.entries.iter().map(|e| e.eval(x)).collect();
            v = v.max(c.norm.eval(&vals) - x[c.bound]);
        }
        v
    }

    /// Multiplies the objective by `factor`.
    pub fn scaled_objective(&self, factor: T) -> Self {
        let mut p = self.clone();
        p.objective.iter_mut().for_each(|c| *c *= factor);
        p.objective_offset *= factor;
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Unbounded,
    Infeasible,
    IterationLimit,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::Unbounded => "Unbounded",
            SolveStatus::Infeasible => "Infeasible",
            SolveStatus::IterationLimit => "IterationLimit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Simplex for pure linear programs whose dense tableau fits the size limit, else interior point.
    Auto,
    InteriorPoint,
    Simplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SolverSettings<T> {
    pub tolerance: T,
    pub max_iter: usize,
    pub method: Method,
    /// Largest dense tableau (rows × columns) the automatic dispatch sends to simplex.
    pub simplex_tableau_limit: usize,
    pub equilibrate: bool,
}

impl<T: Real> Default for SolverSettings<T> {
    fn default() -> Self {
        SolverSettings {
            tolerance: T::default_tolerance(),
            max_iter: 200,
            method: Method::Auto,
            simplex_tableau_limit: 250_000,
            equilibrate: true,
        }
    }
}

impl<T: Real> SolverSettings<T> {
    pub fn with_tolerance(tolerance: T) -> Self {
        SolverSettings {
            tolerance,
            ..Self::default()
        }
    }

    pub fn method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}

/// Multipliers of the program rows, in the sign convention of the Lagrangian
/// `cᵀx + yᵀ(Ax - b)`: inequality multipliers are nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DualCertificate<T> {
    pub eq: Vec<T>,
    pub le: Vec<T>,
    /// Dual objective value; a lower bound on the optimal value.
    pub bound: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SolveResult<T> {
    pub status: SolveStatus,
    /// Optimal value for `Optimal`, `+∞` for `Infeasible`, `-∞` for `Unbounded`,
    /// and the objective at the last iterate for `IterationLimit`.
    pub value: T,
    pub x: Vec<T>,
    pub dual: Option<DualCertificate<T>>,
    /// Improving direction with objective slope `-1` when `Unbounded`.
    pub ray: Option<Vec<T>>,
    pub iterations: usize,
    pub solve_time: Duration,
    pub method: Method,
    /// Relative primal residual of the reported point.
    pub primal_residual: T,
    /// Relative duality gap of the reported point.
    pub gap: T,
}

/// Solves with the given tolerance and iteration limit and automatic method choice.
pub fn solve<T: Real>(
    program: &ConicProgram<T>,
    tolerance: T,
    iteration_limit: usize,
) -> Result<SolveResult<T>> {
    let settings = SolverSettings {
        tolerance,
        max_iter: iteration_limit,
        ..SolverSettings::default()
    };
    solve_with(program, &settings)
}

pub fn solve_with<T: Real>(
    program: &ConicProgram<T>,
    settings: &SolverSettings<T>,
) -> Result<SolveResult<T>> {
    program.validate()?;
    if !(settings.tolerance > T::zero()) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let start = Instant::now();
    let form = lower::lower(program);
    let use_simplex = match settings.method {
        Method::Simplex => {
            if !form.is_linear() {
                return Err(Error::InvalidInput(
                    "simplex requires a program without second-order cone blocks".into(),
                ));
            }
            true
        }
        Method::InteriorPoint => false,
        Method::Auto => {
            form.is_linear() && simplex::tableau_size(&form) <= settings.simplex_tableau_limit
        }
    };
    let raw = if use_simplex {
        simplex::solve(&form, settings)?
    } else {
        ipm::solve(&form, settings)?
    };
    let mut result = form.finish(program, raw);
    result.method = if use_simplex {
        Method::Simplex
    } else {
        Method::InteriorPoint
    };
    result.solve_time = start.elapsed();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_methods() -> [Method; 2] {
        [Method::Simplex, Method::InteriorPoint]
    }

    #[test]
    fn lower_bound_lp() {
        for m in all_methods() {
            let mut p = ConicProgram::<f64>::new();
            let x = p.add_free();
            p.set_objective(x, 1.0);
            p.add_ge(vec![(x, 1.0)], 3.0);
            let r = solve_with(&p, &SolverSettings::with_tolerance(1e-9).method(m)).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal, "{m:?}");
            assert!((r.value - 3.0).abs() < 1e-8, "{m:?} {}", r.value);
            let d = r.dual.unwrap();
            assert!(d.bound <= r.value + 1e-8);
            assert!((d.le[0] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn unbounded_lp_has_ray() {
        for m in all_methods() {
            let mut p = ConicProgram::<f64>::new();
            let x = p.add_free();
            p.set_objective(x, -1.0);
            p.add_ge(vec![(x, 1.0)], 0.0);
            let r = solve_with(&p, &SolverSettings::with_tolerance(1e-9).method(m)).unwrap();
            assert_eq!(r.status, SolveStatus::Unbounded, "{m:?}");
            assert_eq!(r.value, f64::NEG_INFINITY);
            let ray = r.ray.unwrap();
            assert!(ray[0] > 0.0);
        }
    }

    #[test]
    fn infeasible_lp() {
        for m in all_methods() {
            let mut p = ConicProgram::<f64>::new();
            let x = p.add_nonneg();
            p.set_objective(x, 1.0);
            p.add_le(vec![(x, 1.0)], -1.0);
            let r = solve_with(&p, &SolverSettings::with_tolerance(1e-9).method(m)).unwrap();
            assert_eq!(r.status, SolveStatus::Infeasible, "{m:?}");
            assert_eq!(r.value, f64::INFINITY);
        }
    }

    #[test]
    fn euclidean_norm_cone() {
        let mut p = ConicProgram::<f64>::new();
        let t = p.add_free();
        p.set_objective(t, 1.0);
        p.add_norm_cone(
            NormKind::L2,
            vec![LinExpr::new(vec![], 3.0), LinExpr::new(vec![], 4.0)],
            t,
        );
        let r = solve(&p, 1e-9, 100).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.method, Method::InteriorPoint);
        assert!((r.value - 5.0).abs() < 1e-7);
    }

    #[test]
    fn l1_and_linf_cones() {
        for (norm, expect) in [(NormKind::L1, 7.0), (NormKind::Linf, 4.0)] {
            for m in all_methods() {
                let mut p = ConicProgram::<f64>::new();
                let t = p.add_free();
                p.set_objective(t, 1.0);
                p.add_norm_cone(
                    norm,
                    vec![LinExpr::new(vec![], -3.0), LinExpr::new(vec![], 4.0)],
                    t,
                );
                let r = solve_with(&p, &SolverSettings::with_tolerance(1e-9).method(m)).unwrap();
                assert!(
                    (r.value - expect).abs() < 1e-7,
                    "{norm:?} {m:?} {}",
                    r.value
                );
            }
        }
    }

    #[test]
    fn small_lp_both_methods_agree() {
        for m in all_methods() {
            let mut p = ConicProgram::<f64>::new();
            let x = p.add_nonneg();
            let y = p.add_nonneg();
            p.set_objective(x, -1.0);
            p.set_objective(y, -2.0);
            p.add_le(vec![(x, 1.0), (y, 1.0)], 4.0);
            p.add_le(vec![(x, 1.0), (y, 3.0)], 6.0);
            p.add_eq(vec![(x, 1.0), (y, -1.0)], 1.0);
            let r = solve_with(&p, &SolverSettings::with_tolerance(1e-10).method(m)).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal);
            assert!((r.x[0] - 2.25).abs() < 1e-7, "{m:?} {:?}", r.x);
            assert!((r.x[1] - 1.25).abs() < 1e-7);
            assert!((r.value + 4.75).abs() < 1e-8);
            assert!(p.max_violation(&r.x) < 1e-8);
        }
    }

    #[test]
    fn scaling_covariance() {
        let mut p = ConicProgram::<f64>::new();
        let x = p.add_nonneg();
        let y = p.add_nonneg();
        p.set_objective(x, 1.0);
        p.set_objective(y, 2.0);
        p.add_ge(vec![(x, 1.0), (y, 1.0)], 1.5);
        p.add_ge(vec![(x, -1.0), (y, 1.0)], -0.5);
        for m in all_methods() {
            let s = SolverSettings::with_tolerance(1e-10).method(m);
            let a = solve_with(&p, &s).unwrap();
            let b = solve_with(&p.scaled_objective(7.5), &s).unwrap();
            assert!((b.value - 7.5 * a.value).abs() < 1e-9 * (1.0 + b.value.abs()));
            assert!((a.x[0] - b.x[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_program_rejected() {
        let mut p = ConicProgram::<f64>::new();
        p.add_free();
        p.add_le(vec![(3, 1.0)], 0.0);
        assert!(solve(&p, 1e-9, 10).is_err());
    }

    #[test]
    fn single_precision_lp() {
        let mut p = ConicProgram::<f32>::new();
        let x = p.add_free();
        p.set_objective(x, 1.0);
        p.add_ge(vec![(x, 1.0)], 3.0);
        for m in all_methods() {
            let r = solve_with(&p, &SolverSettings::default().method(m)).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal);
            assert!((r.value - 3.0).abs() < 1e-3);
        }
    }
}
