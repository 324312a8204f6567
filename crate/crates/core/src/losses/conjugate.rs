use crate::combinatorics::{enumerate_tuples, TupleSet};
use crate::conic::{solve_with, ConicProgram, Method, SolveStatus, SolverSettings};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{LossPolytope, PolyhedralLoss};

/// Conjugate of the convex polyhedral function `f(x) = max_{h∈H'} hᵀ[x;1]`
/// where `H'` is the convex hull of `f_vertices`:
/// `f*(z) = −max{b : [z; b] ∈ H'}`, and `+∞` outside the domain.
pub fn conjugate_eval<T: Real>(f_vertices: &[Vec<T>], z: &[T]) -> T {
    let Some(first) = f_vertices.first() else {
        return T::infinity();
    };
    let d = first.len() - 1;
    if z.len() != d {
        return T::infinity();
    }
    let mut p = ConicProgram::new();
    let b = p.add_free();
    p.set_objective(b, -T::one());
    let lam: Vec<usize> = f_vertices.iter().map(|_| p.add_nonneg()).collect();
    for k in 0..d {
        p.add_eq(
            lam.iter()
                .zip(f_vertices)
                .map(|(&l, v)| (l, v[k]))
                .collect(),
            z[k],
        );
    }
    let mut row: Vec<(usize, T)> = lam
        .iter()
        .zip(f_vertices)
        .map(|(&l, v)| (l, v[d]))
        .collect();
    row.push((b, -T::one()));
    p.add_eq(row, T::zero());
    p.add_eq(lam.iter().map(|&l| (l, T::one())).collect(), T::one());
    match solve_with(&p, &SolverSettings::default().method(Method::Simplex)) {
        Ok(r) if r.status == SolveStatus::Optimal => r.value,
        _ => T::infinity(),
    }
}

/// The conjugate blocks of one equivalence class in the lifted program:
/// one pair `(a_l, b_l)` per non-repeating tuple `l`, all weighted by
/// `(M−N)!/M!`.
#[derive(Debug, Clone)]
pub struct MembershipBlocks<T> {
    pub tuples: TupleSet,
    pub coefficient: T,
    pub block_dim: usize,
    pub arity: usize,
}

impl<T: Real> MembershipBlocks<T> {
    pub fn m(&self) -> usize {
        self.tuples.m()
    }

    /// Number of scalar variables in one `(a_l, b_l)` block.
    pub fn vars_per_tuple(&self) -> usize {
        self.block_dim * self.arity + 1
    }
}

pub fn conjugate_membership_blocks<T: Real>(
    loss: &PolyhedralLoss<T>,
    m: usize,
    cap: usize,
) -> Result<MembershipBlocks<T>> {
    if m < loss.arity() {
        return Err(Error::InvalidInput(format!(
            "lifting parameter M = {m} is below the arity N = {}",
            loss.arity()
        )));
    }
    let tuples = enumerate_tuples(m, loss.arity(), cap)?;
    let coefficient = tuples.coefficient();
    Ok(MembershipBlocks {
        tuples,
        coefficient,
        block_dim: loss.block_dim(),
        arity: loss.arity(),
    })
}

/// Adds the constraint `[a; b] ∈ −H` on existing variables.
///
/// In halfspace form the rows are `−W[a;b] ≤ g`, with `g` replaced by
/// `g0 + Gθ` when `theta` supplies `(G, θ variables)`. In vertex form fresh
/// weights `λ ≥ 0` with `Σλ = 1` and `[a;b] + Σ λ_v v = 0` are introduced.
/// Returns the number of rows added.
pub fn emit_membership<T: Real>(
    prog: &mut ConicProgram<T>,
    polytope: &LossPolytope<T>,
    a: &[usize],
    b: usize,
    theta: Option<(&[Vec<T>], &[usize])>,
) -> usize {
    let d = a.len();
    match polytope {
        LossPolytope::Halfspaces { w, g } => {
            for (i, (row, &gi)) in w.iter().zip(g).enumerate() {
                let mut terms: Vec<(usize, T)> = Vec::with_capacity(d + 1);
                for k in 0..d {
                    if row[k] != T::zero() {
                        terms.push((a[k], -row[k]));
                    }
                }
                if row[d] != T::zero() {
                    terms.push((b, -row[d]));
                }
                if let Some((big_g, vars)) = theta {
                    for (&t, &c) in vars.iter().zip(&big_g[i]) {
                        if c != T::zero() {
                            terms.push((t, -c));
                        }
                    }
                }
                prog.add_le(terms, gi);
            }
            w.len()
        }
        LossPolytope::Vertices(vs) => {
            let lam: Vec<usize> = vs.iter().map(|_| prog.add_nonneg()).collect();
            for k in 0..=d {
                let own = if k < d { a[k] } else { b };
                let mut terms = vec![(own, T::one())];
                terms.extend(
                    lam.iter()
                        .zip(vs)
                        .filter(|(_, v)| v[k] != T::zero())
                        .map(|(&l, v)| (l, v[k])),
                );
                prog.add_eq(terms, T::zero());
            }
            prog.add_eq(lam.iter().map(|&l| (l, T::one())).collect(), T::one());
            d + 2
        }
    }
}
