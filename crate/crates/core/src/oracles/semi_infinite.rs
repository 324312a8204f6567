use crate::combinatorics::enumerate_tuples;
use crate::conic::{solve_with, ConicProgram, LinExpr, SolveStatus, SolverSettings};
use crate::distributions::product_power;
use crate::error::{Error, Result};
use crate::program::UQInstance;
use crate::scalar::Real;

use super::reference::golden_section;

/// `sup_x ℓ_sym(x) − μ c^M(x, ξ)` for one atom `ξ` of `P̂^{⊗M}`, as a
/// concave maximization over `x`, the tuple epigraph values `t_l` and the
/// block distances `s_j`. Returns `+∞` when the supremum is unbounded.
fn inner_sup<T: Real>(
    instance: &UQInstance<T>,
    vertices: &[Vec<T>],
    tuples: &crate::combinatorics::TupleSet,
    xi: &[T],
    mu: T,
    settings: &SolverSettings<T>,
) -> Result<T> {
    let n = instance.nominal.dim();
    let m = tuples.m();
    let c: T = tuples.coefficient();
    let mut p = ConicProgram::new();
    let x = p.add_free_block(n * m);
    let t0 = p.add_free_block(tuples.len());
    for k in 0..tuples.len() {
        p.set_objective(t0 + k, -c);
    }
    for (k, l) in tuples.iter().enumerate() {
        for h in vertices {
            let mut terms = vec![(t0 + k, T::one())];
            for (pos, &j) in l.iter().enumerate() {
                for r in 0..n {
                    let coef = h[pos * n + r];
                    if coef != T::zero() {
                        terms.push((x + j * n + r, -coef));
                    }
                }
            }
            p.add_le(terms, h[n * l.len()]);
        }
    }
    for j in 0..m {
        let s = p.add_nonneg();
        p.set_objective(s, mu);
        let entries = (0..n)
            .map(|r| LinExpr::new(vec![(x + j * n + r, T::one())], -xi[j * n + r]))
            .collect();
        p.add_norm_cone(instance.cost.norm, entries, s);
    }
    let r = solve_with(&p, settings)?;
    match r.status {
        SolveStatus::Optimal => Ok(-r.value),
        SolveStatus::Unbounded => Ok(T::infinity()),
        s => Err(Error::SolverFailure(format!(
            "inner supremum ended with {s:?}"
        ))),
    }
}

/// Independent evaluation of `U_M^sym(ℓ)` through its one-multiplier dual
/// `inf_{μ≥0} Mρμ + E_{ξ∼P̂^{⊗M}} sup_x [ℓ_sym(x) − μ c^M(x, ξ)]`, with the
/// outer infimum found by golden-section search to `refinement` in `μ`.
pub fn semi_infinite_dual<T: Real>(
    instance: &UQInstance<T>,
    m: usize,
    refinement: f64,
    settings: &SolverSettings<T>,
    cap: usize,
) -> Result<T> {
    instance.validate()?;
    let vertices = instance
        .loss
        .vertices()
        .ok_or_else(|| Error::InvalidInput("semi-infinite dual needs the loss vertices".into()))?;
    let tuples = enumerate_tuples(m, instance.arity(), cap)?;
    let atoms = product_power(&instance.nominal, m, cap)?;
    let mu_max = instance
        .loss
        .max_block_gradient_norm(instance.cost.norm.dual())
        .unwrap_or(T::one())
        .to_f64_lossy()
        .max(1e-3);
    let mut failure = None;
    let mut dual = |mu: f64| -> f64 {
        if failure.is_some() {
            return f64::INFINITY;
        }
        let mu_t = T::of(mu);
        let mut acc = T::of_usize(m) * instance.radius * mu_t;
        for (xi, w) in atoms.iter() {
            match inner_sup(instance, vertices, &tuples, xi, mu_t, settings) {
                Ok(v) if v.is_infinite() => return f64::INFINITY,
                Ok(v) => acc += w * v,
                Err(e) => {
                    failure = Some(e);
                    return f64::INFINITY;
                }
            }
        }
        acc.to_f64_lossy()
    };
    let (_, value) = golden_section(&mut dual, 0.0, mu_max * 1.01, refinement);
    if let Some(e) = failure {
        return Err(e);
    }
    if !value.is_finite() {
        return Err(Error::SolverFailure(
            "dual function infinite on the whole bracket".into(),
        ));
    }
    Ok(T::of(value))
}
