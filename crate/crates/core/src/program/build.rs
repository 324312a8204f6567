use num_traits::ToPrimitive;

use crate::combinatorics::{
    count_classes, count_tuples, enumerate_classes, enumerate_tuples, MultiIndexClass,
};
use crate::conic::{ConicProgram, LinExpr};
use crate::distributions::{product_power, DiscreteDistribution, TransportCost};
use crate::error::{Error, Result};
use crate::losses::{emit_membership, LossPolytope, ParametricPolyhedralLoss};
use crate::scalar::Real;

use super::UQInstance;

/// A relaxation program whose loss depends on a decision `θ`, together with
/// the indices of the `θ` variables.
#[derive(Debug, Clone)]
pub struct OuterProgram<T> {
    pub program: ConicProgram<T>,
    pub theta: Vec<usize>,
}

fn check_norm_cost(cost: &TransportCost, dim: usize) -> Result<()> {
    if cost.squared {
        return Err(Error::InvalidInput(
            "program builders need a norm cost, not a squared one".into(),
        ));
    }
    if cost.dim != dim {
        return Err(Error::dim(dim, cost.dim));
    }
    Ok(())
}

fn extra_vars_per_membership<T>(polytope: &LossPolytope<T>) -> usize {
    match polytope {
        LossPolytope::Vertices(v) => v.len(),
        LossPolytope::Halfspaces { .. } => 0,
    }
}

struct Lift<'a, T> {
    nominal: &'a DiscreteDistribution<T>,
    cost: TransportCost,
    radius: T,
    arity: usize,
    polytope: &'a LossPolytope<T>,
    theta: Option<(&'a [Vec<T>], &'a [(T, T)])>,
}

impl<T: Real> Lift<'_, T> {
    fn estimate_vars(&self, m: usize) -> u128 {
        let n = self.nominal.dim();
        let classes = count_classes(self.nominal.len(), m)
            .to_u128()
            .unwrap_or(u128::MAX);
        let tuples = count_tuples(m, self.arity).to_u128().unwrap_or(u128::MAX);
        let per_tuple = (n * self.arity + 1 + extra_vars_per_membership(self.polytope)) as u128;
        tuples
            .saturating_mul(per_tuple)
            .saturating_add(1)
            .saturating_mul(classes)
            .saturating_add(1 + self.theta.map_or(0, |(_, b)| b.len()) as u128)
    }

    fn assemble(
        &self,
        m: usize,
        cap: usize,
        selector: &mut dyn FnMut(&MultiIndexClass<T>) -> Vec<usize>,
    ) -> Result<(ConicProgram<T>, Vec<usize>)> {
        let n = self.nominal.dim();
        check_norm_cost(&self.cost, n)?;
        if m < self.arity {
            return Err(Error::InvalidInput(format!(
                "lifting parameter M = {m} is below the arity N = {}",
                self.arity
            )));
        }
        let estimate = self.estimate_vars(m);
        if estimate > cap as u128 {
            return Err(Error::cap("program variables", estimate, cap));
        }
        let tuples = enumerate_tuples(m, self.arity, cap)?;
        let classes = enumerate_classes(self.nominal.weights(), m, cap)?;
        let c: T = tuples.coefficient();
        let dual = self.cost.norm.dual();
        let d = n * self.arity;

        let mut prog = ConicProgram::new();
        let mu = prog.add_nonneg();
        prog.set_objective(mu, T::of_usize(m) * self.radius);
        let theta_vars: Vec<usize> = self
            .theta
            .map(|(_, b)| {
                b.iter()
                    .map(|&(lo, hi)| prog.add_var(Some(lo), Some(hi)))
                    .collect()
            })
            .unwrap_or_default();
        let theta = self.theta.map(|(g, _)| (g, theta_vars.as_slice()));

        for class in &classes {
            let member = selector(class);
            if member.len() != m || !class.contains(&member) {
                return Err(Error::InvalidInput(
                    "selector returned a tuple outside its class".into(),
                ));
            }
            let sigma = prog.add_free();
            prog.set_objective(sigma, class.weight);
            let mut sigma_row = vec![(sigma, -T::one())];
            let mut z: Vec<Vec<Vec<(usize, T)>>> = vec![vec![Vec::new(); n]; m];
            for l in tuples.iter() {
                let a = prog.add_free_block(d);
                let b = prog.add_free();
                let a_vars: Vec<usize> = (a..a + d).collect();
                emit_membership(&mut prog, self.polytope, &a_vars, b, theta);
                for (k, &j) in l.iter().enumerate() {
                    let xi = self.nominal.atom(member[j]);
                    for r in 0..n {
                        let v = a + k * n + r;
                        if xi[r] != T::zero() {
                            sigma_row.push((v, -c * xi[r]));
                        }
                        z[j][r].push((v, c));
                    }
                }
                sigma_row.push((b, -c));
            }
            prog.add_le(sigma_row, T::zero());
            for block in z {
                prog.add_norm_cone(dual, block.into_iter().map(LinExpr::linear).collect(), mu);
            }
        }
        Ok((prog, theta_vars))
    }
}

fn lift_of<T: Real>(instance: &UQInstance<T>) -> Lift<'_, T> {
    Lift {
        nominal: &instance.nominal,
        cost: instance.cost,
        radius: instance.radius,
        arity: instance.arity(),
        polytope: instance.loss.polytope(),
        theta: None,
    }
}

/// The lifted relaxation `U_M^sym(ℓ)` with the canonical (sorted) selector.
pub fn build_relaxation<T: Real>(
    instance: &UQInstance<T>,
    m: usize,
    cap: usize,
) -> Result<ConicProgram<T>> {
    build_relaxation_with_selector(instance, m, cap, |c| c.representative.clone())
}

/// The lifted relaxation with a caller-chosen member of every class.
pub fn build_relaxation_with_selector<T: Real, F>(
    instance: &UQInstance<T>,
    m: usize,
    cap: usize,
    mut selector: F,
) -> Result<ConicProgram<T>>
where
    F: FnMut(&MultiIndexClass<T>) -> Vec<usize>,
{
    instance.validate()?;
    Ok(lift_of(instance).assemble(m, cap, &mut selector)?.0)
}

/// Jointly minimizes the lifted relaxation over the decision box.
pub fn build_outer_dro<T: Real>(
    ploss: &ParametricPolyhedralLoss<T>,
    nominal: &DiscreteDistribution<T>,
    radius: T,
    cost: &TransportCost,
    m: usize,
    cap: usize,
) -> Result<OuterProgram<T>> {
    if ploss.block_dim() != nominal.dim() {
        return Err(Error::dim(nominal.dim(), ploss.block_dim()));
    }
    if !(radius >= T::zero()) {
        return Err(Error::InvalidInput("radius must be nonnegative".into()));
    }
    let base = ploss.base_polytope();
    let lift = Lift {
        nominal,
        cost: *cost,
        radius,
        arity: ploss.arity(),
        polytope: &base,
        theta: Some((ploss.big_g(), ploss.theta_box())),
    };
    let (program, theta) = lift.assemble(m, cap, &mut |c| c.representative.clone())?;
    Ok(OuterProgram { program, theta })
}

fn per_atom_program<T: Real>(
    instance: &UQInstance<T>,
    cap: usize,
    split_mu: bool,
) -> Result<ConicProgram<T>> {
    instance.validate()?;
    let n = instance.nominal.dim();
    let arity = instance.arity();
    let d = n * arity;
    let polytope = instance.loss.polytope();
    let prod = product_power(&instance.nominal, arity, cap)?;
    let estimate = prod.len() as u128 * (d + 2 + extra_vars_per_membership(polytope)) as u128;
    if estimate > cap as u128 {
        return Err(Error::cap("program variables", estimate, cap));
    }
    let dual = instance.cost.norm.dual();
    let mut prog = ConicProgram::new();
    let mus: Vec<usize> = if split_mu {
        (0..arity)
            .map(|_| {
                let v = prog.add_nonneg();
                prog.set_objective(v, instance.radius);
                v
            })
            .collect()
    } else {
        let v = prog.add_nonneg();
        prog.set_objective(v, T::of_usize(arity) * instance.radius);
        vec![v; arity]
    };
    for (xi, p) in prod.iter() {
        let sigma = prog.add_free();
        prog.set_objective(sigma, p);
        let a = prog.add_free_block(d);
        let b = prog.add_free();
        let a_vars: Vec<usize> = (a..a + d).collect();
        emit_membership(&mut prog, polytope, &a_vars, b, None);
        let mut row = vec![(sigma, -T::one()), (b, -T::one())];
        row.extend(
            a_vars
                .iter()
                .zip(xi)
                .filter(|(_, &x)| x != T::zero())
                .map(|(&v, &x)| (v, -x)),
        );
        prog.add_le(row, T::zero());
        for (j, &mu) in mus.iter().enumerate() {
            let entries = (0..n).map(|r| LinExpr::var(a + j * n + r)).collect();
            prog.add_norm_cone(dual, entries, mu);
        }
    }
    Ok(prog)
}

/// The unstructured bound `U(ℓ)` over the ball of radius `Nρ` around `P̂^{⊗N}`.
pub fn build_unstructured<T: Real>(
    instance: &UQInstance<T>,
    cap: usize,
) -> Result<ConicProgram<T>> {
    per_atom_program(instance, cap, false)
}

/// The multitransport dual with one multiplier per coordinate block.
pub fn build_multitransport<T: Real>(
    instance: &UQInstance<T>,
    cap: usize,
) -> Result<ConicProgram<T>> {
    per_atom_program(instance, cap, true)
}
