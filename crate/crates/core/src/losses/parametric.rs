use crate::conic::{solve_with, ConicProgram, Method, SolveStatus, SolverSettings};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{polytope, LossPolytope, PolyhedralLoss};

/// A polyhedral loss whose polytope moves with a decision `θ`:
/// `H(θ) = {h : W h ≤ Gθ + g0}` for `θ` in a box.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricPolyhedralLoss<T = f64> {
    n: usize,
    arity: usize,
    w: Vec<Vec<T>>,
    big_g: Vec<Vec<T>>,
    g0: Vec<T>,
    theta_box: Vec<(T, T)>,
}

impl<T: Real> ParametricPolyhedralLoss<T> {
    /// Validates shapes, the box, boundedness of every `H(θ)` and that at
    /// least one `θ` in the box gives a nonempty polytope.
    pub fn new(
        n: usize,
        arity: usize,
        w: Vec<Vec<T>>,
        big_g: Vec<Vec<T>>,
        g0: Vec<T>,
        theta_box: Vec<(T, T)>,
    ) -> Result<Self> {
        let width = n * arity + 1;
        let rows = w.len();
        if big_g.len() != rows {
            return Err(Error::dim(rows, big_g.len()));
        }
        if g0.len() != rows {
            return Err(Error::dim(rows, g0.len()));
        }
        for r in &w {
            if r.len() != width {
                return Err(Error::dim(width, r.len()));
            }
        }
        let p = theta_box.len();
        for r in &big_g {
            if r.len() != p {
                return Err(Error::dim(p, r.len()));
            }
        }
        if p == 0
            || theta_box
                .iter()
                .any(|&(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::EmptyTheta);
        }
        let zero = vec![T::zero(); rows];
        match polytope::check_bounded_nonempty(&w, &zero) {
            Ok(()) => {}
            Err(Error::UnboundedPolytope) => return Err(Error::UnboundedPolytope),
            Err(e) => return Err(e),
        }
        let loss = ParametricPolyhedralLoss {
            n,
            arity,
            w,
            big_g,
            g0,
            theta_box,
        };
        if !loss.has_feasible_theta()? {
            return Err(Error::EmptyTheta);
        }
        Ok(loss)
    }

    fn has_feasible_theta(&self) -> Result<bool> {
        let mut p = ConicProgram::new();
        let width = self.w[0].len();
        let h = p.add_free_block(width);
        let th: Vec<usize> = self
            .theta_box
            .iter()
            .map(|&(lo, hi)| p.add_var(Some(lo), Some(hi)))
            .collect();
        for i in 0..self.w.len() {
            let mut terms: Vec<(usize, T)> = (0..width).map(|k| (h + k, self.w[i][k])).collect();
            terms.extend(th.iter().zip(&self.big_g[i]).map(|(&t, &c)| (t, -c)));
            p.add_le(terms, self.g0[i]);
        }
        let r = solve_with(&p, &SolverSettings::default().method(Method::Simplex))?;
        Ok(r.status == SolveStatus::Optimal)
    }

    pub fn block_dim(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn theta_dim(&self) -> usize {
        self.theta_box.len()
    }

    pub fn theta_box(&self) -> &[(T, T)] {
        &self.theta_box
    }

    pub fn w(&self) -> &[Vec<T>] {
        &self.w
    }

    pub fn big_g(&self) -> &[Vec<T>] {
        &self.big_g
    }

    pub fn g0(&self) -> &[T] {
        &self.g0
    }

    /// `g(θ) = Gθ + g0`.
    pub fn g_at(&self, theta: &[T]) -> Result<Vec<T>> {
        if theta.len() != self.theta_dim() {
            return Err(Error::dim(self.theta_dim(), theta.len()));
        }
        Ok(self
            .big_g
            .iter()
            .zip(&self.g0)
            .map(|(row, &c)| crate::scalar::dot(row, theta) + c)
            .collect())
    }

    /// The fixed loss at `θ`; `EmptyPolytope` when `H(θ)` is empty.
    pub fn at(&self, theta: &[T]) -> Result<PolyhedralLoss<T>> {
        let g = self.g_at(theta)?;
        PolyhedralLoss::from_halfspaces(self.n, self.arity, self.w.clone(), g)
    }

    /// Halfspace description with the constant part `g0`, used together with
    /// the `G` matrix when `θ` is a program variable.
    pub fn base_polytope(&self) -> LossPolytope<T> {
        LossPolytope::Halfspaces {
            w: self.w.clone(),
            g: self.g0.clone(),
        }
    }

    /// The same family with `θ` frozen to a single point.
    pub fn with_singleton(&self, theta: &[T]) -> Result<Self> {
        if theta.len() != self.theta_dim() {
            return Err(Error::dim(self.theta_dim(), theta.len()));
        }
        Self::new(
            self.n,
            self.arity,
            self.w.clone(),
            self.big_g.clone(),
            self.g0.clone(),
            theta.iter().map(|&t| (t, t)).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outer() -> ParametricPolyhedralLoss {
        ParametricPolyhedralLoss::new(
            1,
            2,
            vec![
                vec![1.0, 1.0, -1.0],
                vec![-1.0, 0.0, 0.0],
                vec![1.5, -0.5, -0.5],
                vec![0.0, 0.0, 1.0],
            ],
            vec![vec![-1.0], vec![1.0], vec![-1.0], vec![1.0]],
            vec![1.0, 0.0, 0.5, 0.0],
            vec![(-3.0, 3.0)],
        )
        .unwrap()
    }

    #[test]
    fn polytope_empty_below_threshold() {
        let l = outer();
        assert_eq!(l.at(&[-1.0]), Err(Error::EmptyPolytope));
        assert!(l.at(&[-0.5]).is_ok());
        assert!(l.at(&[3.0]).is_ok());
    }

    #[test]
    fn empty_theta() {
        let l = outer();
        let err = ParametricPolyhedralLoss::new(
            1,
            2,
            l.w.clone(),
            l.big_g.clone(),
            l.g0.clone(),
            vec![(-3.0, -1.0)],
        );
        assert_eq!(err, Err(Error::EmptyTheta));
        let err = ParametricPolyhedralLoss::new(
            1,
            2,
            l.w.clone(),
            l.big_g.clone(),
            l.g0.clone(),
            vec![(1.0, 0.0)],
        );
        assert_eq!(err, Err(Error::EmptyTheta));
        assert!(l.with_singleton(&[0.25]).is_ok());
    }
}
