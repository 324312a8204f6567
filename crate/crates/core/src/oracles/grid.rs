use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conic::solve_transport;
use crate::distributions::{DiscreteDistribution, TransportCost};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::reference::golden_section;

/// Settings of the multi-start ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearch {
    pub restarts: usize,
    pub seed: u64,
    /// Upper limit on sweeps over all grid pairs per restart.
    pub max_rounds: usize,
}

impl Default for GridSearch {
    fn default() -> Self {
        GridSearch {
            restarts: 8,
            seed: 0,
            max_rounds: 200,
        }
    }
}

struct Problem<'a, T> {
    grid_len: usize,
    arity: usize,
    values: Vec<T>,
    costs: Vec<T>,
    nominal: &'a DiscreteDistribution<T>,
    radius: T,
}

impl<T: Real> Problem<'_, T> {
    fn objective(&self, w: &[T]) -> T {
        let g = self.grid_len;
        let mut idx = vec![0usize; self.arity];
        let mut acc = T::zero();
        for &v in &self.values {
            let mut p = T::one();
            for &i in &idx {
                p *= w[i];
            }
            acc += p * v;
            for k in (0..self.arity).rev() {
                idx[k] += 1;
                if idx[k] < g {
                    break;
                }
                idx[k] = 0;
            }
        }
        acc
    }

    fn distance(&self, w: &[T]) -> Result<T> {
        Ok(solve_transport(&self.costs, w, self.nominal.weights())?.value)
    }

    fn feasible(&self, w: &[T]) -> bool {
        let slack = T::of(1e-9) * (T::one() + self.radius);
        self.distance(w)
            .map(|d| d <= self.radius + slack)
            .unwrap_or(false)
    }

    fn moved(w: &[T], i: usize, j: usize, delta: T) -> Vec<T> {
        let mut out = w.to_vec();
        out[i] -= delta;
        out[j] += delta;
        if out[i] < T::zero() {
            out[i] = T::zero();
        }
        out
    }

    fn best_step(&self, w: &[T], i: usize, j: usize) -> Option<(T, T)> {
        let mut dmax = w[i];
        if dmax <= T::zero() {
            return None;
        }
        if !self.feasible(&Self::moved(w, i, j, dmax)) {
            let (mut lo, mut hi) = (T::zero(), dmax);
            for _ in 0..40 {
                let mid = (lo + hi) / T::of(2.0);
                if self.feasible(&Self::moved(w, i, j, mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            dmax = lo;
        }
        if dmax <= T::of(1e-15) {
            return None;
        }
        let f = |d: T| self.objective(&Self::moved(w, i, j, d));
        let mut samples: Vec<T> = (0..=16)
            .map(|k| dmax * T::of_usize(k) / T::of(16.0))
            .collect();
        samples.extend((1..30).map(|k| dmax * T::of(0.5f64.powi(k))));
        let (mut best_d, mut best_f) = (T::zero(), f(T::zero()));
        for d in samples {
            let v = f(d);
            if v > best_f {
                best_d = d;
                best_f = v;
            }
        }
        let step = dmax / T::of(16.0);
        let lo = (best_d - step).max(T::zero()).to_f64_lossy();
        let hi = (best_d + step).min(dmax).to_f64_lossy();
        let (d, v) = golden_section(|d| -f(T::of(d)).to_f64_lossy(), lo, hi, 1e-14);
        if -v > best_f.to_f64_lossy() {
            best_d = T::of(d).min(dmax).max(T::zero());
            best_f = f(best_d);
        }
        Some((best_d, best_f))
    }

    fn ascend(&self, mut w: Vec<T>, rounds: usize) -> (Vec<T>, T) {
        let mut current = self.objective(&w);
        let tiny = T::of(1e-14);
        for _ in 0..rounds {
            let mut improved = false;
            for i in 0..self.grid_len {
                for j in 0..self.grid_len {
                    if i == j {
                        continue;
                    }
                    if let Some((d, v)) = self.best_step(&w, i, j) {
                        if v > current + tiny * (T::one() + current.abs()) {
                            let cand = Self::moved(&w, i, j, d);
                            if self.feasible(&cand) {
                                w = cand;
                                current = v;
                                improved = true;
                            }
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
        (w, current)
    }
}

/// Best `E_{P^{⊗N}} ℓ` found over distributions `P` supported on `grid` with
/// `W_c(P, P̂) ≤ ρ`, by pairwise mass-transfer ascent from several starts.
/// Every returned value is attained by a feasible `P`, so it is a lower bound
/// on the structured worst case. Deterministic for a fixed seed.
#[allow(clippy::too_many_arguments)]
pub fn grid_primal_lower_bound<T: Real, F: Fn(&[T]) -> T + Sync>(
    nominal: &DiscreteDistribution<T>,
    radius: T,
    cost: &TransportCost,
    loss: F,
    arity: usize,
    grid: &[Vec<T>],
    search: &GridSearch,
    cap: usize,
) -> Result<T> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let d = nominal.dim();
    for g in grid {
        if g.len() != d {
            return Err(Error::dim(d, g.len()));
        }
    }
    let gl = grid.len();
    let count = (gl as u128).checked_pow(arity as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::cap("grid tuples", count, cap));
    }
    let mut values = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; arity];
    let mut buf = Vec::with_capacity(d * arity);
    for _ in 0..count {
        buf.clear();
        for &i in &idx {
            buf.extend_from_slice(&grid[i]);
        }
        values.push(loss(&buf));
        for k in (0..arity).rev() {
            idx[k] += 1;
            if idx[k] < gl {
                break;
            }
            idx[k] = 0;
        }
    }
    let mut costs = Vec::with_capacity(gl * nominal.len());
    for g in grid {
        for a in nominal.atoms() {
            costs.push(cost.eval(g, a));
        }
    }
    let problem = Problem {
        grid_len: gl,
        arity,
        values,
        costs,
        nominal,
        radius,
    };

    let mut start = vec![T::zero(); gl];
    for (k, (_, p)) in nominal.iter().enumerate() {
        let nearest = (0..gl)
            .min_by(|&a, &b| {
                problem.costs[a * nominal.len() + k]
                    .partial_cmp(&problem.costs[b * nominal.len() + k])
                    .expect("finite cost")
            })
            .expect("nonempty grid");
        start[nearest] += p;
    }
    if !problem.feasible(&start) {
        return Err(Error::InvalidInput(
            "no distribution on the grid lies in the ball".into(),
        ));
    }

    let restarts = search.restarts.max(1);
    let results: Vec<T> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let init = if r == 0 {
                start.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(search.seed.wrapping_add(r as u64));
                let raw: Vec<T> = (0..gl)
                    .map(|_| T::of(-rng.gen::<f64>().max(1e-300).ln()))
                    .collect();
                let tot: T = raw.iter().copied().sum();
                let mut t = T::one();
                loop {
                    let mix: Vec<T> = raw
                        .iter()
                        .zip(&start)
                        .map(|(&x, &s)| t * x / tot + (T::one() - t) * s)
                        .collect();
                    if problem.feasible(&mix) || t < T::of(1e-6) {
                        break if problem.feasible(&mix) {
                            mix
                        } else {
                            start.clone()
                        };
                    }
                    t /= T::of(2.0);
                }
            };
            problem.ascend(init, search.max_rounds).1
        })
        .collect();
    Ok(results.into_iter().fold(T::neg_infinity(), T::max))
}
