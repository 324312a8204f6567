//! Dense two-phase primal simplex for the linear standard form
//! `min qᵀx s.t. Ax + s = b, s ∈ {0}^e × R₊^m`.
//!
//! Free variables are split into positive and negative parts and every row
//! receives an artificial column. Pricing is Dantzig's rule, switching to
//! Bland's rule after a run of degenerate pivots.

use crate::error::{Error, Result};
use crate::scalar::{dot, norm_inf, Real};

use super::lower::{Cone, RawSolution, StandardForm};
use super::{SolveStatus, SolverSettings};

const DEGENERATE_RUN: usize = 50;

pub(crate) fn tableau_size<T: Real>(form: &StandardForm<T>) -> usize {
    let m = form.m();
    let nn: usize = form
        .cones
        .iter()
        .map(|c| if let Cone::NonNeg(k) = c { *k } else { 0 })
        .sum();
    (m + 1).saturating_mul(2 * form.n + nn + m + 1)
}

struct Tableau<T> {
    rows: usize,
    cols: usize,
    /// `(rows + 1) × (cols + 1)`; the last row is the objective, the last column the right-hand side.
    t: Vec<T>,
    basis: Vec<usize>,
    first_art: usize,
    removed: Vec<bool>,
}

enum Outcome {
    Optimal,
    Unbounded(usize),
}

impl<T: Real> Tableau<T> {
    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.t[i * (self.cols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> T {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let p = self.at(r, c);
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let update = |row: &mut [T]| {
            let f = row[c];
            if f != T::zero() {
                for j in 0..w {
                    row[j] -= f * prow[j];
                }
                row[c] = T::zero();
            }
        };
        before.chunks_exact_mut(w).for_each(update);
        after.chunks_exact_mut(w).for_each(update);
        self.basis[r] = c;
    }

    fn run(
        &mut self,
        allowed: usize,
        pivot_limit: usize,
        count: &mut usize,
        dtol: T,
    ) -> Result<Option<Outcome>> {
        let ptol = T::of(1e-9);
        let mut degenerate = 0usize;
        loop {
            if *count >= pivot_limit {
                return Ok(None);
            }
            let obj = self.rows;
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -dtol;
            for j in 0..allowed {
                let d = self.at(obj, j);
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = enter else {
                return Ok(Some(Outcome::Optimal));
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows {
                if self.removed[i] {
                    continue;
                }
                let a = self.at(i, c);
                if a > ptol {
                    let ratio = self.rhs(i).max(T::zero()) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= T::of(1e-12) * (T::one() + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(Some(Outcome::Unbounded(c)));
            };
            if ratio <= T::of(1e-14) {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
            *count += 1;
            if !self.t.iter().all(|v| v.is_finite()) {
                return Err(Error::NumericalFailure(
                    "simplex produced non-finite tableau".into(),
                ));
            }
        }
    }
}

pub(crate) fn solve<T: Real>(
    form: &StandardForm<T>,
    settings: &SolverSettings<T>,
) -> Result<RawSolution<T>> {
    let n = form.n;
    let m = form.m();
    let mut nonneg_row = vec![false; m];
    let mut off = 0;
    for c in &form.cones {
        if let Cone::NonNeg(k) = c {
            nonneg_row[off..off + k].iter_mut().for_each(|v| *v = true);
        }
        off += c.dim();
    }
    let slack_of: Vec<Option<usize>> = {
        let mut k = 0;
        nonneg_row
            .iter()
            .map(|&nn| {
                if nn {
                    k += 1;
                    Some(2 * n + k - 1)
                } else {
                    None
                }
            })
            .collect()
    };
    let n_slack = slack_of.iter().flatten().count();
    let first_art = 2 * n + n_slack;
    let cols = first_art + m;
    let w = cols + 1;
    let dense = form.a.to_dense_rows();
    let mut t = vec![T::zero(); (m + 1) * w];
    let mut flip = vec![false; m];
    for i in 0..m {
        let sign = if form.b[i] < T::zero() {
            flip[i] = true;
            -T::one()
        } else {
            T::one()
        };
        for j in 0..n {
            let v = dense[i][j] * sign;
            t[i * w + j] = v;
            t[i * w + n + j] = -v;
        }
        if let Some(sj) = slack_of[i] {
            t[i * w + sj] = sign;
        }
        t[i * w + first_art + i] = T::one();
        t[i * w + cols] = form.b[i] * sign;
    }
    for j in 0..first_art {
        let s: T = (0..m).map(|i| t[i * w + j]).sum();
        t[m * w + j] = -s;
    }
    t[m * w + cols] = -(0..m).map(|i| t[i * w + cols]).sum::<T>();
    let mut tab = Tableau {
        rows: m,
        cols,
        t,
        basis: (first_art..first_art + m).collect(),
        first_art,
        removed: vec![false; m],
    };
    let pivot_limit = settings
        .max_iter
        .max(1)
        .saturating_mul(100)
        .max(20 * (m + cols));
    let mut count = 0usize;
    let b_norm = norm_inf(&form.b);
    let limit_result = |x: Vec<T>, count: usize| RawSolution {
        status: SolveStatus::IterationLimit,
        x,
        z: Vec::new(),
        ray: None,
        iterations: count,
        primal_residual: T::infinity(),
        gap: T::infinity(),
    };

    let mut silenced = 0usize;
    loop {
        match tab.run(first_art, pivot_limit, &mut count, T::of(1e-11))? {
            None => return Ok(limit_result(vec![T::zero(); n], count)),
            // The phase-one objective is bounded below, so a column without a
            // pivot entry only carries a rounding-level reduced cost.
            Some(Outcome::Unbounded(c)) if silenced < first_art => {
                tab.t[m * w + c] = T::zero();
                silenced += 1;
            }
            Some(Outcome::Unbounded(_)) => {
                return Err(Error::NumericalFailure(
                    "phase one reported unboundedness".into(),
                ))
            }
            Some(Outcome::Optimal) => break,
        }
    }
    let infeas = -tab.at(m, cols);
    if infeas > T::of(1e-9) * (T::one() + b_norm) {
        return Ok(RawSolution {
            status: SolveStatus::Infeasible,
            x: vec![T::zero(); n],
            z: Vec::new(),
            ray: None,
            iterations: count,
            primal_residual: infeas,
            gap: T::infinity(),
        });
    }
    for i in 0..m {
        if tab.basis[i] >= first_art {
            let pick = (0..first_art)
                .filter(|&j| tab.at(i, j).abs() > T::of(1e-9))
                .max_by(|&a, &b| {
                    tab.at(i, a)
                        .abs()
                        .partial_cmp(&tab.at(i, b).abs())
                        .expect("finite")
                });
            match pick {
                Some(j) => tab.pivot(i, j),
                None => tab.removed[i] = true,
            }
        }
    }
    let cost = |j: usize| -> T {
        if j < n {
            form.q[j]
        } else if j < 2 * n {
            -form.q[j - n]
        } else {
            T::zero()
        }
    };
    for j in 0..=cols {
        let mut d = if j < cols { cost(j) } else { T::zero() };
        for i in 0..m {
            let cb = cost(tab.basis[i]);
            if cb != T::zero() {
                d -= cb * tab.at(i, j);
            }
        }
        tab.t[m * w + j] = d;
    }
    let dtol = T::of(1e-10) * (T::one() + norm_inf(&form.q));
    let outcome = tab.run(first_art, pivot_limit, &mut count, dtol)?;
    let primal = |tab: &Tableau<T>| {
        let mut x = vec![T::zero(); n];
        for i in 0..m {
            let j = tab.basis[i];
            if j < n {
                x[j] += tab.rhs(i);
            } else if j < 2 * n {
                x[j - n] -= tab.rhs(i);
            }
        }
        x
    };
    let x = primal(&tab);
    match outcome {
        None => Ok(limit_result(x, count)),
        Some(Outcome::Unbounded(c)) => {
            let mut ray = vec![T::zero(); n];
            let mut dir = |j: usize, v: T| {
                if j < n {
                    ray[j] += v;
                } else if j < 2 * n {
                    ray[j - n] -= v;
                }
            };
            dir(c, T::one());
            for i in 0..m {
                dir(tab.basis[i], -tab.at(i, c));
            }
            let slope = dot(&form.q, &ray);
            if !(slope < T::zero()) {
                return Err(Error::NumericalFailure(
                    "simplex ray is not improving".into(),
                ));
            }
            let ray = ray.iter().map(|&v| v / -slope).collect();
            Ok(RawSolution {
                status: SolveStatus::Unbounded,
                x,
                z: Vec::new(),
                ray: Some(ray),
                iterations: count,
                primal_residual: T::zero(),
                gap: T::zero(),
            })
        }
        Some(Outcome::Optimal) => {
            let z: Vec<T> = (0..m)
                .map(|i| {
                    let y = -tab.at(m, first_art + i);
                    let y = if flip[i] { -y } else { y };
                    -y
                })
                .collect();
            let mut ax = vec![T::zero(); m];
            form.a.gemv(&mut ax, &x, T::one());
            let viol = (0..m).fold(T::zero(), |acc, i| {
                let r = ax[i] - form.b[i];
                acc.max(if nonneg_row[i] {
                    r.max(T::zero())
                } else {
                    r.abs()
                })
            });
            let pres = viol / (T::one() + b_norm.max(norm_inf(&x)));
            let pcost = dot(&form.q, &x);
            let dcost = -dot(&form.b, &z);
            let gap = (pcost - dcost).abs() / T::one().max(pcost.abs().min(dcost.abs()));
            let _ = tab.first_art;
            Ok(RawSolution {
                status: SolveStatus::Optimal,
                x,
                z,
                ray: None,
                iterations: count,
                primal_residual: pres,
                gap,
            })
        }
    }
}
