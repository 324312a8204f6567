//! Lowering of a [`ConicProgram`] to the standard form
//! `min qᵀx  s.t.  Ax + s = b,  s ∈ {0}^e × R₊^m × SOC × .. × SOC`.

use std::time::Duration;

use crate::distributions::NormKind;
use crate::scalar::{dot, Real};

use super::sparse::CscMatrix;
use super::{ConicProgram, DualCertificate, LinExpr, Method, SolveResult, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Cone {
    Zero(usize),
    NonNeg(usize),
    Soc(usize),
}

impl Cone {
    pub fn dim(self) -> usize {
        match self {
            Cone::Zero(k) | Cone::NonNeg(k) | Cone::Soc(k) => k,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Cone::Zero(_) => 0,
            Cone::NonNeg(k) => k,
            Cone::Soc(_) => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct StandardForm<T> {
    pub n: usize,
    pub n_orig: usize,
    pub q: Vec<T>,
    pub a: CscMatrix<T>,
    pub b: Vec<T>,
    pub cones: Vec<Cone>,
    pub n_eq: usize,
    pub n_le: usize,
    pub offset: T,
}

/// Solver output in standard-form coordinates.
#[derive(Debug, Clone)]
pub(crate) struct RawSolution<T> {
    pub status: SolveStatus,
    pub x: Vec<T>,
    pub z: Vec<T>,
    pub ray: Option<Vec<T>>,
    pub iterations: usize,
    pub primal_residual: T,
    pub gap: T,
}

impl<T: Real> StandardForm<T> {
    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn is_linear(&self) -> bool {
        self.cones.iter().all(|c| !matches!(c, Cone::Soc(_)))
    }

    pub fn finish(&self, program: &ConicProgram<T>, raw: RawSolution<T>) -> SolveResult<T> {
        let x: Vec<T> = raw.x[..self.n_orig].to_vec();
        let value = match raw.status {
            SolveStatus::Infeasible => T::infinity(),
            SolveStatus::Unbounded => T::neg_infinity(),
            _ => program.objective_value(&x),
        };
        let dual = match raw.status {
            SolveStatus::Optimal | SolveStatus::IterationLimit if raw.z.len() == self.m() => {
                Some(DualCertificate {
                    eq: raw.z[..self.n_eq].to_vec(),
                    le: raw.z[self.n_eq..self.n_eq + self.n_le].to_vec(),
                    bound: self.offset - dot(&self.b, &raw.z),
                })
            }
            _ => None,
        };
        SolveResult {
            status: raw.status,
            value,
            x,
            dual,
            ray: raw.ray.map(|r| r[..self.n_orig].to_vec()),
            iterations: raw.iterations,
            solve_time: Duration::ZERO,
            method: Method::Auto,
            primal_residual: raw.primal_residual,
            gap: raw.gap,
        }
    }
}

struct Builder<T> {
    trips: Vec<(usize, usize, T)>,
    b: Vec<T>,
}

impl<T: Real> Builder<T> {
    fn row(&mut self, terms: impl IntoIterator<Item = (usize, T)>, rhs: T) {
        let r = self.b.len();
        for (v, c) in terms {
            self.trips.push((r, v, c));
        }
        self.b.push(rhs);
    }

    /// `expr ≤ 0` as a nonnegative-slack row.
    fn le_expr(&mut self, expr: &LinExpr<T>, sign: T, extra: &[(usize, T)]) {
        let terms = expr
            .terms
            .iter()
            .map(|&(v, c)| (v, sign * c))
            .chain(extra.iter().copied());
        self.row(terms, -sign * expr.constant);
    }
}

pub(crate) fn lower<T: Real>(p: &ConicProgram<T>) -> StandardForm<T> {
    let n_orig = p.n_vars();
    let mut n = n_orig;
    let mut bld = Builder {
        trips: Vec::new(),
        b: Vec::new(),
    };
    for r in &p.eq_rows {
        bld.row(r.terms.iter().copied(), r.rhs);
    }
    let n_eq = bld.b.len();
    for r in &p.le_rows {
        bld.row(r.terms.iter().copied(), r.rhs);
    }
    let n_le = p.le_rows.len();
    for (i, (l, u)) in p.lower.iter().zip(&p.upper).enumerate() {
        if let Some(l) = l {
            bld.row([(i, -T::one())], -*l);
        }
        if let Some(u) = u {
            bld.row([(i, T::one())], *u);
        }
    }
    let one = T::one();
    let mut socs = Vec::new();
    for c in &p.cones {
        let t = (c.bound, -one);
        let k = c.entries.len();
        match c.norm {
            NormKind::Linf => {
                for e in &c.entries {
                    bld.le_expr(e, one, &[t]);
                    bld.le_expr(e, -one, &[t]);
                }
            }
            NormKind::L2 if k == 1 => {
                bld.le_expr(&c.entries[0], one, &[t]);
                bld.le_expr(&c.entries[0], -one, &[t]);
            }
            NormKind::L1 if k == 1 => {
                bld.le_expr(&c.entries[0], one, &[t]);
                bld.le_expr(&c.entries[0], -one, &[t]);
            }
            NormKind::L1 => {
                let first = n;
                n += k;
                for (j, e) in c.entries.iter().enumerate() {
                    bld.le_expr(e, one, &[(first + j, -one)]);
                    bld.le_expr(e, -one, &[(first + j, -one)]);
                }
                bld.row((0..k).map(|j| (first + j, one)).chain([t]), T::zero());
            }
            NormKind::L2 => socs.push(c),
        }
    }
    let n_nonneg = bld.b.len() - n_eq;
    let mut cones = vec![Cone::Zero(n_eq), Cone::NonNeg(n_nonneg)];
    for c in socs {
        bld.row([(c.bound, -one)], T::zero());
        for e in &c.entries {
            bld.row(e.terms.iter().map(|&(v, coef)| (v, -coef)), e.constant);
        }
        cones.push(Cone::Soc(c.entries.len() + 1));
    }
    cones.retain(|c| c.dim() > 0);
    let m = bld.b.len();
    let mut q = p.objective.clone();
    q.resize(n, T::zero());
    StandardForm {
        n,
        n_orig,
        q,
        a: CscMatrix::from_triplets(m, n, bld.trips),
        b: bld.b,
        cones,
        n_eq,
        n_le,
        offset: p.objective_offset,
    }
}
