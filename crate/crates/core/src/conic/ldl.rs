//! Sparse LDLᵀ factorization of quasidefinite matrices with a minimum-degree
//! fill-reducing ordering and sign-aware dynamic regularization.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::sparse::CscMatrix;

const NONE: usize = usize::MAX;

/// Minimum-degree ordering on the symmetric graph given by adjacency lists.
/// Returns `perm` with `perm[k]` the original index eliminated `k`-th.
pub(crate) fn minimum_degree(adj_in: &[Vec<usize>]) -> Vec<usize> {
    let n = adj_in.len();
    let mut adj: Vec<Vec<usize>> = adj_in
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut v: Vec<usize> = a.iter().copied().filter(|&j| j != i).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut eliminated = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).map(|i| Reverse((adj[i].len(), i))).collect();
    let mut perm = Vec::with_capacity(n);
    let mut remaining = n;
    let mut scratch = Vec::new();
    while let Some(Reverse((deg, v))) = heap.pop() {
        if eliminated[v] || deg != adj[v].len() {
            continue;
        }
        if deg + 1 == remaining {
            let mut rest: Vec<usize> = (0..n).filter(|&i| !eliminated[i]).collect();
            rest.sort_by_key(|&i| (adj[i].len(), i));
            perm.extend(rest);
            break;
        }
        eliminated[v] = true;
        remaining -= 1;
        perm.push(v);
        let nbrs = std::mem::take(&mut adj[v]);
        for &u in &nbrs {
            scratch.clear();
            let (a, b) = (&adj[u], &nbrs);
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                let next = match (a.get(i), b.get(j)) {
                    (Some(&x), Some(&y)) if x == y => {
                        i += 1;
                        j += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        i += 1;
                        x
                    }
                    (Some(_), Some(&y)) => {
                        j += 1;
                        y
                    }
                    (Some(&x), None) => {
                        i += 1;
                        x
                    }
                    (None, Some(&y)) => {
                        j += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                if next != u && next != v {
                    scratch.push(next);
                }
            }
            std::mem::swap(&mut adj[u], &mut scratch);
            heap.push(Reverse((adj[u].len(), u)));
        }
    }
    debug_assert_eq!(perm.len(), n);
    perm
}

/// Factorization `P K Pᵀ = L D Lᵀ` for a symmetric matrix given by its upper triangle.
#[derive(Debug, Clone)]
pub(crate) struct LdlSolver<T> {
    n: usize,
    perm: Vec<usize>,
    iperm: Vec<usize>,
    /// Permuted upper triangle; `map[p]` sends an entry of the input matrix to its slot here.
    pk: CscMatrix<T>,
    map: Vec<usize>,
    signs: Vec<i8>,
    etree: Vec<usize>,
    lnz: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<T>,
    d: Vec<T>,
    dinv: Vec<T>,
    pub dyn_eps: T,
    pub dyn_delta: T,
    pub regularized_pivots: usize,
}

impl<T: Real> LdlSolver<T> {
    /// Symbolic analysis. `upper` must contain every diagonal entry; `signs`
    /// gives the expected sign of each pivot (in original indexing).
    pub fn new(upper: &CscMatrix<T>, signs: &[i8]) -> Result<Self> {
        let n = upper.ncols;
        let mut adj = vec![Vec::new(); n];
        for c in 0..n {
            for p in upper.colptr[c]..upper.colptr[c + 1] {
                let r = upper.rowind[p];
                if r > c {
                    return Err(Error::NumericalFailure(
                        "matrix is not upper triangular".into(),
                    ));
                }
                if r != c {
                    adj[r].push(c);
                    adj[c].push(r);
                }
            }
        }
        let perm = minimum_degree(&adj);
        let mut iperm = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            iperm[i] = k;
        }
        let mut trips = Vec::with_capacity(upper.nnz());
        for c in 0..n {
            for p in upper.colptr[c]..upper.colptr[c + 1] {
                let (a, b) = (iperm[upper.rowind[p]], iperm[c]);
                trips.push((a.min(b), a.max(b), p));
            }
        }
        trips.sort_unstable_by_key(|&(r, c, _)| (c, r));
        if trips
            .windows(2)
            .any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::NumericalFailure(
                "duplicate entries in KKT pattern".into(),
            ));
        }
        let mut colptr = vec![0usize; n + 1];
        let mut rowind = Vec::with_capacity(trips.len());
        let mut map = vec![0; upper.nnz()];
        for (slot, &(r, c, p)) in trips.iter().enumerate() {
            colptr[c + 1] += 1;
            rowind.push(r);
            map[p] = slot;
        }
        for c in 0..n {
            colptr[c + 1] += colptr[c];
        }
        let pk = CscMatrix {
            nrows: n,
            ncols: n,
            colptr,
            rowind,
            values: vec![T::zero(); trips.len()],
        };
        for c in 0..n {
            if !(pk.colptr[c]..pk.colptr[c + 1]).any(|p| pk.rowind[p] == c) {
                return Err(Error::NumericalFailure(format!(
                    "missing diagonal entry {c}"
                )));
            }
        }
        let psigns: Vec<i8> = perm.iter().map(|&i| signs[i]).collect();
        let (etree, lnz) = elimination_tree(&pk);
        let total: usize = lnz.iter().sum();
        let mut lp = vec![0; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        Ok(LdlSolver {
            n,
            perm,
            iperm,
            pk,
            map,
            signs: psigns,
            etree,
            lnz,
            lp,
            li: vec![0; total],
            lx: vec![T::zero(); total],
            d: vec![T::zero(); n],
            dinv: vec![T::zero(); n],
            dyn_eps: T::of(1e-13),
            dyn_delta: T::of(2e-7),
            regularized_pivots: 0,
        })
    }

    #[cfg(test)]
    pub fn nnz_l(&self) -> usize {
        self.li.len()
    }

    /// Numeric factorization with the values of `upper` (same pattern as at construction).
    pub fn factor(&mut self, upper: &CscMatrix<T>) -> Result<()> {
        for (p, &slot) in self.map.iter().enumerate() {
            self.pk.values[slot] = upper.values[p];
        }
        let n = self.n;
        let (ap, ai, ax) = (&self.pk.colptr, &self.pk.rowind, &self.pk.values);
        let mut y_markers = vec![false; n];
        let mut y_vals = vec![T::zero(); n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = self.lp[..n].to_vec();
        self.regularized_pivots = 0;
        for k in 0..n {
            let mut nnz_y = 0;
            self.d[k] = T::zero();
            for p in ap[k]..ap[k + 1] {
                let b = ai[p];
                if b == k {
                    self.d[k] = ax[p];
                    continue;
                }
                y_vals[b] = ax[p];
                if !y_markers[b] {
                    y_markers[b] = true;
                    elim[0] = b;
                    let mut n_e = 1;
                    let mut next = self.etree[b];
                    while next != NONE && next < k {
                        if y_markers[next] {
                            break;
                        }
                        y_markers[next] = true;
                        elim[n_e] = next;
                        n_e += 1;
                        next = self.etree[next];
                    }
                    while n_e > 0 {
                        n_e -= 1;
                        y_idx[nnz_y] = elim[n_e];
                        nnz_y += 1;
                    }
                }
            }
            for i in (0..nnz_y).rev() {
                let c = y_idx[i];
                let tmp = next_space[c];
                let yc = y_vals[c];
                for j in self.lp[c]..tmp {
                    y_vals[self.li[j]] -= self.lx[j] * yc;
                }
                self.li[tmp] = k;
                self.lx[tmp] = yc * self.dinv[c];
                self.d[k] -= yc * self.lx[tmp];
                next_space[c] += 1;
                y_vals[c] = T::zero();
                y_markers[c] = false;
            }
            let sign = T::of(self.signs[k] as f64);
            if sign * self.d[k] <= self.dyn_eps {
                self.d[k] = sign * self.dyn_delta;
                self.regularized_pivots += 1;
            }
            if !self.d[k].is_finite() {
                return Err(Error::NumericalFailure("non-finite pivot in LDL".into()));
            }
            self.dinv[k] = T::one() / self.d[k];
        }
        debug_assert!(next_space.iter().zip(&self.lp[1..]).all(|(a, b)| a == b));
        let _ = &self.lnz;
        Ok(())
    }

    /// Solves in place (original indexing).
    pub fn solve(&self, b: &mut [T]) {
        let n = self.n;
        let mut x: Vec<T> = (0..n).map(|k| b[self.perm[k]]).collect();
        for i in 0..n {
            let xi = x[i];
            if xi != T::zero() {
                for j in self.lp[i]..self.lp[i + 1] {
                    x[self.li[j]] -= self.lx[j] * xi;
                }
            }
        }
        for i in 0..n {
            x[i] *= self.dinv[i];
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in self.lp[i]..self.lp[i + 1] {
                acc -= self.lx[j] * x[self.li[j]];
            }
            x[i] = acc;
        }
        for (k, &i) in self.perm.iter().enumerate() {
            b[i] = x[k];
        }
        let _ = &self.iperm;
    }
}

fn elimination_tree<T: Real>(a: &CscMatrix<T>) -> (Vec<usize>, Vec<usize>) {
    let n = a.ncols;
    let mut work = vec![NONE; n];
    let mut lnz = vec![0usize; n];
    let mut etree = vec![NONE; n];
    for j in 0..n {
        work[j] = j;
        for p in a.colptr[j]..a.colptr[j + 1] {
            let mut i = a.rowind[p];
            while work[i] != j {
                if etree[i] == NONE {
                    etree[i] = j;
                }
                lnz[i] += 1;
                work[i] = j;
                i = etree[i];
            }
        }
    }
    (etree, lnz)
}

/// `y = K x` for a symmetric matrix stored as its upper triangle.
pub(crate) fn sym_upper_mul<T: Real>(k: &CscMatrix<T>, x: &[T], y: &mut [T]) {
    y.iter_mut().for_each(|v| *v = T::zero());
    for c in 0..k.ncols {
        for p in k.colptr[c]..k.colptr[c + 1] {
            let r = k.rowind[p];
            let v = k.values[p];
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_upper(rows: &[Vec<f64>]) -> CscMatrix<f64> {
        let n = rows.len();
        let mut t = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if j >= i && (v != 0.0 || i == j) {
                    t.push((i, j, v));
                }
            }
        }
        CscMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn quasidefinite_solve() {
        let k = vec![
            vec![2.0, 0.0, 1.0, 1.0],
            vec![0.0, 3.0, 0.0, 2.0],
            vec![1.0, 0.0, -1.0, 0.0],
            vec![1.0, 2.0, 0.0, -4.0],
        ];
        let up = dense_upper(&k);
        let mut ldl = LdlSolver::new(&up, &[1, 1, -1, -1]).unwrap();
        ldl.factor(&up).unwrap();
        let xs = [1.0f64, -2.0, 0.5, 3.0];
        let mut b = vec![0.0; 4];
        sym_upper_mul(&up, &xs, &mut b);
        ldl.solve(&mut b);
        for (a, e) in b.iter().zip(xs) {
            assert!((a - e).abs() < 1e-12);
        }
        assert_eq!(ldl.regularized_pivots, 0);
    }

    #[test]
    fn ordering_is_a_permutation() {
        let adj = vec![vec![1, 2, 3], vec![0], vec![0], vec![0, 4], vec![3]];
        let mut p = minimum_degree(&adj);
        assert_eq!(p.len(), 5);
        assert!(p[0] != 0);
        p.sort();
        assert_eq!(p, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn arrow_matrix_has_no_fill() {
        let n = 30;
        let mut t = vec![];
        for i in 0..n {
            t.push((i, i, if i == 0 { 40.0 } else { 4.0 }));
            if i > 0 {
                t.push((0, i, 1.0));
            }
        }
        let up = CscMatrix::from_triplets(n, n, t);
        let mut ldl = LdlSolver::new(&up, &vec![1; n]).unwrap();
        assert_eq!(ldl.nnz_l(), n - 1);
        ldl.factor(&up).unwrap();
        let mut b = vec![1.0f64; n];
        let orig = b.clone();
        ldl.solve(&mut b);
        let mut r = vec![0.0; n];
        sym_upper_mul(&up, &b, &mut r);
        for (a, e) in r.iter().zip(&orig) {
            assert!((a - e).abs() < 1e-12);
        }
    }
}
