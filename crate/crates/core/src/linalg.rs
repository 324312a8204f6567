//! Small dense linear algebra used by polytope conversions.

use crate::scalar::Real;

/// Reduced row echelon form in place; returns the pivot columns.
pub(crate) fn rref<T: Real>(a: &mut [Vec<T>], tol: T) -> Vec<usize> {
    let rows = a.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = a[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            for row in a.iter_mut().skip(r) {
                row[c] = T::zero();
            }
            continue;
        }
        a.swap(r, best);
        let p = a[r][c];
        for v in a[r].iter_mut() {
            *v /= p;
        }
        let prow = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != T::zero() {
                    for (x, &y) in row.iter_mut().zip(&prow) {
                        *x -= f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{x : A x = 0}`.
pub(crate) fn null_space<T: Real>(a: &[Vec<T>], cols: usize, tol: T) -> Vec<Vec<T>> {
    let mut m: Vec<Vec<T>> = a.to_vec();
    let pivots = rref(&mut m, tol);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); cols];
            v[f] = T::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f];
            }
            v
        })
        .collect()
}

/// Solves a square system; `None` when numerically singular.
pub(crate) fn solve_square<T: Real>(a: &[Vec<T>], b: &[T], tol: T) -> Option<Vec<T>> {
    let n = b.len();
    let mut aug: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let pivots = rref(&mut aug, tol);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(aug.iter().map(|r| r[n]).collect())
}

/// Orthonormal basis of the span of `vs` (modified Gram–Schmidt with reorthogonalization).
pub(crate) fn orthonormal_basis<T: Real>(vs: &[Vec<T>], tol: T) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let d = crate::scalar::dot(&w, b);
                for (x, &y) in w.iter_mut().zip(b) {
                    *x -= d * y;
                }
            }
        }
        let nrm = crate::scalar::norm2(&w);
        let scale = T::one().max(crate::scalar::norm2(v));
        if nrm > tol * scale {
            basis.push(w.iter().map(|&x| x / nrm).collect());
        }
    }
    basis
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order; stops early if `f` returns false.
pub(crate) fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let Some(pos) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[pos] += 1;
        for i in pos + 1..k {
            idx[i] = idx[i - 1] + 1;
        }
    }
}
