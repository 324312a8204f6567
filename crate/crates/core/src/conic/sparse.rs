use crate::scalar::Real;

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CscMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowind: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> CscMatrix<T> {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// explicit zeros are kept so the pattern is stable.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trips: Vec<(usize, usize, T)>) -> Self {
        trips.sort_by_key(|a| (a.1, a.0));
        let mut colptr = vec![0usize; ncols + 1];
        let mut rowind = Vec::with_capacity(trips.len());
        let mut values: Vec<T> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trips {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *values.last_mut().expect("nonempty") += v;
                continue;
            }
            rowind.push(r);
            values.push(v);
            colptr[c + 1] += 1;
            last = Some((r, c));
        }
        for c in 0..ncols {
            colptr[c + 1] += colptr[c];
        }
        CscMatrix {
            nrows,
            ncols,
            colptr,
            rowind,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `y += alpha · A x`
    pub fn gemv(&self, y: &mut [T], x: &[T], alpha: T) {
        for c in 0..self.ncols {
            let xc = x[c] * alpha;
            if xc == T::zero() {
                continue;
            }
            for p in self.colptr[c]..self.colptr[c + 1] {
                y[self.rowind[p]] += self.values[p] * xc;
            }
        }
    }

    /// `y += alpha · Aᵀ x`
    pub fn gemv_t(&self, y: &mut [T], x: &[T], alpha: T) {
        for c in 0..self.ncols {
            let mut acc = T::zero();
            for p in self.colptr[c]..self.colptr[c + 1] {
                acc += self.values[p] * x[self.rowind[p]];
            }
            y[c] += alpha * acc;
        }
    }

    pub fn col_inf_norms(&self) -> Vec<T> {
        (0..self.ncols)
            .map(|c| {
                self.values[self.colptr[c]..self.colptr[c + 1]]
                    .iter()
                    .fold(T::zero(), |m, v| m.max(v.abs()))
            })
            .collect()
    }

    pub fn row_inf_norms(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.nrows];
        for (&r, v) in self.rowind.iter().zip(&self.values) {
            out[r] = out[r].max(v.abs());
        }
        out
    }

    /// `A ← diag(row) · A · diag(col)`
    pub fn scale(&mut self, row: &[T], col: &[T]) {
        for c in 0..self.ncols {
            for p in self.colptr[c]..self.colptr[c + 1] {
                self.values[p] = self.values[p] * row[self.rowind[p]] * col[c];
            }
        }
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.ncols]; self.nrows];
        for c in 0..self.ncols {
            for p in self.colptr[c]..self.colptr[c + 1] {
                out[self.rowind[p]][c] += self.values[p];
            }
        }
        out
    }
}
