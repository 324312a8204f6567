//! Conversions between vertex and halfspace descriptions of small polytopes,
//! and boundedness checks by linear programming.

use crate::conic::{solve_with, ConicProgram, Method, SolveStatus, SolverSettings};
use crate::error::{Error, Result};
use crate::linalg::{for_each_subset, null_space, orthonormal_basis, solve_square};
use crate::scalar::{dot, Real};

/// Largest number of candidate active sets examined by vertex enumeration.
pub const ENUMERATION_LIMIT: usize = 200_000;

fn lp_settings<T: Real>() -> SolverSettings<T> {
    SolverSettings::default().method(Method::Simplex)
}

/// Checks that `{h : W h ≤ g}` is nonempty and bounded by maximizing and
/// minimizing every coordinate.
pub fn check_bounded_nonempty<T: Real>(w: &[Vec<T>], g: &[T]) -> Result<()> {
    let dim = w.first().map(|r| r.len()).ok_or(Error::EmptyPolytope)?;
    for k in 0..dim {
        for sign in [T::one(), -T::one()] {
            let mut p = ConicProgram::new();
            for _ in 0..dim {
                p.add_free();
            }
            p.set_objective(k, sign);
            for (row, &gi) in w.iter().zip(g) {
                p.add_le(row.iter().copied().enumerate().collect(), gi);
            }
            let r = solve_with(&p, &lp_settings())?;
            match r.status {
                SolveStatus::Optimal => {}
                SolveStatus::Infeasible => return Err(Error::EmptyPolytope),
                SolveStatus::Unbounded => return Err(Error::UnboundedPolytope),
                SolveStatus::IterationLimit => {
                    return Err(Error::SolverFailure(
                        "boundedness check hit the iteration limit".into(),
                    ))
                }
            }
        }
    }
    Ok(())
}

fn binom_capped(n: usize, k: usize, cap: usize) -> usize {
    let mut acc: u128 = 1;
    for i in 0..k.min(n.saturating_sub(k)) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap as u128 {
            return cap + 1;
        }
    }
    if k > n {
        0
    } else {
        acc as usize
    }
}

fn push_unique<T: Real>(list: &mut Vec<Vec<T>>, v: Vec<T>, tol: T) {
    if !list
        .iter()
        .any(|u| u.iter().zip(&v).all(|(&a, &b)| (a - b).abs() <= tol))
    {
        list.push(v);
    }
}

/// Vertices of a bounded `{h : W h ≤ g}` by enumerating active sets.
/// Returns `None` when the number of candidate sets exceeds [`ENUMERATION_LIMIT`].
pub fn halfspaces_to_vertices<T: Real>(w: &[Vec<T>], g: &[T]) -> Option<Vec<Vec<T>>> {
    let m = w.len();
    let dim = w.first()?.len();
    if binom_capped(m, dim, ENUMERATION_LIMIT) > ENUMERATION_LIMIT {
        return None;
    }
    let tol = T::of(1e-9);
    let mut out = Vec::new();
    for_each_subset(m, dim, |set| {
        let a: Vec<Vec<T>> = set.iter().map(|&i| w[i].clone()).collect();
        let b: Vec<T> = set.iter().map(|&i| g[i]).collect();
        if let Some(h) = solve_square(&a, &b, T::of(1e-11)) {
            let feasible = w
                .iter()
                .zip(g)
                .all(|(row, &gi)| dot(row, &h) <= gi + tol * (T::one() + gi.abs()));
            if feasible {
                push_unique(&mut out, h, tol);
            }
        }
        true
    });
    out.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.partial_cmp(y).expect("finite"))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Some(out)
}

/// A halfspace description `(W, g)` of the convex hull of `vertices`. Equalities
/// of a lower-dimensional hull appear as pairs of opposite inequalities.
pub fn vertices_to_halfspaces<T: Real>(vertices: &[Vec<T>]) -> (Vec<Vec<T>>, Vec<T>) {
    let dim = vertices[0].len();
    let tol = T::of(1e-9);
    let v0 = &vertices[0];
    let diffs: Vec<Vec<T>> = vertices[1..]
        .iter()
        .map(|v| v.iter().zip(v0).map(|(&a, &b)| a - b).collect())
        .collect();
    let basis = orthonormal_basis(&diffs, tol);
    let r = basis.len();
    let mut w: Vec<Vec<T>> = Vec::new();
    let mut g: Vec<T> = Vec::new();
    let normals = if r == 0 {
        (0..dim)
            .map(|k| {
                let mut e = vec![T::zero(); dim];
                e[k] = T::one();
                e
            })
            .collect()
    } else {
        null_space(&basis, dim, tol)
    };
    for nrm in orthonormal_basis(&normals, tol) {
        let c = dot(&nrm, v0);
        w.push(nrm.clone());
        g.push(c);
        w.push(nrm.iter().map(|&x| -x).collect());
        g.push(-c);
    }
    if r == 0 {
        return (w, g);
    }
    let coords: Vec<Vec<T>> = vertices
        .iter()
        .map(|v| {
            let d: Vec<T> = v.iter().zip(v0).map(|(&a, &b)| a - b).collect();
            basis.iter().map(|b| dot(b, &d)).collect()
        })
        .collect();
    let mut facets: Vec<(Vec<T>, T)> = Vec::new();
    for_each_subset(coords.len(), r, |set| {
        let rows: Vec<Vec<T>> = set
            .iter()
            .map(|&i| {
                let mut row = coords[i].clone();
                row.push(-T::one());
                row
            })
            .collect();
        let ns = null_space(&rows, r + 1, T::of(1e-10));
        if ns.len() != 1 {
            return true;
        }
        let mut a: Vec<T> = ns[0][..r].to_vec();
        let mut beta = ns[0][r];
        let scale = crate::scalar::norm2(&a);
        if scale <= tol {
            return true;
        }
        a.iter_mut().for_each(|x| *x /= scale);
        beta /= scale;
        let vals: Vec<T> = coords.iter().map(|y| dot(&a, y) - beta).collect();
        let slack = tol * (T::one() + beta.abs());
        let (le, ge) = (
            vals.iter().all(|&v| v <= slack),
            vals.iter().all(|&v| v >= -slack),
        );
        if ge && !le {
            a.iter_mut().for_each(|x| *x = -*x);
            beta = -beta;
        } else if !le {
            return true;
        }
        if !facets.iter().any(|(fa, fb)| {
            (*fb - beta).abs() <= tol && fa.iter().zip(&a).all(|(&x, &y)| (x - y).abs() <= tol)
        }) {
            facets.push((a, beta));
        }
        true
    });
    for (a, beta) in facets {
        let normal: Vec<T> = (0..dim)
            .map(|k| {
                basis
                    .iter()
                    .zip(&a)
                    .fold(T::zero(), |acc, (b, &ai)| acc + ai * b[k])
            })
            .collect();
        let rhs = beta + dot(&normal, v0);
        w.push(normal);
        g.push(rhs);
    }
    (w, g)
}
