//! Finitely supported probability measures, their products and mixtures, and
//! exact optimal transport between them under norm ground costs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conic::transport::solve_transport;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Atoms closer than this in every coordinate are merged.
pub const DEDUP_TOLERANCE: f64 = 1e-12;
/// Total masses within this distance of one are rescaled; others are rejected.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    /// The dual norm: L1 and Linf swap, L2 is self-dual.
    pub fn dual(self) -> NormKind {
        match self {
            NormKind::L1 => NormKind::Linf,
            NormKind::L2 => NormKind::L2,
            NormKind::Linf => NormKind::L1,
        }
    }

    pub fn eval<T: Real>(self, v: &[T]) -> T {
        match self {
            NormKind::L1 => v.iter().fold(T::zero(), |acc, x| acc + x.abs()),
            NormKind::L2 => v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt(),
            NormKind::Linf => v.iter().fold(T::zero(), |acc, x| acc.max(x.abs())),
        }
    }

    fn eval_diff<T: Real>(self, x: &[T], y: &[T]) -> T {
        match self {
            NormKind::L1 => x
                .iter()
                .zip(y)
                .fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs()),
            NormKind::L2 => x
                .iter()
                .zip(y)
                .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
                .sqrt(),
            NormKind::Linf => x
                .iter()
                .zip(y)
                .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs())),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
        })
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(NormKind::L1),
            "l2" => Ok(NormKind::L2),
            "linf" | "l_inf" | "inf" => Ok(NormKind::Linf),
            other => Err(Error::InvalidInput(format!("unknown norm `{other}`"))),
        }
    }
}

/// Ground cost `c(x, y) = ‖x - y‖` on `R^d`, lifted block-wise to `R^{dM}` as
/// `c^M(x, y) = Σ_i c(x_i, y_i)`.
///
/// The squared variant `‖x - y‖²` exists for the closed-form quadratic examples
/// only; the program builders reject it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportCost {
    pub norm: NormKind,
    pub dim: usize,
    #[serde(default)]
    pub squared: bool,
}

impl TransportCost {
    pub fn new(norm: NormKind, dim: usize) -> Self {
        TransportCost {
            norm,
            dim,
            squared: false,
        }
    }

    pub fn squared(norm: NormKind, dim: usize) -> Self {
        TransportCost {
            norm,
            dim,
            squared: true,
        }
    }

    /// Cost between two points whose length is a multiple of `dim`; blocks are summed.
    pub fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        debug_assert_eq!(x.len(), y.len());
        debug_assert_eq!(x.len() % self.dim, 0);
        x.chunks_exact(self.dim)
            .zip(y.chunks_exact(self.dim))
            .fold(T::zero(), |acc, (a, b)| {
                let c = self.norm.eval_diff(a, b);
                acc + if self.squared { c * c } else { c }
            })
    }
}

/// A probability measure with finitely many atoms in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "DistributionRepr<T>",
    into = "DistributionRepr<T>",
    bound = "T: Real"
)]
pub struct DiscreteDistribution<T = f64> {
    dim: usize,
    atoms: Vec<T>,
    weights: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct DistributionRepr<T> {
    atoms: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Real> TryFrom<DistributionRepr<T>> for DiscreteDistribution<T> {
    type Error = Error;

    fn try_from(r: DistributionRepr<T>) -> Result<Self> {
        make_distribution(r.atoms, r.weights)
    }
}

impl<T: Real> From<DiscreteDistribution<T>> for DistributionRepr<T> {
    fn from(d: DiscreteDistribution<T>) -> Self {
        DistributionRepr {
            atoms: d.atoms().map(|a| a.to_vec()).collect(),
            weights: d.weights,
        }
    }
}

/// Validates, normalizes and deduplicates a list of weighted atoms.
pub fn make_distribution<T: Real>(
    atoms: Vec<Vec<T>>,
    weights: Vec<T>,
) -> Result<DiscreteDistribution<T>> {
    if atoms.len() != weights.len() {
        return Err(Error::dim(atoms.len(), weights.len()));
    }
    if atoms.is_empty() {
        return Err(Error::ZeroTotalMass);
    }
    let dim = atoms[0].len();
    if dim == 0 {
        return Err(Error::InvalidInput("atoms must have dimension >= 1".into()));
    }
    if let Some(bad) = atoms.iter().find(|a| a.len() != dim) {
        return Err(Error::dim(dim, bad.len()));
    }
    if atoms.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(
            "atom coordinates must be finite".into(),
        ));
    }
    for (index, &w) in weights.iter().enumerate() {
        if w.is_nan() || w < T::zero() {
            return Err(Error::NegativeWeight {
                index,
                value: w.to_f64_lossy(),
            });
        }
    }
    let total: T = weights.iter().copied().sum();
    if total == T::zero() {
        return Err(Error::ZeroTotalMass);
    }
    if !((total - T::one()).abs() <= T::of(MASS_TOLERANCE)) {
        return Err(Error::MassNotNormalized {
            total: total.to_f64_lossy(),
        });
    }
    let flat: Vec<T> = atoms.into_iter().flatten().collect();
    let weights: Vec<T> = weights.iter().map(|&w| w / total).collect();
    Ok(dedup(dim, flat, weights))
}

fn dedup<T: Real>(dim: usize, atoms: Vec<T>, weights: Vec<T>) -> DiscreteDistribution<T> {
    let tol = T::of(DEDUP_TOLERANCE);
    let mut out_atoms: Vec<T> = Vec::with_capacity(atoms.len());
    let mut out_weights: Vec<T> = Vec::with_capacity(weights.len());
    for (atom, &w) in atoms.chunks_exact(dim).zip(&weights) {
        let hit = out_atoms
            .chunks_exact(dim)
            .position(|b| atom.iter().zip(b).all(|(&x, &y)| (x - y).abs() <= tol));
        match hit {
            Some(k) => out_weights[k] += w,
            None => {
                out_atoms.extend_from_slice(atom);
                out_weights.push(w);
            }
        }
    }
    DiscreteDistribution {
        dim,
        atoms: out_atoms,
        weights: out_weights,
    }
}

impl<T: Real> DiscreteDistribution<T> {
    pub fn new(atoms: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        make_distribution(atoms, weights)
    }

    pub fn point_mass(x: Vec<T>) -> Result<Self> {
        make_distribution(vec![x], vec![T::one()])
    }

    /// Uniform distribution over the given atoms (duplicates merged).
    pub fn uniform(atoms: Vec<Vec<T>>) -> Result<Self> {
        let n = atoms.len();
        if n == 0 {
            return Err(Error::ZeroTotalMass);
        }
        let w = T::one() / T::of_usize(n);
        make_distribution(atoms, vec![w; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[T] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.atoms.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&[T], T)> + '_ {
        self.atoms().zip(self.weights.iter().copied())
    }

    pub fn expectation<F: FnMut(&[T]) -> T>(&self, mut f: F) -> T {
        self.iter().fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }

    pub fn to_f64(&self) -> DiscreteDistribution<f64> {
        DiscreteDistribution {
            dim: self.dim,
            atoms: self.atoms.iter().map(|x| x.to_f64_lossy()).collect(),
            weights: self.weights.iter().map(|x| x.to_f64_lossy()).collect(),
        }
    }
}

/// `P^{⊗M}` with atoms ordered lexicographically by index tuple (first factor slowest).
pub fn product_power<T: Real>(
    p: &DiscreteDistribution<T>,
    m: usize,
    cap: usize,
) -> Result<DiscreteDistribution<T>> {
    if m == 0 {
        return Err(Error::InvalidInput("product power needs M >= 1".into()));
    }
    let n = p.len();
    let count = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::cap("product atoms", count, cap));
    }
    let count = count as usize;
    let d = p.dim;
    let mut atoms = Vec::with_capacity(count * d * m);
    let mut weights = Vec::with_capacity(count);
    let mut idx = vec![0usize; m];
    for _ in 0..count {
        let mut w = T::one();
        for &i in &idx {
            atoms.extend_from_slice(p.atom(i));
            w *= p.weights[i];
        }
        weights.push(w);
        for k in (0..m).rev() {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(DiscreteDistribution {
        dim: d * m,
        atoms,
        weights,
    })
}

/// `Σ_k ν_k P_k` for a probability vector `ν`.
pub fn mixture<T: Real>(
    components: &[(T, DiscreteDistribution<T>)],
) -> Result<DiscreteDistribution<T>> {
    if components.is_empty() {
        return Err(Error::NotAProbabilityVector);
    }
    let total: T = components.iter().map(|c| c.0).sum();
    if components.iter().any(|c| c.0.is_nan() || c.0 < T::zero())
        || !((total - T::one()).abs() <= T::of(MASS_TOLERANCE))
    {
        return Err(Error::NotAProbabilityVector);
    }
    let dim = components[0].1.dim;
    if let Some(bad) = components.iter().find(|c| c.1.dim != dim) {
        return Err(Error::dim(dim, bad.1.dim));
    }
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (nu, p) in components.iter().filter(|c| c.0 > T::zero()) {
        for (x, w) in p.iter() {
            atoms.extend_from_slice(x);
            weights.push(*nu / total * w);
        }
    }
    Ok(dedup(dim, atoms, weights))
}

/// A joint mass matrix between the atoms of two distributions, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Coupling<T = f64> {
    pub rows: usize,
    pub cols: usize,
    pub mass: Vec<T>,
}

impl<T: Real> Coupling<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.mass[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.mass
            .chunks_exact(self.cols)
            .map(|r| r.iter().copied().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for r in self.mass.chunks_exact(self.cols) {
            for (o, &x) in out.iter_mut().zip(r) {
                *o += x;
            }
        }
        out
    }

    /// Largest deviation of the marginals from `p` and `q`.
    pub fn marginal_error(&self, p: &[T], q: &[T]) -> T {
        let r = self
            .row_sums()
            .iter()
            .zip(p)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()));
        self.col_sums()
            .iter()
            .zip(q)
            .fold(r, |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    pub fn transposed(&self) -> Coupling<T> {
        let mut mass = vec![T::zero(); self.mass.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                mass[j * self.rows + i] = self.mass[i * self.cols + j];
            }
        }
        Coupling {
            rows: self.cols,
            cols: self.rows,
            mass,
        }
    }
}

fn check_cost_dims<T: Real>(
    p: &DiscreteDistribution<T>,
    q: &DiscreteDistribution<T>,
    cost: &TransportCost,
) -> Result<()> {
    if p.dim != q.dim {
        return Err(Error::dim(p.dim, q.dim));
    }
    if cost.dim == 0 || !p.dim.is_multiple_of(cost.dim) {
        return Err(Error::dim(cost.dim, p.dim));
    }
    Ok(())
}

/// The cost matrix `c(x_i, y_j)` between the atoms of `p` and `q`, row-major.
pub fn cost_matrix<T: Real>(
    p: &DiscreteDistribution<T>,
    q: &DiscreteDistribution<T>,
    cost: &TransportCost,
) -> Result<Vec<T>> {
    check_cost_dims(p, q, cost)?;
    let mut c = Vec::with_capacity(p.len() * q.len());
    for x in p.atoms() {
        for y in q.atoms() {
            c.push(cost.eval(x, y));
        }
    }
    Ok(c)
}

/// Optimal transport value and an optimal plan.
pub fn wasserstein_exact<T: Real>(
    p: &DiscreteDistribution<T>,
    q: &DiscreteDistribution<T>,
    cost: &TransportCost,
) -> Result<(T, Coupling<T>)> {
    let c = cost_matrix(p, q, cost)?;
    let sol = solve_transport(&c, p.weights(), q.weights())
        .map_err(|e| Error::SolverFailure(e.to_string()))?;
    Ok((sol.value, sol.plan))
}

/// Sorted monotone coupling on the real line. Valid because every supported
/// cost is a convex function of `|x - y|` in one dimension.
pub fn wasserstein_1d<T: Real>(
    p: &DiscreteDistribution<T>,
    q: &DiscreteDistribution<T>,
    cost: &TransportCost,
) -> Result<T> {
    check_cost_dims(p, q, cost)?;
    if p.dim != 1 || cost.dim != 1 {
        return Err(Error::dim(1, p.dim));
    }
    let sorted = |d: &DiscreteDistribution<T>| {
        let mut v: Vec<(T, T)> = d.iter().map(|(x, w)| (x[0], w)).collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite atoms"));
        v
    };
    let (a, b) = (sorted(p), sorted(q));
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut total = T::zero();
    while i < a.len() && j < b.len() {
        let m = ra.min(rb);
        total += m * cost.eval(&[a[i].0], &[b[j].0]);
        ra -= m;
        rb -= m;
        if ra <= rb {
            i += 1;
            if i < a.len() {
                ra = a[i].1;
            }
        } else {
            j += 1;
            if j < b.len() {
                rb = b[j].1;
            }
        }
    }
    Ok(total)
}

/// `(1/M)·W_{c^M}(Σ_k ν_k P_k^{⊗M}, P̂^{⊗M})`.
pub fn normalized_mixture_product_distance<T: Real>(
    nu: &[(T, DiscreteDistribution<T>)],
    nominal: &DiscreteDistribution<T>,
    m: usize,
    cost: &TransportCost,
    cap: usize,
) -> Result<T> {
    let powered = nu
        .iter()
        .map(|(w, p)| Ok((*w, product_power(p, m, cap)?)))
        .collect::<Result<Vec<_>>>()?;
    let mix = mixture(&powered)?;
    let base = product_power(nominal, m, cap)?;
    let (value, _) = wasserstein_exact(&mix, &base, cost)?;
    Ok(value / T::of_usize(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1(atoms: &[f64], w: &[f64]) -> DiscreteDistribution {
        make_distribution(atoms.iter().map(|&a| vec![a]).collect(), w.to_vec()).unwrap()
    }

    #[test]
    fn construction_and_validation() {
        let p = d1(&[-1.0, 1.0], &[0.25, 0.75]);
        assert_eq!(p.len(), 2);
        assert_eq!(p.weights(), &[0.25, 0.75]);
        let merged = d1(&[0.0, 0.0], &[0.5, 0.5]);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged.weights(), &[1.0]);
        assert!(matches!(
            make_distribution(vec![vec![0.0]], vec![-1.0]),
            Err(Error::NegativeWeight { index: 0, .. })
        ));
        assert_eq!(
            make_distribution(vec![vec![0.0]], vec![0.0]),
            Err(Error::ZeroTotalMass)
        );
        assert!(matches!(
            make_distribution(vec![vec![0.0], vec![1.0, 2.0]], vec![0.5, 0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            make_distribution(vec![vec![0.0]], vec![0.9]),
            Err(Error::MassNotNormalized { .. })
        ));
        let nearly = make_distribution(vec![vec![0.0], vec![1.0]], vec![0.5, 0.5 + 5e-10]).unwrap();
        let s: f64 = nearly.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn products() {
        let p = d1(&[-1.0, 1.0], &[0.25, 0.75]);
        let p2 = product_power(&p, 2, 100).unwrap();
        assert_eq!(p2.dim(), 2);
        assert_eq!(p2.weights(), &[0.0625, 0.1875, 0.1875, 0.5625]);
        assert_eq!(p2.atom(1), &[-1.0, 1.0]);
        let delta = d1(&[0.0], &[1.0]);
        let d3 = product_power(&delta, 3, 10).unwrap();
        assert_eq!(d3.len(), 1);
        assert_eq!(d3.atom(0), &[0.0, 0.0, 0.0]);
        assert!(matches!(
            product_power(&p, 10, 1000),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn mixtures() {
        let a = d1(&[0.0], &[1.0]);
        let b = d1(&[2.0], &[1.0]);
        let m = mixture(&[(0.5, a.clone()), (0.5, b.clone())]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        let m2 = mixture(&[
            (0.5, product_power(&a, 2, 10).unwrap()),
            (0.5, product_power(&b, 2, 10).unwrap()),
        ])
        .unwrap();
        assert_eq!(m2.atom(1), &[2.0, 2.0]);
        let p = d1(&[-1.0, 1.0], &[0.25, 0.75]);
        assert_eq!(mixture(&[(1.0, p.clone())]).unwrap(), p);
        assert_eq!(
            mixture(&[(0.4, a.clone()), (0.4, b)]),
            Err(Error::NotAProbabilityVector)
        );
        let two_d = make_distribution(vec![vec![0.0, 0.0]], vec![1.0]).unwrap();
        assert!(matches!(
            mixture(&[(0.5, a), (0.5, two_d)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transport_examples() {
        let star = d1(&[-0.9, 1.1], &[0.3, 0.7]);
        let hat = d1(&[-1.0, 1.0], &[0.25, 0.75]);
        let cost = TransportCost::new(NormKind::L1, 1);
        let (v, plan) = wasserstein_exact(&star, &hat, &cost).unwrap();
        assert!((v - 0.19).abs() < 1e-9);
        assert!(plan.marginal_error(star.weights(), hat.weights()) < 1e-12);
        let (v0, plan0) = wasserstein_exact(&hat, &hat, &cost).unwrap();
        assert_eq!(v0, 0.0);
        assert_eq!(plan0.get(0, 1), 0.0);
        assert_eq!(plan0.get(1, 0), 0.0);

        let o = make_distribution(vec![vec![0.0, 0.0]], vec![1.0]).unwrap();
        let one = make_distribution(vec![vec![1.0, 1.0]], vec![1.0]).unwrap();
        let sq = TransportCost::squared(NormKind::L2, 1);
        assert_eq!(wasserstein_exact(&o, &one, &sq).unwrap().0, 2.0);
        assert!((wasserstein_1d(&star, &hat, &cost).unwrap() - 0.19).abs() < 1e-12);
    }

    #[test]
    fn mixture_product_distance_examples() {
        let cost = TransportCost::new(NormKind::L1, 1);
        let nu = vec![(0.5, d1(&[0.0], &[1.0])), (0.5, d1(&[2.0], &[1.0]))];
        let hat = d1(&[1.0], &[1.0]);
        for m in 1..=3 {
            let v = normalized_mixture_product_distance(&nu, &hat, m, &cost, 1000).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
        let nu = vec![(0.5, d1(&[-1.0], &[1.0])), (0.5, d1(&[1.0], &[1.0]))];
        let hat = d1(&[-1.0, 1.0], &[0.5, 0.5]);
        let v1 = normalized_mixture_product_distance(&nu, &hat, 1, &cost, 1000).unwrap();
        let v2 = normalized_mixture_product_distance(&nu, &hat, 2, &cost, 1000).unwrap();
        assert!(v1.abs() < 1e-12);
        assert!((v2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lifted_cost_is_block_sum() {
        let c = TransportCost::new(NormKind::L2, 2);
        let x = [0.0, 0.0, 1.0, 1.0];
        let y = [3.0, 4.0, 1.0, 2.0];
        assert_eq!(c.eval(&x, &y), 6.0);
        assert_eq!(c.eval(&x, &y), c.eval(&y, &x));
        assert_eq!(c.eval(&x, &x), 0.0);
        assert_eq!(NormKind::L1.dual(), NormKind::Linf);
        assert_eq!("linf".parse::<NormKind>().unwrap(), NormKind::Linf);
    }

    #[test]
    fn json_round_trip() {
        let p = d1(&[-1.0, 1.0], &[0.25, 0.75]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"atoms":[[-1.0],[1.0]],"weights":[0.25,0.75]}"#);
        let back: DiscreteDistribution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(
            serde_json::from_str::<DiscreteDistribution>(r#"{"atoms":[[0]],"weights":[-1]}"#)
                .is_err()
        );
    }

    #[test]
    fn single_precision() {
        let star = make_distribution(vec![vec![-0.9f32], vec![1.1]], vec![0.3, 0.7]).unwrap();
        let hat = make_distribution(vec![vec![-1.0f32], vec![1.0]], vec![0.25, 0.75]).unwrap();
        let (v, _) = wasserstein_exact(&star, &hat, &TransportCost::new(NormKind::L1, 1)).unwrap();
        assert!((v - 0.19).abs() < 1e-6);
    }
}
