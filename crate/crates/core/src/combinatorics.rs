//! Non-repeating tuples, multi-index classes and the scatter map between
//! N-block and M-block vectors.
//!
//! Indices are zero-based throughout: a tuple over `{0, .., M-1}` and a class
//! representative over `{0, .., n_P-1}`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default cap on the number of scalar variables `|L|·|Î|·(nN+1)`.
pub const DEFAULT_VARIABLE_CAP: usize = 5_000_000;

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// `M!/(M-N)!`, the number of injective maps `{1..N} -> {1..M}`.
pub fn count_tuples(m: usize, n: usize) -> BigUint {
    if n > m {
        return BigUint::zero();
    }
    ((m - n + 1)..=m).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `C(M + n_P - 1, M)`, the number of multisets of size `M` over `n_P` atoms.
pub fn count_classes(n_p: usize, m: usize) -> BigUint {
    if n_p == 0 {
        return BigUint::zero();
    }
    binomial(m + n_p - 1, m)
}

/// `M! / Π_a c_a!` for the atom multiplicities `c_a` of a representative.
pub fn multinomial(counts: &[usize]) -> BigUint {
    let total: usize = counts.iter().sum();
    counts
        .iter()
        .fold(factorial(total), |acc, &c| acc / factorial(c))
}

fn to_usize_capped(v: &BigUint, what: &'static str, cap: usize) -> Result<usize> {
    match v.to_usize() {
        Some(x) if x <= cap => Ok(x),
        _ => Err(Error::cap(what, v, cap)),
    }
}

/// The set `L` of non-repeating `N`-tuples from `{0..M-1}`, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSet {
    m: usize,
    n: usize,
    data: Vec<usize>,
}

impl TupleSet {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[usize] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.data.chunks_exact(self.n)
    }

    /// The coefficient `(M-N)!/M! = 1/|L|`.
    pub fn coefficient<T: Real>(&self) -> T {
        T::one() / T::of_usize(self.len())
    }
}

pub fn enumerate_tuples(m: usize, n: usize, cap: usize) -> Result<TupleSet> {
    if n == 0 || n > m {
        return Err(Error::InvalidInput(format!(
            "tuple length N={n} must satisfy 1 <= N <= M={m}"
        )));
    }
    let count = to_usize_capped(&count_tuples(m, n), "non-repeating tuples", cap)?;
    let mut data = Vec::with_capacity(count * n);
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; m];
    fn rec(m: usize, n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<usize>) {
        if current.len() == n {
            out.extend_from_slice(current);
            return;
        }
        for i in 0..m {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(m, n, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(m, n, &mut current, &mut used, &mut data);
    debug_assert_eq!(data.len(), count * n);
    Ok(TupleSet { m, n, data })
}

/// An equivalence class of atom multi-indices in `{0..n_P-1}^M` under permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexClass<T> {
    /// Sorted nondecreasing representative.
    pub representative: Vec<usize>,
    /// Number of members, `M!/Π_a c_a!`.
    pub size: BigUint,
    /// `size · Π_k p̂_{rep_k}`.
    pub weight: T,
}

impl<T: Real> MultiIndexClass<T> {
    pub fn multiplicities(&self, n_p: usize) -> Vec<usize> {
        let mut counts = vec![0; n_p];
        for &i in &self.representative {
            counts[i] += 1;
        }
        counts
    }

    /// A uniformly random member of the class (a shuffle of the representative).
    pub fn random_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut member = self.representative.clone();
        member.shuffle(rng);
        member
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        canonical_selector(tuple) == self.representative
    }
}

/// Enumerates the classes of `{0..n_P-1}^M` for atom weights `p`, in
/// lexicographic order of the sorted representative.
pub fn enumerate_classes<T: Real>(
    p: &[T],
    m: usize,
    cap: usize,
) -> Result<Vec<MultiIndexClass<T>>> {
    let n_p = p.len();
    if n_p == 0 || m == 0 {
        return Err(Error::InvalidInput(
            "classes need at least one atom and M >= 1".into(),
        ));
    }
    let count = to_usize_capped(&count_classes(n_p, m), "multi-index classes", cap)?;
    let mut out = Vec::with_capacity(count);
    let mut rep = vec![0usize; m];
    loop {
        let mut counts = vec![0usize; n_p];
        for &i in &rep {
            counts[i] += 1;
        }
        let size = multinomial(&counts);
        let size_f = size.to_f64().unwrap_or(f64::INFINITY);
        let prod = rep.iter().fold(T::one(), |acc, &i| acc * p[i]);
        out.push(MultiIndexClass {
            representative: rep.clone(),
            weight: T::of(size_f) * prod,
            size,
        });
        let Some(pos) = (0..m).rev().find(|&k| rep[k] + 1 < n_p) else {
            break;
        };
        let next = rep[pos] + 1;
        for v in &mut rep[pos..] {
            *v = next;
        }
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

/// The sorted representative of the class containing `member`.
pub fn canonical_selector(member: &[usize]) -> Vec<usize> {
    let mut rep = member.to_vec();
    rep.sort_unstable();
    rep
}

/// Places block `k` of `a` (blocks of size `n`) at block position `l[k]` of a
/// zero vector in `R^{nM}`. This is the adjoint `E_lᵀ a`.
pub fn scatter<T: Real>(l: &[usize], a: &[T], n: usize, m: usize) -> Result<Vec<T>> {
    if a.len() != n * l.len() {
        return Err(Error::dim(n * l.len(), a.len()));
    }
    if let Some(&bad) = l.iter().find(|&&j| j >= m) {
        return Err(Error::InvalidInput(format!(
            "tuple entry {bad} out of range for M={m}"
        )));
    }
    let mut out = vec![T::zero(); n * m];
    for (k, &j) in l.iter().enumerate() {
        for r in 0..n {
            out[j * n + r] += a[k * n + r];
        }
    }
    Ok(out)
}

/// `x_l = (x_{l_1}, .., x_{l_N})` for `x` with blocks of size `n`.
pub fn gather<T: Real>(l: &[usize], x: &[T], n: usize) -> Vec<T> {
    l.iter()
        .flat_map(|&j| x[j * n..(j + 1) * n].iter().copied())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tuples_in_lexicographic_order() {
        let t = enumerate_tuples(3, 2, 100).unwrap();
        let got: Vec<Vec<usize>> = t.iter().map(|l| l.to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 2],
                vec![2, 0],
                vec![2, 1]
            ]
        );
        let t = enumerate_tuples(2, 2, 100).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get(1), &[1, 0]);
        assert!(enumerate_tuples(2, 3, 100).is_err());
        assert!(matches!(
            enumerate_tuples(6, 3, 100),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn tuple_count_matches_falling_factorial() {
        for m in 1..=7 {
            for n in 1..=m {
                let t = enumerate_tuples(m, n, 1 << 20).unwrap();
                assert_eq!(BigUint::from(t.len()), count_tuples(m, n));
            }
        }
        assert_eq!(
            enumerate_tuples(3, 2, 10).unwrap().coefficient::<f64>(),
            1.0 / 6.0
        );
    }

    #[test]
    fn classes_binomial_row() {
        let cls = enumerate_classes(&[0.25f64, 0.75], 3, 100).unwrap();
        let sizes: Vec<u64> = cls.iter().map(|c| c.size.to_u64().unwrap()).collect();
        assert_eq!(sizes, vec![1, 3, 3, 1]);
        assert_eq!(cls[1].representative, vec![0, 0, 1]);
        assert!((cls[1].weight - 3.0 * 0.25 * 0.25 * 0.75).abs() < 1e-15);
        assert!((cls[1].weight - 0.140625).abs() < 1e-15);
        let single = enumerate_classes(&[1.0], 5, 100).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].weight, 1.0);
    }

    #[test]
    fn class_count_matches_direct_enumeration() {
        for n_p in 1..=3 {
            for m in 1..=6 {
                let p = vec![1.0 / n_p as f64; n_p];
                let cls = enumerate_classes(&p, m, 1 << 20).unwrap();
                let mut reps = std::collections::BTreeSet::new();
                let total = n_p.pow(m as u32);
                for code in 0..total {
                    let mut c = code;
                    let tuple: Vec<usize> = (0..m)
                        .map(|_| {
                            let d = c % n_p;
                            c /= n_p;
                            d
                        })
                        .collect();
                    reps.insert(canonical_selector(&tuple));
                }
                assert_eq!(cls.len(), reps.len());
                assert_eq!(BigUint::from(cls.len()), count_classes(n_p, m));
                let size_sum: BigUint = cls.iter().map(|c| c.size.clone()).sum();
                assert_eq!(size_sum, BigUint::from(total));
            }
        }
    }

    #[test]
    fn multinomials_exceed_u64_without_overflow() {
        let big = multinomial(&[11, 11, 11]);
        assert!(big.to_u64().is_none() || big > BigUint::from(1u64 << 40));
        assert_eq!(multinomial(&[2, 1]), BigUint::from(3u32));
    }

    #[test]
    fn selector_and_members() {
        assert_eq!(canonical_selector(&[0, 0, 1]), vec![0, 0, 1]);
        assert_eq!(canonical_selector(&[1, 1, 1]), vec![1, 1, 1]);
        assert_eq!(canonical_selector(&[1, 0, 0]), vec![0, 0, 1]);
        let cls = enumerate_classes(&[0.5, 0.5], 3, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for c in &cls {
            for _ in 0..5 {
                assert!(c.contains(&c.random_member(&mut rng)));
            }
        }
    }

    #[test]
    fn scatter_examples() {
        let (u, v) = (3.0, 7.0);
        assert_eq!(scatter(&[1, 0], &[u, v], 1, 2).unwrap(), vec![v, u]);
        assert_eq!(scatter(&[0, 2], &[u, v], 1, 3).unwrap(), vec![u, 0.0, v]);
        assert_eq!(scatter(&[0, 1], &[u, v], 1, 3).unwrap(), vec![u, v, 0.0]);
        assert!(matches!(
            scatter(&[0, 1], &[u], 1, 3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn class_weights_sum_to_one(raw in prop::collection::vec(0.01f64..1.0, 1..=4), m in 1usize..=8) {
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let cls = enumerate_classes(&p, m, 1 << 20).unwrap();
            let s: f64 = cls.iter().map(|c| c.weight).sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
            let size_sum: BigUint = cls.iter().map(|c| c.size.clone()).sum();
            prop_assert_eq!(size_sum, BigUint::from(p.len()).pow(m as u32));
        }

        #[test]
        fn scatter_is_adjoint_of_gather(
            n in 1usize..=3,
            m in 2usize..=5,
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let nn = rng.gen_range(1..=m.min(3));
            let tuples = enumerate_tuples(m, nn, 1000).unwrap();
            let l = tuples.get(rng.gen_range(0..tuples.len())).to_vec();
            let x: Vec<f64> = (0..n * m).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let a: Vec<f64> = (0..n * nn).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let lhs = crate::scalar::dot(&scatter(&l, &a, n, m).unwrap(), &x);
            let rhs = crate::scalar::dot(&a, &gather(&l, &x, n));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
