#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use struct_wdro::distributions::{DiscreteDistribution, NormKind, TransportCost};
use struct_wdro::losses::PolyhedralLoss;
use struct_wdro::program::UQInstance;

pub const NORMS: [NormKind; 3] = [NormKind::L1, NormKind::L2, NormKind::Linf];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_distribution(rng: &mut ChaCha8Rng, dim: usize, atoms: usize) -> DiscreteDistribution {
    let pts: Vec<Vec<f64>> = (0..atoms)
        .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let w: Vec<f64> = (0..atoms).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let w = w.into_iter().map(|x| x / total).collect();
    DiscreteDistribution::new(pts, w).unwrap()
}

fn random_vertices(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..2 * dim + 1).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .collect()
}

/// Random vertex-representation instance with `N = 2`.
pub fn random_instance(rng: &mut ChaCha8Rng, dim: usize, atoms: usize) -> UQInstance {
    let nominal = random_distribution(rng, dim, atoms);
    let count = rng.gen_range(2..=4);
    let h = random_vertices(rng, dim, count);
    let norm = NORMS[rng.gen_range(0..3)];
    let rho = rng.gen_range(0.05..1.0);
    UQInstance::new(
        nominal,
        rho,
        TransportCost::new(norm, dim),
        PolyhedralLoss::from_vertices(dim, 2, h).unwrap(),
    )
    .unwrap()
}

/// Random instance whose loss is symmetric in its two blocks: every vertex
/// comes with its block-swapped copy.
pub fn random_symmetric_instance(rng: &mut ChaCha8Rng, dim: usize, atoms: usize) -> UQInstance {
    let base = random_instance(rng, dim, atoms);
    let mut h: Vec<Vec<f64>> = base.loss.vertices().unwrap().to_vec();
    let swapped: Vec<Vec<f64>> = h
        .iter()
        .map(|v| {
            let mut s = v[dim..2 * dim].to_vec();
            s.extend_from_slice(&v[..dim]);
            s.push(v[2 * dim]);
            s
        })
        .collect();
    h.extend(swapped);
    UQInstance::new(
        base.nominal,
        base.radius,
        base.cost,
        PolyhedralLoss::from_vertices(dim, 2, h).unwrap(),
    )
    .unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
