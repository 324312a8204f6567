mod common;

use common::{random_distribution, rng, NORMS};
use struct_wdro::combinatorics::DEFAULT_VARIABLE_CAP;
use struct_wdro::distributions::*;
use struct_wdro::oracles::catalog;

#[test]
fn perturbed_pair_distance() {
    let (v, plan) = wasserstein_exact(
        &catalog::two_plane_perturbed(),
        &catalog::two_plane_nominal(),
        &TransportCost::new(NormKind::L1, 1),
    )
    .unwrap();
    assert!((v - 0.19).abs() < 1e-9);
    assert!((plan.get(0, 0) - 0.25).abs() < 1e-12);
}

#[test]
fn product_power_distance_scales_with_m() {
    let mut r = rng(7);
    for case in 0..30 {
        let dim = 1 + case % 2;
        let p = random_distribution(&mut r, dim, 1 + case % 4);
        let q = random_distribution(&mut r, dim, 1 + (case / 2) % 4);
        let norm = NORMS[case % 3];
        let base = wasserstein_exact(&p, &q, &TransportCost::new(norm, dim))
            .unwrap()
            .0;
        for m in [2, 3] {
            let pm = product_power(&p, m, DEFAULT_VARIABLE_CAP).unwrap();
            let qm = product_power(&q, m, DEFAULT_VARIABLE_CAP).unwrap();
            let lifted = wasserstein_exact(&pm, &qm, &TransportCost::new(norm, dim))
                .unwrap()
                .0;
            assert!(
                (lifted - m as f64 * base).abs() < 1e-6,
                "case {case} M={m}: {lifted} vs {base}"
            );
        }
    }
}

#[test]
fn one_dimensional_shortcut_agrees() {
    let mut r = rng(11);
    for case in 0..40 {
        let p = random_distribution(&mut r, 1, 1 + case % 5);
        let q = random_distribution(&mut r, 1, 1 + (case / 3) % 5);
        for norm in NORMS {
            let c = TransportCost::new(norm, 1);
            let a = wasserstein_exact(&p, &q, &c).unwrap().0;
            let b = wasserstein_1d(&p, &q, &c).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn mixture_distance_monotone_and_bounded() {
    let mut r = rng(13);
    for case in 0..8 {
        let dim = 1 + case % 2;
        let nominal = random_distribution(&mut r, dim, 2);
        let cost = TransportCost::new(NORMS[case % 3], dim);
        let nu: Vec<(f64, DiscreteDistribution)> = (0..2)
            .map(|k| {
                (
                    if k == 0 { 0.3 } else { 0.7 },
                    random_distribution(&mut r, dim, 2),
                )
            })
            .collect();
        let bound: f64 = nu
            .iter()
            .map(|(w, p)| w * wasserstein_exact(p, &nominal, &cost).unwrap().0)
            .sum();
        let mut prev = f64::NEG_INFINITY;
        for m in 1..=3 {
            let v =
                normalized_mixture_product_distance(&nu, &nominal, m, &cost, DEFAULT_VARIABLE_CAP)
                    .unwrap();
            assert!(
                v >= prev - 1e-7 && v <= bound + 1e-7,
                "case {case} M={m}: {v} (prev {prev}, bound {bound})"
            );
            prev = v;
        }
    }
}

#[test]
fn single_precision_distance() {
    let p = make_distribution(vec![vec![-0.9f32], vec![1.1]], vec![0.3, 0.7]).unwrap();
    let q = make_distribution(vec![vec![-1.0f32], vec![1.0]], vec![0.25, 0.75]).unwrap();
    let (v, _) = wasserstein_exact(&p, &q, &TransportCost::new(NormKind::L1, 1)).unwrap();
    assert!((v - 0.19).abs() < 1e-5);
}
