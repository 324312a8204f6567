mod common;

use common::{random_instance, rng};
use num_bigint::BigInt;
use num_rational::BigRational;
use struct_wdro::combinatorics::DEFAULT_VARIABLE_CAP;
use struct_wdro::conic::SolverSettings;
use struct_wdro::distributions::{DiscreteDistribution, NormKind, TransportCost};
use struct_wdro::losses::QuadraticExampleLoss;
use struct_wdro::oracles::*;
use struct_wdro::program::relaxation_value;
use struct_wdro::Error;

const CAP: usize = DEFAULT_VARIABLE_CAP;

fn value(name: &str, rho: f64, m: usize) -> f64 {
    reference_value(&reference_case(name).unwrap(), rho, m).unwrap()
}

fn brute_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, steps: usize) -> f64 {
    (0..=steps)
        .map(|k| f(lo + (hi - lo) * k as f64 / steps as f64))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn semi_infinite_matches_program_on_two_plane() {
    let inst = catalog::two_plane(0.2).unwrap();
    let s = SolverSettings::default();
    for m in [2, 3] {
        let program = relaxation_value(&inst, m, &s, CAP).unwrap().value;
        let dual = semi_infinite_dual(&inst, m, LINE_SEARCH_TOLERANCE, &s, CAP).unwrap();
        assert!((program - dual).abs() <= 1e-5, "M={m}: {program} vs {dual}");
    }
}

#[test]
fn semi_infinite_matches_program_on_random_instances() {
    let mut r = rng(31);
    let s = SolverSettings::default();
    for case in 0..5 {
        let inst = random_instance(&mut r, 1 + case % 2, 2);
        let program = relaxation_value(&inst, 2, &s, CAP).unwrap().value;
        let dual = semi_infinite_dual(&inst, 2, LINE_SEARCH_TOLERANCE, &s, CAP).unwrap();
        assert!(
            (program - dual).abs() <= 1e-5,
            "case {case}: {program} vs {dual}"
        );
    }
}

#[test]
fn grid_lower_bound_sits_below_relaxation() {
    let inst = catalog::two_plane(0.2).unwrap();
    let s = SolverSettings::default();
    let grid: Vec<Vec<f64>> = (-12..=12).map(|k| vec![k as f64 * 0.125]).collect();
    let loss = inst.loss.clone();
    let lower = grid_primal_lower_bound(
        &inst.nominal,
        inst.radius,
        &inst.cost,
        |x| loss.eval(x).unwrap(),
        2,
        &grid,
        &GridSearch {
            restarts: 4,
            ..GridSearch::default()
        },
        CAP,
    )
    .unwrap();
    let nominal = inst.nominal_expectation(CAP).unwrap();
    assert!(lower >= nominal - 1e-9, "{lower} < {nominal}");
    for m in [2, 4, 8] {
        let upper = relaxation_value(&inst, m, &s, CAP).unwrap().value;
        assert!(lower <= upper + 1e-7, "M={m}: {lower} > {upper}");
    }
}

#[test]
fn grid_search_is_deterministic() {
    let nominal = DiscreteDistribution::new(vec![vec![-1.0], vec![1.0]], vec![0.5, 0.5]).unwrap();
    let grid: Vec<Vec<f64>> = (-6..=6).map(|k| vec![k as f64 / 3.0]).collect();
    let cost = TransportCost::squared(NormKind::L2, 1);
    let run = || {
        grid_primal_lower_bound(
            &nominal,
            0.3,
            &cost,
            |x| QuadraticExampleLoss::Symmetrization.eval(x),
            2,
            &grid,
            &GridSearch {
                seed: 9,
                ..GridSearch::default()
            },
            CAP,
        )
        .unwrap()
    };
    assert_eq!(run().to_bits(), run().to_bits());
}

#[test]
fn lifted_values_respect_envelope() {
    for rho in [0.25, 1.0] {
        for m in 2..=50 {
            let v = value("lifted/UMsym", rho, m);
            let bound = value("lifted/UMbound", rho, m);
            assert!(
                v >= 0.0 && v <= bound + 1e-9,
                "rho={rho} M={m}: {v} vs {bound}"
            );
        }
    }
}

#[test]
fn lifted_value_agrees_with_direct_scan() {
    for (rho, m) in [(0.25, 2usize), (1.0, 3), (0.5, 7)] {
        let mf = m as f64;
        let f = |mu: f64| {
            mf * (rho - 1.0) * mu
                + (mf - 1.0) * mf * mf * mu * mu / ((mf - 1.0) * mf * mu - 1.0)
                    * (1.0 - 1.0 / ((mf - 1.0) * (1.0 + mf * mu)))
        };
        let lo = 1.0 / (mf * (mf - 1.0));
        let scan = brute_min(|t| f(lo + t * t), 1e-4, 20.0, 400_000);
        let v = value("lifted/UMsym", rho, m);
        assert!((v - scan).abs() < 1e-6, "rho={rho} M={m}: {v} vs {scan}");
    }
}

#[test]
fn closed_forms_are_ordered() {
    for rho in REFERENCE_RADII {
        assert!(value("variance/S", rho, 2) <= value("variance/U", rho, 2));
        assert!(value("negative_product/S", rho, 2) <= value("negative_product/U", rho, 2) + 1e-12);
        let s = value("symmetrization/S", rho, 2);
        let usym = value("symmetrization/Usym", rho, 2);
        let u = value("symmetrization/U", rho, 2);
        assert!(
            s <= usym + 1e-9 && usym <= u + 1e-9,
            "rho={rho}: {s} {usym} {u}"
        );
        assert_eq!(value("cubic_mixed/U", rho, 2), f64::INFINITY);
    }
}

#[test]
fn negative_product_bound_matches_scan() {
    for rho in [0.1, 1.0] {
        let scan = brute_min(
            |mu| 2.0 * rho * mu - 2.0 * mu / (1.0 - 4.0 * mu * mu),
            0.5 + 1e-6,
            50.0,
            2_000_000,
        );
        let v = value("negative_product/U", rho, 2);
        assert!((v - scan).abs() < 1e-5, "rho={rho}: {v} vs {scan}");
    }
}

#[test]
fn reference_domain_is_checked() {
    let case = reference_case("lifted/UMsym").unwrap();
    assert!(matches!(
        reference_value(&case, 0.0, 3),
        Err(Error::OutOfDomain { .. })
    ));
    assert!(matches!(
        reference_value(&case, 0.5, 1),
        Err(Error::OutOfDomain { .. })
    ));
    assert!(reference_case("nope/S").is_err());
    assert_eq!(cases_for("symmetrization").unwrap().len(), 3);
}

#[test]
fn divergence_witness_is_exact() {
    let rho = BigRational::new(BigInt::from(3), BigInt::from(10));
    for n in 1..=100u64 {
        let w = divergence_witness(&rho, n, 2).unwrap();
        assert_eq!(
            w.objective,
            &rho * BigRational::from_integer(BigInt::from(n))
        );
        assert_eq!(
            w.transport_cost,
            &rho * BigRational::from_integer(BigInt::from(2))
        );
    }
}

#[test]
fn cubic_grid_attains_closed_form() {
    let rho: f64 = 0.25;
    let grid = vec![vec![0.0], vec![rho.sqrt()]];
    let v = grid_primal_lower_bound(
        &DiscreteDistribution::point_mass(vec![0.0]).unwrap(),
        rho,
        &TransportCost::squared(NormKind::L2, 1),
        |x| QuadraticExampleLoss::CubicMixed.eval(x),
        2,
        &grid,
        &GridSearch::default(),
        CAP,
    )
    .unwrap();
    assert!((v - value("cubic_mixed/S", rho, 2)).abs() < 1e-6, "{v}");
}
