use std::path::Path;

use struct_wdro::combinatorics::DEFAULT_VARIABLE_CAP;
use struct_wdro::conic::SolverSettings;
use struct_wdro::oracles::{catalog, generate_fixtures, Fixtures, FIXTURE_TOLERANCE};
use struct_wdro::program::{relaxation_value, unstructured_value};

/// `U_M^sym` of the two-plane instance at `ρ = 0.2`, `M = 2..=16`, computed
/// with an external simplex code from the same lifted program.
const TWO_PLANE_CURVE: [f64; 15] = [
    -1.9178571428571427,
    -1.998214285714285,
    -2.0082589285714283,
    -2.0157924107142846,
    -2.021442522321426,
    -2.02144252232143,
    -2.023208182198662,
    -2.023649597167976,
    -2.024113082885741,
    -2.027082947322303,
    -2.029767304786619,
    -2.0311274367306553,
    -2.032086342586748,
    -2.0324387291181476,
    -2.03261315658512,
];

const TWO_PLANE_UNSTRUCTURED: f64 = -0.875;

fn golden() -> Fixtures {
    Fixtures::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden.json")).unwrap()
}

#[test]
fn fixtures_are_reproduced() {
    let stored = golden();
    let fresh = generate_fixtures(&SolverSettings::default(), 4).unwrap();
    assert_eq!(stored.tolerance, FIXTURE_TOLERANCE);
    assert_eq!(stored.entries.len(), fresh.entries.len());
    for (a, b) in stored.entries.iter().zip(&fresh.entries) {
        assert_eq!((&a.case, a.rho, a.m), (&b.case, b.rho, b.m));
        assert!(
            (a.value - b.value).abs() <= stored.tolerance,
            "{} rho={} M={:?}: stored {} fresh {}",
            a.case,
            a.rho,
            a.m,
            a.value,
            b.value
        );
        match (a.theta, b.theta) {
            (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-4, "{}: theta {x} vs {y}", a.case),
            (None, None) => {}
            other => panic!("{}: theta mismatch {other:?}", a.case),
        }
    }
}

#[test]
fn stored_curve_matches_independent_values() {
    let stored = golden();
    for (k, &expected) in TWO_PLANE_CURVE.iter().enumerate() {
        let m = k + 2;
        let e = stored.find("two_plane/UMsym", 0.2, Some(m)).unwrap();
        assert!(
            (e.value - expected).abs() <= 1e-6,
            "M={m}: {} vs {expected}",
            e.value
        );
    }
    let u = stored.find("two_plane/U", 0.2, None).unwrap();
    assert!((u.value - TWO_PLANE_UNSTRUCTURED).abs() <= 1e-7);
}

#[test]
fn solver_matches_independent_values() {
    let inst = catalog::two_plane(0.2).unwrap();
    let s = SolverSettings::default();
    for m in [2, 5, 9] {
        let v = relaxation_value(&inst, m, &s, DEFAULT_VARIABLE_CAP)
            .unwrap()
            .value;
        assert!((v - TWO_PLANE_CURVE[m - 2]).abs() <= 1e-7, "M={m}: {v}");
    }
    let u = unstructured_value(&inst, &s, DEFAULT_VARIABLE_CAP)
        .unwrap()
        .value;
    assert!((u - TWO_PLANE_UNSTRUCTURED).abs() <= 1e-7);
}

#[test]
fn fixture_file_round_trips() {
    let stored = golden();
    let back: Fixtures = serde_json::from_str(&stored.to_json()).unwrap();
    assert_eq!(stored, back);
}
