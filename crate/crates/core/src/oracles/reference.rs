use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on the minimizer for every scalar infimum.
pub const LINE_SEARCH_TOLERANCE: f64 = 1e-10;

/// Minimizes a unimodal function on `[lo, hi]` by golden-section search.
/// `+∞` values are allowed; when both probes are infinite the search moves
/// right, which suits functions with a pole at the left end of the bracket.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        let go_left = if fc.is_infinite() && fd.is_infinite() {
            false
        } else {
            fc <= fd
        };
        if go_left {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .fold((x, fx), |best, p| if p.1 < best.1 { p } else { best })
}

/// Infimum of a convex function on the open half-line `(threshold, ∞)`: the
/// bracket is doubled until the function rises, then refined.
fn inf_above<F: Fn(f64) -> f64>(f: F, threshold: f64) -> f64 {
    let lo = threshold;
    let mut width = 1.0f64.max(threshold.abs());
    while width < 1e12 {
        let mid = lo + width / 2.0;
        if f(lo + width) > f(mid) {
            break;
        }
        width *= 2.0;
    }
    let g = |mu: f64| {
        if mu <= threshold {
            f64::INFINITY
        } else {
            f(mu)
        }
    };
    golden_section(g, lo, lo + width, LINE_SEARCH_TOLERANCE).1
}

/// One closed-form value attached to an example loss with squared-distance
/// cost on the real line.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReferenceCase {
    /// Example family (`variance`, `negative_product`, `symmetrization`, `lifted`, `cubic_mixed`).
    pub example: &'static str,
    /// `S` (structured value), `U` (unstructured bound), `Usym` (symmetrized
    /// bound), `UMsym` (lifted relaxation) or `UMbound` (its upper envelope).
    pub quantity: &'static str,
    /// What the formula describes.
    pub note: &'static str,
    /// Whether the value depends on the lifting parameter `M`.
    pub uses_m: bool,
    #[serde(skip)]
    eval: fn(f64, usize) -> f64,
}

impl ReferenceCase {
    pub fn name(&self) -> String {
        format!("{}/{}", self.example, self.quantity)
    }
}

fn variance_s(rho: f64, _m: usize) -> f64 {
    rho
}

fn variance_u(rho: f64, _m: usize) -> f64 {
    2.0 * rho
}

fn zero(_rho: f64, _m: usize) -> f64 {
    0.0
}

fn negative_product_u(rho: f64, _m: usize) -> f64 {
    inf_above(|mu| 2.0 * rho * mu - 2.0 * mu / (1.0 - 4.0 * mu * mu), 0.5)
}

fn symmetrization_s(rho: f64, _m: usize) -> f64 {
    -2.0 * (1.0 - rho.sqrt().min(1.0)).powi(2)
}

fn symmetrization_u(rho: f64, _m: usize) -> f64 {
    inf_above(
        |mu| 2.0 * rho * mu + 2.0 * mu * (1.0 - mu) / (mu * (mu + 2.0) - 1.0),
        2f64.sqrt() - 1.0,
    )
}

fn symmetrization_usym(rho: f64, _m: usize) -> f64 {
    let r = rho.min(0.5);
    2.0 * (2.0 * (2.0 * r).sqrt() - 2.0 * r - 1.0)
}

fn lifted(rho: f64, m: usize) -> f64 {
    let mf = m as f64;
    inf_above(
        |mu| {
            mf * (rho - 1.0) * mu
                + (mf - 1.0) * mf * mf * mu * mu / ((mf - 1.0) * mf * mu - 1.0)
                    * (1.0 - 1.0 / ((mf - 1.0) * (1.0 + mf * mu)))
        },
        1.0 / (mf * (mf - 1.0)),
    )
}

fn lifted_bound(rho: f64, m: usize) -> f64 {
    (rho.sqrt() + 1.0).powi(2) / (m as f64 - 1.0)
}

fn cubic_s(rho: f64, _m: usize) -> f64 {
    rho.powf(1.5)
}

fn cubic_u(_rho: f64, _m: usize) -> f64 {
    f64::INFINITY
}

/// Every closed-form reference value.
pub fn reference_cases() -> Vec<ReferenceCase> {
    let case = |example, quantity, note, uses_m, eval| ReferenceCase {
        example,
        quantity,
        note,
        uses_m,
        eval,
    };
    vec![
        case("variance", "S", "½(x₁−x₂)² around δ₀: worst-case variance, attained by ½δ_{−√ρ}+½δ_{√ρ}", false, variance_s),
        case("variance", "U", "½(x₁−x₂)² around δ₀: unstructured bound over the 2ρ ball", false, variance_u),
        case("negative_product", "S", "−x₁x₂ around ½δ₋₁+½δ₁: worst case −(E x)² is 0", false, zero),
        case(
            "negative_product",
            "U",
            "−x₁x₂ around ½δ₋₁+½δ₁: inf over μ > ½ of 2ρμ − 2μ/(1−4μ²)",
            false,
            negative_product_u,
        ),
        case(
            "symmetrization",
            "S",
            "−2x₁²−2x₁x₂ around ½δ₋₁+½δ₁: −2(1−min(√ρ,1))²",
            false,
            symmetrization_s,
        ),
        case(
            "symmetrization",
            "U",
            "−2x₁²−2x₁x₂: inf over μ > √2−1 of 2ρμ + 2μ(1−μ)/(μ(μ+2)−1)",
            false,
            symmetrization_u,
        ),
        case(
            "symmetrization",
            "Usym",
            "−2x₁²−2x₁x₂: symmetrized bound 2(2√(2r) − 2r − 1), r = min(ρ,½)",
            false,
            symmetrization_usym,
        ),
        case(
            "lifted",
            "UMsym",
            "−x₁x₂ around ½δ₋₁+½δ₁: lifted relaxation as a one-dimensional infimum over μ > 1/(M(M−1))",
            true,
            lifted,
        ),
        case("lifted", "UMbound", "−x₁x₂: envelope (√ρ+1)²/(M−1) of the lifted relaxation", true, lifted_bound),
        case("cubic_mixed", "S", "x₁x₂² around δ₀: structured value ρ^{3/2}, attained at δ_{√ρ}", false, cubic_s),
        case("cubic_mixed", "U", "x₁x₂² around δ₀: the symmetrized relaxations are infinite", false, cubic_u),
    ]
}

/// All quantities recorded for one example family.
pub fn cases_for(example: &str) -> Result<Vec<ReferenceCase>> {
    let found: Vec<ReferenceCase> = reference_cases()
        .into_iter()
        .filter(|c| c.example == example)
        .collect();
    if found.is_empty() {
        return Err(Error::InvalidInput(format!(
            "unknown reference case '{example}'"
        )));
    }
    Ok(found)
}

/// Looks up `example/quantity`.
pub fn reference_case(name: &str) -> Result<ReferenceCase> {
    reference_cases()
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| Error::InvalidInput(format!("unknown reference case '{name}'")))
}

/// Evaluates a closed form at radius `ρ > 0` and lifting level `M ≥ 2`.
pub fn reference_value(case: &ReferenceCase, rho: f64, m: usize) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::OutOfDomain {
            case: case.name(),
            reason: format!("radius must be positive and finite, got {rho}"),
        });
    }
    if case.uses_m && m < 2 {
        return Err(Error::OutOfDomain {
            case: case.name(),
            reason: format!("lifting parameter must be at least 2, got {m}"),
        });
    }
    Ok((case.eval)(rho, m))
}
