//! Built-in instances used by tests, fixtures and the command line.

use crate::distributions::{DiscreteDistribution, NormKind, TransportCost};
use crate::error::Result;
use crate::losses::{ParametricPolyhedralLoss, PolyhedralLoss};
use crate::program::UQInstance;

/// `P̂ = ¼δ₋₁ + ¾δ₁` on the real line.
pub fn two_plane_nominal() -> DiscreteDistribution {
    DiscreteDistribution::new(vec![vec![-1.0], vec![1.0]], vec![0.25, 0.75])
        .expect("valid distribution")
}

/// A perturbation of [`two_plane_nominal`] at distance 0.19.
pub fn two_plane_perturbed() -> DiscreteDistribution {
    DiscreteDistribution::new(vec![vec![-0.9], vec![1.1]], vec![0.3, 0.7])
        .expect("valid distribution")
}

/// `ℓ(x) = min{2x₁ + 5x₂, −5x₁ + 2x₂}`.
pub fn two_plane_loss() -> PolyhedralLoss {
    PolyhedralLoss::from_vertices(1, 2, vec![vec![2.0, 5.0, 0.0], vec![-5.0, 2.0, 0.0]])
        .expect("valid loss")
}

/// Two-plane loss around [`two_plane_nominal`] with Euclidean cost.
pub fn two_plane(rho: f64) -> Result<UQInstance> {
    UQInstance::new(
        two_plane_nominal(),
        rho,
        TransportCost::new(NormKind::L2, 1),
        two_plane_loss(),
    )
}

/// The decision-dependent loss `H(θ) = {h : W h ≤ Gθ + g0}` with `θ ∈ [−3, 3]`.
pub fn outer_decision_loss() -> ParametricPolyhedralLoss {
    ParametricPolyhedralLoss::new(
        1,
        2,
        vec![
            vec![1.0, 1.0, -1.0],
            vec![-1.0, 0.0, 0.0],
            vec![1.5, -0.5, -0.5],
            vec![0.0, 0.0, 1.0],
        ],
        vec![vec![-1.0], vec![1.0], vec![-1.0], vec![1.0]],
        vec![1.0, 0.0, 0.5, 0.0],
        vec![(-3.0, 3.0)],
    )
    .expect("valid parametric loss")
}

/// `P̂ = ½δ₋₁ + ½δ₁`.
pub fn outer_decision_nominal() -> DiscreteDistribution {
    DiscreteDistribution::new(vec![vec![-1.0], vec![1.0]], vec![0.5, 0.5])
        .expect("valid distribution")
}

pub const OUTER_DECISION_RADIUS: f64 = 0.25;
