use std::fmt;
use std::str::FromStr;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The closed-form two-argument quadratic and cubic example losses.
/// Evaluation only; these never enter program assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadraticExampleLoss {
    /// `½(x₁ − x₂)²`
    Variance,
    /// `−x₁x₂`
    NegativeProduct,
    /// `−2x₁² − 2x₁x₂`
    Symmetrization,
    /// `x₁x₂²`
    CubicMixed,
}

impl QuadraticExampleLoss {
    pub const ALL: [QuadraticExampleLoss; 4] = [
        QuadraticExampleLoss::Variance,
        QuadraticExampleLoss::NegativeProduct,
        QuadraticExampleLoss::Symmetrization,
        QuadraticExampleLoss::CubicMixed,
    ];

    pub fn arity(self) -> usize {
        2
    }

    pub fn name(self) -> &'static str {
        match self {
            QuadraticExampleLoss::Variance => "variance",
            QuadraticExampleLoss::NegativeProduct => "negative_product",
            QuadraticExampleLoss::Symmetrization => "symmetrization",
            QuadraticExampleLoss::CubicMixed => "cubic_mixed",
        }
    }

    /// Evaluates the polynomial at `x = (x₁, x₂)` in any numeric ring.
    pub fn eval<X: Num + Clone + FromPrimitive>(self, x: &[X]) -> X {
        let (x1, x2) = (x[0].clone(), x[1].clone());
        let two = X::from_u8(2).expect("2 is representable");
        match self {
            QuadraticExampleLoss::Variance => {
                let d = x1 - x2;
                d.clone() * d / two
            }
            QuadraticExampleLoss::NegativeProduct => X::zero() - x1 * x2,
            QuadraticExampleLoss::Symmetrization => {
                X::zero() - two.clone() * x1.clone() * x1.clone() - two * x1 * x2
            }
            QuadraticExampleLoss::CubicMixed => x1 * x2.clone() * x2,
        }
    }
}

impl fmt::Display for QuadraticExampleLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuadraticExampleLoss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown example loss '{s}'")))
    }
}
