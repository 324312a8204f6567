use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::losses::{sym_lift, QuadraticExampleLoss};

/// One member of the witness sequence for the cubic loss `x₁x₂²` around `δ₀`:
/// `(1 − ρ/n²) δ₀^{⊗M} + (ρ/n²) δ_n^{⊗M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessPoint {
    pub n: u64,
    /// Expected symmetrized loss under the witness.
    pub objective: BigRational,
    /// Expected squared-distance transport cost to `δ₀^{⊗M}`.
    pub transport_cost: BigRational,
}

/// Evaluates the `n`-th witness exactly. The transport cost is always `Mρ`
/// (so the witness lies in the lifted ball) while the objective is `ρn`.
pub fn divergence_witness(rho: &BigRational, n: u64, m: usize) -> Result<WitnessPoint> {
    if m < 2 {
        return Err(Error::OutOfDomain {
            case: "cubic_mixed".into(),
            reason: format!("lifting parameter must be at least 2, got {m}"),
        });
    }
    let nn = BigRational::from_integer(BigInt::from(n));
    let tail = rho / (&nn * &nn);
    if n == 0 || !(rho > &BigRational::zero()) || tail > BigRational::one() {
        return Err(Error::OutOfDomain {
            case: "cubic_mixed".into(),
            reason: "need ρ > 0 and n² ≥ ρ".into(),
        });
    }
    let head = BigRational::one() - &tail;
    let origin = vec![BigRational::zero(); m];
    let far = vec![nn.clone(); m];
    let f = |x: &[BigRational]| QuadraticExampleLoss::CubicMixed.eval(x);
    let cap = m * m;
    let objective =
        &head * sym_lift(1, 2, m, &origin, cap, f)? + &tail * sym_lift(1, 2, m, &far, cap, f)?;
    let far_cost: BigRational = far.iter().map(|x| x * x).sum();
    let transport_cost = &tail * far_cost;
    Ok(WitnessPoint {
        n,
        objective,
        transport_cost,
    })
}
