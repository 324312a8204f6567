use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDistribution, NormKind, TransportCost};
use crate::error::{Error, Result};
use crate::losses::{LossSpec, ParametricPolyhedralLoss, PolyhedralLoss};
use crate::scalar::Real;

/// Uncertainty-quantification instance: worst-case `E_{P^{⊗N}} ℓ` over the
/// Wasserstein ball of radius `ρ` around the nominal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct UQInstance<T = f64> {
    pub nominal: DiscreteDistribution<T>,
    pub radius: T,
    pub cost: TransportCost,
    pub loss: PolyhedralLoss<T>,
}

impl<T: Real> UQInstance<T> {
    pub fn new(
        nominal: DiscreteDistribution<T>,
        radius: T,
        cost: TransportCost,
        loss: PolyhedralLoss<T>,
    ) -> Result<Self> {
        let inst = UQInstance {
            nominal,
            radius,
            cost,
            loss,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn arity(&self) -> usize {
        self.loss.arity()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius >= T::zero()) || !self.radius.is_finite() {
            return Err(Error::InvalidInput(
                "radius must be finite and nonnegative".into(),
            ));
        }
        if self.loss.block_dim() != self.nominal.dim() {
            return Err(Error::dim(self.nominal.dim(), self.loss.block_dim()));
        }
        if self.cost.dim != self.nominal.dim() {
            return Err(Error::dim(self.nominal.dim(), self.cost.dim));
        }
        if self.cost.squared {
            return Err(Error::InvalidInput(
                "program builders need a norm cost, not a squared one".into(),
            ));
        }
        Ok(())
    }

    pub fn with_radius(&self, radius: T) -> Result<Self> {
        Self::new(self.nominal.clone(), radius, self.cost, self.loss.clone())
    }

    /// `E_{P̂^{⊗N}} ℓ` by enumerating the product atoms.
    pub fn nominal_expectation(&self, cap: usize) -> Result<T> {
        let prod = crate::distributions::product_power(&self.nominal, self.arity(), cap)?;
        let mut acc = T::zero();
        for (x, w) in prod.iter() {
            acc += w * self.loss.eval(x)?;
        }
        Ok(acc)
    }
}

/// Decision box for the outer problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ThetaSpec<T = f64> {
    #[serde(rename = "box")]
    pub bounds: Vec<[T; 2]>,
}

/// On-disk instance:
/// `{"nominal":…, "radius":ρ, "norm":"l1"|"l2"|"linf", "N":…, "loss":…, "theta":{"box":…}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct InstanceFile<T = f64> {
    pub nominal: DiscreteDistribution<T>,
    pub radius: T,
    pub norm: NormKind,
    #[serde(rename = "N")]
    pub arity: usize,
    pub loss: LossSpec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSpec<T>>,
}

impl<T: Real> InstanceFile<T> {
    pub fn is_parametric(&self) -> bool {
        self.loss.is_parametric()
    }

    pub fn cost(&self) -> TransportCost {
        TransportCost::new(self.norm, self.nominal.dim())
    }

    pub fn to_instance(&self) -> Result<UQInstance<T>> {
        let loss = self.loss.to_loss(self.nominal.dim(), self.arity)?;
        UQInstance::new(self.nominal.clone(), self.radius, self.cost(), loss)
    }

    /// The parametric loss, with the `theta` box overriding the one in the loss.
    pub fn to_parametric(&self) -> Result<ParametricPolyhedralLoss<T>> {
        if !(self.radius >= T::zero()) {
            return Err(Error::InvalidInput("radius must be nonnegative".into()));
        }
        let mut spec = self.loss.clone();
        if let (Some(theta), LossSpec::Halfspaces { theta_box, .. }) = (&self.theta, &mut spec) {
            *theta_box = Some(theta.bounds.clone());
        }
        spec.to_parametric(self.nominal.dim(), self.arity)
    }
}
