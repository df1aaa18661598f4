//! Privacy machinery: closed-form sensitivities, noise, monomial partitioning,
//! coefficient perturbation and budget composition.

pub mod compose;
pub mod noise;
pub mod partition;
pub mod perturb;
pub mod sensitivity;

pub use compose::{compose_split_delta, compose_split_epsilon, split_delta_evenly, split_epsilon_for_target};
pub use noise::{gaussian_sample, gaussian_sigma, laplace_sample, NoiseKind, Sampler};
pub use partition::{partition_monomials, Monomial, MonomialPartition};
pub use perturb::perturb;
pub use sensitivity::{l1_sensitivity_fair, l1_sensitivity_lr, l2_sensitivity_fair, l2_sensitivity_lr};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MechanismKind {
    PureLaplace,
    ApproxGaussian,
}

/// ε or (ε, δ) for a single-budget mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacySpec {
    pub kind: MechanismKind,
    pub epsilon: f64,
    pub delta: Option<f64>,
}

impl PrivacySpec {
    pub fn laplace(epsilon: f64) -> Result<Self> {
        check_epsilon("epsilon", epsilon)?;
        Ok(Self {
            kind: MechanismKind::PureLaplace,
            epsilon,
            delta: None,
        })
    }

    pub fn gaussian(epsilon: f64, delta: f64) -> Result<Self> {
        check_epsilon("epsilon", epsilon)?;
        check_delta("delta", delta)?;
        Ok(Self {
            kind: MechanismKind::ApproxGaussian,
            epsilon,
            delta: Some(delta),
        })
    }
}

/// Attribute-wise budget: `(ε_s, δ_s)` on monomials containing `w_s`,
/// `(ε_n, δ_n)` on the rest. Deltas are absent for the Laplace variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitBudget {
    pub s_index: usize,
    pub eps_s: f64,
    pub eps_n: f64,
    pub delta_s: Option<f64>,
    pub delta_n: Option<f64>,
}

impl SplitBudget {
    pub fn laplace(s_index: usize, eps_s: f64, eps_n: f64) -> Result<Self> {
        check_epsilon("eps_s", eps_s)?;
        check_epsilon("eps_n", eps_n)?;
        Ok(Self {
            s_index,
            eps_s,
            eps_n,
            delta_s: None,
            delta_n: None,
        })
    }

    pub fn gaussian(s_index: usize, eps_s: f64, eps_n: f64, delta_s: f64, delta_n: f64) -> Result<Self> {
        check_epsilon("eps_s", eps_s)?;
        check_epsilon("eps_n", eps_n)?;
        check_delta("delta_s", delta_s)?;
        check_delta("delta_n", delta_n)?;
        Ok(Self {
            s_index,
            eps_s,
            eps_n,
            delta_s: Some(delta_s),
            delta_n: Some(delta_n),
        })
    }

    pub fn check_index(&self, d: usize) -> Result<()> {
        if self.s_index >= d {
            return Err(Error::invalid("s_index", format!("{} is out of range for d = {d}", self.s_index)));
        }
        Ok(())
    }
}

pub(crate) fn check_epsilon(name: &'static str, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(name, format!("{eps} must be a finite positive number")));
    }
    Ok(())
}

pub(crate) fn check_delta(name: &'static str, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(name, format!("{delta} must lie in (0, 1)")));
    }
    Ok(())
}
