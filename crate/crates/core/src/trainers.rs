//! The four private trainers and two non-private baselines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};
use crate::mechanisms::{
    compose_split_delta, compose_split_epsilon, gaussian_sigma, l1_sensitivity_fair, l1_sensitivity_lr,
    l2_sensitivity_fair, l2_sensitivity_lr, partition_monomials, perturb, PrivacySpec, Sampler, SplitBudget,
};
use crate::optimizer::{canonicalize, minimize_logistic_exact, minimize_quadratic, Diagnostics, RegularizationPolicy};
use crate::polynomial::{fair_poly, lr_poly, PolyObjective};
use crate::rng::{derive_seed, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    LR,
    FairLR,
    FM,
    RelaxedFM,
    PDFC,
    ADFC,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::LR,
        Method::FairLR,
        Method::FM,
        Method::RelaxedFM,
        Method::PDFC,
        Method::ADFC,
    ];

    pub fn is_private(self) -> bool {
        !matches!(self, Method::LR | Method::FairLR)
    }

    pub fn needs_delta(self) -> bool {
        matches!(self, Method::RelaxedFM | Method::ADFC)
    }

    /// Uses an attribute-wise (ε_s, ε_n) split.
    pub fn is_split(self) -> bool {
        matches!(self, Method::PDFC | Method::ADFC)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::LR => "LR",
            Method::FairLR => "FairLR",
            Method::FM => "FM",
            Method::RelaxedFM => "RelaxedFM",
            Method::PDFC => "PDFC",
            Method::ADFC => "ADFC",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Ok(match key.as_str() {
            "lr" => Method::LR,
            "fairlr" | "noprivacy" => Method::FairLR,
            "fm" => Method::FM,
            "relaxedfm" | "rfm" => Method::RelaxedFM,
            "pdfc" => Method::PDFC,
            "adfc" => Method::ADFC,
            _ => {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.as_str()).collect();
                return Err(Error::invalid("method", format!("unknown method {s:?}; expected one of {}", names.join(", "))));
            }
        })
    }
}

/// Privacy accounting for a private model. `epsilon`/`delta` are the
/// composite guarantee; the raw parts are present for split methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub eps_s: Option<f64>,
    pub eps_n: Option<f64>,
    pub delta_s: Option<f64>,
    pub delta_n: Option<f64>,
    pub s_index: Option<usize>,
}

impl Budgets {
    fn single(p: PrivacySpec) -> Self {
        Self {
            epsilon: p.epsilon,
            delta: p.delta,
            eps_s: None,
            eps_n: None,
            delta_s: None,
            delta_n: None,
            s_index: None,
        }
    }

    fn split(b: &SplitBudget, d: usize) -> Result<Self> {
        let delta = match (b.delta_s, b.delta_n) {
            (Some(s), Some(n)) => Some(compose_split_delta(s, n)?),
            _ => None,
        };
        Ok(Self {
            epsilon: compose_split_epsilon(b.eps_s, b.eps_n, d)?,
            delta,
            eps_s: Some(b.eps_s),
            eps_n: Some(b.eps_n),
            delta_s: b.delta_s,
            delta_n: b.delta_n,
            s_index: Some(b.s_index),
        })
    }

    /// Recompute the composite from the raw parts and compare exactly.
    pub fn is_consistent(&self, d: usize) -> bool {
        let eps_ok = match (self.eps_s, self.eps_n) {
            (Some(s), Some(n)) => compose_split_epsilon(s, n, d).ok() == Some(self.epsilon),
            (None, None) => true,
            _ => false,
        };
        let delta_ok = match (self.delta_s, self.delta_n) {
            (Some(s), Some(n)) => compose_split_delta(s, n).ok() == self.delta,
            (None, None) => true,
            _ => false,
        };
        eps_ok && delta_ok
    }
}

/// Fitted weights plus everything needed to reproduce and audit them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub method: Method,
    pub w: Vec<f64>,
    pub feature_names: Vec<String>,
    pub budgets: Option<Budgets>,
    /// Sensitivity the noise was calibrated to (l1 for Laplace, l2 for Gaussian).
    pub sensitivity_used: Option<f64>,
    pub alpha1: f64,
    pub seed: Option<u64>,
    pub diagnostics: Diagnostics,
}

impl TrainedModel {
    pub fn d(&self) -> usize {
        self.w.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        if m.feature_names.len() != m.w.len() {
            return Err(Error::DimensionMismatch {
                expected: m.w.len(),
                got: m.feature_names.len(),
            });
        }
        Ok(m)
    }
}

/// How the designated attribute `x_s` is picked for split methods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SAttr {
    /// Uniform over encoded columns, drawn from the run seed.
    #[default]
    Random,
    Index(usize),
    /// Encoded column name, or a source attribute (its first column).
    Name(String),
}

impl FromStr for SAttr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("random") {
            Ok(SAttr::Random)
        } else if let Ok(i) = s.parse() {
            Ok(SAttr::Index(i))
        } else {
            Ok(SAttr::Name(s.to_string()))
        }
    }
}

/// Seed stream reserved for picking `x_s`, kept apart from the noise stream.
const S_PICK_STREAM: u64 = 0x5f5f;

pub fn choose_s_index(ds: &EncodedDataset, attr: &SAttr, seed: u64) -> Result<usize> {
    let d = ds.d();
    match attr {
        SAttr::Random => Ok(SeededRng::new(derive_seed(seed, S_PICK_STREAM)).below(d)),
        SAttr::Index(i) if *i < d => Ok(*i),
        SAttr::Index(i) => Err(Error::invalid("s_attr", format!("index {i} is out of range for d = {d}"))),
        SAttr::Name(name) => ds
            .resolve_feature(name)
            .ok_or_else(|| Error::invalid("s_attr", format!("no encoded feature or attribute named {name:?}"))),
    }
}

/// Solver settings shared by all trainers.
#[derive(Debug, Clone, Copy, Default)]
pub struct Trainer {
    pub policy: RegularizationPolicy,
    /// Replace every noise draw with zero while keeping all other
    /// bookkeeping. For testing the noise-free limit only.
    #[doc(hidden)]
    pub disable_noise: bool,
}

impl Trainer {
    pub fn new(policy: RegularizationPolicy) -> Self {
        Self {
            policy,
            disable_noise: false,
        }
    }

    fn sampler(&self, s: Result<Sampler>) -> Result<Sampler> {
        let s = s?;
        Ok(if self.disable_noise { Sampler::Zero } else { s })
    }

    fn solve(&self, p: &PolyObjective) -> Result<(Vec<f64>, Diagnostics)> {
        if !p.is_finite() {
            return Err(Error::NonFinite("perturbed polynomial".into()));
        }
        minimize_quadratic(&canonicalize(p), &self.policy)
    }

    fn perturb_and_solve(
        &self,
        poly: &PolyObjective,
        noise_s: Sampler,
        noise_n: Sampler,
        s_index: usize,
        seed: u64,
    ) -> Result<(Vec<f64>, Diagnostics)> {
        let partition = partition_monomials(poly.d, s_index)?;
        let noisy = perturb(poly, noise_s, noise_n, &partition, &mut SeededRng::new(seed))?;
        self.solve(&noisy)
    }

    pub fn fm(&self, ds: &EncodedDataset, epsilon: f64, seed: u64) -> Result<TrainedModel> {
        let spec = PrivacySpec::laplace(epsilon)?;
        let sens = l1_sensitivity_lr(ds.d())?;
        let noise = self.sampler(Sampler::laplace(sens / epsilon))?;
        let (w, diagnostics) = self.perturb_and_solve(&lr_poly(ds), noise, noise, 0, seed)?;
        Ok(model(ds, Method::FM, w, Some(Budgets::single(spec)), Some(sens), 0.0, Some(seed), diagnostics))
    }

    pub fn relaxed_fm(&self, ds: &EncodedDataset, epsilon: f64, delta: f64, seed: u64) -> Result<TrainedModel> {
        let spec = PrivacySpec::gaussian(epsilon, delta)?;
        let sens = l2_sensitivity_lr(ds.d())?;
        let noise = self.sampler(Sampler::gaussian(gaussian_sigma(epsilon, delta, sens)?))?;
        let (w, diagnostics) = self.perturb_and_solve(&lr_poly(ds), noise, noise, 0, seed)?;
        Ok(model(ds, Method::RelaxedFM, w, Some(Budgets::single(spec)), Some(sens), 0.0, Some(seed), diagnostics))
    }

    pub fn pdfc(&self, ds: &EncodedDataset, budget: &SplitBudget, alpha1: f64, seed: u64) -> Result<TrainedModel> {
        check_alpha(alpha1)?;
        let d = ds.d();
        let budget = SplitBudget::laplace(budget.s_index, budget.eps_s, budget.eps_n)?;
        budget.check_index(d)?;
        let sens = l1_sensitivity_fair(d)?;
        let noise_s = self.sampler(Sampler::laplace(sens / budget.eps_s))?;
        let noise_n = self.sampler(Sampler::laplace(sens / budget.eps_n))?;
        let (w, diagnostics) = self.perturb_and_solve(&fair_poly(ds, alpha1), noise_s, noise_n, budget.s_index, seed)?;
        let budgets = Budgets::split(&budget, d)?;
        Ok(model(ds, Method::PDFC, w, Some(budgets), Some(sens), alpha1, Some(seed), diagnostics))
    }

    pub fn adfc(&self, ds: &EncodedDataset, budget: &SplitBudget, alpha1: f64, seed: u64) -> Result<TrainedModel> {
        check_alpha(alpha1)?;
        let d = ds.d();
        let (delta_s, delta_n) = match (budget.delta_s, budget.delta_n) {
            (Some(s), Some(n)) => (s, n),
            _ => return Err(Error::invalid("delta", "ADFC needs both delta_s and delta_n")),
        };
        let budget = SplitBudget::gaussian(budget.s_index, budget.eps_s, budget.eps_n, delta_s, delta_n)?;
        budget.check_index(d)?;
        let sens = l2_sensitivity_fair(d)?;
        let noise_s = self.sampler(Sampler::gaussian(gaussian_sigma(budget.eps_s, delta_s, sens)?))?;
        let noise_n = self.sampler(Sampler::gaussian(gaussian_sigma(budget.eps_n, delta_n, sens)?))?;
        let (w, diagnostics) = self.perturb_and_solve(&fair_poly(ds, alpha1), noise_s, noise_n, budget.s_index, seed)?;
        let budgets = Budgets::split(&budget, d)?;
        Ok(model(ds, Method::ADFC, w, Some(budgets), Some(sens), alpha1, Some(seed), diagnostics))
    }

    /// Exact logistic loss by gradient descent.
    pub fn lr(&self, ds: &EncodedDataset) -> Result<TrainedModel> {
        let (w, diagnostics) = minimize_logistic_exact(ds, 0.0, &self.policy)?;
        Ok(model(ds, Method::LR, w, None, None, 0.0, None, diagnostics))
    }

    /// Noise-free minimizer of the fair polynomial objective.
    pub fn fair_lr(&self, ds: &EncodedDataset, alpha1: f64) -> Result<TrainedModel> {
        check_alpha(alpha1)?;
        let (w, diagnostics) = self.solve(&fair_poly(ds, alpha1))?;
        Ok(model(ds, Method::FairLR, w, None, None, alpha1, None, diagnostics))
    }
}

fn check_alpha(alpha1: f64) -> Result<()> {
    if !alpha1.is_finite() {
        return Err(Error::invalid("alpha1", format!("{alpha1} must be finite")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn model(
    ds: &EncodedDataset,
    method: Method,
    w: Vec<f64>,
    budgets: Option<Budgets>,
    sensitivity_used: Option<f64>,
    alpha1: f64,
    seed: Option<u64>,
    diagnostics: Diagnostics,
) -> TrainedModel {
    TrainedModel {
        method,
        w,
        feature_names: ds.feature_names.clone(),
        budgets,
        sensitivity_used,
        alpha1,
        seed,
        diagnostics,
    }
}

pub fn train_fm(ds: &EncodedDataset, epsilon: f64, seed: u64) -> Result<TrainedModel> {
    Trainer::default().fm(ds, epsilon, seed)
}

pub fn train_relaxed_fm(ds: &EncodedDataset, epsilon: f64, delta: f64, seed: u64) -> Result<TrainedModel> {
    Trainer::default().relaxed_fm(ds, epsilon, delta, seed)
}

pub fn train_pdfc(
    ds: &EncodedDataset,
    eps_s: f64,
    eps_n: f64,
    s_index: usize,
    alpha1: f64,
    seed: u64,
) -> Result<TrainedModel> {
    Trainer::default().pdfc(ds, &SplitBudget::laplace(s_index, eps_s, eps_n)?, alpha1, seed)
}

#[allow(clippy::too_many_arguments)]
pub fn train_adfc(
    ds: &EncodedDataset,
    eps_s: f64,
    eps_n: f64,
    delta_s: f64,
    delta_n: f64,
    s_index: usize,
    alpha1: f64,
    seed: u64,
) -> Result<TrainedModel> {
    let budget = SplitBudget::gaussian(s_index, eps_s, eps_n, delta_s, delta_n)?;
    Trainer::default().adfc(ds, &budget, alpha1, seed)
}

pub fn train_lr(ds: &EncodedDataset, policy: &RegularizationPolicy) -> Result<TrainedModel> {
    Trainer::new(*policy).lr(ds)
}

pub fn train_fair_lr(ds: &EncodedDataset, alpha1: f64, policy: &RegularizationPolicy) -> Result<TrainedModel> {
    Trainer::new(*policy).fair_lr(ds, alpha1)
}
