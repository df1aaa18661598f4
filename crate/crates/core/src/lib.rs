//! Differentially private and fair logistic regression.
//!
//! The logistic loss is replaced by its second-order Taylor expansion around
//! `w = 0`, which turns training into minimizing a quadratic polynomial whose
//! coefficients are sums over tuples. Privacy comes from perturbing those
//! coefficients (functional mechanism) with Laplace noise for ε-DP or with
//! Gaussian noise for (ε,δ)-DP. Fairness comes from folding the decision
//! boundary covariance `Σ (z_i − z̄) x_iᵀw` into the linear coefficients.
//!
//! Module map:
//!
//! - [`dataset`]: CSV ingestion, one-hot encoding, normalization, seeded splits.
//! - [`polynomial`]: coefficient representation of the clean and fair objectives.
//! - [`mechanisms`]: sensitivities, noise samplers, σ calibration, budget
//!   splitting over monomials and composition.
//! - [`optimizer`]: spectral-floor quadratic minimizer and exact-loss gradient descent.
//! - [`trainers`]: LR, FairLR, FM, RelaxedFM, PDFC and ADFC.
//! - [`evaluation`]: prediction, accuracy, risk difference and repeated-split sweeps.
//! - [`report`]: table/CSV rendering of sweep reports.

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod mechanisms;
pub mod optimizer;
pub mod polynomial;
pub mod report;
pub mod rng;
pub mod trainers;

pub use error::{Error, Result};
