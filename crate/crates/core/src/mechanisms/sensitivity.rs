//! Closed-form sensitivity bounds over the degree-1 and ordered degree-2
//! coefficients, for rows with nonnegative entries and `‖x‖₂ ≤ 1`.
//!
//! These never look at the data; a data-dependent value would break the
//! privacy argument.

use crate::error::{Error, Result};

fn check_d(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    Ok(d as f64)
}

/// Δ₁ of the logistic polynomial: `d²/4 + d`.
pub fn l1_sensitivity_lr(d: usize) -> Result<f64> {
    let d = check_d(d)?;
    Ok(d * d / 4.0 + d)
}

/// Δ₁ of the fairness-penalized polynomial: `d²/4 + 3d`.
pub fn l1_sensitivity_fair(d: usize) -> Result<f64> {
    let d = check_d(d)?;
    Ok(d * d / 4.0 + 3.0 * d)
}

/// Δ₂ of the logistic polynomial: `√(d²/16 + d)`.
pub fn l2_sensitivity_lr(d: usize) -> Result<f64> {
    let d = check_d(d)?;
    Ok((d * d / 16.0 + d).sqrt())
}

/// Δ₂′ of the fairness-penalized polynomial: `√(d²/16 + 9d)`.
pub fn l2_sensitivity_fair(d: usize) -> Result<f64> {
    let d = check_d(d)?;
    Ok((d * d / 16.0 + 9.0 * d).sqrt())
}
