use crate::error::{Error, Result};

use super::check_epsilon;

/// Composite ε of an attribute-wise split: `ε_s/d + ε_n·(d−1)/d`.
///
/// Evaluated as `ε_n + (ε_s − ε_n)/d`, which returns ε bit-exactly when
/// both parts equal ε.
pub fn compose_split_epsilon(eps_s: f64, eps_n: f64, d: usize) -> Result<f64> {
    check_epsilon("eps_s", eps_s)?;
    check_epsilon("eps_n", eps_n)?;
    if d < 1 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    Ok(eps_n + (eps_s - eps_n) / d as f64)
}

/// Composite δ: `1 − (1 − δ_s)(1 − δ_n)`. Zero parts are allowed as the
/// pure-DP limit.
pub fn compose_split_delta(delta_s: f64, delta_n: f64) -> Result<f64> {
    for (name, v) in [("delta_s", delta_s), ("delta_n", delta_n)] {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::invalid(name, format!("{v} must lie in [0, 1)")));
        }
    }
    Ok(delta_s + delta_n - delta_s * delta_n)
}

/// Inverse of [`compose_split_delta`] for equal parts: `1 − √(1 − δ)`.
pub fn split_delta_evenly(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", format!("{delta} must lie in (0, 1)")));
    }
    Ok(-(0.5 * (-delta).ln_1p()).exp_m1())
}

/// ε_n (and ε_s = ratio·ε_n) such that the composite equals `target`.
pub fn split_epsilon_for_target(target: f64, ratio: f64, d: usize) -> Result<(f64, f64)> {
    check_epsilon("epsilon", target)?;
    check_epsilon("split ratio", ratio)?;
    if d < 1 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    if ratio == 1.0 {
        return Ok((target, target));
    }
    let d = d as f64;
    let eps_n = target / (ratio / d + (d - 1.0) / d);
    Ok((ratio * eps_n, eps_n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn epsilon_examples() {
        assert_eq!(compose_split_epsilon(0.7, 0.7, 13).unwrap(), 0.7);
        assert_abs_diff_eq!(compose_split_epsilon(0.5, 1.0, 4).unwrap(), 0.875, epsilon = 1e-15);
        assert!(compose_split_epsilon(0.0, 1.0, 4).is_err());
        assert!(compose_split_epsilon(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn delta_examples() {
        assert_eq!(compose_split_delta(0.0, 0.0).unwrap(), 0.0);
        let d = compose_split_delta(1e-3, 1e-3).unwrap();
        // 2δ − δ² = 2e-3 − 1e-6
        assert_abs_diff_eq!(d, 1.999e-3, epsilon = 1e-15);
        assert!(compose_split_delta(1.0, 0.1).is_err());
        assert!(compose_split_delta(-0.1, 0.1).is_err());
    }

    #[test]
    fn even_split_inverts_composition() {
        for delta in [1e-3, 1e-5, 1e-7, 0.3] {
            let part = split_delta_evenly(delta).unwrap();
            assert_abs_diff_eq!(compose_split_delta(part, part).unwrap(), delta, epsilon = 1e-17);
        }
    }

    #[test]
    fn target_split_recomposes() {
        let (s, n) = split_epsilon_for_target(1.0, 0.5, 10).unwrap();
        assert_abs_diff_eq!(s, 0.5 * n, epsilon = 1e-15);
        assert_abs_diff_eq!(compose_split_epsilon(s, n, 10).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(split_epsilon_for_target(0.3, 1.0, 7).unwrap(), (0.3, 0.3));
    }
}
