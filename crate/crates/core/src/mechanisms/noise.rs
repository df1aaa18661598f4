//! Noise samplers and Gaussian σ calibration.
//!
//! Both samplers are fixed transforms of [`SeededRng::uniform_open`]:
//! Laplace by inverse CDF (one uniform per draw), Gaussian by the cosine
//! branch of Box–Muller (two uniforms per draw).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

use super::{check_delta, check_epsilon};

/// One draw from `Lap(0, b)`.
pub fn laplace_sample(rng: &mut SeededRng, scale: f64) -> Result<f64> {
    check_scale("laplace scale", scale)?;
    Ok(laplace_unchecked(rng, scale))
}

/// One draw from `N(0, σ²)`.
pub fn gaussian_sample(rng: &mut SeededRng, sigma: f64) -> Result<f64> {
    check_scale("gaussian sigma", sigma)?;
    Ok(gaussian_unchecked(rng, sigma))
}

fn check_scale(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid(name, format!("{v} must be a finite positive number")));
    }
    Ok(())
}

fn laplace_unchecked(rng: &mut SeededRng, b: f64) -> f64 {
    let u = rng.uniform_open() - 0.5;
    // u is never exactly 0 or ±0.5, so the log argument lies in (0, 1).
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

fn gaussian_unchecked(rng: &mut SeededRng, sigma: f64) -> f64 {
    let u1 = rng.uniform_open();
    let u2 = rng.uniform_open();
    sigma * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Smallest σ the extended Gaussian mechanism admits for (ε, δ) at
/// l₂-sensitivity Δ₂:
///
/// `σ = (√2·Δ₂ / 2ε) · (√L + √(L + ε))`, `L = ln(√(2/π) / δ)`.
pub fn gaussian_sigma(epsilon: f64, delta: f64, l2_sensitivity: f64) -> Result<f64> {
    check_epsilon("epsilon", epsilon)?;
    check_delta("delta", delta)?;
    check_scale("l2 sensitivity", l2_sensitivity)?;
    let l = gaussian_log_term(delta);
    Ok(std::f64::consts::SQRT_2 * l2_sensitivity / (2.0 * epsilon) * (l.sqrt() + (l + epsilon).sqrt()))
}

/// `ln(√(2/π) / δ)`; positive for every δ in (0, 1).
pub fn gaussian_log_term(delta: f64) -> f64 {
    (std::f64::consts::FRAC_2_PI.sqrt() / delta).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseKind {
    Laplace,
    Gaussian,
}

/// A validated noise source. `Zero` adds nothing and consumes no randomness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sampler {
    Zero,
    Laplace { scale: f64 },
    Gaussian { sigma: f64 },
}

impl Sampler {
    pub fn laplace(scale: f64) -> Result<Self> {
        check_scale("laplace scale", scale)?;
        Ok(Sampler::Laplace { scale })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        check_scale("gaussian sigma", sigma)?;
        Ok(Sampler::Gaussian { sigma })
    }

    pub fn draw(&self, rng: &mut SeededRng) -> f64 {
        match *self {
            Sampler::Zero => 0.0,
            Sampler::Laplace { scale } => laplace_unchecked(rng, scale),
            Sampler::Gaussian { sigma } => gaussian_unchecked(rng, sigma),
        }
    }

    /// Standard deviation of one draw.
    pub fn std_dev(&self) -> f64 {
        match *self {
            Sampler::Zero => 0.0,
            Sampler::Laplace { scale } => scale * std::f64::consts::SQRT_2,
            Sampler::Gaussian { sigma } => sigma,
        }
    }
}
