//! Degree-2 polynomial form of the (fair) logistic objective.
//!
//! Expanding `f₁(s) = log(1 + eˢ)` around `s = 0` gives
//! `log 2 + s/2 + s²/8`, so each tuple contributes
//!
//! - degree 0: `log 2`
//! - degree 1: `(1/2 − y_i) · x_i`
//! - degree 2: `(1/8) · x_i[e] · x_i[l]` for every ordered pair `(e, l)`.
//!
//! The fair objective adds `α₁ · Σ (z_i − z̄) x_iᵀ w`, which is linear in `w`
//! and therefore folds into the degree-1 coefficients.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};

/// `c0 + c1ᵀw + Σ_{e,l} c2[e,l]·w_e·w_l`, with `c2` stored row-major over
/// ordered pairs. JSON layout: `{"d", "c0", "c1", "c2"}` with `c2` flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyObjective {
    pub d: usize,
    pub c0: f64,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
}

impl PolyObjective {
    pub fn new(c0: f64, c1: Vec<f64>, c2: Vec<f64>) -> Result<Self> {
        let d = c1.len();
        if c2.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: c2.len(),
            });
        }
        let p = Self { d, c0, c1, c2 };
        if !p.is_finite() {
            return Err(Error::NonFinite("polynomial coefficients".into()));
        }
        Ok(p)
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            c0: 0.0,
            c1: vec![0.0; d],
            c2: vec![0.0; d * d],
        }
    }

    pub fn quad(&self, e: usize, l: usize) -> f64 {
        self.c2[e * self.d + l]
    }

    pub fn is_finite(&self) -> bool {
        self.c0.is_finite() && self.c1.iter().chain(&self.c2).all(|v| v.is_finite())
    }

    /// Degree-1 then degree-2 (row-major) coefficients. This is the order
    /// in which noise is drawn and in which sensitivity differences are taken.
    pub fn perturbable(&self) -> impl Iterator<Item = f64> + '_ {
        self.c1.iter().chain(self.c2.iter()).copied()
    }

    pub fn perturbable_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.c1.iter_mut().chain(self.c2.iter_mut())
    }

    pub fn c2_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d, self.d, &self.c2)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        Self::new(p.c0, p.c1, p.c2)
    }
}

/// Decision-boundary covariance direction `c = Σ (z_i − z̄) x_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessVector {
    pub c: Vec<f64>,
    pub alpha1: f64,
    /// Constraint threshold; only τ = 0 is supported.
    pub tau: f64,
}

pub fn fairness_vector(ds: &EncodedDataset) -> FairnessVector {
    let centered = DVector::from_iterator(ds.n(), ds.z.iter().map(|&z| f64::from(z) - ds.z_bar));
    let c = ds.x.tr_mul(&centered);
    FairnessVector {
        c: c.iter().copied().collect(),
        alpha1: 1.0,
        tau: 0.0,
    }
}

/// Polynomial form of the plain logistic loss.
pub fn lr_poly(ds: &EncodedDataset) -> PolyObjective {
    let n = ds.n();
    let d = ds.d();
    let half_minus_y = DVector::from_iterator(n, ds.y.iter().map(|&y| 0.5 - f64::from(y)));
    let c1 = ds.x.tr_mul(&half_minus_y);
    let gram = ds.x.tr_mul(&ds.x);
    let mut c2 = vec![0.0; d * d];
    for e in 0..d {
        for l in e..d {
            let v = gram[(e, l)] / 8.0;
            c2[e * d + l] = v;
            c2[l * d + e] = v;
        }
    }
    PolyObjective {
        d,
        c0: n as f64 * std::f64::consts::LN_2,
        c1: c1.iter().copied().collect(),
        c2,
    }
}

/// Clean polynomial plus the signed fairness fold `α₁ · c` on the degree-1 part.
pub fn fair_poly(ds: &EncodedDataset, alpha1: f64) -> PolyObjective {
    let mut p = lr_poly(ds);
    let fv = fairness_vector(ds);
    for (a, c) in p.c1.iter_mut().zip(&fv.c) {
        *a += alpha1 * c;
    }
    p
}

fn check_dim(p: &PolyObjective, w: &[f64]) -> Result<()> {
    if w.len() != p.d {
        return Err(Error::DimensionMismatch {
            expected: p.d,
            got: w.len(),
        });
    }
    Ok(())
}

pub fn eval_poly(p: &PolyObjective, w: &[f64]) -> Result<f64> {
    check_dim(p, w)?;
    let d = p.d;
    let lin: f64 = p.c1.iter().zip(w).map(|(c, w)| c * w).sum();
    let mut quad = 0.0;
    for e in 0..d {
        let row = &p.c2[e * d..(e + 1) * d];
        let inner: f64 = row.iter().zip(w).map(|(c, w)| c * w).sum();
        quad += w[e] * inner;
    }
    Ok(p.c0 + lin + quad)
}

/// `c1 + (C2 + C2ᵀ) w`.
pub fn gradient_poly(p: &PolyObjective, w: &[f64]) -> Result<Vec<f64>> {
    check_dim(p, w)?;
    let d = p.d;
    let mut g = p.c1.clone();
    for e in 0..d {
        for l in 0..d {
            let c = p.c2[e * d + l];
            g[e] += c * w[l];
            g[l] += c * w[e];
        }
    }
    Ok(g)
}
