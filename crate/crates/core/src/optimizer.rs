//! Minimizers for the perturbed quadratic and for the exact logistic loss.
//!
//! Coefficient noise can make the quadratic part indefinite, in which case
//! the objective has no minimizer. [`minimize_quadratic`] raises every
//! eigenvalue of the symmetrized quadratic part to at least
//! `eigen_floor` before solving, and reports how many it had to raise.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};
use crate::polynomial::{fairness_vector, PolyObjective};

/// `c + bᵀw + wᵀAw` with `A` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl QuadraticForm {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        let w = DVector::from_column_slice(w);
        self.c + self.b.dot(&w) + w.dot(&(&self.a * &w))
    }
}

/// `A = (C2 + C2ᵀ)/2`, `b = c1`, `c = c0`.
pub fn canonicalize(p: &PolyObjective) -> QuadraticForm {
    let c2 = p.c2_matrix();
    let mut a = (&c2 + c2.transpose()) * 0.5;
    // Bitwise symmetry: (x + y)/2 and (y + x)/2 agree, but be explicit.
    for e in 0..p.d {
        for l in 0..e {
            a[(e, l)] = a[(l, e)];
        }
    }
    QuadraticForm {
        a,
        b: DVector::from_column_slice(&p.c1),
        c: p.c0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationPolicy {
    pub eigen_floor: f64,
    pub max_gd_iters: usize,
    pub gd_step: f64,
    pub gd_tol: f64,
}

impl Default for RegularizationPolicy {
    fn default() -> Self {
        Self {
            eigen_floor: 1e-3,
            max_gd_iters: 5000,
            gd_step: 0.1,
            gd_tol: 1e-8,
        }
    }
}

impl RegularizationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.eigen_floor > 0.0 && self.eigen_floor.is_finite()) {
            return Err(Error::invalid("eigen_floor", format!("{} must be positive", self.eigen_floor)));
        }
        if !(self.gd_step > 0.0 && self.gd_step.is_finite()) {
            return Err(Error::invalid("gd_step", format!("{} must be positive", self.gd_step)));
        }
        if self.gd_tol.is_nan() || self.gd_tol < 0.0 {
            return Err(Error::invalid("gd_tol", format!("{} must be nonnegative", self.gd_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Spectral,
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub solver: Solver,
    /// Eigenvalues raised to the floor (spectral solver only).
    pub clamped_eigenvalues: usize,
    pub min_eigenvalue: Option<f64>,
    /// ∞-norm of the stationarity residual at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

const MAX_REFINEMENTS: usize = 4;

/// Minimize `q` after flooring the spectrum of `A` at `policy.eigen_floor`.
///
/// Solves `2·A_reg·w = −b` through the eigendecomposition, followed by up to
/// four rounds of iterative refinement while the residual keeps shrinking.
pub fn minimize_quadratic(q: &QuadraticForm, policy: &RegularizationPolicy) -> Result<(Vec<f64>, Diagnostics)> {
    policy.validate()?;
    let d = q.dim();
    if q.a.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: q.a.nrows(),
        });
    }
    if q.a.iter().chain(q.b.iter()).any(|v| !v.is_finite()) || !q.c.is_finite() {
        return Err(Error::NonFinite("quadratic form".into()));
    }

    let eig = SymmetricEigen::new(q.a.clone());
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let mut clamped = 0;
    let floored = eig.eigenvalues.map(|l| {
        if l < policy.eigen_floor {
            clamped += 1;
            policy.eigen_floor
        } else {
            l
        }
    });
    let v = &eig.eigenvectors;
    let solve = |rhs: &DVector<f64>| -> DVector<f64> {
        let mut t = v.tr_mul(rhs);
        t.iter_mut().zip(floored.iter()).for_each(|(t, l)| *t /= 2.0 * l);
        v * t
    };
    // A_reg = A + Σ_clamped (τ − λ_k) v_k v_kᵀ keeps the unclamped part exact.
    let mut a_reg = q.a.clone();
    for (k, (&l, &f)) in eig.eigenvalues.iter().zip(floored.iter()).enumerate() {
        if f != l {
            let vk = v.column(k);
            a_reg.ger(f - l, &vk, &vk, 1.0);
        }
    }
    let residual_of = |w: &DVector<f64>| &a_reg * w * 2.0 + &q.b;

    let mut w = solve(&(-&q.b));
    let mut r = residual_of(&w);
    let mut residual = r.amax();
    for _ in 0..MAX_REFINEMENTS {
        let next = &w - solve(&r);
        let r_next = residual_of(&next);
        if r_next.amax().partial_cmp(&residual) != Some(std::cmp::Ordering::Less) {
            break;
        }
        w = next;
        r = r_next;
        residual = r.amax();
    }

    let tol = 1e-8 * (1.0 + q.b.amax());
    Ok((
        w.iter().copied().collect(),
        Diagnostics {
            solver: Solver::Spectral,
            clamped_eigenvalues: clamped,
            min_eigenvalue: Some(min_eigenvalue),
            residual,
            iterations: 0,
            converged: residual <= tol,
        },
    ))
}

/// Exact objective `Σ [ln(1 + e^{x_iᵀw}) − y_i x_iᵀw] + α₁ cᵀw` and its gradient.
pub struct ExactLogistic {
    /// `Xᵀ`, so each row of `X` is a contiguous column.
    xt: DMatrix<f64>,
    y: Vec<f64>,
    fair: DVector<f64>,
}

impl ExactLogistic {
    pub fn new(ds: &EncodedDataset, alpha1: f64) -> Self {
        let fair = if alpha1 == 0.0 {
            DVector::zeros(ds.d())
        } else {
            DVector::from_vec(fairness_vector(ds).c) * alpha1
        };
        Self {
            xt: ds.x.transpose(),
            y: ds.y.iter().map(|&v| f64::from(v)).collect(),
            fair,
        }
    }

    /// Value and gradient in one pass over the data.
    pub fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let mut g = self.fair.as_slice().to_vec();
        let mut value: f64 = self.fair.iter().zip(w).map(|(c, w)| c * w).sum();
        for (i, &y) in self.y.iter().enumerate() {
            let x = self.xt.column(i);
            let x = x.as_slice();
            let s = dot(x, w);
            // One exp serves both the loss and the logistic.
            let e = (-s.abs()).exp();
            value += s.max(0.0) + e.ln_1p() - y * s;
            let p = if s >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
            let r = p - y;
            g.iter_mut().zip(x).for_each(|(g, x)| *g += r * x);
        }
        (value, g)
    }

    pub fn value(&self, w: &[f64]) -> f64 {
        self.value_and_gradient(w).0
    }

    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        self.value_and_gradient(w).1
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gradient descent on the exact (unapproximated) fair logistic objective,
/// starting from `w = 0`. The step is halved whenever a trial step fails to
/// decrease the objective; every trial counts as an iteration.
pub fn minimize_logistic_exact(
    ds: &EncodedDataset,
    alpha1: f64,
    policy: &RegularizationPolicy,
) -> Result<(Vec<f64>, Diagnostics)> {
    policy.validate()?;
    let obj = ExactLogistic::new(ds, alpha1);
    let mut w = vec![0.0; ds.d()];
    let (mut f, mut g) = obj.value_and_gradient(&w);
    let mut step = policy.gd_step;
    let mut iterations = 0;
    let mut converged = max_abs(&g) <= policy.gd_tol;

    while !converged && iterations < policy.max_gd_iters {
        iterations += 1;
        let trial: Vec<f64> = w.iter().zip(&g).map(|(w, g)| w - step * g).collect();
        let (f_trial, g_trial) = obj.value_and_gradient(&trial);
        if !f_trial.is_finite() {
            return Err(Error::Diverged { iteration: iterations });
        }
        if f_trial < f {
            w = trial;
            f = f_trial;
            g = g_trial;
            converged = max_abs(&g) <= policy.gd_tol;
        } else {
            step *= 0.5;
            if step == 0.0 {
                break;
            }
        }
    }

    Ok((
        w,
        Diagnostics {
            solver: Solver::GradientDescent,
            clamped_eigenvalues: 0,
            min_eigenvalue: None,
            residual: max_abs(&g),
            iterations,
            converged,
        },
    ))
}
