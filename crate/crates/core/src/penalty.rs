//! Sparse penalties `J_n(h) = Σ_j π_{λ,τ}(|θ_j|)` and the hard sparsity
//! projection used by the sparsity-constrained estimator.
//!
//! Any penalty with `π(0) = 0`, `π` non-decreasing and `π(x) = λ` for `x > τ`
//! fits the estimators; the clipped L1 penalty `λ (x/τ ∧ 1)` is provided.

use serde::{Deserialize, Serialize};

use crate::{MeeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[non_exhaustive]
pub enum PenaltyKind {
    #[default]
    ClippedL1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub lambda: f64,
    pub tau: f64,
    #[serde(default)]
    pub kind: PenaltyKind,
}

impl PenaltySpec {
    pub fn clipped_l1(lambda: f64, tau: f64) -> Result<Self> {
        let spec = PenaltySpec {
            lambda,
            tau,
            kind: PenaltyKind::ClippedL1,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Clipped L1 with `λ = (log n)^{ν_3} / n` and knee `τ`.
    pub fn tuned(n: usize, nu3: f64, tau: f64) -> Result<Self> {
        Self::clipped_l1(crate::capacity::penalty_height(n, nu3, 1.0), tau)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(MeeError::usage(format!(
                "penalty height must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(MeeError::usage(format!("penalty knee must be > 0, got {}", self.tau)));
        }
        Ok(())
    }

    /// `π_{λ,τ}(x)` for `x ≥ 0`.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(MeeError::usage(format!("penalty argument must be >= 0, got {x}")));
        }
        Ok(self.value_unchecked(x))
    }

    #[inline]
    fn value_unchecked(&self, x: f64) -> f64 {
        match self.kind {
            PenaltyKind::ClippedL1 => {
                if x > self.tau {
                    self.lambda
                } else {
                    self.lambda * (x / self.tau)
                }
            }
        }
    }

    /// `J_n(θ) = Σ π(|θ_j|)`.
    pub fn total(&self, theta: &[f64]) -> f64 {
        theta.iter().map(|t| self.value_unchecked(t.abs())).sum()
    }

    /// Coordinate-wise subgradient of `J_n`, choosing 0 at `θ_j = 0` and on
    /// the flat part.
    pub fn subgradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; theta.len()];
        self.add_subgradient(theta, 1.0, &mut out);
        out
    }

    pub(crate) fn add_subgradient(&self, theta: &[f64], scale: f64, grad: &mut [f64]) {
        match self.kind {
            PenaltyKind::ClippedL1 => {
                let slope = scale * self.lambda / self.tau;
                for (g, &t) in grad.iter_mut().zip(theta) {
                    if t != 0.0 && t.abs() <= self.tau {
                        *g += slope * t.signum();
                    }
                }
            }
        }
    }
}

pub fn penalty_value(spec: &PenaltySpec, x: f64) -> Result<f64> {
    spec.value(x)
}

pub fn penalty_total(spec: &PenaltySpec, theta: &[f64]) -> f64 {
    spec.total(theta)
}

pub fn penalty_subgradient(spec: &PenaltySpec, theta: &[f64]) -> Vec<f64> {
    spec.subgradient(theta)
}

/// Keeps the `budget` largest-magnitude coordinates and zeroes the rest.
/// Ties are broken in favour of the lower index.
pub fn prune_to_sparsity(theta: &[f64], budget: usize) -> Vec<f64> {
    let mut out = theta.to_vec();
    prune_in_place(&mut out, budget);
    out
}

pub(crate) fn prune_in_place(theta: &mut [f64], budget: usize) {
    if budget >= theta.len() {
        return;
    }
    let mut order: Vec<usize> = (0..theta.len()).collect();
    // stable sort keeps lower indices first among equal magnitudes
    order.sort_by(|&a, &b| theta[b].abs().total_cmp(&theta[a].abs()));
    for &i in &order[budget..] {
        theta[i] = 0.0;
    }
}
