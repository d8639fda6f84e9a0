//! Architecture prescriptions and capacity quantities behind the excess-risk
//! rates: Hölder-class sizing, the composition rate `φ_n`, and the
//! log-covering-number bound of sparse ReLU classes.

use serde::{Deserialize, Serialize};

use crate::network::{Architecture, WeightBound};
use crate::{MeeError, Result};

/// Smoothness and scale constants for the Hölder-class architecture rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSpec {
    /// Hölder exponent `s`.
    pub smoothness: f64,
    pub input_dim: usize,
    /// Curvature exponent `κ ≥ 1` of the excess risk (`κ = r` for Subbotin noise).
    pub kappa: f64,
    #[serde(default = "one")]
    pub l0: f64,
    #[serde(default = "one")]
    pub n0: f64,
    #[serde(default = "one")]
    pub s0: f64,
    #[serde(default = "one")]
    pub b0: f64,
}

fn one() -> f64 {
    1.0
}

impl RateSpec {
    pub fn new(smoothness: f64, input_dim: usize, kappa: f64) -> Result<Self> {
        let spec = RateSpec {
            smoothness,
            input_dim,
            kappa,
            l0: 1.0,
            n0: 1.0,
            s0: 1.0,
            b0: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.smoothness, self.l0, self.n0, self.s0, self.b0];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || self.input_dim == 0 {
            return Err(MeeError::usage("rate spec constants must be strictly positive"));
        }
        if !(self.kappa >= 1.0) {
            return Err(MeeError::usage(format!("kappa must be at least 1, got {}", self.kappa)));
        }
        Ok(())
    }

    fn denominator(&self) -> f64 {
        self.kappa * self.smoothness + self.input_dim as f64
    }

    /// Exponent `κs / (κs + d)` of the excess-risk rate.
    pub fn rate_exponent(&self) -> f64 {
        self.kappa * self.smoothness / self.denominator()
    }

    /// Exponent `d / (κs + d)` governing width and sparsity growth.
    pub fn width_exponent(&self) -> f64 {
        self.input_dim as f64 / self.denominator()
    }

    /// `(L_n, N_n, S_n, ln B_n)` before rounding.
    pub fn raw_sizes(&self, n: f64) -> (f64, f64, f64, f64) {
        let ln_n = n.ln();
        let ratio = self.smoothness / self.denominator();
        let growth = n.powf(self.width_exponent());
        let depth = ratio * self.l0 * ln_n;
        let width = self.n0 * growth;
        let sparsity = ratio * self.s0 * growth * ln_n;
        let ln_b = self.b0.ln() + 4.0 * (self.input_dim as f64 + self.smoothness) / self.denominator() * ln_n;
        (depth, width, sparsity, ln_b)
    }
}

/// `⌈x⌉`, treating values within rounding noise of an integer as that integer.
pub(crate) fn ceil_tolerant(x: f64) -> usize {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

/// Hölder-class architecture:
/// `L = sL_0/(κs+d) log n`, `N = N_0 n^{d/(κs+d)}`,
/// `S = sS_0/(κs+d) n^{d/(κs+d)} log n`, `B = B_0 n^{4(d+s)/(κs+d)}`,
/// with `L, N, S` rounded up and every hidden layer of width `N`.
///
/// `S` is capped at the parameter count of the resulting network.
pub fn holder_architecture(spec: &RateSpec, n: usize, output_bound: f64) -> Result<Architecture> {
    spec.validate()?;
    if n < 2 {
        return Err(MeeError::usage("architecture rule needs n >= 2"));
    }
    let (depth, width, sparsity, ln_b) = spec.raw_sizes(n as f64);
    let depth = ceil_tolerant(depth).max(1);
    let width = ceil_tolerant(width).max(1);
    let arch = Architecture::uniform(
        spec.input_dim,
        depth,
        width,
        WeightBound::from_ln(ln_b)?,
        output_bound,
        None,
    )?;
    let budget = ceil_tolerant(sparsity).clamp(1, arch.param_count());
    arch.with_sparsity_budget(Some(budget))
}

/// Composition-structured truth `h = g_q ∘ … ∘ g_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionSpec {
    /// `(d_0, …, d_{q+1})` with `d_{q+1} = 1`.
    pub dims: Vec<usize>,
    /// `(t_0, …, t_q)`: number of active inputs of each component.
    pub actives: Vec<usize>,
    /// `(β_0, …, β_q)`.
    pub smoothness: Vec<f64>,
}

impl CompositionSpec {
    pub fn new(dims: Vec<usize>, actives: Vec<usize>, smoothness: Vec<f64>) -> Result<Self> {
        let spec = CompositionSpec {
            dims,
            actives,
            smoothness,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn depth(&self) -> usize {
        self.actives.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        let q1 = self.actives.len();
        if q1 == 0 || self.smoothness.len() != q1 || self.dims.len() != q1 + 1 {
            return Err(MeeError::usage(
                "composition spec needs q+1 actives and smoothness values and q+2 dims",
            ));
        }
        if *self.dims.last().unwrap() != 1 {
            return Err(MeeError::usage("last composition dimension must be 1"));
        }
        if self.actives.iter().zip(&self.dims).any(|(t, d)| *t == 0 || t > d) {
            return Err(MeeError::usage("need 1 <= t_i <= d_i"));
        }
        if self.smoothness.iter().any(|b| !(*b > 0.0)) {
            return Err(MeeError::usage("smoothness exponents must be positive"));
        }
        Ok(())
    }

    /// `β_i* = β_i Π_{j>i} (β_j ∧ 1)`.
    pub fn effective_smoothness(&self) -> Vec<f64> {
        let q1 = self.smoothness.len();
        (0..q1)
            .map(|i| self.smoothness[i] * self.smoothness[i + 1..].iter().map(|b| b.min(1.0)).product::<f64>())
            .collect()
    }

    /// `max_i 2β_i*/(2β_i* + t_i)` negated: the exponent `a` with `φ_n = n^{-a}`.
    pub fn rate_exponent(&self) -> f64 {
        self.effective_smoothness()
            .iter()
            .zip(&self.actives)
            .map(|(b, &t)| 2.0 * b / (2.0 * b + t as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `φ_n = max_i n^{−2β_i*/(2β_i* + t_i)}`.
pub fn composition_rate(spec: &CompositionSpec, n: usize) -> Result<f64> {
    spec.validate()?;
    if n < 2 {
        return Err(MeeError::usage("composition rate needs n >= 2"));
    }
    let ln_n = (n as f64).ln();
    Ok(spec
        .effective_smoothness()
        .iter()
        .zip(&spec.actives)
        .map(|(b, &t)| (-2.0 * b / (2.0 * b + t as f64) * ln_n).exp())
        .fold(0.0, f64::max))
}

/// Exponent of the composition-class excess-risk bound `(φ_n^{κ/2} ∨ φ_n)`,
/// expressed as `log(bound) / log n` (log factors dropped).
pub fn composition_risk_exponent(spec: &CompositionSpec, kappa: f64) -> f64 {
    -spec.rate_exponent() * (kappa / 2.0).min(1.0)
}

/// Scale constants for the composition-class architecture
/// `L ≍ log n`, `N ≍ n φ_n`, `S ≍ n φ_n log n`, `B` constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionArchConstants {
    pub depth_scale: f64,
    pub width_scale: f64,
    pub sparsity_scale: f64,
    pub weight_bound: f64,
}

impl Default for CompositionArchConstants {
    fn default() -> Self {
        CompositionArchConstants {
            depth_scale: 1.0,
            width_scale: 1.0,
            sparsity_scale: 1.0,
            weight_bound: 1.0,
        }
    }
}

pub fn composition_architecture(
    spec: &CompositionSpec,
    constants: &CompositionArchConstants,
    n: usize,
    output_bound: f64,
) -> Result<Architecture> {
    let phi = composition_rate(spec, n)?;
    if !(constants.weight_bound >= 1.0) {
        return Err(MeeError::usage("composition architecture needs B >= 1"));
    }
    let ln_n = (n as f64).ln();
    let depth = ceil_tolerant(constants.depth_scale * ln_n).max(1);
    let width = ceil_tolerant(constants.width_scale * n as f64 * phi).max(1);
    let arch = Architecture::uniform(
        spec.dims[0],
        depth,
        width,
        WeightBound::new(constants.weight_bound)?,
        output_bound,
        None,
    )?;
    let budget = ceil_tolerant(constants.sparsity_scale * n as f64 * phi * ln_n).clamp(1, arch.param_count());
    arch.with_sparsity_budget(Some(budget))
}

/// Log of the covering-number bound for sparse ReLU networks,
/// `2L(S+1) log(C_σ L (N+1)(B ∨ 1) / δ)` with `C_σ = 1`.
///
/// Returns 0 when the logarithm's argument is at most 1 (the count is at
/// least one).
pub fn covering_bound(depth: f64, width: f64, weight_bound: f64, sparsity: f64, delta: f64) -> Result<f64> {
    let params = [depth, width, weight_bound, sparsity, delta];
    if params.iter().any(|p| !(*p > 0.0)) {
        return Err(MeeError::usage("covering bound parameters must be positive"));
    }
    let ln_arg = depth.ln() + (width + 1.0).ln() + weight_bound.max(1.0).ln() - delta.ln();
    if ln_arg <= 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * depth * (sparsity + 1.0) * ln_arg)
}

/// Default clipped-L1 height `λ_n = scale · (log n)^{ν_3} / n`.
pub fn penalty_height(n: usize, nu3: f64, scale: f64) -> f64 {
    let n = n as f64;
    scale * n.ln().powf(nu3) / n
}
