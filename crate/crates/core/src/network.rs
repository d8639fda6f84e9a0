//! Fully connected ReLU networks `x ↦ A_{L+1} ∘ σ ∘ A_L ∘ … ∘ σ ∘ A_1(x)`
//! with an output clamp `|h(x)| ≤ F`.
//!
//! Parameters live in one flat vector in the canonical order
//! `θ = (vec(W_1), b_1, …, vec(W_{L+1}), b_{L+1})`, where `vec` stacks the
//! columns of a weight matrix. Gradients use the same layout.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::density::ErrorDensity;
use crate::{MeeError, Result};

/// Magnitude cap `B` on every parameter, stored as `ln B` so that the
/// astronomically large bounds of the rate theory do not overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightBound {
    ln: f64,
    /// `B` as given, when it was given directly; avoids `exp(ln B) ≠ B` round-off.
    #[serde(default)]
    exact: Option<f64>,
}

impl WeightBound {
    pub fn new(bound: f64) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(MeeError::usage(format!(
                "weight bound must be positive and finite, got {bound}"
            )));
        }
        Ok(WeightBound {
            ln: bound.ln(),
            exact: Some(bound),
        })
    }

    pub fn from_ln(ln: f64) -> Result<Self> {
        if !ln.is_finite() {
            return Err(MeeError::usage(format!("invalid log weight bound {ln}")));
        }
        Ok(WeightBound { ln, exact: None })
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }

    /// `B` itself; `+∞` once it exceeds the f64 range.
    pub fn value(&self) -> f64 {
        self.exact.unwrap_or_else(|| self.ln.exp())
    }

    pub fn min(self, cap: f64) -> Self {
        if cap.ln() < self.ln {
            WeightBound {
                ln: cap.ln(),
                exact: Some(cap),
            }
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    /// `(p_0, …, p_{L+1})`: input dimension, hidden widths, output width 1.
    widths: Vec<usize>,
    weight_bound: WeightBound,
    output_bound: f64,
    sparsity_budget: Option<usize>,
}

impl Architecture {
    pub fn new(
        widths: Vec<usize>,
        weight_bound: WeightBound,
        output_bound: f64,
        sparsity_budget: Option<usize>,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(MeeError::usage("widths must list at least input and output"));
        }
        if widths.contains(&0) {
            return Err(MeeError::usage("all layer widths must be at least 1"));
        }
        if *widths.last().unwrap() != 1 {
            return Err(MeeError::usage("output width must be 1"));
        }
        if !(output_bound > 0.0) {
            return Err(MeeError::usage(format!(
                "output bound must be positive, got {output_bound}"
            )));
        }
        let arch = Architecture {
            widths,
            weight_bound,
            output_bound,
            sparsity_budget,
        };
        if let Some(s) = sparsity_budget {
            if s > arch.param_count() {
                return Err(MeeError::usage(format!(
                    "sparsity budget {s} exceeds parameter count {}",
                    arch.param_count()
                )));
            }
        }
        Ok(arch)
    }

    /// `depth` hidden layers of equal `width` on a `input_dim`-dimensional input.
    pub fn uniform(
        input_dim: usize,
        depth: usize,
        width: usize,
        weight_bound: WeightBound,
        output_bound: f64,
        sparsity_budget: Option<usize>,
    ) -> Result<Self> {
        let mut widths = vec![input_dim];
        widths.extend(std::iter::repeat_n(width, depth));
        widths.push(1);
        Self::new(widths, weight_bound, output_bound, sparsity_budget)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    /// Number of hidden layers `L`.
    pub fn depth(&self) -> usize {
        self.widths.len() - 2
    }

    /// Largest hidden width (0 for a purely affine map).
    pub fn width(&self) -> usize {
        self.widths[1..self.widths.len() - 1].iter().copied().max().unwrap_or(0)
    }

    pub fn weight_bound(&self) -> WeightBound {
        self.weight_bound
    }

    pub fn output_bound(&self) -> f64 {
        self.output_bound
    }

    pub fn sparsity_budget(&self) -> Option<usize> {
        self.sparsity_budget
    }

    pub fn with_sparsity_budget(mut self, s: Option<usize>) -> Result<Self> {
        if let Some(s) = s {
            if s > self.param_count() {
                return Err(MeeError::usage(format!(
                    "sparsity budget {s} exceeds parameter count {}",
                    self.param_count()
                )));
            }
        }
        self.sparsity_budget = s;
        Ok(self)
    }

    pub fn with_weight_bound(mut self, bound: WeightBound) -> Self {
        self.weight_bound = bound;
        self
    }

    /// Re-checks the invariants of a deserialized architecture.
    pub fn validated(self) -> Result<Self> {
        WeightBound::from_ln(self.weight_bound.ln)?;
        Architecture::new(self.widths, self.weight_bound, self.output_bound, self.sparsity_budget)
    }

    /// Number of weights and biases; saturates for prescriptions too large
    /// to ever be allocated.
    pub fn param_count(&self) -> usize {
        self.widths
            .windows(2)
            .map(|w| w[1].saturating_mul(w[0]).saturating_add(w[1]))
            .fold(0usize, usize::saturating_add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layer {
    rows: usize,
    cols: usize,
    weights: usize,
    biases: usize,
}

fn layout(widths: &[usize]) -> Vec<Layer> {
    let mut offset = 0;
    widths
        .windows(2)
        .map(|w| {
            let layer = Layer {
                rows: w[1],
                cols: w[0],
                weights: offset,
                biases: offset + w[0] * w[1],
            };
            offset += w[0] * w[1] + w[1];
            layer
        })
        .collect()
}

/// Intermediate values of one forward pass, reused by [`Network::backward`].
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    /// Input followed by post-activation outputs of every hidden layer.
    activations: Vec<Vec<f64>>,
    raw_output: f64,
}

impl ForwardCache {
    pub fn raw_output(&self) -> f64 {
        self.raw_output
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    arch: Architecture,
    params: Vec<f64>,
    layers: Vec<Layer>,
}

impl Network {
    pub fn zeros(arch: Architecture) -> Self {
        let layers = layout(&arch.widths);
        let params = vec![0.0; arch.param_count()];
        Network { arch, params, layers }
    }

    /// Glorot-uniform weights, zero biases, then projection onto `[−B, B]`.
    pub fn init(arch: Architecture, rng: &mut dyn RngCore) -> Self {
        let mut net = Self::zeros(arch);
        for layer in net.layers.clone() {
            let limit = (6.0 / (layer.rows + layer.cols) as f64).sqrt();
            for w in &mut net.params[layer.weights..layer.biases] {
                *w = rng.random_range(-limit..=limit);
            }
        }
        net.clamp_weights();
        net
    }

    pub fn from_theta(arch: Architecture, theta: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(arch);
        net.set_theta(&theta)?;
        Ok(net)
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Flat parameter vector θ(h).
    pub fn theta(&self) -> &[f64] {
        &self.params
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_theta(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.params.len() {
            return Err(MeeError::usage(format!(
                "parameter vector has length {}, network expects {}",
                theta.len(),
                self.params.len()
            )));
        }
        self.params.copy_from_slice(theta);
        Ok(())
    }

    /// Weight `(i, k)` of affine layer `j` (0-based).
    pub fn weight(&self, j: usize, i: usize, k: usize) -> f64 {
        let layer = self.layers[j];
        self.params[layer.weights + k * layer.rows + i]
    }

    pub fn bias(&self, j: usize, i: usize) -> f64 {
        let layer = self.layers[j];
        self.params[layer.biases + i]
    }

    /// ‖θ‖_0.
    pub fn nonzero_count(&self) -> usize {
        self.params.iter().filter(|&&p| p != 0.0).count()
    }

    /// ‖θ‖_∞.
    pub fn max_abs_param(&self) -> f64 {
        self.params.iter().fold(0.0, |m, p| m.max(p.abs()))
    }

    /// Projects every parameter onto `[−B, B]`.
    pub fn clamp_weights(&mut self) {
        let b = self.arch.weight_bound.value();
        if b.is_finite() {
            for p in &mut self.params {
                *p = p.clamp(-b, b);
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arch.input_dim() {
            return Err(MeeError::usage(format!(
                "input has dimension {}, network expects {}",
                x.len(),
                self.arch.input_dim()
            )));
        }
        Ok(self.predict(x))
    }

    /// Unchecked forward pass with output clamp.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let raw = self.raw_forward(x);
        let f = self.arch.output_bound;
        raw.clamp(-f, f)
    }

    fn raw_forward(&self, x: &[f64]) -> f64 {
        let mut current = x.to_vec();
        let last = self.layers.len() - 1;
        for (j, layer) in self.layers.iter().enumerate() {
            let mut next = self.params[layer.biases..layer.biases + layer.rows].to_vec();
            affine_accumulate(&self.params, layer, &current, &mut next);
            if j < last {
                next.iter_mut().for_each(|z| *z = z.max(0.0));
            }
            current = next;
        }
        current[0]
    }

    /// Forward pass keeping the activations needed for [`Network::backward`].
    /// Returns the clamped output.
    pub fn forward_cached(&self, x: &[f64], cache: &mut ForwardCache) -> f64 {
        let last = self.layers.len() - 1;
        cache.activations.resize(self.layers.len(), Vec::new());
        cache.activations[0].clear();
        cache.activations[0].extend_from_slice(x);
        let mut output = 0.0;
        for (j, layer) in self.layers.iter().enumerate() {
            let mut next = self.params[layer.biases..layer.biases + layer.rows].to_vec();
            affine_accumulate(&self.params, layer, &cache.activations[j], &mut next);
            if j < last {
                next.iter_mut().for_each(|z| *z = z.max(0.0));
                cache.activations[j + 1] = next;
            } else {
                output = next[0];
            }
        }
        cache.raw_output = output;
        let f = self.arch.output_bound;
        output.clamp(-f, f)
    }

    /// Adds `upstream · ∂h(x)/∂θ` to `grad`, where `h` is the clamped output
    /// of the pass recorded in `cache`. The clamp passes no gradient where it
    /// saturates; ReLU uses derivative 0 at the kink.
    pub fn backward(&self, cache: &ForwardCache, upstream: f64, grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.params.len());
        let f = self.arch.output_bound;
        if cache.raw_output.abs() > f || upstream == 0.0 {
            return;
        }
        let mut delta = vec![upstream];
        for j in (0..self.layers.len()).rev() {
            let layer = self.layers[j];
            let input = &cache.activations[j];
            for (i, &d) in delta.iter().enumerate() {
                grad[layer.biases + i] += d;
            }
            for (k, &a) in input.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let col = &mut grad[layer.weights + k * layer.rows..layer.weights + (k + 1) * layer.rows];
                for (g, &d) in col.iter_mut().zip(&delta) {
                    *g += d * a;
                }
            }
            if j == 0 {
                break;
            }
            let mut prev = vec![0.0; layer.cols];
            for (k, (p, &a)) in prev.iter_mut().zip(input).enumerate() {
                // ReLU derivative of the layer below
                if a > 0.0 {
                    let col = &self.params[layer.weights + k * layer.rows..layer.weights + (k + 1) * layer.rows];
                    *p = col.iter().zip(&delta).map(|(w, d)| w * d).sum();
                }
            }
            delta = prev;
        }
    }

    /// Gradient of the batch-mean MEE loss `−(1/m) Σ log f(y_i − h(x_i))`.
    pub fn risk_gradient(&self, batch: &[(Vec<f64>, f64)], density: &dyn ErrorDensity) -> Result<Vec<f64>> {
        if batch.is_empty() {
            return Err(MeeError::usage("risk gradient needs a non-empty batch"));
        }
        let mut grad = vec![0.0; self.params.len()];
        let mut cache = ForwardCache::default();
        let scale = 1.0 / batch.len() as f64;
        for (x, y) in batch {
            if x.len() != self.arch.input_dim() {
                return Err(MeeError::usage("batch input dimension mismatch"));
            }
            let h = self.forward_cached(x, &mut cache);
            // d/dh [−log f(y − h)] = score(y − h)
            self.backward(&cache, scale * density.score(y - h), &mut grad);
        }
        Ok(grad)
    }
}

#[inline]
fn affine_accumulate(params: &[f64], layer: &Layer, input: &[f64], out: &mut [f64]) {
    for (k, &a) in input.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let col = &params[layer.weights + k * layer.rows..layer.weights + (k + 1) * layer.rows];
        for (o, &w) in out.iter_mut().zip(col) {
            *o += w * a;
        }
    }
}
