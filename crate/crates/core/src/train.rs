//! Estimators: mini-batch first-order descent on the empirical MEE risk.
//!
//! * NPDNN: known density, hard projection onto `‖θ‖_0 ≤ S` every
//!   `prune_every` epochs and at termination.
//! * SPDNN: known density plus the sparse penalty `J_n(θ)`.
//! * kernel MEE: the density is replaced by a Parzen estimate built from the
//!   current residuals of each mini-batch.
//! * least squares: loss `(y − h)²/2`, the baseline.
//!
//! Parameters are projected onto `[−B, B]` after every step.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::SeriesDataset;
use crate::density::{ErrorDensity, Kernel, KDE_FLOOR};
use crate::network::{Architecture, ForwardCache, Network};
use crate::penalty::{prune_in_place, PenaltySpec};
use crate::{MeeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    /// Adam with `β₁ = 0.9`, `β₂ = 0.999`, `ε = 1e-8`.
    #[default]
    Adam,
    /// Heavy-ball SGD, `v ← μv + g`, `θ ← θ − ηv`.
    Momentum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub step_size: f64,
    pub optimizer: Optimizer,
    pub momentum: f64,
    pub seed: u64,
    /// Epoch period of the sparsity projection; 0 projects only at the end.
    pub prune_every: usize,
    pub record_curve: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 64,
            step_size: 1e-3,
            optimizer: Optimizer::Adam,
            momentum: 0.9,
            seed: 0,
            prune_every: 1,
            record_curve: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(MeeError::usage("batch size must be at least 1"));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(MeeError::usage(format!(
                "step size must be > 0, got {}",
                self.step_size
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(MeeError::usage("momentum must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Npdnn,
    Spdnn,
    KernelNpdnn,
    KernelSpdnn,
    LeastSquares,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Npdnn => "npdnn",
            EstimatorKind::Spdnn => "spdnn",
            EstimatorKind::KernelNpdnn => "kernel_npdnn",
            EstimatorKind::KernelSpdnn => "kernel_spdnn",
            EstimatorKind::LeastSquares => "least_squares",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = MeeError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "npdnn" => EstimatorKind::Npdnn,
            "spdnn" => EstimatorKind::Spdnn,
            "kernel_npdnn" | "kmee" => EstimatorKind::KernelNpdnn,
            "kernel_spdnn" => EstimatorKind::KernelSpdnn,
            "least_squares" | "ls" => EstimatorKind::LeastSquares,
            other => return Err(MeeError::usage(format!("unknown estimator {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Empirical risk on the full training set (kernel objective for kernel MEE).
    pub risk: f64,
    pub penalty: f64,
}

impl EpochRecord {
    pub fn objective(&self) -> f64 {
        self.risk + self.penalty
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub net: Network,
    pub history: Vec<EpochRecord>,
    pub kind: EstimatorKind,
}

/// `−(1/n) Σ log f(Y_i − h(X_i))`.
pub fn empirical_risk(net: &Network, data: &SeriesDataset, density: &dyn ErrorDensity) -> Result<f64> {
    check_data(net, data)?;
    Ok(mean_loss(net, data, &Loss::Density(density)))
}

/// Batch mean of `(Y_i − h(X_i))² / 2`.
pub fn squared_risk(net: &Network, data: &SeriesDataset) -> Result<f64> {
    check_data(net, data)?;
    Ok(mean_loss(net, data, &Loss::Squared))
}

/// Plug-in entropy `−(1/n) Σ_i log max((1/n) Σ_j K_b(e_j − e_i), floor)`.
pub fn kernel_objective(residuals: &[f64], bandwidth: f64, kernel: Kernel) -> f64 {
    let n = residuals.len() as f64;
    let mut total = 0.0;
    for &ei in residuals {
        let s: f64 = residuals.iter().map(|&ej| kernel.eval((ej - ei) / bandwidth)).sum();
        total -= (s / (n * bandwidth)).max(KDE_FLOOR).ln();
    }
    total / n
}

pub fn train_npdnn(
    data: &SeriesDataset,
    arch: &Architecture,
    density: &dyn ErrorDensity,
    cfg: &TrainConfig,
) -> Result<TrainedModel> {
    let budget = arch
        .sparsity_budget()
        .ok_or_else(|| MeeError::usage("NPDNN needs an architecture with a sparsity budget"))?;
    run(
        data,
        arch,
        cfg,
        Loss::Density(density),
        None,
        Some(budget),
        EstimatorKind::Npdnn,
    )
}

pub fn train_spdnn(
    data: &SeriesDataset,
    arch: &Architecture,
    density: &dyn ErrorDensity,
    penalty: &PenaltySpec,
    cfg: &TrainConfig,
) -> Result<TrainedModel> {
    penalty.validate()?;
    run(
        data,
        arch,
        cfg,
        Loss::Density(density),
        Some(penalty),
        None,
        EstimatorKind::Spdnn,
    )
}

/// Known-density MEE without a penalty: NPDNN when the architecture has a
/// sparsity budget, plain constrained descent (`J ≡ 0`) otherwise.
pub fn train_mee(
    data: &SeriesDataset,
    arch: &Architecture,
    density: &dyn ErrorDensity,
    cfg: &TrainConfig,
) -> Result<TrainedModel> {
    match arch.sparsity_budget() {
        Some(_) => train_npdnn(data, arch, density, cfg),
        None => run(
            data,
            arch,
            cfg,
            Loss::Density(density),
            None,
            None,
            EstimatorKind::Spdnn,
        ),
    }
}

/// Kernel MEE. With a penalty this is the penalized variant; otherwise the
/// architecture's sparsity budget (if any) is enforced by projection. After
/// training the output bias is shifted so the training residuals have mean
/// zero, since the entropy objective is blind to constant shifts.
pub fn train_kernel_mee(
    data: &SeriesDataset,
    arch: &Architecture,
    cfg: &TrainConfig,
    penalty: Option<&PenaltySpec>,
    bandwidth: f64,
) -> Result<TrainedModel> {
    train_kernel_mee_with(data, arch, cfg, penalty, bandwidth, Kernel::Gaussian)
}

pub fn train_kernel_mee_with(
    data: &SeriesDataset,
    arch: &Architecture,
    cfg: &TrainConfig,
    penalty: Option<&PenaltySpec>,
    bandwidth: f64,
    kernel: Kernel,
) -> Result<TrainedModel> {
    if data.len() < 8 {
        return Err(MeeError::usage("kernel MEE needs at least 8 observations"));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(MeeError::usage(format!("bandwidth must be > 0, got {bandwidth}")));
    }
    if let Some(p) = penalty {
        p.validate()?;
    }
    let (kind, budget) = match penalty {
        Some(_) => (EstimatorKind::KernelSpdnn, None),
        None => (EstimatorKind::KernelNpdnn, arch.sparsity_budget()),
    };
    let mut model = run(
        data,
        arch,
        cfg,
        Loss::Kernel { bandwidth, kernel },
        penalty,
        budget,
        kind,
    )?;
    recenter_output(&mut model.net, data);
    Ok(model)
}

/// Least squares in the same class: the sparsity budget of `arch`, if set,
/// is enforced exactly as for NPDNN.
pub fn train_least_squares(data: &SeriesDataset, arch: &Architecture, cfg: &TrainConfig) -> Result<TrainedModel> {
    run(
        data,
        arch,
        cfg,
        Loss::Squared,
        None,
        arch.sparsity_budget(),
        EstimatorKind::LeastSquares,
    )
}

enum Loss<'a> {
    Density(&'a dyn ErrorDensity),
    Squared,
    Kernel { bandwidth: f64, kernel: Kernel },
}

impl Loss<'_> {
    /// Pointwise loss of residual `u`.
    fn value(&self, u: f64) -> f64 {
        match self {
            Loss::Density(d) => -d.ln_pdf(u),
            Loss::Squared => 0.5 * u * u,
            Loss::Kernel { .. } => unreachable!("kernel loss is not pointwise"),
        }
    }

    /// `∂ loss(y − h) / ∂h`.
    fn dh(&self, u: f64) -> f64 {
        match self {
            Loss::Density(d) => d.score(u),
            Loss::Squared => -u,
            Loss::Kernel { .. } => unreachable!("kernel loss is not pointwise"),
        }
    }
}

fn check_data(net: &Network, data: &SeriesDataset) -> Result<()> {
    if data.is_empty() {
        return Err(MeeError::usage("empirical risk needs a non-empty dataset"));
    }
    if data.input_dim() != net.architecture().input_dim() {
        return Err(MeeError::usage(format!(
            "dataset has input dimension {}, network expects {}",
            data.input_dim(),
            net.architecture().input_dim()
        )));
    }
    Ok(())
}

fn mean_loss(net: &Network, data: &SeriesDataset, loss: &Loss<'_>) -> f64 {
    match loss {
        Loss::Kernel { bandwidth, kernel } => kernel_objective(&residuals(net, data), *bandwidth, *kernel),
        _ => data.rows().map(|(x, y)| loss.value(y - net.predict(x))).sum::<f64>() / data.len() as f64,
    }
}

fn residuals(net: &Network, data: &SeriesDataset) -> Vec<f64> {
    data.rows().map(|(x, y)| y - net.predict(x)).collect()
}

fn recenter_output(net: &mut Network, data: &SeriesDataset) {
    let shift = residuals(net, data).iter().sum::<f64>() / data.len() as f64;
    if !shift.is_finite() {
        return;
    }
    let p = net.param_count();
    // the output bias is the last coordinate of θ
    let b = net.architecture().weight_bound().value();
    let bias = &mut net.theta_mut()[p - 1];
    *bias = (*bias + shift).clamp(-b, b);
}

struct Stepper {
    optimizer: Optimizer,
    step: f64,
    momentum: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Stepper {
    fn new(cfg: &TrainConfig, p: usize) -> Self {
        Stepper {
            optimizer: cfg.optimizer,
            step: cfg.step_size,
            momentum: cfg.momentum,
            m: vec![0.0; p],
            v: vec![0.0; p],
            t: 0,
        }
    }

    fn apply(&mut self, theta: &mut [f64], grad: &[f64]) {
        match self.optimizer {
            Optimizer::Adam => {
                const B1: f64 = 0.9;
                const B2: f64 = 0.999;
                self.t += 1;
                let c1 = 1.0 - B1.powi(self.t);
                let c2 = 1.0 - B2.powi(self.t);
                for (((p, g), m), v) in theta.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
                    *m = B1 * *m + (1.0 - B1) * g;
                    *v = B2 * *v + (1.0 - B2) * g * g;
                    *p -= self.step * (*m / c1) / ((*v / c2).sqrt() + 1e-8);
                }
            }
            Optimizer::Momentum => {
                for ((p, g), m) in theta.iter_mut().zip(grad).zip(&mut self.m) {
                    *m = self.momentum * *m + g;
                    *p -= self.step * *m;
                }
            }
        }
    }
}

fn divergence(epoch: usize, message: impl Into<String>, last: &Network) -> MeeError {
    MeeError::Divergence {
        epoch,
        message: message.into(),
        checkpoint: Box::new(last.clone()),
    }
}

fn project(net: &mut Network, budget: Option<usize>) {
    if let Some(s) = budget {
        prune_in_place(net.theta_mut(), s);
    }
    net.clamp_weights();
}

fn run(
    data: &SeriesDataset,
    arch: &Architecture,
    cfg: &TrainConfig,
    loss: Loss<'_>,
    penalty: Option<&PenaltySpec>,
    budget: Option<usize>,
    kind: EstimatorKind,
) -> Result<TrainedModel> {
    cfg.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle_rng.set_stream(1);
    let mut net = Network::init(arch.clone(), &mut init_rng);
    check_data(&net, data)?;

    let n = data.len();
    let p = net.param_count();
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0; p];
    let mut stepper = Stepper::new(cfg, p);
    let mut caches: Vec<ForwardCache> = Vec::new();
    let mut errs: Vec<f64> = Vec::new();
    let mut upstream: Vec<f64> = Vec::new();
    let mut history = Vec::with_capacity(if cfg.record_curve { cfg.epochs } else { 0 });

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(cfg.batch_size) {
            let m = batch.len();
            caches.resize_with(m, ForwardCache::default);
            errs.clear();
            for (cache, &i) in caches.iter_mut().zip(batch) {
                errs.push(data.output(i) - net.forward_cached(data.input(i), cache));
            }
            upstream.clear();
            match &loss {
                Loss::Kernel { bandwidth, kernel } => kernel_upstream(&errs, *bandwidth, *kernel, &mut upstream),
                _ => {
                    let scale = 1.0 / m as f64;
                    upstream.extend(errs.iter().map(|&u| scale * loss.dh(u)));
                }
            }
            grad.iter_mut().for_each(|g| *g = 0.0);
            for (cache, &up) in caches.iter().zip(&upstream) {
                net.backward(cache, up, &mut grad);
            }
            if let Some(pen) = penalty {
                pen.add_subgradient(net.theta(), 1.0, &mut grad);
            }
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(divergence(epoch, "non-finite gradient", &net));
            }
            let last = net.clone();
            stepper.apply(net.theta_mut(), &grad);
            if net.theta().iter().any(|t| !t.is_finite()) {
                return Err(divergence(epoch, "non-finite parameters", &last));
            }
            net.clamp_weights();
        }
        if cfg.prune_every > 0 && (epoch + 1) % cfg.prune_every == 0 {
            project(&mut net, budget);
        }
        if cfg.record_curve {
            let risk = mean_loss(&net, data, &loss);
            if !risk.is_finite() {
                return Err(divergence(epoch, "non-finite empirical risk", &net));
            }
            let pen = penalty.map_or(0.0, |pen| pen.total(net.theta()));
            history.push(EpochRecord {
                epoch: epoch + 1,
                risk,
                penalty: pen,
            });
        }
    }
    project(&mut net, budget);
    Ok(TrainedModel { net, history, kind })
}

/// Per-sample `∂J/∂h_k` for the batch plug-in objective
/// `J = −(1/m) Σ_i log F_i`, `F_i = (1/m) Σ_j K_b(e_j − e_i)`, `e = y − h`.
/// Floored `F_i` contribute nothing.
fn kernel_upstream(errs: &[f64], b: f64, kernel: Kernel, out: &mut Vec<f64>) {
    let m = errs.len();
    let mf = m as f64;
    // kd[i][j] = K_b'(e_j − e_i) = K'((e_j − e_i)/b) / b²
    let mut kd = vec![0.0; m * m];
    let mut inv_f = vec![0.0; m];
    for i in 0..m {
        let mut s = 0.0;
        for j in 0..m {
            let t = (errs[j] - errs[i]) / b;
            s += kernel.eval(t);
            kd[i * m + j] = kernel.derivative(t) / (b * b);
        }
        let f = s / (mf * b);
        inv_f[i] = if f > KDE_FLOOR { 1.0 / f } else { 0.0 };
    }
    out.clear();
    out.resize(m, 0.0);
    for i in 0..m {
        if inv_f[i] == 0.0 {
            continue;
        }
        let row = &kd[i * m..(i + 1) * m];
        let row_sum: f64 = row.iter().sum();
        for (k, o) in out.iter_mut().enumerate() {
            // ∂F_i/∂e_k = (1/m)[K_b'(e_k − e_i) − δ_ik Σ_j K_b'(e_j − e_i)]
            let mut d = row[k];
            if k == i {
                d -= row_sum;
            }
            // ∂J/∂e_k accumulates −(1/m)(1/F_i) ∂F_i/∂e_k and ∂e_k/∂h_k = −1
            *o += inv_f[i] * d / (mf * mf);
        }
    }
}
