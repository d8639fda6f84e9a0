//! Population-risk evaluation, rate studies and robustness comparisons.
//!
//! Excess risks are reported under the loss `−log f`, so for Subbotin noise
//! they equal `(1/r) E[|Y − h(X)|^r − |Y − h_0(X)|^r]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{
    composition_architecture, composition_risk_exponent, holder_architecture, CompositionArchConstants,
    CompositionSpec, RateSpec,
};
use crate::data::{fresh_inputs, generate, mix_seed, GeneratorSpec, Mode, SeriesDataset, Truth};
use crate::density::{silverman_bandwidth, ErrorDensity, NoiseSpec};
use crate::network::{Architecture, Network, WeightBound};
use crate::penalty::PenaltySpec;
use crate::report::{num, opt_num, Table};
use crate::train::{self, TrainConfig};
use crate::{MeeError, Result};

/// Default cap on the weight bound in rate studies.
pub const WEIGHT_CAP: f64 = 1e3;

/// Anything that maps an input vector to a prediction.
pub trait Predictor: Sync {
    fn value(&self, x: &[f64]) -> f64;
}

impl Predictor for Network {
    fn value(&self, x: &[f64]) -> f64 {
        self.predict(x)
    }
}

impl Predictor for Truth {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
}

/// Constant prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Predictor for Constant {
    fn value(&self, _x: &[f64]) -> f64 {
        self.0
    }
}

/// Wraps a closure as a [`Predictor`].
pub struct FnPredictor<F>(pub F);

impl<F: Fn(&[f64]) -> f64 + Sync> Predictor for FnPredictor<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Monte-Carlo excess risk `E[−log f(Y − h(X)) + log f(Y − h_0(X))]`.
///
/// Draw `k` uses input row `k mod rows` and a fresh noise value `ξ`; both
/// terms share `ξ`, and each term is averaged with its mirror `−ξ`, which
/// removes the odd part of the integrand for symmetric noise. With `h = h_0`
/// every term is exactly zero.
pub fn excess_risk_mc(
    model: &dyn Predictor,
    truth: &dyn Predictor,
    density: &dyn ErrorDensity,
    eval_inputs: &[f64],
    input_dim: usize,
    draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    if draws < 100 {
        return Err(MeeError::usage(format!(
            "excess risk needs at least 100 noise draws, got {draws}"
        )));
    }
    if input_dim == 0 || eval_inputs.is_empty() || !eval_inputs.len().is_multiple_of(input_dim) {
        return Err(MeeError::usage("evaluation inputs must be a non-empty n × d block"));
    }
    let rows: Vec<&[f64]> = eval_inputs.chunks_exact(input_dim).collect();
    let gaps: Vec<f64> = rows.iter().map(|x| truth.value(x) - model.value(x)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = density.sample(&mut rng, draws);
    let term = |xi: f64, gap: f64| -density.ln_pdf(xi + gap) + density.ln_pdf(xi);
    let terms: Vec<f64> = noise
        .iter()
        .enumerate()
        .map(|(k, &xi)| {
            let gap = gaps[k % gaps.len()];
            0.5 * (term(xi, gap) + term(-xi, gap))
        })
        .collect();
    let m = draws as f64;
    let mean = terms.iter().sum::<f64>() / m;
    let var = terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(McEstimate {
        estimate: mean,
        std_error: (var / m).sqrt(),
    })
}

/// `(1/n) Σ (h(x_i) − h_0(x_i))²` over the evaluation inputs.
pub fn test_mse(model: &dyn Predictor, truth: &dyn Predictor, eval_inputs: &[f64], input_dim: usize) -> f64 {
    let rows = eval_inputs.chunks_exact(input_dim);
    let n = rows.len() as f64;
    rows.map(|x| (model.value(x) - truth.value(x)).powi(2)).sum::<f64>() / n
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub empirical_train_risk: f64,
    pub test_excess_risk: f64,
    pub std_error: f64,
    pub test_mse: f64,
    pub n: usize,
    pub estimator: String,
}

/// Least-squares slope of `log y` on `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 || ys.iter().any(|y| !(*y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyEstimator {
    Npdnn,
    Spdnn,
    KernelMee,
    LeastSquares,
    /// Constant predictor equal to the training-output mean.
    SampleMean,
    /// Returns `h_0` and ignores the data.
    Oracle,
}

impl StudyEstimator {
    pub fn as_str(&self) -> &'static str {
        match self {
            StudyEstimator::Npdnn => "npdnn",
            StudyEstimator::Spdnn => "spdnn",
            StudyEstimator::KernelMee => "kernel_mee",
            StudyEstimator::LeastSquares => "least_squares",
            StudyEstimator::SampleMean => "sample_mean",
            StudyEstimator::Oracle => "oracle",
        }
    }

    fn needs_network(&self) -> bool {
        !matches!(self, StudyEstimator::SampleMean | StudyEstimator::Oracle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ArchRule {
    Holder {
        rate: RateSpec,
    },
    Composition {
        spec: CompositionSpec,
        #[serde(default)]
        constants: CompositionArchConstants,
        kappa: f64,
    },
}

impl ArchRule {
    pub fn build(&self, n: usize, output_bound: f64) -> Result<Architecture> {
        match self {
            ArchRule::Holder { rate } => holder_architecture(rate, n, output_bound),
            ArchRule::Composition { spec, constants, .. } => composition_architecture(spec, constants, n, output_bound),
        }
    }

    /// Exponent of the excess-risk bound in `n`, log factors dropped.
    pub fn theory_exponent(&self) -> f64 {
        match self {
            ArchRule::Holder { rate } => -rate.rate_exponent(),
            ArchRule::Composition { spec, kappa, .. } => composition_risk_exponent(spec, *kappa),
        }
    }
}

/// Tuning of the clipped-L1 penalty `λ_n = scale (log n)^{ν_3} / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyRule {
    pub nu3: f64,
    pub tau: f64,
    pub scale: f64,
}

impl Default for PenaltyRule {
    fn default() -> Self {
        PenaltyRule {
            nu3: 6.0,
            tau: 1e-6,
            scale: 1.0,
        }
    }
}

impl PenaltyRule {
    pub fn at(&self, n: usize) -> Result<PenaltySpec> {
        PenaltySpec::clipped_l1(crate::capacity::penalty_height(n, self.nu3, self.scale), self.tau)
    }
}

fn default_output_bound() -> f64 {
    10.0
}
fn default_weight_cap() -> f64 {
    WEIGHT_CAP
}
fn default_mc_draws() -> usize {
    20_000
}
fn default_eval_inputs() -> usize {
    2_000
}
fn default_threads() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudyConfig {
    /// Generator; its seed is the base seed of the study.
    pub generator: GeneratorSpec,
    pub estimator: StudyEstimator,
    #[serde(default)]
    pub arch_rule: Option<ArchRule>,
    pub ns: Vec<usize>,
    pub seeds: usize,
    #[serde(default = "default_output_bound")]
    pub output_bound: f64,
    #[serde(default = "default_weight_cap")]
    pub weight_cap: f64,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub penalty: PenaltyRule,
    /// Kernel-MEE bandwidth; the rule-of-thumb on the training outputs if absent.
    #[serde(default)]
    pub bandwidth: Option<f64>,
    #[serde(default = "default_mc_draws")]
    pub mc_draws: usize,
    #[serde(default = "default_eval_inputs")]
    pub eval_inputs: usize,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

impl RateStudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        if self.ns.len() < 3 {
            return Err(MeeError::usage("rate study needs at least 3 sample sizes"));
        }
        if self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MeeError::usage("sample sizes must be strictly increasing"));
        }
        if self.ns[0] < 256 {
            return Err(MeeError::usage("every sample size must be at least 256"));
        }
        if self.seeds == 0 {
            return Err(MeeError::usage("rate study needs at least one seed"));
        }
        if self.estimator.needs_network() && self.arch_rule.is_none() {
            return Err(MeeError::usage(format!(
                "estimator {} needs an arch_rule",
                self.estimator.as_str()
            )));
        }
        if !(self.weight_cap > 0.0) || self.eval_inputs == 0 {
            return Err(MeeError::usage("weight cap and evaluation size must be positive"));
        }
        self.train.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub n: usize,
    pub seed_index: usize,
    pub seed: u64,
    /// `None` when training diverged.
    pub outcome: Option<CellOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellOutcome {
    pub excess: f64,
    pub std_error: f64,
    pub test_mse: f64,
    pub train_risk: f64,
    pub weight_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStudyResult {
    pub ns: Vec<usize>,
    /// Mean excess risk over surviving seeds, `None` if every seed failed.
    pub mean_excess: Vec<Option<f64>>,
    pub sd_excess: Vec<Option<f64>>,
    pub slope: Option<f64>,
    /// Set when the slope cannot be fitted (non-positive means or < 3 sizes).
    pub degenerate: bool,
    pub theory_exponent: Option<f64>,
    pub cells: Vec<CellResult>,
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| MeeError::usage(format!("cannot build worker pool: {e}")))
}

pub fn rate_study(cfg: &RateStudyConfig) -> Result<RateStudyResult> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = cfg
        .ns
        .iter()
        .flat_map(|&n| (0..cfg.seeds).map(move |s| (n, s)))
        .collect();
    let pool = thread_pool(cfg.threads)?;
    let results: Vec<Result<CellResult>> =
        pool.install(|| cells.par_iter().map(|&(n, s)| run_cell(cfg, n, s)).collect());
    let cells = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut mean_excess = Vec::with_capacity(cfg.ns.len());
    let mut sd_excess = Vec::with_capacity(cfg.ns.len());
    for &n in &cfg.ns {
        let vals: Vec<f64> = cells
            .iter()
            .filter(|c| c.n == n)
            .filter_map(|c| c.outcome.map(|o| o.excess))
            .collect();
        if vals.is_empty() {
            mean_excess.push(None);
            sd_excess.push(None);
            continue;
        }
        let k = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / k;
        let sd = if vals.len() > 1 {
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        mean_excess.push(Some(mean));
        sd_excess.push(Some(sd));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = cfg
        .ns
        .iter()
        .zip(&mean_excess)
        .filter_map(|(&n, m)| m.map(|m| (n as f64, m)))
        .unzip();
    let slope = if xs.len() >= 3 { loglog_slope(&xs, &ys) } else { None };
    Ok(RateStudyResult {
        ns: cfg.ns.clone(),
        mean_excess,
        sd_excess,
        slope,
        degenerate: slope.is_none(),
        theory_exponent: cfg.arch_rule.as_ref().map(ArchRule::theory_exponent),
        cells,
    })
}

fn run_cell(cfg: &RateStudyConfig, n: usize, seed_index: usize) -> Result<CellResult> {
    let seed = mix_seed(cfg.generator.seed, n as u64, seed_index as u64);
    let gen = cfg.generator.with_seed(seed);
    let data = generate(&gen, n)?;
    let density = gen.noise.build()?;
    let eval = fresh_inputs(&gen, cfg.eval_inputs, mix_seed(seed, 2, 0))?;
    let d = gen.input_dim;
    let train_cfg = TrainConfig {
        seed: mix_seed(seed, 1, 0),
        ..cfg.train.clone()
    };
    let mc_seed = mix_seed(seed, 3, 0);
    let cell = |outcome| CellResult {
        n,
        seed_index,
        seed,
        outcome,
    };

    let fitted: Box<dyn Predictor> = match cfg.estimator {
        StudyEstimator::Oracle => Box::new(gen.truth.clone()),
        StudyEstimator::SampleMean => Box::new(Constant(data.outputs().iter().sum::<f64>() / n as f64)),
        est => {
            let rule = cfg.arch_rule.as_ref().expect("validated");
            let arch = rule.build(n, cfg.output_bound)?;
            let arch = arch.clone().with_weight_bound(arch.weight_bound().min(cfg.weight_cap));
            let trained = match est {
                StudyEstimator::Npdnn => train::train_npdnn(&data, &arch, density.as_ref(), &train_cfg),
                StudyEstimator::Spdnn => {
                    let arch = arch.with_sparsity_budget(None)?;
                    train::train_spdnn(&data, &arch, density.as_ref(), &cfg.penalty.at(n)?, &train_cfg)
                }
                StudyEstimator::LeastSquares => train::train_least_squares(&data, &arch, &train_cfg),
                StudyEstimator::KernelMee => {
                    let b = match cfg.bandwidth {
                        Some(b) => b,
                        None => silverman_bandwidth(data.outputs())?,
                    };
                    train::train_kernel_mee(&data, &arch, &train_cfg, None, b)
                }
                StudyEstimator::SampleMean | StudyEstimator::Oracle => unreachable!(),
            };
            match trained {
                Ok(model) => Box::new(model.net),
                Err(MeeError::Divergence { .. }) => return Ok(cell(None)),
                Err(e) => return Err(e),
            }
        }
    };
    let mc = excess_risk_mc(
        fitted.as_ref(),
        &gen.truth,
        density.as_ref(),
        &eval,
        d,
        cfg.mc_draws,
        mc_seed,
    )?;
    let train_risk = data
        .rows()
        .map(|(x, y)| -density.ln_pdf(y - fitted.value(x)))
        .sum::<f64>()
        / n as f64;
    let weight_bound = match cfg.arch_rule.as_ref().filter(|_| cfg.estimator.needs_network()) {
        Some(rule) => rule
            .build(n, cfg.output_bound)?
            .weight_bound()
            .min(cfg.weight_cap)
            .value(),
        None => f64::NAN,
    };
    Ok(cell(Some(CellOutcome {
        excess: mc.estimate,
        std_error: mc.std_error,
        test_mse: test_mse(fitted.as_ref(), &gen.truth, &eval, d),
        train_risk,
        weight_bound,
    })))
}

impl RateStudyResult {
    /// Per-cell rows followed by one summary row per `n` (`seed` column "mean").
    pub fn to_table(&self, cfg: &RateStudyConfig) -> Table {
        let mut t = Table::new([
            "n",
            "seed",
            "excess_risk",
            "std_error",
            "test_mse",
            "train_risk",
            "weight_bound",
        ]);
        t.meta("seed", cfg.generator.seed)
            .meta("estimator", cfg.estimator.as_str())
            .meta("seeds", cfg.seeds)
            .meta("weight_cap", cfg.weight_cap)
            .meta("output_bound", cfg.output_bound)
            .meta("mc_draws", cfg.mc_draws)
            .meta("loss", "-log f (excess risk carries the 1/r factor)")
            .meta("slope", opt_num(self.slope))
            .meta("degenerate", self.degenerate)
            .meta("theory_exponent", opt_num(self.theory_exponent));
        for c in &self.cells {
            let row = match c.outcome {
                Some(o) => vec![
                    c.n.to_string(),
                    c.seed_index.to_string(),
                    num(o.excess),
                    num(o.std_error),
                    num(o.test_mse),
                    num(o.train_risk),
                    num(o.weight_bound),
                ],
                None => {
                    let mut r = vec![c.n.to_string(), c.seed_index.to_string()];
                    r.extend(std::iter::repeat_n("NaN".to_string(), 5));
                    r
                }
            };
            t.push_row(row);
        }
        for ((n, m), sd) in self.ns.iter().zip(&self.mean_excess).zip(&self.sd_excess) {
            t.push_row(vec![
                n.to_string(),
                "mean".into(),
                opt_num(*m),
                opt_num(*sd),
                "NaN".into(),
                "NaN".into(),
                "NaN".into(),
            ]);
        }
        t
    }
}

/// Fixed architecture description used by comparisons and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub depth: usize,
    pub width: usize,
    pub weight_bound: f64,
    #[serde(default = "default_output_bound")]
    pub output_bound: f64,
    #[serde(default)]
    pub sparsity: Option<usize>,
}

impl ArchSpec {
    pub fn build(&self, input_dim: usize) -> Result<Architecture> {
        Architecture::uniform(
            input_dim,
            self.depth,
            self.width,
            WeightBound::new(self.weight_bound)?,
            self.output_bound,
            self.sparsity,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub truths: Vec<Truth>,
    pub input_dim: usize,
    pub mode: Mode,
    /// Law of the generated noise.
    pub noise: NoiseSpec,
    /// Density used by the MEE loss; defaults to the true noise law.
    #[serde(default)]
    pub mee_density: Option<NoiseSpec>,
    pub ns: Vec<usize>,
    pub seeds: usize,
    pub arch: ArchSpec,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_eval_inputs")]
    pub eval_inputs: usize,
    pub base_seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedRun {
    pub truth_index: usize,
    pub n: usize,
    pub seed_index: usize,
    pub mse_mee: f64,
    pub mse_ls: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareSummary {
    pub truth_index: usize,
    pub n: usize,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    pub median_mee: f64,
    pub median_ls: f64,
}

impl CompareSummary {
    /// Ties count as half a win.
    pub fn win_rate(&self) -> f64 {
        let total = (self.wins + self.ties + self.losses) as f64;
        (self.wins as f64 + 0.5 * self.ties as f64) / total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareResult {
    pub runs: Vec<PairedRun>,
    pub summaries: Vec<CompareSummary>,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Trains MEE and least squares on identical data, initialization and
/// batching, and compares test MSE against `h_0` per seed.
pub fn robustness_compare(cfg: &CompareConfig) -> Result<CompareResult> {
    if cfg.truths.is_empty() || cfg.ns.is_empty() || cfg.seeds == 0 {
        return Err(MeeError::usage("comparison needs truths, sample sizes and seeds"));
    }
    cfg.train.validate()?;
    let arch = cfg.arch.build(cfg.input_dim)?;
    let mee_spec = cfg.mee_density.unwrap_or(cfg.noise);
    let mee_density = mee_spec.build()?;
    let mut tasks = Vec::new();
    for t in 0..cfg.truths.len() {
        for &n in &cfg.ns {
            for s in 0..cfg.seeds {
                tasks.push((t, n, s));
            }
        }
    }
    let pool = thread_pool(cfg.threads)?;
    let runs: Vec<Result<PairedRun>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(t, n, s)| {
                let seed = mix_seed(mix_seed(cfg.base_seed, t as u64, 0), n as u64, s as u64);
                let gen = GeneratorSpec::new(cfg.truths[t].clone(), cfg.input_dim, cfg.mode, cfg.noise, seed);
                let data = generate(&gen, n)?;
                let eval = fresh_inputs(&gen, cfg.eval_inputs, mix_seed(seed, 2, 0))?;
                let train_cfg = TrainConfig {
                    seed: mix_seed(seed, 1, 0),
                    ..cfg.train.clone()
                };
                let mee = train::train_mee(&data, &arch, mee_density.as_ref(), &train_cfg)?;
                let ls = train::train_least_squares(&data, &arch, &train_cfg)?;
                Ok(PairedRun {
                    truth_index: t,
                    n,
                    seed_index: s,
                    mse_mee: test_mse(&mee.net, &gen.truth, &eval, cfg.input_dim),
                    mse_ls: test_mse(&ls.net, &gen.truth, &eval, cfg.input_dim),
                })
            })
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut summaries = Vec::new();
    for t in 0..cfg.truths.len() {
        for &n in &cfg.ns {
            let group: Vec<&PairedRun> = runs.iter().filter(|r| r.truth_index == t && r.n == n).collect();
            let wins = group.iter().filter(|r| r.mse_mee < r.mse_ls).count();
            let ties = group.iter().filter(|r| r.mse_mee == r.mse_ls).count();
            let mut mee: Vec<f64> = group.iter().map(|r| r.mse_mee).collect();
            let mut ls: Vec<f64> = group.iter().map(|r| r.mse_ls).collect();
            summaries.push(CompareSummary {
                truth_index: t,
                n,
                wins,
                ties,
                losses: group.len() - wins - ties,
                median_mee: median(&mut mee),
                median_ls: median(&mut ls),
            });
        }
    }
    Ok(CompareResult { runs, summaries })
}

impl CompareResult {
    pub fn to_table(&self, cfg: &CompareConfig) -> Table {
        let mut t = Table::new(["truth", "n", "seed", "mse_mee", "mse_ls", "winner"]);
        t.meta("seed", cfg.base_seed)
            .meta("noise", serde_json::to_string(&cfg.noise).unwrap_or_default())
            .meta(
                "mee_density",
                serde_json::to_string(&cfg.mee_density.unwrap_or(cfg.noise)).unwrap_or_default(),
            )
            .meta("seeds", cfg.seeds)
            .meta("weight_bound", cfg.arch.weight_bound);
        for s in &self.summaries {
            t.meta(
                &format!("summary_truth{}_n{}", s.truth_index, s.n),
                format!(
                    "wins={} ties={} losses={} median_mee={} median_ls={}",
                    s.wins, s.ties, s.losses, s.median_mee, s.median_ls
                ),
            );
        }
        for r in &self.runs {
            let winner = if r.mse_mee < r.mse_ls {
                "mee"
            } else if r.mse_mee > r.mse_ls {
                "ls"
            } else {
                "tie"
            };
            t.push_row(vec![
                r.truth_index.to_string(),
                r.n.to_string(),
                r.seed_index.to_string(),
                num(r.mse_mee),
                num(r.mse_ls),
                winner.into(),
            ]);
        }
        t
    }
}

/// Evaluates a fitted network against a generator: excess risk by Monte
/// Carlo, test MSE and the empirical risk on a fresh sample of size
/// `eval_inputs`.
pub fn evaluate(
    net: &Network,
    estimator: &str,
    spec: &GeneratorSpec,
    eval_inputs: usize,
    draws: usize,
    seed: u64,
) -> Result<RiskReport> {
    // a derived seed keeps the sample disjoint from data generated with `seed`
    let sample: SeriesDataset = generate(&spec.with_seed(mix_seed(seed, 4, 0)), eval_inputs)?;
    let density = spec.noise.build()?;
    let mc = excess_risk_mc(
        net,
        &spec.truth,
        density.as_ref(),
        sample.inputs(),
        spec.input_dim,
        draws,
        mix_seed(seed, 3, 0),
    )?;
    Ok(RiskReport {
        empirical_train_risk: train::empirical_risk(net, &sample, density.as_ref())?,
        test_excess_risk: mc.estimate,
        std_error: mc.std_error,
        test_mse: test_mse(net, &spec.truth, sample.inputs(), spec.input_dim),
        n: eval_inputs,
        estimator: estimator.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::SubbotinDensity;

    fn inputs() -> Vec<f64> {
        (0..500).map(|i| (i as f64 * 0.37).sin() * 2.0).collect()
    }

    #[test]
    fn truth_has_zero_excess() {
        let truth = Truth::SinAdditive {
            amplitude: 1.0,
            frequency: 1.3,
        };
        for density in [SubbotinDensity::new(1.5).unwrap(), SubbotinDensity::laplace()] {
            let mc = excess_risk_mc(&truth, &truth, &density, &inputs(), 1, 1000, 3).unwrap();
            assert_eq!(mc.estimate, 0.0);
            assert_eq!(mc.std_error, 0.0);
        }
    }

    #[test]
    fn gaussian_shift() {
        let c = 0.3;
        let shifted = FnPredictor(|_: &[f64]| c);
        let mc = excess_risk_mc(
            &shifted,
            &Truth::Zero,
            &SubbotinDensity::gaussian(),
            &inputs(),
            1,
            5000,
            9,
        )
        .unwrap();
        assert!((mc.estimate - c * c / 2.0).abs() <= 3.0 * mc.std_error + 1e-12);
    }

    #[test]
    fn too_few_draws() {
        let r = excess_risk_mc(
            &Constant(0.0),
            &Truth::Zero,
            &SubbotinDensity::gaussian(),
            &inputs(),
            1,
            99,
            0,
        );
        assert!(matches!(r, Err(MeeError::Usage(_))));
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [256.0, 1024.0, 4096.0, 16384.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.7 * x.powf(-0.62)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 0.62).abs() < 1e-10);
        assert_eq!(loglog_slope(&xs, &[1.0, 0.0, 1.0, 1.0]), None);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
