//! Strongly mixing regression data `Y_t = h_0(X_t) + ξ_t`.
//!
//! Two regimes are supported: nonparametric autoregression, where
//! `X_t = (Y_{t−1}, …, Y_{t−d})` and `h_0` is a contraction, and an
//! exogenous regime where every coordinate of `X_t` is an independent
//! stationary Gaussian AR(1) with coefficient 0.5. Both are geometrically
//! mixing. Generation is deterministic given the seed.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::density::NoiseSpec;
use crate::{MeeError, Result};

/// Generated series leaving `[−DIVERGENCE_LIMIT, DIVERGENCE_LIMIT]` abort.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// AR coefficient of the exogenous covariate chains.
pub const EXOGENOUS_AR_COEF: f64 = 0.5;

/// Catalog of regression functions `h_0: ℝ^d → ℝ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truth {
    Zero,
    /// `Σ a_i x_i + c`.
    Linear {
        coefs: Vec<f64>,
        #[serde(default)]
        intercept: f64,
    },
    /// `(a/2) [tanh((z + c)/w) − tanh((z − c)/w)]` with `z` the mean of `x`.
    TanhBump {
        amplitude: f64,
        half_width: f64,
        scale: f64,
    },
    /// `(a/d) Σ sin(ω x_i)`; `ω` controls the roughness.
    SinAdditive {
        amplitude: f64,
        frequency: f64,
    },
    /// `g_1 ∘ g_0` with `g_0(x) = tanh(mean(x))` and
    /// `g_1(z) = a sign(z) |z|^β`.
    Composition {
        amplitude: f64,
        exponent: f64,
    },
}

impl Truth {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mean = || x.iter().sum::<f64>() / x.len() as f64;
        match self {
            Truth::Zero => 0.0,
            Truth::Linear { coefs, intercept } => coefs.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + intercept,
            Truth::TanhBump {
                amplitude,
                half_width,
                scale,
            } => {
                let z = mean();
                0.5 * amplitude * (((z + half_width) / scale).tanh() - ((z - half_width) / scale).tanh())
            }
            Truth::SinAdditive { amplitude, frequency } => {
                amplitude * x.iter().map(|v| (frequency * v).sin()).sum::<f64>() / x.len() as f64
            }
            Truth::Composition { amplitude, exponent } => {
                let z = mean().tanh();
                amplitude * z.signum() * z.abs().powf(*exponent)
            }
        }
    }

    /// Bound on `Σ_i sup |∂h/∂x_i|`; below 1 means `h` contracts lagged inputs.
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            Truth::Zero => 0.0,
            Truth::Linear { coefs, .. } => coefs.iter().map(|a| a.abs()).sum(),
            Truth::TanhBump { amplitude, scale, .. } => 0.5 * amplitude.abs() / scale.abs(),
            Truth::SinAdditive { amplitude, frequency } => (amplitude * frequency).abs(),
            Truth::Composition { amplitude, exponent } => {
                if *exponent < 1.0 {
                    f64::INFINITY
                } else {
                    amplitude.abs() * exponent
                }
            }
        }
    }

    /// Upper bound on `sup |h|`, if the function is globally bounded.
    pub fn sup_bound(&self) -> Option<f64> {
        match self {
            Truth::Zero => Some(0.0),
            Truth::Linear { .. } => None,
            Truth::TanhBump { amplitude, .. } => Some(amplitude.abs()),
            Truth::SinAdditive { amplitude, .. } => Some(amplitude.abs()),
            Truth::Composition { amplitude, .. } => Some(amplitude.abs()),
        }
    }

    fn validate(&self, input_dim: usize) -> Result<()> {
        match self {
            Truth::Linear { coefs, .. } if coefs.len() != input_dim => Err(MeeError::usage(format!(
                "linear truth has {} coefficients for input dimension {input_dim}",
                coefs.len()
            ))),
            Truth::TanhBump { scale, .. } if *scale == 0.0 => Err(MeeError::usage("tanh bump scale must be nonzero")),
            Truth::Composition { exponent, .. } if !(*exponent > 0.0) => {
                Err(MeeError::usage("composition exponent must be positive"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `X_t = (Y_{t−1}, …, Y_{t−d})`.
    Autoregressive,
    /// `X_t` an independent stationary AR(1) chain per coordinate.
    Exogenous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub truth: Truth,
    pub input_dim: usize,
    pub mode: Mode,
    pub noise: NoiseSpec,
    pub burn_in: usize,
    pub seed: u64,
    /// Value of every lag / covariate before the first step.
    #[serde(default)]
    pub initial_state: f64,
}

impl GeneratorSpec {
    pub fn new(truth: Truth, input_dim: usize, mode: Mode, noise: NoiseSpec, seed: u64) -> Self {
        GeneratorSpec {
            truth,
            input_dim,
            mode,
            noise,
            burn_in: 100 * input_dim.max(1),
            seed,
            initial_state: 0.0,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GeneratorSpec { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(MeeError::usage("input dimension must be at least 1"));
        }
        if self.burn_in < 100 * self.input_dim {
            return Err(MeeError::usage(format!(
                "burn-in {} is below 100·d = {}",
                self.burn_in,
                100 * self.input_dim
            )));
        }
        self.truth.validate(self.input_dim)?;
        if self.mode == Mode::Autoregressive && !(self.truth.lipschitz_bound() < 1.0) {
            return Err(MeeError::usage(format!(
                "autoregressive mode needs a contraction, truth has Lipschitz bound {}",
                self.truth.lipschitz_bound()
            )));
        }
        if !self.initial_state.is_finite() {
            return Err(MeeError::usage("initial state must be finite"));
        }
        self.noise.build().map(|_| ())
    }
}

/// Time-ordered sample `(X_1, Y_1), …, (X_n, Y_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDataset {
    input_dim: usize,
    /// Row-major `n × d`.
    inputs: Vec<f64>,
    outputs: Vec<f64>,
    provenance: Option<GeneratorSpec>,
}

impl SeriesDataset {
    pub fn new(
        input_dim: usize,
        inputs: Vec<f64>,
        outputs: Vec<f64>,
        provenance: Option<GeneratorSpec>,
    ) -> Result<Self> {
        if input_dim == 0 || inputs.len() != input_dim * outputs.len() {
            return Err(MeeError::usage(format!(
                "{} input values do not form {} rows of dimension {input_dim}",
                inputs.len(),
                outputs.len()
            )));
        }
        Ok(SeriesDataset {
            input_dim,
            inputs,
            outputs,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn output(&self, i: usize) -> f64 {
        self.outputs[i]
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn provenance(&self) -> Option<&GeneratorSpec> {
        self.provenance.as_ref()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.inputs
            .chunks_exact(self.input_dim)
            .zip(self.outputs.iter().copied())
    }

    fn slice(&self, range: std::ops::Range<usize>) -> SeriesDataset {
        SeriesDataset {
            input_dim: self.input_dim,
            inputs: self.inputs[range.start * self.input_dim..range.end * self.input_dim].to_vec(),
            outputs: self.outputs[range].to_vec(),
            provenance: self.provenance.clone(),
        }
    }
}

/// Generates `n` consecutive observations after the burn-in.
pub fn generate(spec: &GeneratorSpec, n: usize) -> Result<SeriesDataset> {
    generate_with_noise(spec, n).map(|(ds, _)| ds)
}

/// Like [`generate`], also returning the noise values `ξ_t` of the kept steps.
pub fn generate_with_noise(spec: &GeneratorSpec, n: usize) -> Result<(SeriesDataset, Vec<f64>)> {
    spec.validate()?;
    if n == 0 {
        return Err(MeeError::usage("dataset size must be at least 1"));
    }
    let d = spec.input_dim;
    let density = spec.noise.build()?;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    noise_rng.set_stream(1);
    let mut covariate_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    covariate_rng.set_stream(2);

    let mut inputs = Vec::with_capacity(n * d);
    let mut outputs = Vec::with_capacity(n);
    let mut noise = Vec::with_capacity(n);
    // Autoregressive: most recent lag first. Exogenous: current covariates.
    let mut state = vec![spec.initial_state; d];
    let mut xi = [0.0];
    for t in 0..spec.burn_in + n {
        if spec.mode == Mode::Exogenous {
            for v in state.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut covariate_rng);
                *v = EXOGENOUS_AR_COEF * *v + z;
            }
        }
        let h = spec.truth.eval(&state);
        if !h.is_finite() {
            return Err(MeeError::Instability(format!("truth is not finite at step {t}")));
        }
        density.sample_into(&mut noise_rng, &mut xi);
        let y = h + xi[0];
        if !(y.abs() <= DIVERGENCE_LIMIT) {
            return Err(MeeError::Instability(format!(
                "|Y_t| = {} exceeds {DIVERGENCE_LIMIT} at step {t}",
                y.abs()
            )));
        }
        if t >= spec.burn_in {
            inputs.extend_from_slice(&state);
            outputs.push(y);
            noise.push(xi[0]);
        }
        if spec.mode == Mode::Autoregressive {
            state.rotate_right(1);
            state[0] = y;
        }
    }
    Ok((SeriesDataset::new(d, inputs, outputs, Some(spec.clone()))?, noise))
}

/// Chronological split; the training part is the earliest block of
/// `⌊n·fraction⌋` observations (at least one on each side).
pub fn split(ds: &SeriesDataset, train_fraction: f64) -> Result<(SeriesDataset, SeriesDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(MeeError::usage(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = ds.len();
    if n < 2 {
        return Err(MeeError::usage("cannot split fewer than two observations"));
    }
    let k = ((n as f64 * train_fraction).floor() as usize).clamp(1, n - 1);
    Ok((ds.slice(0..k), ds.slice(k..n)))
}

/// `h_0(X_i)` for every stored input.
pub fn truth_values(ds: &SeriesDataset) -> Result<Vec<f64>> {
    let spec = ds
        .provenance()
        .ok_or_else(|| MeeError::Unavailable("dataset carries no generator provenance".into()))?;
    Ok(ds
        .inputs
        .chunks_exact(ds.input_dim)
        .map(|x| spec.truth.eval(x))
        .collect())
}

/// Inputs from a fresh trajectory with an independent seed, used as draws
/// from the stationary law of `X_0`.
pub fn fresh_inputs(spec: &GeneratorSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(generate(&spec.with_seed(seed), count)?.inputs)
}

/// SplitMix64 finaliser over a base seed and two tags; used to give every
/// (sample size, replicate) cell its own stream.
pub fn mix_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sidecar provenance file next to a dataset CSV: `data.csv` → `data.provenance.json`.
pub fn provenance_path(csv: &Path) -> PathBuf {
    csv.with_extension("provenance.json")
}

/// Writes the CSV (`x0,…,x{d−1},y`) and, when present, the provenance sidecar.
pub fn save(ds: &SeriesDataset, csv_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path)?;
    let mut header: Vec<String> = (0..ds.input_dim).map(|i| format!("x{i}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(ds.input_dim + 1);
    for (x, y) in ds.rows() {
        record.clear();
        record.extend(x.iter().map(|v| v.to_string()));
        record.push(y.to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    if let Some(spec) = ds.provenance() {
        std::fs::write(provenance_path(csv_path), serde_json::to_string_pretty(spec)?)?;
    }
    Ok(())
}

/// Reads a dataset CSV, attaching provenance if the sidecar exists.
pub fn load(csv_path: &Path) -> Result<SeriesDataset> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(csv_path)?;
    let header = r.headers()?.clone();
    let d = header.len().saturating_sub(1);
    let expected: Vec<String> = (0..d).map(|i| format!("x{i}")).chain(["y".to_string()]).collect();
    if d == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(MeeError::Format(format!(
            "dataset header must be x0,...,x{{d-1}},y; got {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| MeeError::Format(format!("row {}: cannot parse {field:?}", line + 1)))?;
            if j < d {
                inputs.push(v);
            } else {
                outputs.push(v);
            }
        }
    }
    let sidecar = provenance_path(csv_path);
    let provenance = if sidecar.exists() {
        Some(serde_json::from_str(&std::fs::read_to_string(sidecar)?)?)
    } else {
        None
    };
    SeriesDataset::new(d, inputs, outputs, provenance)
}
