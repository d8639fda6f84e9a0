use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use mee_core::checkpoint;
use mee_core::data::{self, GeneratorSpec};
use mee_core::density::{silverman_bandwidth, NoiseSpec};
use mee_core::harness::{self, ArchSpec, CompareConfig, PenaltyRule, RateStudyConfig};
use mee_core::penalty::PenaltySpec;
use mee_core::report::{num, Table};
use mee_core::train::{self, TrainConfig, TrainedModel};
use mee_core::{MeeError, Result};

#[derive(Parser)]
#[command(name = "mee", version, about = "Minimum-error-entropy deep regression toolkit")]
struct Cli {
    /// Worker threads for studies and comparisons.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the seed of the loaded config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset CSV (plus provenance sidecar).
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train an estimator and write a checkpoint and `<out>.history.csv`.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        estimator: EstimatorArg,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo excess risk and test MSE of a checkpoint.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data_spec: PathBuf,
        #[arg(long, default_value_t = 20_000)]
        mc: usize,
        #[arg(long, default_value_t = 2_000)]
        eval_inputs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Excess risk across sample sizes and the fitted log-log slope.
    RateStudy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Paired MEE vs least-squares comparison.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Npdnn,
    Spdnn,
    Kmee,
    Ls,
}

#[derive(Deserialize)]
struct GenConfig {
    generator: GeneratorSpec,
    n: usize,
}

#[derive(Deserialize)]
struct TrainFileConfig {
    arch: ArchSpec,
    #[serde(default)]
    train: TrainConfig,
    /// Density of the MEE loss; the dataset's noise law if absent.
    #[serde(default)]
    density: Option<NoiseSpec>,
    /// Explicit penalty; otherwise `penalty_rule` at the dataset size.
    #[serde(default)]
    penalty: Option<PenaltySpec>,
    #[serde(default)]
    penalty_rule: PenaltyRule,
    #[serde(default)]
    bandwidth: Option<f64>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MeeError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { config, out } => {
            let mut cfg: GenConfig = read_json(&config)?;
            if let Some(seed) = cli.seed {
                cfg.generator.seed = seed;
            }
            let ds = data::generate(&cfg.generator, cfg.n)?;
            data::save(&ds, &out)
        }
        Command::Train {
            data: data_path,
            estimator,
            config,
            out,
        } => {
            let mut cfg: TrainFileConfig = read_json(&config)?;
            if let Some(seed) = cli.seed {
                cfg.train.seed = seed;
            }
            let ds = data::load(&data_path)?;
            let arch = cfg.arch.build(ds.input_dim())?;
            let density_spec = match cfg.density.or(ds.provenance().map(|p| p.noise)) {
                Some(d) => d,
                None if matches!(estimator, EstimatorArg::Npdnn | EstimatorArg::Spdnn) => {
                    return Err(MeeError::Usage(
                        "no density in config and the dataset has no provenance".into(),
                    ))
                }
                None => NoiseSpec::Subbotin { r: 2.0 },
            };
            let density = density_spec.build()?;
            let penalty = match cfg.penalty {
                Some(p) => p,
                None => cfg.penalty_rule.at(ds.len())?,
            };
            let result = match estimator {
                EstimatorArg::Npdnn => train::train_npdnn(&ds, &arch, density.as_ref(), &cfg.train),
                EstimatorArg::Spdnn => train::train_spdnn(&ds, &arch, density.as_ref(), &penalty, &cfg.train),
                EstimatorArg::Kmee => {
                    let b = match cfg.bandwidth {
                        Some(b) => b,
                        None => silverman_bandwidth(ds.outputs())?,
                    };
                    train::train_kernel_mee(&ds, &arch, &cfg.train, cfg.penalty.as_ref(), b)
                }
                EstimatorArg::Ls => train::train_least_squares(&ds, &arch, &cfg.train),
            };
            let model = match result {
                Ok(m) => m,
                Err(MeeError::Divergence {
                    epoch,
                    message,
                    checkpoint: net,
                }) => {
                    let path = out.with_extension("diverged");
                    checkpoint::save(&path, &net, None)?;
                    eprintln!("last finite network written to {}", path.display());
                    return Err(MeeError::Divergence {
                        epoch,
                        message,
                        checkpoint: net,
                    });
                }
                Err(e) => return Err(e),
            };
            checkpoint::save(&out, &model.net, Some(model.kind.as_str()))?;
            history_table(&model, cfg.train.seed).write(&history_path(&out))
        }
        Command::Eval {
            model,
            data_spec,
            mc,
            eval_inputs,
            out,
        } => {
            let (net, header) = checkpoint::load(&model)?;
            let spec: GeneratorSpec = read_json(&data_spec)?;
            let seed = cli.seed.unwrap_or(spec.seed);
            let estimator = header.estimator.unwrap_or_else(|| "unknown".into());
            let report = harness::evaluate(&net, &estimator, &spec, eval_inputs, mc, seed)?;
            let mut t = Table::new([
                "estimator",
                "n_eval",
                "mc_draws",
                "excess_risk",
                "std_error",
                "test_mse",
                "empirical_risk",
            ]);
            t.meta("seed", seed)
                .meta("loss", "-log f (excess risk carries the 1/r factor)");
            t.push_row(vec![
                report.estimator,
                report.n.to_string(),
                mc.to_string(),
                num(report.test_excess_risk),
                num(report.std_error),
                num(report.test_mse),
                num(report.empirical_train_risk),
            ]);
            t.write(&out)
        }
        Command::RateStudy { config, out } => {
            let mut cfg: RateStudyConfig = read_json(&config)?;
            if let Some(seed) = cli.seed {
                cfg.generator.seed = seed;
            }
            if let Some(k) = cli.threads {
                cfg.threads = k;
            }
            let result = harness::rate_study(&cfg)?;
            result.to_table(&cfg).write(&out)
        }
        Command::Compare { config, out } => {
            let mut cfg: CompareConfig = read_json(&config)?;
            if let Some(seed) = cli.seed {
                cfg.base_seed = seed;
            }
            if let Some(k) = cli.threads {
                cfg.threads = k;
            }
            let result = harness::robustness_compare(&cfg)?;
            result.to_table(&cfg).write(&out)
        }
    }
}

fn history_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".history.csv");
    PathBuf::from(s)
}

fn history_table(model: &TrainedModel, seed: u64) -> Table {
    let mut t = Table::new(["epoch", "risk", "penalty", "objective"]);
    t.meta("seed", seed).meta("estimator", model.kind.as_str());
    for h in &model.history {
        t.push_row(vec![
            h.epoch.to_string(),
            num(h.risk),
            num(h.penalty),
            num(h.objective()),
        ]);
    }
    t
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                MeeError::Usage(_) | MeeError::Domain(_) | MeeError::Json(_) | MeeError::Format(_) => 2,
                MeeError::Divergence { .. } => 3,
                _ => 1,
            })
        }
    }
}
