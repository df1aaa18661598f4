use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fairfm::dataset::{prepare, split, EncodedDataset, Fingerprint, Schema};
use fairfm::evaluation::{accuracy, risk_difference, run_experiment, ExperimentConfig, ExperimentReport};
use fairfm::mechanisms::SplitBudget;
use fairfm::report::{format_param, render_table};
use fairfm::rng::derive_seed;
use fairfm::trainers::{choose_s_index, Method, TrainedModel, Trainer};
use serde::Serialize;

use crate::config::{DataConfig, TrainBudget};
use crate::fetch::{self, sha256_file};

#[derive(Serialize)]
struct InputFile {
    path: PathBuf,
    sha256: String,
}

/// Everything needed to reproduce a run.
#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: &'a C,
    inputs: Vec<InputFile>,
    schema: String,
    dataset: Fingerprint,
}

fn schema_for(data: &DataConfig) -> Result<Schema> {
    Ok(match &data.schema {
        Some(p) => Schema::from_file(p)?,
        None => Schema::from_toml_str(fetch::ADULT_SCHEMA)?,
    })
}

pub fn load_dataset(data: &DataConfig) -> Result<EncodedDataset> {
    let schema = schema_for(data)?;
    let raw = schema.load(&data.datasets)?;
    if raw.dropped_rows > 0 {
        log::info!("dropped {} rows with missing values", raw.dropped_rows);
    }
    Ok(prepare(&raw, &schema)?)
}

fn write_manifest<C: Serialize>(
    data: &DataConfig,
    command: &'static str,
    config: &C,
    dataset: Fingerprint,
) -> Result<PathBuf> {
    let inputs = data
        .datasets
        .iter()
        .map(|p| {
            Ok(InputFile {
                path: p.clone(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let schema = match &data.schema {
        Some(p) => format!("{} (sha256 {})", p.display(), sha256_file(p)?),
        None => format!("builtin:adult (sha256 {})", fetch::sha256_hex(fetch::ADULT_SCHEMA.as_bytes())),
    };
    let m = Manifest {
        tool: "fairfm",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: data.seed,
        config,
        inputs,
        schema,
        dataset,
    };
    let path = data.out.join("manifest.json");
    write_file(&path, &serde_json::to_string_pretty(&m)?)?;
    Ok(path)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct TrainRecord<'a> {
    method: Method,
    budget: TrainBudget,
    #[serde(flatten)]
    data: &'a DataConfig,
}

/// Seeds used by `train`: the split seed and the noise seed match run 0 of
/// the first point of a sweep with the same master seed.
pub fn train_seeds(master: u64) -> (u64, u64) {
    let split_seed = derive_seed(master, 0);
    (split_seed, derive_seed(split_seed, 1))
}

pub fn train_model(trainer: &Trainer, ds: &EncodedDataset, method: Method, budget: TrainBudget, data: &DataConfig, seed: u64) -> Result<TrainedModel> {
    Ok(match (method, budget) {
        (Method::LR, _) => trainer.lr(ds)?,
        (Method::FairLR, _) => trainer.fair_lr(ds, data.alpha1)?,
        (Method::FM, TrainBudget::Single { epsilon, .. }) => trainer.fm(ds, epsilon, seed)?,
        (Method::RelaxedFM, TrainBudget::Single { epsilon, delta: Some(d) }) => trainer.relaxed_fm(ds, epsilon, d, seed)?,
        (Method::PDFC, TrainBudget::Split { eps_s, eps_n, .. }) => {
            let s = choose_s_index(ds, &data.s_attr, seed)?;
            trainer.pdfc(ds, &SplitBudget::laplace(s, eps_s, eps_n)?, data.alpha1, seed)?
        }
        (Method::ADFC, TrainBudget::Split { eps_s, eps_n, delta_s: Some(a), delta_n: Some(b) }) => {
            let s = choose_s_index(ds, &data.s_attr, seed)?;
            trainer.adfc(ds, &SplitBudget::gaussian(s, eps_s, eps_n, a, b)?, data.alpha1, seed)?
        }
        (m, b) => bail!("budget {b:?} does not fit method {m}"),
    })
}

pub fn train(method: Method, budget: TrainBudget, data: &DataConfig) -> Result<()> {
    let ds = load_dataset(data)?;
    let (split_seed, seed) = train_seeds(data.seed);
    let (train, test) = split(&ds, data.test_fraction, split_seed)?;
    let model = train_model(&Trainer::new(data.policy()), &train, method, budget, data, seed)?;
    let acc = accuracy(&model, &test)?;
    let rd = risk_difference(&model, &test)?;

    let model_path = data.out.join("model.json");
    write_file(&model_path, &model.to_json()?)?;
    let record = TrainRecord { method, budget, data };
    write_manifest(data, "train", &record, ds.fingerprint())?;

    let (eps, delta) = model.budgets.as_ref().map_or((None, None), |b| (Some(b.epsilon), b.delta));
    let rd = rd.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    println!(
        "{method} eps={} delta={} acc={acc:.4} rd={rd} -> {}",
        format_param(eps),
        format_param(delta),
        model_path.display()
    );
    Ok(())
}

pub fn sweep(cfg: &ExperimentConfig, data: &DataConfig) -> Result<ExperimentReport> {
    let ds = load_dataset(data)?;
    let report = run_experiment(&ds, cfg)?;
    write_file(&data.out.join("report.json"), &report.to_json()?)?;
    write_file(&data.out.join("report.csv"), &report.to_csv()?)?;

    #[derive(Serialize)]
    struct SweepRecord<'a> {
        experiment: &'a ExperimentConfig,
        #[serde(flatten)]
        data: &'a DataConfig,
    }
    write_manifest(data, "sweep", &SweepRecord { experiment: cfg, data }, ds.fingerprint())?;
    print!("{}", render_table(&report));
    let failed: usize = report.points.iter().map(|p| p.failed_runs).sum();
    if failed > 0 {
        log::warn!("{failed} runs failed; see the error fields in report.json");
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Table,
    Csv,
}

pub fn report(path: &Path, format: ReportFormat) -> Result<String> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let report = ExperimentReport::from_json(&text).with_context(|| format!("{} is not a sweep report", path.display()))?;
    Ok(match format {
        ReportFormat::Table => render_table(&report),
        ReportFormat::Csv => report.to_csv()?,
    })
}
