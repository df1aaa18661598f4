//! `fairfm`: fetch data, train private/fair logistic models, run sweeps
//! and render report tables.

mod commands;
mod config;
mod fetch;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use fairfm::trainers::Method;

use crate::commands::ReportFormat;
use crate::config::{BudgetFlags, DataConfig, DataFlags, FileConfig, SweepFlags, TrainBudget};

#[derive(Parser)]
#[command(name = "fairfm", version, about = "Differentially private and fair logistic regression")]
struct Cli {
    /// Cache directory for fetched datasets.
    #[arg(long, global = true, env = "FAIRFM_CACHE_DIR")]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download a dataset into the cache and verify its checksums.
    Fetch {
        #[arg(default_value = "adult")]
        name: String,
        /// Alternative origin: a base URL or a local directory holding the files.
        #[arg(long)]
        source: Option<String>,
    },
    /// Train one model on a seeded train/test split.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        eps_s: Option<f64>,
        #[arg(long)]
        eps_n: Option<f64>,
        #[arg(long)]
        delta_s: Option<f64>,
        #[arg(long)]
        delta_n: Option<f64>,
    },
    /// Repeated-split experiment over methods × ε (× δ).
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        /// Methods to run (repeatable or comma separated).
        #[arg(long = "method", value_delimiter = ',')]
        methods: Vec<String>,
        /// ε grid (repeatable or comma separated).
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// δ grid for Gaussian methods.
        #[arg(long, value_delimiter = ',')]
        delta: Vec<f64>,
        #[arg(long)]
        runs: Option<usize>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// ε_s / ε_n for PDFC and ADFC; the composite still equals the grid ε.
        #[arg(long)]
        eps_ratio: Option<f64>,
        /// Reuse one train/test split for every run.
        #[arg(long)]
        no_resplit: bool,
    },
    /// Render a sweep report as a table or CSV.
    Report {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: ReportFormat,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Data file (repeatable), or the name of a fetched dataset.
    #[arg(long)]
    dataset: Vec<String>,
    /// Schema TOML; defaults to the built-in Adult schema.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// TOML config; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Designated attribute for PDFC/ADFC: column name, index or "random".
    #[arg(long)]
    s_attr: Option<String>,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Spectral floor for the quadratic solve.
    #[arg(long)]
    eigen_floor: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl DataArgs {
    fn resolve(&self, file: &FileConfig, cache_dir: &std::path::Path, default_out: &str) -> Result<DataConfig> {
        DataConfig::resolve(
            DataFlags {
                dataset: &self.dataset,
                schema: self.schema.as_ref(),
                seed: self.seed,
                alpha1: self.alpha1,
                s_attr: self.s_attr.as_deref(),
                test_fraction: self.test_fraction,
                eigen_floor: self.eigen_floor,
                out: self.out.as_ref(),
                cache_dir,
            },
            file,
            default_out,
        )
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cache_dir = cli.cache_dir.unwrap_or_else(fetch::default_cache_dir);
    match cli.command {
        Command::Fetch { name, source } => {
            let ds = fetch::lookup(&name)?;
            let got = fetch::fetch(ds, &cache_dir, source.as_deref())?;
            for f in &got.files {
                println!("{}", f.display());
            }
            println!("{}", got.schema.display());
            if got.retrieved == 0 {
                log::info!("all files were already cached in {}", got.dir.display());
            }
        }
        Command::Train {
            data,
            method,
            eps,
            delta,
            eps_s,
            eps_n,
            delta_s,
            delta_n,
        } => {
            let file = FileConfig::load(data.config.as_deref())?;
            let method_name = match method {
                Some(m) => m,
                None => match file.method.clone() {
                    Some(config::OneOrMany::One(m)) => m,
                    Some(config::OneOrMany::Many(_)) => anyhow::bail!("method: train takes a single method"),
                    None => anyhow::bail!("method: required (one of LR, FairLR, FM, RelaxedFM, PDFC, ADFC)"),
                },
            };
            let method: Method = method_name.parse()?;
            let flags = BudgetFlags {
                eps,
                delta,
                eps_s,
                eps_n,
                delta_s,
                delta_n,
            };
            let budget = TrainBudget::resolve(method, flags.or_file(&file)?)?;
            let data = data.resolve(&file, &cache_dir, "fairfm-out")?;
            commands::train(method, budget, &data)?;
        }
        Command::Sweep {
            data,
            methods,
            eps,
            delta,
            runs,
            jobs,
            eps_ratio,
            no_resplit,
        } => {
            let file = FileConfig::load(data.config.as_deref())?;
            let data = data.resolve(&file, &cache_dir, "fairfm-sweep")?;
            let flags = SweepFlags {
                methods: &methods,
                eps: &eps,
                delta: &delta,
                runs,
                jobs,
                eps_ratio,
                no_resplit,
            };
            let cfg = config::experiment_config(flags, &data, &file)?;
            let report = commands::sweep(&cfg, &data)?;
            if report.all_failed() {
                eprintln!("error: every run of every grid point failed");
                return Ok(ExitCode::from(2));
            }
        }
        Command::Report { path, format } => print!("{}", commands::report(&path, format)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
