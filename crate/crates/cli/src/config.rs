//! Config-file loading and flag/config merging. Flags always win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fairfm::evaluation::{ExperimentConfig, DEFAULT_DELTAS, DEFAULT_EPSILONS};
use fairfm::mechanisms::{PrivacySpec, SplitBudget};
use fairfm::optimizer::RegularizationPolicy;
use fairfm::trainers::{Method, SAttr};
use serde::{Deserialize, Serialize};

use crate::fetch;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// TOML config accepted by `--config`. Keys mirror the long flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub dataset: Option<OneOrMany<String>>,
    pub schema: Option<PathBuf>,
    pub method: Option<OneOrMany<String>>,
    pub eps: Option<OneOrMany<f64>>,
    pub delta: Option<OneOrMany<f64>>,
    pub eps_s: Option<f64>,
    pub eps_n: Option<f64>,
    pub delta_s: Option<f64>,
    pub delta_n: Option<f64>,
    pub eps_ratio: Option<f64>,
    pub s_attr: Option<String>,
    pub alpha1: Option<f64>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub test_fraction: Option<f64>,
    pub resplit: Option<bool>,
    pub eigen_floor: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Options shared by `train` and `sweep`, after merging.
#[derive(Debug, Clone, Serialize)]
pub struct DataConfig {
    pub datasets: Vec<PathBuf>,
    /// `None` means the built-in Adult schema.
    pub schema: Option<PathBuf>,
    pub seed: u64,
    pub alpha1: f64,
    pub s_attr: SAttr,
    pub test_fraction: f64,
    pub eigen_floor: f64,
    pub out: PathBuf,
}

pub struct DataFlags<'a> {
    pub dataset: &'a [String],
    pub schema: Option<&'a PathBuf>,
    pub seed: Option<u64>,
    pub alpha1: Option<f64>,
    pub s_attr: Option<&'a str>,
    pub test_fraction: Option<f64>,
    pub eigen_floor: Option<f64>,
    pub out: Option<&'a PathBuf>,
    pub cache_dir: &'a Path,
}

impl DataConfig {
    pub fn resolve(flags: DataFlags<'_>, file: &FileConfig, default_out: &str) -> Result<Self> {
        let names: Vec<String> = if !flags.dataset.is_empty() {
            flags.dataset.to_vec()
        } else {
            file.dataset.clone().map(OneOrMany::into_vec).unwrap_or_default()
        };
        if names.is_empty() {
            bail!("dataset: no input given; pass --dataset PATH (repeatable) or --dataset adult after `fairfm fetch`");
        }
        let mut datasets = Vec::new();
        for name in &names {
            datasets.extend(resolve_dataset(name, flags.cache_dir)?);
        }
        let schema = flags.schema.cloned().or_else(|| file.schema.clone());
        if let Some(s) = &schema {
            if !s.is_file() {
                bail!("schema: file {} does not exist", s.display());
            }
        }
        let s_attr: SAttr = flags
            .s_attr
            .map(str::to_string)
            .or_else(|| file.s_attr.clone())
            .unwrap_or_else(|| "random".into())
            .parse()?;
        let out = flags.out.cloned().or_else(|| file.out.clone()).unwrap_or_else(|| default_out.into());
        let cfg = Self {
            datasets,
            schema,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            alpha1: flags.alpha1.or(file.alpha1).unwrap_or(1.0),
            s_attr,
            test_fraction: flags.test_fraction.or(file.test_fraction).unwrap_or(0.2),
            eigen_floor: flags
                .eigen_floor
                .or(file.eigen_floor)
                .unwrap_or(RegularizationPolicy::default().eigen_floor),
            out,
        };
        if !cfg.alpha1.is_finite() {
            bail!("alpha1: {} must be finite", cfg.alpha1);
        }
        if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
            bail!("test-fraction: {} must lie in (0, 1)", cfg.test_fraction);
        }
        cfg.policy().validate()?;
        Ok(cfg)
    }

    pub fn policy(&self) -> RegularizationPolicy {
        RegularizationPolicy {
            eigen_floor: self.eigen_floor,
            ..Default::default()
        }
    }
}

/// An existing file, or the name of a fetched dataset.
fn resolve_dataset(name: &str, cache_dir: &Path) -> Result<Vec<PathBuf>> {
    let p = PathBuf::from(name);
    if p.is_file() {
        return Ok(vec![p]);
    }
    if let Ok(known) = fetch::lookup(name) {
        return fetch::cached_paths(known, cache_dir).with_context(|| {
            format!(
                "dataset: {name:?} is not in the cache at {}; run `fairfm fetch {}` first",
                cache_dir.display(),
                known.name
            )
        });
    }
    bail!("dataset: file {name} does not exist")
}

/// Budget flags as given; resolved per method by [`TrainBudget::resolve`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BudgetFlags {
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub eps_s: Option<f64>,
    pub eps_n: Option<f64>,
    pub delta_s: Option<f64>,
    pub delta_n: Option<f64>,
}

impl BudgetFlags {
    pub fn or_file(self, file: &FileConfig) -> Result<Self> {
        let single = |v: &Option<OneOrMany<f64>>, name: &str| -> Result<Option<f64>> {
            match v.clone().map(OneOrMany::into_vec) {
                None => Ok(None),
                Some(v) if v.len() == 1 => Ok(Some(v[0])),
                Some(_) => bail!("{name}: train takes a single value"),
            }
        };
        Ok(Self {
            eps: self.eps.or(single(&file.eps, "eps")?),
            delta: self.delta.or(single(&file.delta, "delta")?),
            eps_s: self.eps_s.or(file.eps_s),
            eps_n: self.eps_n.or(file.eps_n),
            delta_s: self.delta_s.or(file.delta_s),
            delta_n: self.delta_n.or(file.delta_n),
        })
    }
}

/// Privacy parameters for one training run, checked against the
/// mechanism domains before any data is read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainBudget {
    None,
    Single { epsilon: f64, delta: Option<f64> },
    Split {
        eps_s: f64,
        eps_n: f64,
        delta_s: Option<f64>,
        delta_n: Option<f64>,
    },
}

impl TrainBudget {
    pub fn resolve(method: Method, f: BudgetFlags) -> Result<Self> {
        let need = |v: Option<f64>, flag: &str| v.with_context(|| format!("{flag}: required for method {method}"));
        Ok(match method {
            Method::LR | Method::FairLR => TrainBudget::None,
            Method::FM => {
                let e = need(f.eps, "eps")?;
                PrivacySpec::laplace(e)?;
                TrainBudget::Single {
                    epsilon: e,
                    delta: None,
                }
            }
            Method::RelaxedFM => {
                let e = need(f.eps, "eps")?;
                let d = need(f.delta, "delta")?;
                PrivacySpec::gaussian(e, d)?;
                TrainBudget::Single {
                    epsilon: e,
                    delta: Some(d),
                }
            }
            Method::PDFC | Method::ADFC => {
                let (eps_s, eps_n) = match (f.eps_s, f.eps_n, f.eps) {
                    (Some(s), Some(n), _) => (s, n),
                    (None, None, Some(e)) => (e, e),
                    _ => bail!("eps-s/eps-n: method {method} needs both --eps-s and --eps-n, or a single --eps"),
                };
                if method == Method::PDFC {
                    SplitBudget::laplace(0, eps_s, eps_n)?;
                    TrainBudget::Split {
                        eps_s,
                        eps_n,
                        delta_s: None,
                        delta_n: None,
                    }
                } else {
                    let (ds, dn) = match (f.delta_s, f.delta_n, f.delta) {
                        (Some(s), Some(n), _) => (s, n),
                        (None, None, Some(d)) => {
                            let part = fairfm::mechanisms::split_delta_evenly(d)?;
                            (part, part)
                        }
                        _ => bail!("delta-s/delta-n: method {method} needs both --delta-s and --delta-n, or a single --delta"),
                    };
                    SplitBudget::gaussian(0, eps_s, eps_n, ds, dn)?;
                    TrainBudget::Split {
                        eps_s,
                        eps_n,
                        delta_s: Some(ds),
                        delta_n: Some(dn),
                    }
                }
            }
        })
    }
}

pub struct SweepFlags<'a> {
    pub methods: &'a [String],
    pub eps: &'a [f64],
    pub delta: &'a [f64],
    pub runs: Option<usize>,
    pub jobs: Option<usize>,
    pub eps_ratio: Option<f64>,
    pub no_resplit: bool,
}

pub fn experiment_config(flags: SweepFlags<'_>, data: &DataConfig, file: &FileConfig) -> Result<ExperimentConfig> {
    let method_names: Vec<String> = if !flags.methods.is_empty() {
        flags.methods.to_vec()
    } else {
        file.method.clone().map(OneOrMany::into_vec).unwrap_or_default()
    };
    let methods = method_names.iter().map(|m| m.parse()).collect::<fairfm::Result<Vec<Method>>>()?;
    let list = |flag: &[f64], file: &Option<OneOrMany<f64>>, default: &[f64]| -> Vec<f64> {
        if !flag.is_empty() {
            flag.to_vec()
        } else {
            file.clone().map(OneOrMany::into_vec).unwrap_or_else(|| default.to_vec())
        }
    };
    let cfg = ExperimentConfig {
        methods,
        epsilons: list(flags.eps, &file.eps, &DEFAULT_EPSILONS),
        deltas: list(flags.delta, &file.delta, &DEFAULT_DELTAS),
        runs: flags.runs.or(file.runs).unwrap_or(10),
        master_seed: data.seed,
        test_fraction: data.test_fraction,
        alpha1: data.alpha1,
        s_attr: data.s_attr.clone(),
        eps_ratio: flags.eps_ratio.or(file.eps_ratio).unwrap_or(1.0),
        resplit: !flags.no_resplit && file.resplit.unwrap_or(true),
        policy: data.policy(),
        jobs: flags.jobs.or(file.jobs),
    };
    cfg.validate()?;
    Ok(cfg)
}
