//! Prediction, accuracy, risk difference and the repeated-split protocol.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dataset::{split, EncodedDataset, Fingerprint};
use crate::error::{Error, Result};
use crate::mechanisms::compose::{split_delta_evenly, split_epsilon_for_target};
use crate::mechanisms::SplitBudget;
use crate::optimizer::{Diagnostics, RegularizationPolicy};
use crate::rng::derive_seed;
use crate::trainers::{choose_s_index, Budgets, Method, SAttr, TrainedModel, Trainer};

/// Overflow-safe `eˢ / (1 + eˢ)`.
pub fn logistic(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Largest double below 0.5.
const JUST_BELOW_HALF: f64 = 0.5 - f64::EPSILON / 4.0;

/// `(p, label)` for one score. `label = 1` iff `s ≥ 0`, and `p` is nudged
/// below 0.5 for tiny negative scores so that `label = 1 ⟺ p ≥ 0.5`.
pub fn classify_score(s: f64) -> (f64, u8) {
    let p = logistic(s);
    if s >= 0.0 {
        (p, 1)
    } else {
        (p.min(JUST_BELOW_HALF), 0)
    }
}

pub fn predict(model: &TrainedModel, x: &[f64]) -> Result<(f64, u8)> {
    if x.len() != model.d() {
        return Err(Error::DimensionMismatch {
            expected: model.d(),
            got: x.len(),
        });
    }
    let s: f64 = model.w.iter().zip(x).map(|(w, x)| w * x).sum();
    Ok(classify_score(s))
}

/// Hard labels for every row of `ds`.
pub fn predict_labels(w: &[f64], ds: &EncodedDataset) -> Result<Vec<u8>> {
    if w.len() != ds.d() {
        return Err(Error::DimensionMismatch {
            expected: ds.d(),
            got: w.len(),
        });
    }
    if ds.n() == 0 {
        return Err(Error::Empty("test set".into()));
    }
    let scores = &ds.x * DVector::from_column_slice(w);
    Ok(scores.iter().map(|&s| classify_score(s).1).collect())
}

pub fn accuracy(model: &TrainedModel, test: &EncodedDataset) -> Result<f64> {
    let labels = predict_labels(&model.w, test)?;
    Ok(accuracy_of(&labels, &test.y))
}

/// `|Pr(ŷ=1 | z=1) − Pr(ŷ=1 | z=0)|`, or `None` when a group is empty.
pub fn risk_difference(model: &TrainedModel, test: &EncodedDataset) -> Result<Option<f64>> {
    let labels = predict_labels(&model.w, test)?;
    Ok(risk_difference_of(&labels, &test.z))
}

fn accuracy_of(labels: &[u8], y: &[u8]) -> f64 {
    let hits = labels.iter().zip(y).filter(|(a, b)| a == b).count();
    hits as f64 / labels.len() as f64
}

fn risk_difference_of(labels: &[u8], z: &[u8]) -> Option<f64> {
    let mut pos = [0usize; 2];
    let mut tot = [0usize; 2];
    for (&l, &g) in labels.iter().zip(z) {
        tot[g as usize] += 1;
        pos[g as usize] += l as usize;
    }
    if tot[0] == 0 || tot[1] == 0 {
        return None;
    }
    let rate = |g: usize| pos[g] as f64 / tot[g] as f64;
    Some((rate(1) - rate(0)).abs())
}

/// Mean and sample standard deviation (n − 1 denominator; 0 for one value).
pub fn mean_std(v: &[f64]) -> Option<(f64, f64)> {
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() == 1 {
        return Some((mean, 0.0));
    }
    let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
    Some((mean, (ss / (n - 1.0)).sqrt()))
}

pub const DEFAULT_EPSILONS: [f64; 6] = [1e-2, 0.031_622_776_601_683_79, 1e-1, 1.0, 3.162_277_660_168_379_5, 10.0];
pub const DEFAULT_DELTAS: [f64; 5] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7];

/// Parameters for a sweep over methods × ε (× δ for Gaussian methods).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub runs: usize,
    pub master_seed: u64,
    pub test_fraction: f64,
    pub alpha1: f64,
    pub s_attr: SAttr,
    /// ε_s / ε_n for split methods; the split is solved so the composite
    /// equals the grid ε.
    pub eps_ratio: f64,
    /// Draw a fresh train/test split for every run (otherwise run 0's split
    /// is reused).
    pub resplit: bool,
    pub policy: RegularizationPolicy,
    /// Worker threads; `None` uses the global pool.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            epsilons: DEFAULT_EPSILONS.to_vec(),
            deltas: DEFAULT_DELTAS.to_vec(),
            runs: 10,
            master_seed: 0,
            test_fraction: 0.2,
            alpha1: 1.0,
            s_attr: SAttr::Random,
            eps_ratio: 1.0,
            resplit: true,
            policy: RegularizationPolicy::default(),
            jobs: None,
        }
    }
}

/// One cell of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub method: Method,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("methods", "method list is empty"));
        }
        if self.runs == 0 {
            return Err(Error::invalid("runs", "need at least one run"));
        }
        let private = self.methods.iter().any(|m| m.is_private());
        if private && self.epsilons.is_empty() {
            return Err(Error::invalid("epsilons", "private methods need a nonempty epsilon grid"));
        }
        if self.methods.iter().any(|m| m.needs_delta()) && self.deltas.is_empty() {
            return Err(Error::invalid("deltas", "Gaussian methods need a nonempty delta grid"));
        }
        for &e in &self.epsilons {
            crate::mechanisms::check_epsilon("epsilon", e)?;
        }
        for &d in &self.deltas {
            crate::mechanisms::check_delta("delta", d)?;
        }
        crate::mechanisms::check_epsilon("eps_ratio", self.eps_ratio)?;
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::invalid("test_fraction", format!("{} must lie in (0, 1)", self.test_fraction)));
        }
        if !self.alpha1.is_finite() {
            return Err(Error::invalid("alpha1", "must be finite"));
        }
        if self.jobs == Some(0) {
            return Err(Error::invalid("jobs", "must be at least 1"));
        }
        self.policy.validate()
    }

    /// Grid in method, then ε, then δ order.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &method in &self.methods {
            if !method.is_private() {
                out.push(GridPoint {
                    method,
                    epsilon: None,
                    delta: None,
                });
                continue;
            }
            for &e in &self.epsilons {
                if method.needs_delta() {
                    out.extend(self.deltas.iter().map(|&d| GridPoint {
                        method,
                        epsilon: Some(e),
                        delta: Some(d),
                    }));
                } else {
                    out.push(GridPoint {
                        method,
                        epsilon: Some(e),
                        delta: None,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub point: usize,
    pub run: usize,
    pub method: Method,
    pub split_seed: u64,
    pub seed: u64,
    pub accuracy: Option<f64>,
    pub risk_difference: Option<f64>,
    pub budgets: Option<Budgets>,
    pub diagnostics: Option<Diagnostics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub method: Method,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub acc_mean: Option<f64>,
    pub acc_std: Option<f64>,
    pub rd_mean: Option<f64>,
    pub rd_std: Option<f64>,
    pub undefined_rd_count: usize,
    pub failed_runs: usize,
    /// Runs in which the solver raised at least one eigenvalue.
    pub clamped_runs: usize,
}

impl PointSummary {
    pub fn failed(&self) -> bool {
        self.acc_mean.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub dataset: Fingerprint,
    pub runs: usize,
    pub points: Vec<PointSummary>,
    pub results: Vec<RunResult>,
}

pub const CSV_HEADER: [&str; 8] = [
    "method",
    "epsilon",
    "delta",
    "acc_mean",
    "acc_std",
    "rd_mean",
    "rd_std",
    "undefined_rd_count",
];

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One row per grid point. Failed points leave their metric cells empty.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Schema(format!("csv write: {e}"));
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for p in &self.points {
            w.write_record([
                p.method.to_string(),
                cell(p.epsilon),
                cell(p.delta),
                cell(p.acc_mean),
                cell(p.acc_std),
                cell(p.rd_mean),
                cell(p.rd_std),
                p.undefined_rd_count.to_string(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Schema(format!("csv flush: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// True when every run of every point failed.
    pub fn all_failed(&self) -> bool {
        self.points.iter().all(PointSummary::failed)
    }
}

struct Job {
    point: usize,
    run: usize,
}

fn split_seed(cfg: &ExperimentConfig, run: usize) -> u64 {
    let r = if cfg.resplit { run as u64 } else { 0 };
    derive_seed(cfg.master_seed, r)
}

/// Train one model for a grid point. The noise seed also drives any
/// random choice of `x_s`.
pub fn train_point(
    trainer: &Trainer,
    train: &EncodedDataset,
    point: &GridPoint,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<TrainedModel> {
    let need_eps = || point.epsilon.ok_or_else(|| Error::invalid("epsilon", "missing for a private method"));
    let need_delta = || point.delta.ok_or_else(|| Error::invalid("delta", "missing for a Gaussian method"));
    match point.method {
        Method::LR => trainer.lr(train),
        Method::FairLR => trainer.fair_lr(train, cfg.alpha1),
        Method::FM => trainer.fm(train, need_eps()?, seed),
        Method::RelaxedFM => trainer.relaxed_fm(train, need_eps()?, need_delta()?, seed),
        Method::PDFC | Method::ADFC => {
            let s = choose_s_index(train, &cfg.s_attr, seed)?;
            let (eps_s, eps_n) = split_epsilon_for_target(need_eps()?, cfg.eps_ratio, train.d())?;
            if point.method == Method::PDFC {
                trainer.pdfc(train, &SplitBudget::laplace(s, eps_s, eps_n)?, cfg.alpha1, seed)
            } else {
                let part = split_delta_evenly(need_delta()?)?;
                trainer.adfc(train, &SplitBudget::gaussian(s, eps_s, eps_n, part, part)?, cfg.alpha1, seed)
            }
        }
    }
}

fn run_job(ds: &EncodedDataset, cfg: &ExperimentConfig, grid: &[GridPoint], job: &Job) -> RunResult {
    let point = &grid[job.point];
    let split_seed = split_seed(cfg, job.run);
    let seed = derive_seed(split_seed, 1 + job.point as u64);
    let mut out = RunResult {
        point: job.point,
        run: job.run,
        method: point.method,
        split_seed,
        seed,
        accuracy: None,
        risk_difference: None,
        budgets: None,
        diagnostics: None,
        error: None,
    };
    let trainer = Trainer::new(cfg.policy);
    let outcome = split(ds, cfg.test_fraction, split_seed).and_then(|(train, test)| {
        let model = train_point(&trainer, &train, point, cfg, seed)?;
        let labels = predict_labels(&model.w, &test)?;
        Ok((model, accuracy_of(&labels, &test.y), risk_difference_of(&labels, &test.z)))
    });
    match outcome {
        Ok((model, acc, rd)) => {
            out.accuracy = Some(acc);
            out.risk_difference = rd;
            out.budgets = model.budgets;
            out.diagnostics = Some(model.diagnostics);
        }
        Err(e) => {
            log::warn!("{} point {} run {} failed: {e}", point.method, job.point, job.run);
            out.error = Some(e.to_string());
        }
    }
    out
}

#[cfg(feature = "parallel")]
fn run_jobs(ds: &EncodedDataset, cfg: &ExperimentConfig, grid: &[GridPoint], jobs: &[Job]) -> Result<Vec<RunResult>> {
    use rayon::prelude::*;
    let work = || jobs.par_iter().map(|j| run_job(ds, cfg, grid, j)).collect();
    match cfg.jobs {
        None => Ok(work()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid("jobs", e.to_string()))?;
            Ok(pool.install(work))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run_jobs(ds: &EncodedDataset, cfg: &ExperimentConfig, grid: &[GridPoint], jobs: &[Job]) -> Result<Vec<RunResult>> {
    Ok(jobs.iter().map(|j| run_job(ds, cfg, grid, j)).collect())
}

fn summarize(point: &GridPoint, results: &[RunResult]) -> PointSummary {
    let ok: Vec<&RunResult> = results.iter().filter(|r| r.error.is_none()).collect();
    let acc: Vec<f64> = ok.iter().filter_map(|r| r.accuracy).collect();
    let rd: Vec<f64> = ok.iter().filter_map(|r| r.risk_difference).collect();
    let acc_ms = mean_std(&acc);
    let rd_ms = mean_std(&rd);
    PointSummary {
        method: point.method,
        epsilon: point.epsilon,
        delta: point.delta,
        acc_mean: acc_ms.map(|m| m.0),
        acc_std: acc_ms.map(|m| m.1),
        rd_mean: rd_ms.map(|m| m.0),
        rd_std: rd_ms.map(|m| m.1),
        undefined_rd_count: ok.len() - rd.len(),
        failed_runs: results.len() - ok.len(),
        clamped_runs: ok
            .iter()
            .filter(|r| r.diagnostics.as_ref().is_some_and(|d| d.clamped_eigenvalues > 0))
            .count(),
    }
}

/// Run every grid point `cfg.runs` times and aggregate. Failures are
/// recorded per run and never abort the sweep.
pub fn run_experiment(ds: &EncodedDataset, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let grid = cfg.grid();
    let jobs: Vec<Job> = (0..grid.len())
        .flat_map(|point| (0..cfg.runs).map(move |run| Job { point, run }))
        .collect();
    let results = run_jobs(ds, cfg, &grid, &jobs)?;
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, p)| summarize(p, &results[i * cfg.runs..(i + 1) * cfg.runs]))
        .collect();
    Ok(ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        dataset: ds.fingerprint(),
        runs: cfg.runs,
        points,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::Solver;
    use nalgebra::DMatrix;

    fn model(w: Vec<f64>) -> TrainedModel {
        TrainedModel {
            method: Method::LR,
            feature_names: (0..w.len()).map(|k| format!("f{k}")).collect(),
            w,
            budgets: None,
            sensitivity_used: None,
            alpha1: 0.0,
            seed: None,
            diagnostics: Diagnostics {
                solver: Solver::Spectral,
                clamped_eigenvalues: 0,
                min_eigenvalue: None,
                residual: 0.0,
                iterations: 0,
                converged: true,
            },
        }
    }

    fn ds(x: &[f64], y: &[u8], z: &[u8]) -> EncodedDataset {
        EncodedDataset::new(DMatrix::from_column_slice(y.len(), 1, x), y.to_vec(), z.to_vec(), vec!["f0".into()], None)
            .unwrap()
    }

    #[test]
    fn predict_examples() {
        assert_eq!(predict(&model(vec![0.0, 0.0]), &[0.3, 0.4]).unwrap(), (0.5, 1));
        let (p, l) = predict(&model(vec![1.0]), &[50.0]).unwrap();
        assert!(p >= 1.0 - 1e-20 && l == 1);
        let (p, _) = predict(&model(vec![1.0]), &[3f64.ln()]).unwrap();
        assert!((p - 0.75).abs() < 1e-15);
        assert!(predict(&model(vec![1.0]), &[1.0, 2.0]).is_err());
        let (p, l) = predict(&model(vec![1.0]), &[-800.0]).unwrap();
        assert!((0.0..1e-300).contains(&p) && l == 0);
    }

    #[test]
    fn threshold_consistency_at_tiny_scores() {
        for s in [-1e-300, -1e-20, -1e-17, 0.0, 1e-20] {
            let (p, l) = classify_score(s);
            assert_eq!(l == 1, p >= 0.5, "s = {s}");
        }
    }

    #[test]
    fn accuracy_and_rd() {
        let test = ds(&[1.0, 1.0, 1.0, 1.0, 1.0], &[1, 1, 1, 0, 0], &[0, 1, 0, 1, 0]);
        assert_eq!(accuracy(&model(vec![0.0]), &test).unwrap(), 0.6);
        assert_eq!(risk_difference(&model(vec![0.0]), &test).unwrap(), Some(0.0));

        let split = ds(&[1.0, 1.0, -1.0, -1.0], &[1, 1, 0, 0], &[1, 1, 0, 0]);
        assert_eq!(accuracy(&model(vec![1.0]), &split).unwrap(), 1.0);
        assert_eq!(risk_difference(&model(vec![1.0]), &split).unwrap(), Some(1.0));

        let one_group = ds(&[1.0, -1.0], &[1, 0], &[1, 1]);
        assert_eq!(risk_difference(&model(vec![1.0]), &one_group).unwrap(), None);
    }

    #[test]
    fn rd_symmetric_under_group_swap() {
        let labels = [1, 0, 1, 1, 0, 0, 1];
        let z = [0, 1, 1, 0, 0, 1, 1];
        let flipped: Vec<u8> = z.iter().map(|g| 1 - g).collect();
        assert_eq!(risk_difference_of(&labels, &z), risk_difference_of(&labels, &flipped));
    }

    #[test]
    fn sample_std_convention() {
        assert_eq!(mean_std(&[0.7]), Some((0.7, 0.0)));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[]), None);
    }

    #[test]
    fn default_grids() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.epsilons.len(), 6);
        assert_eq!(cfg.deltas.len(), 5);
        for (e, x) in cfg.epsilons.iter().zip([-2.0, -1.5, -1.0, 0.0, 0.5, 1.0]) {
            let expect = 10f64.powf(x);
            assert!((e - expect).abs() <= 1e-15 * expect, "{e} vs {expect}");
        }
        let one = ExperimentConfig {
            methods: vec![Method::PDFC],
            ..Default::default()
        };
        assert_eq!(one.grid().len(), 6);
        let gauss = ExperimentConfig {
            methods: vec![Method::ADFC],
            ..Default::default()
        };
        assert_eq!(gauss.grid().len(), 30);
    }

    #[test]
    fn empty_methods_rejected() {
        let cfg = ExperimentConfig {
            methods: vec![],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
