//! Browser bindings for the fairfm demo page. Every export returns a JSON
//! string; errors surface as JS exceptions carrying the message.

use fairfm::dataset::{split, EncodedDataset};
use fairfm::evaluation::{accuracy, risk_difference};
use fairfm::mechanisms::noise::gaussian_sigma;
use fairfm::mechanisms::sensitivity::{l1_sensitivity_fair, l1_sensitivity_lr, l2_sensitivity_fair, l2_sensitivity_lr};
use fairfm::mechanisms::{split_delta_evenly, split_epsilon_for_target, SplitBudget};
use fairfm::polynomial::{fair_poly, lr_poly, PolyObjective};
use fairfm::rng::{derive_seed, SeededRng};
use fairfm::trainers::{Method, Trainer};
use nalgebra::DMatrix;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js<E: std::fmt::Display>(e: E) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(js)
}

#[derive(Serialize)]
struct NoisePoint {
    epsilon: f64,
    laplace_std: f64,
    gaussian_std: f64,
    fair_laplace_std: f64,
    fair_gaussian_std: f64,
}

/// Per-coefficient noise standard deviation over a log-spaced ε grid for
/// the clean and fairness-augmented objectives.
#[wasm_bindgen]
pub fn noise_curve(d: usize, delta: f64) -> Result<String, JsError> {
    let (l1, l2) = (l1_sensitivity_lr(d).map_err(js)?, l2_sensitivity_lr(d).map_err(js)?);
    let (f1, f2) = (l1_sensitivity_fair(d).map_err(js)?, l2_sensitivity_fair(d).map_err(js)?);
    let points = (0..=40)
        .map(|i| {
            let epsilon = 10f64.powf(-2.0 + 3.0 * i as f64 / 40.0);
            Ok(NoisePoint {
                epsilon,
                laplace_std: std::f64::consts::SQRT_2 * l1 / epsilon,
                gaussian_std: gaussian_sigma(epsilon, delta, l2).map_err(js)?,
                fair_laplace_std: std::f64::consts::SQRT_2 * f1 / epsilon,
                fair_gaussian_std: gaussian_sigma(epsilon, delta, f2).map_err(js)?,
            })
        })
        .collect::<Result<Vec<_>, JsError>>()?;
    to_json(&points)
}

/// Two features in the unit square scaled by 1/√2; the group shifts the
/// second feature upward and the label follows `b − a` plus noise.
fn synthetic(seed: u64, n: usize) -> Result<EncodedDataset, JsError> {
    let mut rng = SeededRng::new(seed);
    let mut flat = Vec::with_capacity(2 * n);
    let (mut y, mut z) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let g = rng.below(2) as u8;
        let a = rng.uniform_open();
        let b = (rng.uniform_open() + 0.25 * f64::from(g)).min(1.0);
        let u = rng.uniform_open();
        let noise = (u / (1.0 - u)).ln() * 0.3;
        flat.push(a / std::f64::consts::SQRT_2);
        flat.push(b / std::f64::consts::SQRT_2);
        y.push(u8::from(3.0 * (b - a) + noise > 0.0));
        z.push(g);
    }
    EncodedDataset::new(DMatrix::from_row_slice(n, 2, &flat), y, z, vec!["a".into(), "b".into()], None).map_err(js)
}

#[derive(Serialize)]
struct DemoPoint {
    a: f64,
    b: f64,
    y: u8,
    z: u8,
}

#[derive(Serialize)]
struct DemoResult {
    method: Method,
    w: Vec<f64>,
    accuracy: f64,
    risk_difference: Option<f64>,
    epsilon: Option<f64>,
    delta: Option<f64>,
    test: Vec<DemoPoint>,
}

/// Train one model on a synthetic two-feature dataset and score it on a
/// held-out quarter. Split methods spend `eps` as the composite budget.
#[wasm_bindgen]
pub fn train_demo(method: &str, eps: f64, delta: f64, alpha1: f64, seed: u64) -> Result<String, JsError> {
    let method: Method = method.parse().map_err(js)?;
    let ds = synthetic(derive_seed(seed, 0), 400)?;
    let (train, test) = split(&ds, 0.25, derive_seed(seed, 1)).map_err(js)?;
    let noise_seed = derive_seed(seed, 2);
    let t = Trainer::default();
    let model = match method {
        Method::LR => t.lr(&train),
        Method::FairLR => t.fair_lr(&train, alpha1),
        Method::FM => t.fm(&train, eps, noise_seed),
        Method::RelaxedFM => t.relaxed_fm(&train, eps, delta, noise_seed),
        Method::PDFC | Method::ADFC => {
            let (eps_s, eps_n) = split_epsilon_for_target(eps, 1.0, train.d()).map_err(js)?;
            let s = (noise_seed % 2) as usize;
            let budget = if method == Method::PDFC {
                SplitBudget::laplace(s, eps_s, eps_n)
            } else {
                let part = split_delta_evenly(delta).map_err(js)?;
                SplitBudget::gaussian(s, eps_s, eps_n, part, part)
            }
            .map_err(js)?;
            if method == Method::PDFC {
                t.pdfc(&train, &budget, alpha1, noise_seed)
            } else {
                t.adfc(&train, &budget, alpha1, noise_seed)
            }
        }
    }
    .map_err(js)?;
    let scale = std::f64::consts::SQRT_2;
    let points = (0..test.n())
        .map(|i| DemoPoint {
            a: test.x[(i, 0)] * scale,
            b: test.x[(i, 1)] * scale,
            y: test.y[i],
            z: test.z[i],
        })
        .collect();
    let budgets = model.budgets.as_ref();
    to_json(&DemoResult {
        method,
        accuracy: accuracy(&model, &test).map_err(js)?,
        risk_difference: risk_difference(&model, &test).map_err(js)?,
        epsilon: budgets.map(|b| b.epsilon),
        delta: budgets.and_then(|b| b.delta),
        w: model.w,
        test: points,
    })
}

fn random_row(rng: &mut SeededRng, d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = match rng.below(3) {
        0 => {
            let mut v = vec![0.0; d];
            v[rng.below(d)] = 1.0;
            v
        }
        1 => vec![1.0; d],
        _ => (0..d).map(|_| rng.uniform_open()).collect(),
    };
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt() * (1.0 + 1e-12);
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn diff(p: &PolyObjective, q: &PolyObjective) -> (f64, f64) {
    p.perturbable().zip(q.perturbable()).fold((0.0, 0.0), |(l1, l2), (a, b)| {
        let t = (a - b).abs();
        (l1 + t, l2 + t * t)
    })
}

#[derive(Serialize)]
struct Probe {
    d: usize,
    trials: usize,
    l1: [f64; 2],
    l2: [f64; 2],
    fair_l1: [f64; 2],
    fair_l2: [f64; 2],
    histogram: Vec<usize>,
}

/// Largest coefficient change seen over random neighbouring datasets,
/// each paired with its analytic bound, plus a 20-bin histogram of the
/// fair L1 change as a fraction of its bound.
#[wasm_bindgen]
pub fn sensitivity_probe(d: usize, trials: usize, seed: u64) -> Result<String, JsError> {
    let bounds = [
        l1_sensitivity_lr(d).map_err(js)?,
        l2_sensitivity_lr(d).map_err(js)?,
        l1_sensitivity_fair(d).map_err(js)?,
        l2_sensitivity_fair(d).map_err(js)?,
    ];
    let mut rng = SeededRng::new(seed);
    let mut worst = [0.0f64; 4];
    let mut histogram = vec![0; 20];
    for _ in 0..trials {
        let n = 1 + rng.below(6);
        let mut flat = Vec::with_capacity(n * d);
        let (mut y, mut z) = (Vec::new(), Vec::new());
        for _ in 0..n {
            flat.extend(random_row(&mut rng, d));
            y.push(rng.below(2) as u8);
            z.push(rng.below(2) as u8);
        }
        let names: Vec<String> = (0..d).map(|k| format!("f{k}")).collect();
        let a = EncodedDataset::new(DMatrix::from_row_slice(n, d, &flat), y.clone(), z.clone(), names.clone(), None)
            .map_err(js)?;
        let i = rng.below(n);
        flat.splice(i * d..(i + 1) * d, random_row(&mut rng, d));
        y[i] = rng.below(2) as u8;
        z[i] = rng.below(2) as u8;
        let b = EncodedDataset::new(DMatrix::from_row_slice(n, d, &flat), y, z, names, None).map_err(js)?;
        let (c1, c2) = diff(&lr_poly(&a), &lr_poly(&b));
        let (f1, f2) = diff(&fair_poly(&a, 1.0), &fair_poly(&b, 1.0));
        for (w, v) in worst.iter_mut().zip([c1, c2.sqrt(), f1, f2.sqrt()]) {
            *w = w.max(v);
        }
        let bin = ((f1 / bounds[2]) * 20.0).floor().clamp(0.0, 19.0) as usize;
        histogram[bin] += 1;
    }
    to_json(&Probe {
        d,
        trials,
        l1: [worst[0], bounds[0]],
        l2: [worst[1], bounds[1]],
        fair_l1: [worst[2], bounds[2]],
        fair_l2: [worst[3], bounds[3]],
        histogram,
    })
}
