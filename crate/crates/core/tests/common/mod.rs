#![allow(dead_code)]

use fairfm::dataset::EncodedDataset;
use fairfm::polynomial::PolyObjective;
use fairfm::rng::SeededRng;
use nalgebra::DMatrix;

/// Nonnegative row with norm ≤ 1. Mixes random directions with the two
/// extreme shapes (all mass on one coordinate, mass spread evenly) and puts
/// half the rows exactly on the unit sphere.
pub fn random_row(rng: &mut SeededRng, d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = match rng.below(4) {
        0 => {
            let mut v = vec![0.0; d];
            v[rng.below(d)] = 1.0;
            v
        }
        1 => vec![1.0; d],
        _ => (0..d).map(|_| rng.uniform_open()).collect(),
    };
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let radius = if rng.below(2) == 0 { 1.0 } else { rng.uniform_open() };
    v.iter_mut().for_each(|x| *x *= radius / norm);
    // Rounding can push the norm a hair above 1; pull it back.
    let n2 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n2 > 1.0 {
        v.iter_mut().for_each(|x| *x /= n2 * (1.0 + 1e-15));
    }
    v
}

pub fn random_dataset(rng: &mut SeededRng, n: usize, d: usize) -> EncodedDataset {
    let mut flat = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        flat.extend(random_row(rng, d));
        y.push(rng.below(2) as u8);
        z.push(rng.below(2) as u8);
    }
    let names = (0..d).map(|k| format!("f{k}")).collect();
    EncodedDataset::new(DMatrix::from_row_slice(n, d, &flat), y, z, names, None).unwrap()
}

/// Same rows except row `i`, which gets a fresh random tuple.
pub fn neighbor(ds: &EncodedDataset, rng: &mut SeededRng) -> EncodedDataset {
    let i = rng.below(ds.n());
    let mut out = ds.clone();
    let row = random_row(rng, ds.d());
    for (k, v) in row.into_iter().enumerate() {
        out.x[(i, k)] = v;
    }
    out.y[i] = rng.below(2) as u8;
    out.z[i] = rng.below(2) as u8;
    EncodedDataset::new(out.x, out.y, out.z, out.feature_names, None).unwrap()
}

/// L1 and L2 distance over the degree-1 and degree-2 coefficients.
pub fn coef_diff(p: &PolyObjective, q: &PolyObjective) -> (f64, f64) {
    let (mut l1, mut l2) = (0.0, 0.0);
    for (a, b) in p.perturbable().zip(q.perturbable()) {
        let d = (a - b).abs();
        l1 += d;
        l2 += d * d;
    }
    (l1, l2.sqrt())
}

pub fn random_poly(rng: &mut SeededRng, d: usize) -> PolyObjective {
    let mut u = || 4.0 * rng.uniform_open() - 2.0;
    let c0 = u();
    let c1 = (0..d).map(|_| u()).collect();
    let c2 = (0..d * d).map(|_| u()).collect();
    PolyObjective::new(c0, c1, c2).unwrap()
}

/// `ln(1 + eˢ) − y·s` evaluated without the Taylor approximation.
pub fn exact_loss(s: f64, y: u8) -> f64 {
    let sp = if s > 0.0 { s + (-s).exp().ln_1p() } else { s.exp().ln_1p() };
    sp - f64::from(y) * s
}
