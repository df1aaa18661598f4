mod common;

use common::{coef_diff, exact_loss, neighbor, random_dataset, random_poly};
use fairfm::mechanisms::compose::{compose_split_delta, compose_split_epsilon};
use fairfm::mechanisms::noise::{gaussian_log_term, gaussian_sigma};
use fairfm::mechanisms::partition::{monomials, partition_monomials};
use fairfm::mechanisms::sensitivity::{l1_sensitivity_fair, l1_sensitivity_lr, l2_sensitivity_fair, l2_sensitivity_lr};
use fairfm::mechanisms::{perturb, Sampler};
use fairfm::optimizer::{canonicalize, minimize_quadratic, QuadraticForm, RegularizationPolicy};
use fairfm::polynomial::{eval_poly, fair_poly, fairness_vector, gradient_poly, lr_poly};
use fairfm::rng::SeededRng;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lr_poly_is_additive(seed in any::<u64>(), n1 in 1usize..6, n2 in 1usize..6, d in 1usize..6) {
        let mut rng = SeededRng::new(seed);
        let a = random_dataset(&mut rng, n1, d);
        let b = random_dataset(&mut rng, n2, d);
        let idx_a: Vec<usize> = (0..n1).collect();
        let x = DMatrix::from_fn(n1 + n2, d, |i, k| if i < n1 { a.x[(i, k)] } else { b.x[(i - n1, k)] });
        let y = a.y.iter().chain(&b.y).copied().collect();
        let z = a.z.iter().chain(&b.z).copied().collect();
        let both = fairfm::dataset::EncodedDataset::new(x, y, z, a.feature_names.clone(), None).unwrap();
        prop_assert_eq!(both.subset(&idx_a).unwrap().x, a.x.clone());
        let (pa, pb, pu) = (lr_poly(&a), lr_poly(&b), lr_poly(&both));
        prop_assert!((pu.c0 - pa.c0 - pb.c0).abs() < 1e-12);
        for ((u, v), w) in pu.perturbable().zip(pa.perturbable()).zip(pb.perturbable()) {
            prop_assert!((u - v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn clean_c2_is_scaled_gram(seed in any::<u64>(), n in 1usize..8, d in 1usize..6) {
        let mut rng = SeededRng::new(seed);
        let ds = random_dataset(&mut rng, n, d);
        let p = lr_poly(&ds);
        for e in 0..d {
            for l in 0..d {
                let direct: f64 = (0..n).map(|i| ds.x[(i, e)] * ds.x[(i, l)]).sum::<f64>() / 8.0;
                prop_assert!((p.quad(e, l) - direct).abs() < 1e-10);
                prop_assert_eq!(p.quad(e, l), p.quad(l, e));
            }
        }
    }

    #[test]
    fn fair_c1_matches_per_tuple_sum(seed in any::<u64>(), alpha in -2.0f64..2.0) {
        let mut rng = SeededRng::new(seed);
        let ds = random_dataset(&mut rng, 5, 3);
        let zbar = ds.z.iter().map(|&z| f64::from(z)).sum::<f64>() / 5.0;
        let p = fair_poly(&ds, alpha);
        let c = fairness_vector(&ds);
        for k in 0..3 {
            let mut clean = 0.0;
            let mut fair = 0.0;
            for i in 0..5 {
                clean += (0.5 - f64::from(ds.y[i])) * ds.x[(i, k)];
                fair += (f64::from(ds.z[i]) - zbar) * ds.x[(i, k)];
            }
            prop_assert!((c.c[k] - fair).abs() < 1e-12);
            prop_assert!((p.c1[k] - (clean + alpha * fair)).abs() < 1e-12);
        }
    }

    #[test]
    fn taylor_remainder_is_bounded(seed in any::<u64>(), d in 1usize..8, r in 0.0f64..0.5) {
        let mut rng = SeededRng::new(seed);
        let t = random_dataset(&mut rng, 1, d);
        let mut w: Vec<f64> = (0..d).map(|_| rng.uniform_open() - 0.5).collect();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        w.iter_mut().for_each(|v| *v *= r / norm);
        let s: f64 = (0..d).map(|k| t.x[(0, k)] * w[k]).sum();
        let approx = eval_poly(&lr_poly(&t), &w).unwrap();
        prop_assert!((approx - exact_loss(s, t.y[0])).abs() <= s.abs().powi(3) / 16.0 + 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>(), d in 1usize..7) {
        let mut rng = SeededRng::new(seed);
        let p = random_poly(&mut rng, d);
        let w: Vec<f64> = (0..d).map(|_| 2.0 * rng.uniform_open() - 1.0).collect();
        let g = gradient_poly(&p, &w).unwrap();
        let h = 1e-5;
        for k in 0..d {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[k] += h;
            wm[k] -= h;
            let fd = (eval_poly(&p, &wp).unwrap() - eval_poly(&p, &wm).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[k]).abs() <= 1e-5 * g[k].abs().max(1.0), "k={} fd={} g={}", k, fd, g[k]);
        }
    }

    #[test]
    fn canonical_form_evaluates_identically(seed in any::<u64>(), d in 1usize..7) {
        let mut rng = SeededRng::new(seed);
        let p = random_poly(&mut rng, d);
        let q = canonicalize(&p);
        prop_assert_eq!(q.a.clone(), q.a.transpose());
        let w: Vec<f64> = (0..d).map(|_| 4.0 * rng.uniform_open() - 2.0).collect();
        prop_assert!((q.eval(&w) - eval_poly(&p, &w).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn partition_is_a_disjoint_cover(d in 1usize..10, s_frac in 0.0f64..1.0) {
        let s = ((d as f64 * s_frac) as usize).min(d - 1);
        let part = partition_monomials(d, s).unwrap();
        prop_assert_eq!(part.phi_s.len(), 2 * d);
        prop_assert_eq!(part.phi_s.len() + part.phi_n.len(), d + d * d);
        for m in monomials(d) {
            let in_s = part.phi_s.contains(&m);
            let in_n = part.phi_n.contains(&m);
            prop_assert!(in_s != in_n);
            prop_assert_eq!(in_s, m.contains(s));
        }
    }

    #[test]
    fn composition_is_monotone(a in 1e-3f64..10.0, b in 1e-3f64..10.0, bump in 1e-3f64..1.0, d in 1usize..50,
                               ds in 1e-9f64..0.5, dn in 1e-9f64..0.5) {
        let base = compose_split_epsilon(a, b, d).unwrap();
        prop_assert!(compose_split_epsilon(a + bump, b, d).unwrap() > base);
        if d > 1 {
            prop_assert!(compose_split_epsilon(a, b + bump, d).unwrap() > base);
        }
        let delta = compose_split_delta(ds, dn).unwrap();
        prop_assert!(delta > 0.0 && delta < 1.0);
        prop_assert!(delta >= ds.max(dn));
    }

    #[test]
    fn perturbation_is_seed_deterministic(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = SeededRng::new(seed);
        let p = random_poly(&mut rng, d);
        let part = partition_monomials(d, d - 1).unwrap();
        let ns = Sampler::laplace(0.7).unwrap();
        let nn = Sampler::gaussian(1.3).unwrap();
        let a = perturb(&p, ns, nn, &part, &mut SeededRng::new(seed)).unwrap();
        let b = perturb(&p, ns, nn, &part, &mut SeededRng::new(seed)).unwrap();
        let bits = |q: &fairfm::polynomial::PolyObjective| q.perturbable().map(f64::to_bits).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn strongly_convex_solution_is_global_minimum(seed in any::<u64>(), d in 1usize..10) {
        let mut rng = SeededRng::new(seed);
        let m = DMatrix::from_fn(d, d, |_, _| rng.uniform_open() - 0.5);
        let a = &m * m.transpose() + DMatrix::identity(d, d) * 0.05;
        let b = DVector::from_fn(d, |_, _| 10.0 * (rng.uniform_open() - 0.5));
        let q = QuadraticForm { a, b, c: 0.3 };
        let (w, diag) = minimize_quadratic(&q, &RegularizationPolicy::default()).unwrap();
        prop_assert_eq!(diag.clamped_eigenvalues, 0);
        prop_assert!(diag.residual <= 1e-8 * (1.0 + q.b.amax()));
        let f = q.eval(&w);
        for _ in 0..100 {
            let h: Vec<f64> = w.iter().map(|v| v + 0.1 * (rng.uniform_open() - 0.5)).collect();
            prop_assert!(f <= q.eval(&h));
        }
    }

    #[test]
    fn clean_neighbors_respect_sensitivity(seed in any::<u64>(), d in 1usize..6, n in 1usize..6) {
        let mut rng = SeededRng::new(seed);
        let a = random_dataset(&mut rng, n, d);
        let b = neighbor(&a, &mut rng);
        let (l1, l2) = coef_diff(&lr_poly(&a), &lr_poly(&b));
        prop_assert!(l1 <= l1_sensitivity_lr(d).unwrap() + 1e-12);
        prop_assert!(l2 <= l2_sensitivity_lr(d).unwrap() + 1e-12);
        let (f1, f2) = coef_diff(&fair_poly(&a, 1.0), &fair_poly(&b, 1.0));
        prop_assert!(f1 <= l1_sensitivity_fair(d).unwrap() + 1e-12);
        prop_assert!(f2 <= l2_sensitivity_fair(d).unwrap() + 1e-12);
    }
}

#[test]
fn sigma_solves_its_defining_equation() {
    for eps in [1e-2, 1e-1, 0.5, 1.0, 3.0, 10.0] {
        for delta in [1e-3, 1e-4, 1e-5, 1e-6, 1e-7] {
            let sigma = gaussian_sigma(eps, delta, 2.5).unwrap();
            let l = gaussian_log_term(delta);
            let lhs = sigma * 2.0 * eps / (std::f64::consts::SQRT_2 * 2.5);
            let rhs = l.sqrt() + (l + eps).sqrt();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs, "eps={eps} delta={delta}");
        }
    }
}
