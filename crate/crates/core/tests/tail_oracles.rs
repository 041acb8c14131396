//! Tail-index estimators against brute-force and distributional oracles.

use ecc_core::simulate::draw_symmetric_pareto;
use ecc_core::tail::{hill, select_k_ks, select_k_mindist_with, MinDistOptions, TailMethod};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pareto_sample(rng: &mut ChaCha8Rng, alpha: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / alpha))
        .collect()
}

/// Straightforward re-derivation of the minimum-distance rule: for each k,
/// Hill from scratch, then the sup-distance over the window.
fn mindist_brute(values: &[f64], k_min: usize, k_max: usize, window: usize) -> usize {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut best = (f64::INFINITY, 0);
    for k in k_min..=k_max {
        let t = v[k];
        let alpha = k as f64 / v[..k].iter().map(|x| x.ln() - t.ln()).sum::<f64>();
        let mut d = 0.0f64;
        for j in 1..=window {
            d = d.max((v[j - 1] - t * (k as f64 / j as f64).powf(1.0 / alpha)).abs());
        }
        if d < best.0 {
            best = (d, k);
        }
    }
    best.1
}

#[test]
fn mindist_matches_brute_force_argmin() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..60 {
        let n = rng.random_range(20..600);
        let alpha = rng.random_range(1.5..6.0);
        let v = pareto_sample(&mut rng, alpha, n);
        let opts = MinDistOptions::default();
        let window = opts.window(n);
        let fit = select_k_mindist_with(&v, &opts).unwrap();
        assert_eq!(fit.method, TailMethod::MinDist);
        assert_eq!(
            fit.k,
            mindist_brute(&v, 2, window, window),
            "trial {trial} n {n}"
        );
        let h = hill(&v, fit.k).unwrap();
        assert_eq!(h.alpha_hat, fit.alpha_hat);
    }
}

/// KS distance of a continuous power law with exponent fitted by ML on
/// `x >= x_min`, evaluated directly from the definition.
fn ks_brute(values: &[f64]) -> (f64, usize) {
    let mut asc = values.to_vec();
    asc.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = (f64::INFINITY, 0.0, 0);
    for (i, &x_min) in asc.iter().enumerate().skip(1) {
        let tail: Vec<f64> = asc.iter().copied().filter(|&x| x >= x_min).collect();
        if tail.len() < 10 || asc[i - 1] == x_min {
            continue;
        }
        let m = tail.len() as f64;
        let a = 1.0 + m / tail.iter().map(|x| (x / x_min).ln()).sum::<f64>();
        let mut d = 0.0f64;
        for x in &tail {
            let emp_le = tail.iter().filter(|y| *y <= x).count() as f64 / m;
            let emp_lt = tail.iter().filter(|y| *y < x).count() as f64 / m;
            let model = 1.0 - (x / x_min).powf(1.0 - a);
            d = d.max((emp_le - model).abs()).max((model - emp_lt).abs());
        }
        if d < best.0 {
            best = (d, x_min, tail.len());
        }
    }
    (best.1, best.2)
}

#[test]
fn ks_matches_brute_force_on_exact_quantiles() {
    let n = 100;
    let v: Vec<f64> = (1..=n)
        .map(|i| (i as f64 / n as f64).powf(-1.0 / 3.0))
        .collect();
    let fit = select_k_ks(&v).unwrap();
    let (x_min, k) = ks_brute(&v);
    assert_eq!(fit.threshold, x_min);
    assert_eq!(fit.k, k);
    // exact Pareto quantiles: the cut-off sits in the bottom decile
    let mut asc = v.clone();
    asc.sort_by(f64::total_cmp);
    assert!(fit.threshold <= asc[n / 10], "x_min {}", fit.threshold);
    assert!((fit.alpha_hat - 3.0).abs() < 0.5, "{}", fit.alpha_hat);
}

#[test]
fn ks_matches_brute_force_on_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.random_range(20..200);
        let v: Vec<f64> = (0..n)
            .map(|_| 1.0 + rng.random::<f64>() + (1.0 - rng.random::<f64>()).powf(-1.0 / 2.5))
            .collect();
        let fit = select_k_ks(&v).unwrap();
        let (x_min, k) = ks_brute(&v);
        assert_eq!((fit.threshold, fit.k), (x_min, k));
    }
}

#[test]
fn hill_converges_on_pareto() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for alpha in [1.0, 3.0, 5.0] {
        let n = 100_000;
        let v = pareto_sample(&mut rng, alpha, n);
        let k = n / 10;
        let a = hill(&v, k).unwrap().alpha_hat;
        // sd of the Hill estimator is alpha / sqrt(k)
        assert!(
            (a - alpha).abs() < 4.0 * alpha / (k as f64).sqrt(),
            "alpha {alpha}: {a}"
        );
    }
}

#[test]
fn symmetric_pareto_survival() {
    let alpha = 3.0;
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z: Vec<f64> = (0..n)
        .map(|_| draw_symmetric_pareto(alpha, 1.0 - rng.random::<f64>(), rng.random()).unwrap())
        .collect();
    let positive = z.iter().filter(|x| **x > 0.0).count() as f64 / n as f64;
    assert!((positive - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    for t in [1.0f64, 2.0, 4.0, 8.0] {
        let p = t.powf(-alpha);
        let emp = z.iter().filter(|x| x.abs() >= t).count() as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
        assert!((emp - p).abs() <= 3.0 * se, "t={t}: {emp} vs {p}");
    }
}
