//! Distributional checks of the fGn/fBm samplers. Every check compares a
//! Monte Carlo mean against theory within five standard errors; seeds are
//! fixed so the outcome is reproducible.

use roughness::sim::{fgn_autocov, simulate_fbm, FbmSampler, FgnSampler, SimBackend};

/// Mean and standard error of `xs`.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn assert_within_5se(label: &str, xs: &[f64], want: f64) {
    let (mean, se) = mean_se(xs);
    assert!((mean - want).abs() <= 5.0 * se, "{label}: mean {mean} vs {want}, se {se}");
}

fn check_autocov(backend: SimBackend, steps: usize, hurst: f64, seeds: u64) {
    let sampler = FgnSampler::new(steps, hurst, backend).unwrap();
    let mut per_lag = vec![Vec::new(); 6];
    for seed in 0..seeds {
        let x = sampler.sample(seed);
        for (lag, acc) in per_lag.iter_mut().enumerate() {
            let c: f64 = x.iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
            acc.push(c / (steps - lag) as f64);
        }
    }
    for (lag, acc) in per_lag.iter().enumerate() {
        assert_within_5se(&format!("{backend:?} lag {lag}"), acc, fgn_autocov(lag as u64, hurst).unwrap());
    }
}

#[test]
fn circulant_autocovariance_4096() {
    check_autocov(SimBackend::circulant(), 4096, 0.3, 200);
}

#[test]
fn cholesky_autocovariance_4096() {
    check_autocov(SimBackend::cholesky(), 4096, 0.3, 200);
}

#[test]
fn fbm_terminal_variance_brownian() {
    let sampler = FbmSampler::new(12, 0.5, SimBackend::default()).unwrap();
    let w1: Vec<f64> = (0..500).map(|s| sampler.sample(s).values()[4096].powi(2)).collect();
    assert_within_5se("Var W(1), H = 0.5", &w1, 1.0);
}

#[test]
fn fbm_midpoint_variance_rough() {
    let sampler = FbmSampler::new(12, 0.1, SimBackend::default()).unwrap();
    let w: Vec<f64> = (0..500).map(|s| sampler.sample(s).values()[2048].powi(2)).collect();
    assert_within_5se("E W(1/2)², H = 0.1", &w, 0.5f64.powf(0.2));
}

#[test]
fn self_similarity() {
    for (hurst, backend) in [(0.2, SimBackend::circulant()), (0.7, SimBackend::cholesky())] {
        let sampler = FbmSampler::new(10, hurst, backend).unwrap();
        let q = 3;
        let factor = (2.0 * hurst * q as f64).exp2();
        let diffs: Vec<f64> = (0..600)
            .map(|s| {
                let w = sampler.sample(1000 + s);
                let v = w.values();
                factor * v[1024 >> q].powi(2) - v[1024].powi(2)
            })
            .collect();
        assert_within_5se(&format!("self-similarity H = {hurst}"), &diffs, 0.0);
    }
}

#[test]
fn stationary_increments() {
    for (hurst, backend) in [(0.1, SimBackend::circulant()), (0.8, SimBackend::cholesky())] {
        let sampler = FbmSampler::new(9, hurst, backend).unwrap();
        let paths: Vec<Vec<f64>> = (0..800).map(|s| sampler.sample(77 + s).into_values()).collect();
        let incr = |v: &[f64], i: usize| v[i + 1] - v[i];
        for lag in 1..=5 {
            let diffs: Vec<f64> =
                paths.iter().map(|v| incr(v, 0) * incr(v, lag) - incr(v, 300) * incr(v, 300 + lag)).collect();
            assert_within_5se(&format!("H = {hurst}, lag {lag}"), &diffs, 0.0);
        }
    }
}

#[test]
fn same_seed_same_path_across_constructions() {
    let a = simulate_fbm(11, 0.35, 42, SimBackend::default()).unwrap();
    let b = FbmSampler::new(11, 0.35, SimBackend::default()).unwrap().sample(42);
    assert_eq!(a.values(), b.values());
    assert_eq!(b.seed(), 42);
}
