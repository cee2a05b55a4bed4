use balanced_chaos::rng::RngStream;
use balanced_chaos::stats::{
    clopper_pearson, fit_stretched_exponential, quantile_thresholds, replicate, tail_curve,
    Estimate, TailWindow,
};
use rand::Rng;

fn weibull(k: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut r = RngStream::root(seed).rng();
    (0..n)
        .map(|_| (-(1.0 - r.random::<f64>()).ln()).powf(1.0 / k))
        .collect()
}

#[test]
fn recovers_weibull_shape() {
    for (k, seed) in [(1.0, 1), (2.5, 2)] {
        let s = weibull(k, 200_000, seed);
        let th = quantile_thresholds(&s, &[0.9, 0.97, 0.99, 0.997, 0.999, 0.9997]);
        let curve = tail_curve(&s, &th).unwrap();
        let fit = fit_stretched_exponential(&curve, &TailWindow::default(), RngStream::root(seed + 10)).unwrap();
        assert!((fit.slope / k - 1.0).abs() < 0.08, "k = {k}, slope {}", fit.slope);
        assert!(fit.ci.0 < fit.slope && fit.slope < fit.ci.1);
    }
}

#[test]
fn clopper_pearson_covers() {
    let (p, n) = (0.07, 60u64);
    let mut r = RngStream::root(5).rng();
    let trials = 4000;
    let covered = (0..trials)
        .filter(|_| {
            let k = (0..n).filter(|_| r.random::<f64>() < p).count() as u64;
            let (lo, hi) = clopper_pearson(k, n, 0.95);
            lo <= p && p <= hi
        })
        .count();
    assert!(covered as f64 / trials as f64 >= 0.945, "coverage {covered}/{trials}");
}

#[test]
fn estimate_of_uniform_mean() {
    let xs = replicate(20_000, |k| RngStream::new(6, k, 0).rng().random::<f64>());
    let e = Estimate::from_samples(xs);
    assert!((e.mean - 0.5).abs() < 4.0 * e.stderr);
    assert!((e.stderr - (1.0 / 12.0 / 20_000.0f64).sqrt()).abs() < 1e-4);
}

#[test]
fn replicate_is_ordered() {
    let v = replicate(1000, |k| k * 3);
    assert!(v.iter().enumerate().all(|(i, &x)| x == 3 * i as u64));
}
