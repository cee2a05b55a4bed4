use balanced_chaos::field::{
    read_snapshot, sample_layer, write_snapshot, CirculantSampler, GridSpec, SmoothSampler,
};
use balanced_chaos::kernel::{KernelLab, MollifierSpec};
use balanced_chaos::rng::RngStream;
use statrs::distribution::{ContinuousCDF, Normal};

fn lab() -> KernelLab {
    KernelLab::new(MollifierSpec::default()).unwrap()
}

#[test]
fn layer_variance_and_lag_covariance() {
    let lab = lab();
    let grid = GridSpec::unit(32).unwrap();
    let cov = lab.layer_covariance(0.0, 1.5).unwrap();
    let sampler = CirculantSampler::for_layer(&cov, grid).unwrap();
    let lags = [0usize, 1, 3, 8];
    let mut acc = vec![0.0; lags.len()];
    let replicas = 1000;
    for k in 0..replicas {
        for f in sampler.sample_pair(RngStream::new(1, k, 0)) {
            for row in 0..32 {
                for col in 0..32 - 8 {
                    for (j, &l) in lags.iter().enumerate() {
                        acc[j] += f.at(row, col) * f.at(row, col + l);
                    }
                }
            }
        }
    }
    let per = (2 * replicas * 32 * 24) as f64;
    for (j, &l) in lags.iter().enumerate() {
        let want = cov.eval(l as f64 * grid.spacing());
        let got = acc[j] / per;
        assert!((got - want).abs() < 0.05, "lag {l}: {got} vs {want}");
    }
}

#[test]
fn single_site_is_gaussian() {
    let lab = lab();
    let grid = GridSpec::unit(16).unwrap();
    let sampler = CirculantSampler::for_layer(&lab.layer_covariance(0.0, 1.0).unwrap(), grid).unwrap();
    let mut xs: Vec<f64> = (0..2000)
        .flat_map(|k| sampler.sample_pair(RngStream::new(2, k, 0)).map(|f| f.at(5, 7)))
        .collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    let normal = Normal::new(0.0, 1.0).unwrap();
    let n = xs.len() as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = normal.cdf(x);
            (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value
    assert!(ks < 1.63 / n.sqrt(), "KS statistic {ks}");
}

#[test]
fn streams_are_reproducible() {
    let lab = lab();
    let grid = GridSpec::unit(16).unwrap();
    let a = sample_layer(&lab, 0.0, 1.0, grid, RngStream::new(9, 4, 2)).unwrap();
    let b = sample_layer(&lab, 0.0, 1.0, grid, RngStream::new(9, 4, 2)).unwrap();
    let c = sample_layer(&lab, 0.0, 1.0, grid, RngStream::new(9, 5, 2)).unwrap();
    assert_eq!(a.values, b.values);
    assert_ne!(a.values, c.values);
}

#[test]
fn smooth_field_variance() {
    let grid = GridSpec::unit(16).unwrap();
    let sampler = SmoothSampler::new(grid, 0.7).unwrap();
    let mut sq = 0.0;
    let mut count = 0.0;
    for k in 0..2000 {
        for f in sampler.sample_pair(RngStream::new(3, k, 0)) {
            sq += f.values.iter().map(|v| v * v).sum::<f64>();
            count += f.values.len() as f64;
        }
    }
    let v = sampler.variance();
    assert!((sq / count / v - 1.0).abs() < 0.1, "{} vs {v}", sq / count);
}

#[test]
fn snapshot_round_trip() {
    let lab = lab();
    let f = sample_layer(&lab, 0.0, 2.0, GridSpec::unit(32).unwrap(), RngStream::root(4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.bin");
    write_snapshot(&path, &f).unwrap();
    let g = read_snapshot(&path).unwrap();
    assert_eq!(f.values, g.values);
    assert_eq!(f.grid, g.grid);
}
