//! Batched-mean moment estimates with bootstrap standard errors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmc::pairwise_sum;
use crate::rng::RngStream;

pub const BATCHES: usize = 100;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Smallest replica count accepted by [`estimate_moments`].
pub const MIN_REPLICAS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub order: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: u64,
    /// Non-finite samples dropped before estimation.
    pub excluded: u64,
    pub scheme: String,
}

/// Estimates `E[Q^n]` for each order from i.i.d. samples.
///
/// Samples are split into [`BATCHES`] contiguous batches; the standard error is
/// the bootstrap standard deviation of the mean of resampled batch means.
pub fn estimate_moments(
    samples: &[f64],
    orders: &[f64],
    rng: RngStream,
) -> Result<Vec<MomentEstimate>> {
    if orders.iter().any(|o| !(*o >= 0.0)) {
        return Err(Error::InvalidArgument("moment orders must be >= 0".into()));
    }
    let finite: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
    let excluded = (samples.len() - finite.len()) as u64;
    if finite.len() < MIN_REPLICAS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_REPLICAS} finite samples, got {}",
            finite.len()
        )));
    }
    let per = finite.len() / BATCHES;
    let used = per * BATCHES;
    let scheme = format!("{BATCHES} batches x {per}, {BOOTSTRAP_RESAMPLES} bootstrap resamples");
    let mut out = Vec::with_capacity(orders.len());
    for (k, &order) in orders.iter().enumerate() {
        if order == 0.0 {
            out.push(MomentEstimate {
                order,
                estimate: 1.0,
                stderr: 0.0,
                replicas: used as u64,
                excluded,
                scheme: scheme.clone(),
            });
            continue;
        }
        let powered: Vec<f64> = finite[..used].iter().map(|v| v.powf(order)).collect();
        let means: Vec<f64> = powered
            .chunks_exact(per)
            .map(|c| pairwise_sum(c) / per as f64)
            .collect();
        let estimate = pairwise_sum(&means) / BATCHES as f64;
        let mut r = rng.with_layer(k as u32).rng();
        let boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .map(|_| {
                let s: f64 = (0..BATCHES).map(|_| means[r.random_range(0..BATCHES)]).sum();
                s / BATCHES as f64
            })
            .collect();
        let bm = boot.iter().sum::<f64>() / boot.len() as f64;
        let var = boot.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / (boot.len() - 1) as f64;
        out.push(MomentEstimate {
            order,
            estimate,
            stderr: var.sqrt(),
            replicas: used as u64,
            excluded,
            scheme: scheme.clone(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_and_constant_samples() {
        let s = vec![1.0; 500];
        let m = estimate_moments(&s, &[0.0, 1.0, 2.0], RngStream::root(3)).unwrap();
        assert_eq!((m[0].estimate, m[0].stderr), (1.0, 0.0));
        assert_eq!((m[2].estimate, m[2].stderr), (1.0, 0.0));
        assert!(estimate_moments(&s[..50], &[1.0], RngStream::root(3)).is_err());
    }

    #[test]
    fn stderr_matches_iid_formula() {
        use rand_distr::{Distribution, StandardNormal};
        let mut r = RngStream::root(9).rng();
        let s: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut r)).collect();
        let m = estimate_moments(&s, &[1.0], RngStream::root(4)).unwrap();
        let iid = 1.0 / (20_000f64).sqrt();
        assert!((m[0].stderr / iid - 1.0).abs() < 0.2, "{} vs {iid}", m[0].stderr);
    }

    #[test]
    fn non_finite_samples_are_counted() {
        let mut s = vec![2.0; 300];
        s[7] = f64::NAN;
        let m = estimate_moments(&s, &[1.0], RngStream::root(1)).unwrap();
        assert_eq!(m[0].excluded, 1);
        assert_eq!(m[0].estimate, 2.0);
    }
}
