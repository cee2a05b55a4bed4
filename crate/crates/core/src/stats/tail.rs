//! Empirical survival curves and stretched-exponential exponent fits.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use super::fit::{weighted_line_fit, ExponentFit};
use super::{percentile_interval, quantile_sorted, BOOTSTRAP_RESAMPLES};
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const MIN_TAIL_SAMPLES: usize = 10_000;
const LEVEL: f64 = 0.95;

/// Two-sided Clopper-Pearson interval for `k` successes out of `n`.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> (f64, f64) {
    let a = (1.0 - level) / 2.0;
    let lo = if k == 0 {
        0.0
    } else {
        Beta::new(k as f64, (n - k + 1) as f64)
            .expect("positive shapes")
            .inverse_cdf(a)
    };
    let hi = if k == n {
        1.0
    } else {
        Beta::new((k + 1) as f64, (n - k) as f64)
            .expect("positive shapes")
            .inverse_cdf(1.0 - a)
    };
    (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub thresholds: Vec<f64>,
    /// `#{Q > x}` per threshold.
    pub counts: Vec<u64>,
    pub survival: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    pub samples: u64,
}

/// Thresholds at the empirical quantiles `levels` of the samples.
pub fn quantile_thresholds(samples: &[f64], levels: &[f64]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    levels.iter().map(|&q| quantile_sorted(&s, q)).collect()
}

pub fn tail_curve(samples: &[f64], thresholds: &[f64]) -> Result<TailCurve> {
    if samples.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "tail curve needs at least {MIN_TAIL_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if thresholds.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("thresholds must be ascending".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as u64;
    let counts: Vec<u64> = thresholds
        .iter()
        .map(|&x| n - sorted.partition_point(|v| *v <= x) as u64)
        .collect();
    let survival = counts.iter().map(|&k| k as f64 / n as f64).collect();
    let (ci_lo, ci_hi) = counts.iter().map(|&k| clopper_pearson(k, n, LEVEL)).unzip();
    Ok(TailCurve {
        thresholds: thresholds.to_vec(),
        counts,
        survival,
        ci_lo,
        ci_hi,
        samples: n,
    })
}

/// Admissible points of a tail fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailWindow {
    /// Largest survival probability used.
    pub p_max: f64,
    /// Smallest survival count used (`P >= min_count / n`).
    pub min_count: u64,
    /// Largest CI width of `ln(-ln P)` accepted.
    pub max_ci_width: f64,
}

impl Default for TailWindow {
    fn default() -> Self {
        Self {
            p_max: 0.1,
            min_count: 10,
            max_ci_width: 0.15,
        }
    }
}

fn loglog(p: f64) -> f64 {
    (-p.ln()).ln()
}

impl TailWindow {
    /// Indices of curve points inside the window.
    pub fn select(&self, curve: &TailCurve) -> Vec<usize> {
        (0..curve.thresholds.len())
            .filter(|&i| {
                let p = curve.survival[i];
                let (lo, hi) = (curve.ci_lo[i], curve.ci_hi[i]);
                p > 0.0
                    && p < 1.0
                    && p <= self.p_max
                    && curve.counts[i] >= self.min_count
                    && lo > 0.0
                    && hi < 1.0
                    && (loglog(lo) - loglog(hi)).abs() < self.max_ci_width
                    && curve.thresholds[i] > 0.0
            })
            .collect()
    }
}

/// Delta-method variance of `ln(-ln P_hat)`.
fn loglog_variance(p: f64, n: u64) -> f64 {
    (1.0 - p) / (n as f64 * p * p.ln().powi(2))
}

fn fit_points(thresholds: &[f64], survival: &[f64], n: u64, idx: &[usize]) -> Result<(f64, f64, f64)> {
    let x: Vec<f64> = idx.iter().map(|&i| thresholds[i].ln()).collect();
    let y: Vec<f64> = idx.iter().map(|&i| loglog(survival[i])).collect();
    let w: Vec<f64> = idx
        .iter()
        .map(|&i| 1.0 / loglog_variance(survival[i], n))
        .collect();
    let f = weighted_line_fit(&x, &y, Some(&w))?;
    Ok((f.slope, f.intercept, f.residual_norm))
}

/// Fits `ln(-ln P(Q > x)) = beta ln x + c` over the window.
///
/// The slope interval is a percentile bootstrap over multinomial resamples of the
/// binned counts behind the curve.
pub fn fit_stretched_exponential(
    curve: &TailCurve,
    window: &TailWindow,
    rng: RngStream,
) -> Result<ExponentFit> {
    let idx = window.select(curve);
    if idx.len() < 4 {
        return Err(Error::Window(format!(
            "only {} curve points fall inside the fit window (need 4)",
            idx.len()
        )));
    }
    let n = curve.samples;
    let (slope, intercept, residual_norm) =
        fit_points(&curve.thresholds, &curve.survival, n, &idx)?;

    // bins between consecutive thresholds; the last bin is the survival count itself
    let k = curve.counts.len();
    let mut bins = Vec::with_capacity(k + 1);
    bins.push(n - curve.counts[0]);
    for i in 0..k {
        let next = if i + 1 < k { curve.counts[i + 1] } else { 0 };
        bins.push(curve.counts[i] - next);
    }
    let mut r = rng.rng();
    let slopes: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .filter_map(|_| {
            let mut left = n;
            let mut mass = 1.0;
            let mut draw = Vec::with_capacity(bins.len());
            for (j, &b) in bins.iter().enumerate() {
                let c = if j + 1 == bins.len() || mass <= 0.0 {
                    left
                } else {
                    let p = (b as f64 / n as f64 / mass).clamp(0.0, 1.0);
                    Binomial::new(left, p).expect("valid binomial").sample(&mut r)
                };
                draw.push(c);
                left -= c;
                mass -= b as f64 / n as f64;
            }
            let mut surv = vec![0.0; k];
            let mut acc = 0;
            for i in (0..k).rev() {
                acc += draw[i + 1];
                surv[i] = acc as f64 / n as f64;
            }
            if idx.iter().any(|&i| surv[i] <= 0.0 || surv[i] >= 1.0) {
                return None;
            }
            fit_points(&curve.thresholds, &surv, n, &idx).ok().map(|f| f.0)
        })
        .collect();
    let (lo, hi) = percentile_interval(slopes, LEVEL);
    let ci = if lo.is_finite() {
        (lo.min(slope), hi.max(slope))
    } else {
        (slope, slope)
    };
    Ok(ExponentFit {
        slope,
        intercept,
        window: (
            curve.thresholds[idx[0]].ln(),
            curve.thresholds[*idx.last().unwrap()].ln(),
        ),
        points: idx.len(),
        residual_norm,
        ci,
        target: None,
    })
}
