//! Monte Carlo orchestration and estimators.

mod experiments;
mod fit;
mod laplace;
mod moments;
mod tail;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use experiments::{
    cascade_experiment, gradient_moment_scan, gradient_statistic, laplace_monotonicity,
    moment_sweep, nested_q_samples, scaling_regression, small_ball_estimate, CascadeReport,
    GradientCell, GradientTable, LaplaceMonotonicity, MomentSweep, QSampler, ScalingPoint,
    ScalingReport, SmallBallCurve, SmallBallPoint,
};
pub use fit::{weighted_line_fit, ExponentFit, LineFit};
pub use laplace::{laplace_curve, laplace_tail_convert, LaplaceCurve, TailConversion};
pub use moments::{estimate_moments, MomentEstimate, BATCHES, BOOTSTRAP_RESAMPLES};
pub use tail::{
    clopper_pearson, fit_stretched_exponential, quantile_thresholds, tail_curve, TailCurve,
    TailWindow, MIN_TAIL_SAMPLES,
};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
}

impl Estimate {
    pub fn exact(mean: f64, count: u64) -> Self {
        Self {
            mean,
            stderr: 0.0,
            count,
        }
    }

    pub fn from_samples(samples: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = samples.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                count: 0,
            };
        }
        let mean = crate::gmc::pairwise_sum(&v) / n as f64;
        let stderr = if n > 1 {
            let sq: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
            (crate::gmc::pairwise_sum(&sq) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            f64::NAN
        };
        Self {
            mean,
            stderr,
            count: n as u64,
        }
    }

    /// `|a - b| / sqrt(se_a^2 + se_b^2)`.
    pub fn z_distance(&self, other: &Estimate) -> f64 {
        (self.mean - other.mean).abs() / self.stderr.hypot(other.stderr)
    }
}

/// Evaluates `f(replica)` for every replica index in parallel, in index order.
///
/// Reductions over the result are done sequentially by the caller, so results do
/// not depend on the number of worker threads.
pub fn replicate<T: Send>(replicas: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..replicas).into_par_iter().map(f).collect()
}

/// Like [`replicate`] for producers that yield two replicas per call
/// (`2k` and `2k + 1`); the output is truncated to `replicas`.
pub fn replicate_pairs<T: Send>(replicas: u64, f: impl Fn(u64) -> [T; 2] + Sync + Send) -> Vec<T> {
    let mut out: Vec<T> = (0..replicas.div_ceil(2))
        .into_par_iter()
        .flat_map_iter(f)
        .collect();
    out.truncate(replicas as usize);
    out
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile interval of a bootstrap distribution.
pub fn percentile_interval(mut values: Vec<f64>, level: f64) -> (f64, f64) {
    values.retain(|v| v.is_finite());
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let tail = (1.0 - level) / 2.0;
    (
        quantile_sorted(&values, tail),
        quantile_sorted(&values, 1.0 - tail),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_of_known_samples() {
        let e = Estimate::from_samples([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(e.count, 4);
    }

    #[test]
    fn pairs_are_ordered_and_truncated() {
        let v = replicate_pairs(5, |k| [2 * k, 2 * k + 1]);
        assert_eq!(v, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn quantiles() {
        let s = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile_sorted(&s, 0.5), 1.5);
        assert_eq!(quantile_sorted(&s, 1.0), 3.0);
        let (lo, hi) = percentile_interval((0..101).map(|k| k as f64).collect(), 0.9);
        assert!((lo - 5.0).abs() < 1e-12 && (hi - 95.0).abs() < 1e-12);
    }
}
