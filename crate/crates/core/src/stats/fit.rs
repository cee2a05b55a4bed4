//! Weighted straight-line fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Model-based standard error of the slope.
    pub slope_stderr: f64,
    /// `sqrt(sum w r^2)`.
    pub residual_norm: f64,
    pub points: usize,
}

/// Fits a line through at least two points; `weights` default to 1.
pub fn weighted_line_fit(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n || weights.is_some_and(|w| w.len() != n) {
        return Err(Error::Window(format!(
            "line fit needs >= 2 matching points, got {n}"
        )));
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..n).map(w).sum();
    let mx = (0..n).map(|i| w(i) * x[i]).sum::<f64>() / sw;
    let my = (0..n).map(|i| w(i) * y[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..n).map(|i| w(i) * (x[i] - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Window("abscissae are all equal".into()));
    }
    let sxy: f64 = (0..n).map(|i| w(i) * (x[i] - mx) * (y[i] - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = (0..n)
        .map(|i| w(i) * (y[i] - slope * x[i] - intercept).powi(2))
        .sum();
    // with inverse-variance weights the slope variance is 1 / sxx
    let slope_stderr = if weights.is_some() {
        (1.0 / sxx).sqrt()
    } else if n > 2 {
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        residual_norm: rss.sqrt(),
        points: n,
    })
}

/// Slope fit over a validated window with a bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Abscissa range `(min, max)` of the points used.
    pub window: (f64, f64),
    pub points: usize,
    pub residual_norm: f64,
    /// 95% interval on the slope.
    pub ci: (f64, f64),
    /// Theoretical value reported next to the fit, when there is one.
    pub target: Option<f64>,
}

impl ExponentFit {
    pub fn ci_width(&self) -> f64 {
        self.ci.1 - self.ci.0
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci.0 <= value && value <= self.ci.1
    }
}
