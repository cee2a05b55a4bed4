//! Empirical Laplace transforms and the tail/Laplace exponent conversion.

use serde::{Deserialize, Serialize};

use super::fit::{weighted_line_fit, LineFit};
use crate::error::{Error, Result};
use crate::gmc::pairwise_sum;

/// Share of the empirical MGF above which a single sample dominates.
pub const DOMINANCE_SHARE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceCurve {
    pub mu: Vec<f64>,
    /// `ln mean(e^{mu Q})`.
    pub log_mgf: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Fraction of the empirical MGF carried by the largest sample.
    pub max_share: Vec<f64>,
    pub dominated: Vec<bool>,
    /// Fit of `ln ln E` against `ln mu` over the valid points.
    pub growth: Option<LineFit>,
    pub samples: u64,
}

/// Weights `e^{mu q - max}`, their mean, and the delta-method stderr of the log mean.
pub(crate) fn log_mean_exp(samples: &[f64], mu: f64) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let top = samples.iter().fold(f64::NEG_INFINITY, |m, q| m.max(mu * q));
    let w: Vec<f64> = samples.iter().map(|q| (mu * q - top).exp()).collect();
    let sum = pairwise_sum(&w);
    let mean = sum / n;
    let sq: Vec<f64> = w.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (top + mean.ln(), (var / n).sqrt() / mean, 1.0 / sum)
}

pub fn laplace_curve(samples: &[f64], mu_grid: &[f64]) -> Result<LaplaceCurve> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    if mu_grid.iter().any(|m| !(*m >= 0.0)) {
        return Err(Error::InvalidArgument("mu must be >= 0".into()));
    }
    let mut log_mgf = Vec::new();
    let mut stderr = Vec::new();
    let mut max_share = Vec::new();
    for &mu in mu_grid {
        if mu == 0.0 {
            log_mgf.push(0.0);
            stderr.push(0.0);
            max_share.push(1.0 / samples.len() as f64);
            continue;
        }
        let (l, s, share) = log_mean_exp(samples, mu);
        log_mgf.push(l);
        stderr.push(s);
        max_share.push(share);
    }
    let dominated: Vec<bool> = max_share.iter().map(|s| *s > DOMINANCE_SHARE).collect();
    let valid: Vec<usize> = (0..mu_grid.len())
        .filter(|&i| mu_grid[i] > 0.0 && log_mgf[i] > 0.0 && !dominated[i])
        .collect();
    let growth = if valid.len() >= 2 {
        let x: Vec<f64> = valid.iter().map(|&i| mu_grid[i].ln()).collect();
        let y: Vec<f64> = valid.iter().map(|&i| log_mgf[i].ln()).collect();
        weighted_line_fit(&x, &y, None).ok()
    } else {
        None
    };
    Ok(LaplaceCurve {
        mu: mu_grid.to_vec(),
        log_mgf,
        stderr,
        max_share,
        dominated,
        growth,
        samples: samples.len() as u64,
    })
}

/// Tail exponents implied by a Laplace growth exponent `1/(1-p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConversion {
    /// `1/p`, from the Chebyshev route.
    pub upper: f64,
    /// `(1-q)/(q(1-p))`, from the Paley-Zygmund route given a lower exponent `q`.
    pub lower: Option<f64>,
}

pub fn laplace_tail_convert(p: f64, q: Option<f64>) -> Result<TailConversion> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} must lie in (0, 1)")));
    }
    let lower = match q {
        None => None,
        Some(q) if q > 0.0 && q <= p => Some((1.0 - q) / (q * (1.0 - p))),
        Some(q) => return Err(Error::Domain(format!("q = {q} must lie in (0, p]"))),
    };
    Ok(TailConversion {
        upper: 1.0 / p,
        lower,
    })
}
