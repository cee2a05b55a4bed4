//! Finite-difference gradient statistics.

use super::FieldSample;
use crate::error::{Error, Result};

fn sup_gradient(values: &[f64], n: usize, h: f64) -> f64 {
    let at = |i: usize, j: usize| values[i * n + j];
    // central differences inside, one-sided on the boundary
    let diff = |lo: f64, hi: f64, span: usize| (hi - lo) / (span as f64 * h);
    let mut sup = 0.0f64;
    for i in 0..n {
        let (i0, i1) = (i.saturating_sub(1), (i + 1).min(n - 1));
        for j in 0..n {
            let (j0, j1) = (j.saturating_sub(1), (j + 1).min(n - 1));
            let gx = diff(at(i, j0), at(i, j1), j1 - j0);
            let gy = diff(at(i0, j), at(i1, j), i1 - i0);
            sup = sup.max(gx.hypot(gy));
        }
    }
    sup
}

/// `max |grad X|` over the grid.
pub fn gradient_sup(field: &FieldSample) -> f64 {
    sup_gradient(&field.values, field.n(), field.spacing())
}

/// `max |grad (f + X)|` for a deterministic grid function `f`.
pub fn gradient_sup_tilted(field: &FieldSample, f: &[f64]) -> Result<f64> {
    if f.len() != field.values.len() {
        return Err(Error::InvalidArgument(format!(
            "tilt has {} values, field has {}",
            f.len(),
            field.values.len()
        )));
    }
    let sum: Vec<f64> = field.values.iter().zip(f).map(|(x, g)| x + g).collect();
    Ok(sup_gradient(&sum, field.n(), field.spacing()))
}
