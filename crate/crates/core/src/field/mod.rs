//! Sampling of the scale-layered field `X_t`, its increments and the smooth
//! perturbation field on regular two-dimensional grids.

mod circulant;
mod fft;
mod gradient;
mod smooth;
mod snapshot;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelLab;
use crate::rng::RngStream;

pub use circulant::{torus_points, CirculantSampler, LayeredSampler, EPS_PSD, MAX_CLIPPED_FRACTION};
pub use gradient::{gradient_sup, gradient_sup_tilted};
pub use smooth::{sample_smooth_z, SmoothSampler};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotHeader};

/// Default scale step of a uniform schedule.
pub const DEFAULT_DELTA: f64 = 0.25;

/// Regular `n x n` grid covering `[0, side]^2`, sampled through a periodic torus
/// at least `pad_factor` times larger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub side: f64,
    pub pad_factor: usize,
}

impl GridSpec {
    /// Grid on the unit square with the default 2x padding.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, 1.0, 2)
    }

    pub fn new(n: usize, side: f64, pad_factor: usize) -> Result<Self> {
        let grid = Self {
            n,
            side,
            pad_factor,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid size must be a power of two >= 2, got {}",
                self.n
            )));
        }
        if self.pad_factor < 2 || !(self.pad_factor * self.n).is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "pad factor must be >= 2 with pad_factor * n a power of two, got {}",
                self.pad_factor
            )));
        }
        if !(self.side.is_finite() && self.side > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid side must be positive, got {}",
                self.side
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn cells(&self) -> usize {
        self.n * self.n
    }

    /// Whether the grid resolves correlation length `e^{-scale}` with four points.
    pub fn resolves(&self, scale: f64) -> bool {
        self.spacing() <= (-scale).exp() / 4.0 * (1.0 + 1e-12)
    }

    pub fn check_resolves(&self, scale: f64) -> Result<()> {
        if self.resolves(scale) {
            Ok(())
        } else {
            Err(Error::Unresolved {
                scale,
                spacing: self.spacing(),
                limit: (-scale).exp() / 4.0,
            })
        }
    }

    /// Smallest power-of-two unit-square grid resolving `scale`.
    pub fn for_scale(scale: f64) -> Self {
        let mut n = 2;
        while 1.0 / (n as f64) > (-scale).exp() / 4.0 * (1.0 + 1e-12) {
            n *= 2;
        }
        Self {
            n,
            side: 1.0,
            pad_factor: 2,
        }
    }

    /// The same lattice stretched by `factor`.
    pub fn dilated(&self, factor: f64) -> Self {
        Self {
            side: self.side * factor,
            ..*self
        }
    }
}

/// Breakpoints `0 = t_0 < t_1 < ... < t_K = t` of the scale decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    breakpoints: Vec<f64>,
}

impl ScaleSchedule {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.first() != Some(&0.0) {
            return Err(Error::InvalidArgument(
                "schedule must start at scale 0".into(),
            ));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("non-finite breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { breakpoints })
    }

    /// Uniform steps of `delta` up to `t`; the last step may be shorter.
    pub fn uniform(t: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need t >= 0 and delta > 0, got t = {t}, delta = {delta}"
            )));
        }
        let mut points = vec![0.0];
        let mut k = 1;
        loop {
            let b = k as f64 * delta;
            if b >= t - 1e-12 * delta {
                break;
            }
            points.push(b);
            k += 1;
        }
        if t > 0.0 {
            points.push(t);
        }
        Self::new(points)
    }

    /// Breakpoints at the given scales (sorted, zero prepended when missing).
    pub fn through(scales: &[f64]) -> Result<Self> {
        let mut points = vec![0.0];
        points.extend(scales.iter().copied().filter(|s| *s > 0.0));
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        Self::new(points)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn total(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn layers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn layer_count(&self) -> usize {
        self.breakpoints.len() - 1
    }
}

/// A grid realization of `X_t`, of an increment `X_t - X_s`, or of the smooth field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub grid: GridSpec,
    pub scale_lo: f64,
    pub scale_hi: f64,
    pub seed_path: String,
    /// Row-major `n x n` cell values; row index is the second coordinate.
    pub values: Vec<f64>,
}

impl FieldSample {
    pub fn zeros(grid: GridSpec, scale_lo: f64, scale_hi: f64) -> Self {
        Self {
            grid,
            scale_lo,
            scale_hi,
            seed_path: String::new(),
            values: vec![0.0; grid.cells()],
        }
    }

    /// Loads a deterministic function evaluated at the cell centers.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let h = grid.spacing();
        let n = grid.n;
        let center = |k: usize| (k as f64 + 0.5) * h;
        let values = (0..n * n)
            .map(|k| f(center(k % n), center(k / n)))
            .collect();
        Self {
            grid,
            scale_lo: 0.0,
            scale_hi: 0.0,
            seed_path: "deterministic".into(),
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// Pointwise variance `E[X(x)^2]` implied by the scale interval.
    pub fn variance(&self) -> f64 {
        self.scale_hi - self.scale_lo
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.n + col]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Adds an independent field on the same grid; the scale intervals must abut.
    pub fn add_assign(&mut self, other: &FieldSample) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("grid mismatch".into()));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        self.scale_hi += other.variance();
        Ok(())
    }

    /// The `size x size` block starting at (`row`, `col`).
    pub fn block(&self, row: usize, col: usize, size: usize) -> Vec<f64> {
        let n = self.grid.n;
        let mut out = Vec::with_capacity(size * size);
        for i in row..row + size {
            out.extend_from_slice(&self.values[i * n + col..i * n + col + size]);
        }
        out
    }
}

/// Samples one stationary layer with covariance `c_{s_lo, s_hi}`.
pub fn sample_layer(
    lab: &KernelLab,
    s_lo: f64,
    s_hi: f64,
    grid: GridSpec,
    rng: RngStream,
) -> Result<FieldSample> {
    let cov = lab.layer_covariance(s_lo, s_hi)?;
    CirculantSampler::for_layer(&cov, grid).map(|s| s.sample(rng))
}

/// `X_t` as the sum of independent layers of `schedule`, layer `k` drawn from
/// stream `rng.with_layer(k)`.
pub fn sample_field(
    lab: &KernelLab,
    t: f64,
    schedule: &ScaleSchedule,
    grid: GridSpec,
    rng: RngStream,
) -> Result<FieldSample> {
    if (schedule.total() - t).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "schedule ends at {} but t = {t}",
            schedule.total()
        )));
    }
    if t == 0.0 {
        let mut z = FieldSample::zeros(grid, 0.0, 0.0);
        z.seed_path = rng.path();
        return Ok(z);
    }
    let sampler = LayeredSampler::new(lab, schedule, grid)?;
    Ok(sampler.sample_sum(rng))
}

/// A sample with the law of `X_t - X_s` on the grid, realized as `X_{t-s}(e^s x)`.
pub fn sample_increment_by_scaling(
    lab: &KernelLab,
    s: f64,
    t: f64,
    grid: GridSpec,
    rng: RngStream,
) -> Result<FieldSample> {
    IncrementSampler::new(lab, s, t, grid).map(|sampler| sampler.sample(rng))
}

/// Reusable sampler of scaled increments.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    grid: GridSpec,
    s: f64,
    t: f64,
    inner: CirculantSampler,
}

impl IncrementSampler {
    pub fn new(lab: &KernelLab, s: f64, t: f64, grid: GridSpec) -> Result<Self> {
        if !(s >= 0.0 && s < t) {
            return Err(Error::InvalidArgument(format!(
                "increment needs 0 <= s < t, got s = {s}, t = {t}"
            )));
        }
        grid.check_resolves(t)?;
        let cov = lab.layer_covariance(0.0, t - s)?;
        let inner = CirculantSampler::for_layer(&cov, grid.dilated(s.exp()))?;
        Ok(Self { grid, s, t, inner })
    }

    fn relabel(&self, mut f: FieldSample) -> FieldSample {
        f.grid = self.grid;
        f.scale_lo = self.s;
        f.scale_hi = self.t;
        f
    }

    pub fn sample(&self, rng: RngStream) -> FieldSample {
        self.relabel(self.inner.sample(rng))
    }

    pub fn sample_pair(&self, rng: RngStream) -> [FieldSample; 2] {
        self.inner.sample_pair(rng).map(|f| self.relabel(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::unit(64).is_ok());
        assert!(GridSpec::unit(48).is_err());
        assert!(GridSpec::new(64, 1.0, 3).is_err());
        assert!(GridSpec::new(64, 0.0, 2).is_err());
        assert_eq!(GridSpec::for_scale(3.0).n, 128);
        assert_eq!(GridSpec::for_scale(2.0).n, 32);
        assert_eq!(GridSpec::for_scale(0.0).n, 4);
        assert!(GridSpec::unit(32).unwrap().resolves(2.0));
        assert!(!GridSpec::unit(16).unwrap().resolves(2.0));
    }

    #[test]
    fn schedules() {
        let s = ScaleSchedule::uniform(1.0, 0.25).unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let s = ScaleSchedule::uniform(0.6, 0.25).unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 0.25, 0.5, 0.6]);
        assert_eq!(s.total(), 0.6);
        assert_eq!(ScaleSchedule::uniform(0.0, 0.25).unwrap().layer_count(), 0);
        assert!(ScaleSchedule::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(ScaleSchedule::new(vec![0.5, 1.0]).is_err());
        let s = ScaleSchedule::through(&[2.0, 1.0, 3.0]).unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn blocks_are_row_major() {
        let grid = GridSpec::unit(4).unwrap();
        let f = FieldSample::from_fn(grid, |x, y| x * 4.0 + y * 40.0);
        assert_eq!(f.at(1, 2), 0.625 * 4.0 + 0.375 * 40.0);
        assert_eq!(f.block(2, 2, 2), vec![f.at(2, 2), f.at(2, 3), f.at(3, 2), f.at(3, 3)]);
    }
}
