//! Smooth stationary perturbation field with spectral density `A (1+|xi|^2)^{-3}`.
//!
//! The field is a truncated random Fourier series on a period-`L` torus and is
//! evaluated exactly at the grid points with two separable sums, so its cost does
//! not depend on how fine the grid is relative to the correlation length.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::{FieldSample, GridSpec};
use crate::error::{Error, Result};
use crate::kernel::spectral_kernel_r;
use crate::rng::RngStream;

/// Fourier modes per axis.
pub const DEFAULT_MODES: usize = 64;
/// Clearance between the domain and its periodic images.
const CLEARANCE: f64 = 12.0;

#[derive(Debug, Clone)]
pub struct SmoothSampler {
    grid: GridSpec,
    amplitude: f64,
    modes: usize,
    /// Coefficient scale per (k2, k1) mode, row-major over `modes x modes`.
    coeffs: Vec<f64>,
    /// `exp(i xi_k x_j)` for mode `k` and grid index `j`.
    phases: Vec<Complex64>,
}

impl SmoothSampler {
    pub fn new(grid: GridSpec, amplitude: f64) -> Result<Self> {
        Self::with_modes(grid, amplitude, DEFAULT_MODES)
    }

    pub fn with_modes(grid: GridSpec, amplitude: f64, modes: usize) -> Result<Self> {
        grid.validate()?;
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "amplitude must be >= 0, got {amplitude}"
            )));
        }
        if modes < 4 || !modes.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "mode count must be even and >= 4, got {modes}"
            )));
        }
        let period = (grid.side + CLEARANCE).max(16.0);
        let dxi = 2.0 * PI / period;
        // symmetric band without the unpaired Nyquist mode
        let freq = |k: usize| (k as f64 - (modes / 2) as f64) * dxi;
        let coeffs = (0..modes * modes)
            .map(|idx| {
                let (k2, k1) = (idx / modes, idx % modes);
                if k1 == 0 || k2 == 0 {
                    return 0.0;
                }
                let xi = freq(k1).hypot(freq(k2));
                (amplitude * spectral_kernel_r(2, xi)).sqrt() * dxi
            })
            .collect();
        let h = grid.spacing();
        let phases = (0..modes * grid.n)
            .map(|idx| {
                let (k, j) = (idx / grid.n, idx % grid.n);
                Complex64::from_polar(1.0, freq(k) * j as f64 * h)
            })
            .collect();
        Ok(Self {
            grid,
            amplitude,
            modes,
            coeffs,
            phases,
        })
    }

    /// Pointwise variance of the truncated series.
    pub fn variance(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn sample_pair(&self, rng: RngStream) -> [FieldSample; 2] {
        let n = self.grid.n;
        let m = self.modes;
        let make = |values: Vec<f64>, tag: &str| FieldSample {
            grid: self.grid,
            scale_lo: 0.0,
            scale_hi: 0.0,
            seed_path: format!("{}/{tag}", rng.path()),
            values,
        };
        if self.amplitude == 0.0 {
            return [make(vec![0.0; n * n], "re"), make(vec![0.0; n * n], "im")];
        }
        let mut r = rng.rng();
        let noise: Vec<Complex64> = self
            .coeffs
            .iter()
            .map(|&c| {
                let a: f64 = StandardNormal.sample(&mut r);
                let b: f64 = StandardNormal.sample(&mut r);
                Complex64::new(a, b) * c
            })
            .collect();
        // partial[k2][x] = sum_k1 noise[k2][k1] e^{i xi_k1 x}
        let mut partial = vec![Complex64::default(); m * n];
        for k2 in 0..m {
            let row = &noise[k2 * m..(k2 + 1) * m];
            let out = &mut partial[k2 * n..(k2 + 1) * n];
            for (k1, w) in row.iter().enumerate() {
                if *w == Complex64::default() {
                    continue;
                }
                let ph = &self.phases[k1 * n..(k1 + 1) * n];
                for (o, p) in out.iter_mut().zip(ph) {
                    *o += w * p;
                }
            }
        }
        let mut field = vec![Complex64::default(); n * n];
        for k2 in 0..m {
            let part = &partial[k2 * n..(k2 + 1) * n];
            let ph = &self.phases[k2 * n..(k2 + 1) * n];
            for (y, p) in ph.iter().enumerate() {
                let out = &mut field[y * n..(y + 1) * n];
                for (o, b) in out.iter_mut().zip(part) {
                    *o += p * b;
                }
            }
        }
        let re = field.iter().map(|z| z.re).collect();
        let im = field.iter().map(|z| z.im).collect();
        [make(re, "re"), make(im, "im")]
    }

    pub fn sample(&self, rng: RngStream) -> FieldSample {
        let [a, _] = self.sample_pair(rng);
        a
    }
}

/// One draw of the smooth perturbation field.
pub fn sample_smooth_z(grid: GridSpec, amplitude: f64, rng: RngStream) -> Result<FieldSample> {
    Ok(SmoothSampler::new(grid, amplitude)?.sample(rng))
}
