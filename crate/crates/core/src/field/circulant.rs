//! Circulant embedding of compactly supported radial covariances.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::fft::TorusFft;
use super::{FieldSample, GridSpec, ScaleSchedule};
use crate::error::{Error, Result};
use crate::kernel::{KernelLab, LayerCovariance};
use crate::rng::RngStream;

/// Negative eigenvalues above `-EPS_PSD * max` are clipped to zero.
pub const EPS_PSD: f64 = 1e-10;
/// Largest admissible share of clipped spectral mass.
pub const MAX_CLIPPED_FRACTION: f64 = 1e-6;

/// Immutable sampler of one stationary Gaussian field on a grid.
#[derive(Debug, Clone)]
pub struct CirculantSampler {
    grid: GridSpec,
    scale_lo: f64,
    scale_hi: f64,
    torus: usize,
    /// `sqrt(lambda_k) / M` for every torus frequency, row-major. Empty for the zero field.
    amplitudes: Vec<f64>,
    fft: Option<TorusFft>,
    min_eigenvalue: f64,
    clipped_fraction: f64,
}

/// Torus side (in grid points) large enough that the periodic covariance agrees
/// with `c` on every pair of domain points.
pub fn torus_points(grid: &GridSpec, support: f64) -> usize {
    let h = grid.spacing();
    let need = [
        (grid.pad_factor * grid.n) as f64,
        (grid.side + support) / h,
        2.0 * support / h,
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    (need.ceil() as usize).next_power_of_two()
}

impl CirculantSampler {
    /// Sampler for the layer covariance `c_{s_lo, s_hi}`; doubles the torus once
    /// if the embedding is not positive semi-definite.
    pub fn for_layer(cov: &LayerCovariance, grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        grid.check_resolves(cov.s_hi)?;
        if cov.variance() == 0.0 {
            return Ok(Self {
                grid,
                scale_lo: cov.s_lo,
                scale_hi: cov.s_hi,
                torus: 0,
                amplitudes: Vec::new(),
                fft: None,
                min_eigenvalue: 0.0,
                clipped_fraction: 0.0,
            });
        }
        let c = |r: f64| cov.eval(r);
        let m = torus_points(&grid, cov.support_radius());
        match Self::embed(&c, grid, m) {
            Err(Error::NotPositiveDefinite { .. }) => Self::embed(&c, grid, 2 * m),
            other => other,
        }
        .map(|mut s| {
            s.scale_lo = cov.s_lo;
            s.scale_hi = cov.s_hi;
            s
        })
    }

    /// Sampler for an arbitrary radial covariance on an `m x m` torus.
    pub fn from_covariance(c: &dyn Fn(f64) -> f64, grid: GridSpec, m: usize) -> Result<Self> {
        grid.validate()?;
        Self::embed(c, grid, m)
    }

    fn embed(c: &dyn Fn(f64) -> f64, grid: GridSpec, m: usize) -> Result<Self> {
        if !m.is_power_of_two() || m < grid.n {
            return Err(Error::InvalidArgument(format!(
                "torus side {m} must be a power of two >= n"
            )));
        }
        let h = grid.spacing();
        let half = m / 2;
        // c is radial: tabulate one quadrant of wrapped distances and mirror it
        let quad: Vec<f64> = (0..=half)
            .flat_map(|i| (0..=half).map(move |j| (i, j)))
            .map(|(i, j)| c(h * ((i * i + j * j) as f64).sqrt()))
            .collect();
        let wrap = |k: usize| if k <= half { k } else { m - k };
        let mut buf: Vec<Complex64> = (0..m * m)
            .map(|k| Complex64::new(quad[wrap(k / m) * (half + 1) + wrap(k % m)], 0.0))
            .collect();
        let fft = TorusFft::new(m);
        fft.forward(&mut buf);

        let max = buf.iter().fold(0.0f64, |a, z| a.max(z.re));
        let min = buf.iter().fold(f64::INFINITY, |a, z| a.min(z.re));
        if !(max > 0.0) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
                relative: f64::NEG_INFINITY,
                torus: m,
            });
        }
        if min < -EPS_PSD * max {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
                relative: min / max,
                torus: m,
            });
        }
        let total: f64 = buf.iter().map(|z| z.re.abs()).sum();
        let clipped: f64 = buf.iter().filter(|z| z.re < 0.0).map(|z| -z.re).sum();
        let clipped_fraction = (clipped / total).max(0.0);
        if clipped_fraction >= MAX_CLIPPED_FRACTION {
            return Err(Error::ExcessiveClipping {
                fraction: clipped_fraction,
            });
        }
        let norm = 1.0 / m as f64;
        let amplitudes = buf.iter().map(|z| z.re.max(0.0).sqrt() * norm).collect();
        Ok(Self {
            grid,
            scale_lo: 0.0,
            scale_hi: c(0.0),
            torus: m,
            amplitudes,
            fft: Some(fft),
            min_eigenvalue: min,
            clipped_fraction,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn torus(&self) -> usize {
        self.torus
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn clipped_fraction(&self) -> f64 {
        self.clipped_fraction
    }

    /// Two independent samples from one transform (real and imaginary parts).
    pub fn sample_pair(&self, rng: RngStream) -> [FieldSample; 2] {
        let path = rng.path();
        let Some(fft) = &self.fft else {
            let mut z = FieldSample::zeros(self.grid, self.scale_lo, self.scale_hi);
            z.seed_path = path;
            return [z.clone(), z];
        };
        let mut r = rng.rng();
        let mut buf: Vec<Complex64> = self
            .amplitudes
            .iter()
            .map(|&a| {
                let re: f64 = StandardNormal.sample(&mut r);
                let im: f64 = StandardNormal.sample(&mut r);
                Complex64::new(a * re, a * im)
            })
            .collect();
        let (re, im) = fft.forward_block(&mut buf, self.grid.n);
        let make = |values, tag: &str| FieldSample {
            grid: self.grid,
            scale_lo: self.scale_lo,
            scale_hi: self.scale_hi,
            seed_path: format!("{path}/{tag}"),
            values,
        };
        [make(re, "re"), make(im, "im")]
    }

    pub fn sample(&self, rng: RngStream) -> FieldSample {
        let [a, _] = self.sample_pair(rng);
        a
    }
}

/// One sampler per layer of a schedule; layer `k` uses stream `rng.with_layer(k)`.
#[derive(Debug, Clone)]
pub struct LayeredSampler {
    schedule: ScaleSchedule,
    layers: Vec<CirculantSampler>,
    grid: GridSpec,
}

impl LayeredSampler {
    pub fn new(lab: &KernelLab, schedule: &ScaleSchedule, grid: GridSpec) -> Result<Self> {
        grid.check_resolves(schedule.total())?;
        let layers = schedule
            .layers()
            .map(|(lo, hi)| CirculantSampler::for_layer(&lab.layer_covariance(lo, hi)?, grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            schedule: schedule.clone(),
            layers,
            grid,
        })
    }

    pub fn schedule(&self) -> &ScaleSchedule {
        &self.schedule
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn layers(&self) -> &[CirculantSampler] {
        &self.layers
    }

    /// The independent layer fields of one replica.
    pub fn sample_layers(&self, rng: RngStream) -> Vec<FieldSample> {
        self.layers
            .iter()
            .enumerate()
            .map(|(k, s)| s.sample(rng.with_layer(k as u32)))
            .collect()
    }

    /// `X_{t_k}` for every breakpoint `t_k`, `k >= 1`, sharing the same layers.
    pub fn sample_cumulative(&self, rng: RngStream) -> Vec<FieldSample> {
        let mut acc = FieldSample::zeros(self.grid, 0.0, 0.0);
        acc.seed_path = rng.path();
        self.sample_layers(rng)
            .into_iter()
            .map(|layer| {
                acc.add_assign(&layer).expect("layers share the grid");
                acc.clone()
            })
            .collect()
    }

    /// Two independent cumulative chains from one transform per layer.
    pub fn sample_cumulative_pair(&self, rng: RngStream) -> [Vec<FieldSample>; 2] {
        let mut acc = [
            FieldSample::zeros(self.grid, 0.0, 0.0),
            FieldSample::zeros(self.grid, 0.0, 0.0),
        ];
        let mut out = [Vec::new(), Vec::new()];
        for (k, s) in self.layers.iter().enumerate() {
            let pair = s.sample_pair(rng.with_layer(k as u32));
            for (j, layer) in pair.iter().enumerate() {
                acc[j].add_assign(layer).expect("layers share the grid");
                acc[j].seed_path = format!("{}/{}", rng.path(), j);
                out[j].push(acc[j].clone());
            }
        }
        out
    }

    /// `X_t` as the sum of all layers.
    pub fn sample_sum(&self, rng: RngStream) -> FieldSample {
        let mut acc = FieldSample::zeros(self.grid, 0.0, 0.0);
        acc.seed_path = rng.path();
        for layer in self.sample_layers(rng) {
            acc.add_assign(&layer).expect("layers share the grid");
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_covers_support() {
        let g = GridSpec::unit(32).unwrap();
        assert_eq!(torus_points(&g, 1.0), 64);
        let g = GridSpec::new(32, 2.0, 2).unwrap();
        assert_eq!(torus_points(&g, 1.0), 64);
        let g = GridSpec::new(32, 0.5, 2).unwrap();
        assert_eq!(torus_points(&g, 1.0), 128);
    }

    #[test]
    fn non_psd_covariance_is_rejected() {
        let grid = GridSpec::unit(8).unwrap();
        // indicator of a disc is not positive definite
        let c = |r: f64| if r < 0.3 { 1.0 } else { 0.0 };
        match CirculantSampler::from_covariance(&c, grid, 16) {
            Err(Error::NotPositiveDefinite { torus, relative, .. }) => {
                assert_eq!(torus, 16);
                assert!(relative < 0.0);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }
}
