//! Radial kernels behind the star-scale invariant field.
//!
//! The seed covariance `rho` is the normalized self-convolution of a smooth
//! radial bump supported in the ball of radius 1/2, so `rho(0) = 1` and `rho`
//! vanishes outside the unit ball. Everything else is derived from it:
//!
//! * `K0(r) = int_0^inf rho(e^u r) du`, which behaves like `-ln r` at the origin;
//! * the smooth remainder `g0(r) = K0(r) + ln r = int_{r^2}^1 (f(t) - 1) / (2t) dt`
//!   where `rho(x) = f(|x|^2)`;
//! * layer covariances `c_{a,b}(r) = int_a^b rho(e^u r) du`.
//!
//! Since `K0(x) = int_x^1 rho(v) / v dv`, a layer telescopes into
//! `c_{a,b}(r) = (b - a) + G(e^a r) - G(e^b r)` with `G = g0` on `[0, 1)` and
//! `G(x) = ln x` beyond. Layers are evaluated through that identity from a
//! single Hermite table of `g0`, which makes them exactly additive in the scale
//! parameter and exactly zero past their support radius `e^{-a}`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, GaussRule};

/// Absolute tolerance of every adaptive quadrature in this module.
pub const QUAD_TOL: f64 = 1e-10;

/// Default number of tabulated radii.
pub const DEFAULT_TABLE_RESOLUTION: usize = 4096;

/// Radial profile of the bump `psi` supported on `[0, 1/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Profile {
    /// `psi(r) = exp(-sharpness / (1 - (2r)^2))` for `r < 1/2`.
    Bump { sharpness: f64 },
    /// Uniform samples of `psi` on `[0, 1/2]`, first sample at 0 and last at 1/2.
    Tabulated { samples: Vec<f64> },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Bump { sharpness: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub profile: Profile,
    pub table_resolution: usize,
    pub dimension: usize,
}

impl Default for MollifierSpec {
    fn default() -> Self {
        Self {
            profile: Profile::default(),
            table_resolution: DEFAULT_TABLE_RESOLUTION,
            dimension: 2,
        }
    }
}

impl MollifierSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimension != 2 {
            return Err(Error::InvalidMollifier(format!(
                "radial self-convolution is implemented for d = 2 only, got d = {}",
                self.dimension
            )));
        }
        if self.table_resolution < 16 {
            return Err(Error::InvalidMollifier(
                "table_resolution must be at least 16".into(),
            ));
        }
        match &self.profile {
            Profile::Bump { sharpness } => {
                if !(sharpness.is_finite() && *sharpness > 0.0) {
                    return Err(Error::InvalidMollifier(format!(
                        "bump sharpness must be positive, got {sharpness}"
                    )));
                }
            }
            Profile::Tabulated { samples } => {
                if samples.len() < 4 {
                    return Err(Error::InvalidMollifier(
                        "tabulated profile needs at least 4 samples".into(),
                    ));
                }
                if samples.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidMollifier(
                        "profile samples must be finite and nonnegative".into(),
                    ));
                }
                if *samples.last().unwrap() != 0.0 {
                    return Err(Error::InvalidMollifier(
                        "profile must vanish at its support boundary r = 1/2".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn profile_fn(&self) -> Box<dyn Fn(f64) -> f64 + Send + Sync> {
        match &self.profile {
            Profile::Bump { sharpness } => {
                let s = *sharpness;
                Box::new(move |r: f64| {
                    let x = 2.0 * r;
                    if x >= 1.0 {
                        0.0
                    } else {
                        (-s / (1.0 - x * x)).exp()
                    }
                })
            }
            Profile::Tabulated { samples } => {
                let table = HermiteTable::pchip(0.5, samples.clone(), true);
                Box::new(move |r: f64| if r >= 0.5 { 0.0 } else { table.eval(r).max(0.0) })
            }
        }
    }
}

/// Piecewise cubic Hermite interpolant on a uniform grid `[0, x_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteTable {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteTable {
    pub fn new(x_max: f64, values: Vec<f64>, slopes: Vec<f64>) -> Self {
        assert!(values.len() >= 2 && values.len() == slopes.len());
        let step = x_max / (values.len() - 1) as f64;
        Self {
            step,
            values,
            slopes,
        }
    }

    /// Monotone (Fritsch-Carlson) slopes. With `even`, the slope at 0 is pinned
    /// to zero as for a smooth radial profile.
    pub fn pchip(x_max: f64, values: Vec<f64>, even: bool) -> Self {
        let n = values.len();
        let h = x_max / (n - 1) as f64;
        let secant: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut slopes = vec![0.0; n];
        for k in 1..n - 1 {
            let (a, b) = (secant[k - 1], secant[k]);
            slopes[k] = if a * b <= 0.0 {
                0.0
            } else {
                2.0 * a * b / (a + b)
            };
        }
        slopes[0] = if even { 0.0 } else { secant[0] };
        slopes[n - 1] = secant[n - 2];
        Self::new(x_max, values, slopes)
    }

    pub fn x_max(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| k as f64 * self.step).collect()
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let last = self.values.len() - 1;
        let pos = (x / self.step).max(0.0);
        let k = (pos.floor() as usize).min(last - 1);
        (k, pos - k as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (k, t) = self.locate(x);
        if t == 0.0 {
            return self.values[k];
        }
        let (p0, p1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * self.step, self.slopes[k + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        p0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + p1 * (3.0 * t2 - 2.0 * t3)
            + m1 * (t3 - t2)
    }

    pub fn eval_linear(&self, x: f64) -> f64 {
        let (k, t) = self.locate(x);
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }
}

/// A tabulated radial function that is exactly zero from `support_radius` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialKernel {
    table: HermiteTable,
    support_radius: f64,
    interpolation_order: u8,
}

impl RadialKernel {
    pub fn new(table: HermiteTable, support_radius: f64, interpolation_order: u8) -> Result<Self> {
        if table.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("kernel values must be finite".into()));
        }
        if !matches!(interpolation_order, 1 | 3) {
            return Err(Error::InvalidArgument(
                "interpolation order must be 1 or 3".into(),
            ));
        }
        Ok(Self {
            table,
            support_radius,
            interpolation_order,
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.support_radius {
            return 0.0;
        }
        match self.interpolation_order {
            1 => self.table.eval_linear(r),
            _ => self.table.eval(r),
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn interpolation_order(&self) -> u8 {
        self.interpolation_order
    }

    pub fn radii(&self) -> Vec<f64> {
        self.table.radii()
    }

    pub fn values(&self) -> &[f64] {
        self.table.values()
    }

    /// `rho(r) - 1` without cancellation inside the first table interval.
    fn minus_one_near_origin(&self, r: f64) -> Option<f64> {
        let h = self.table.step;
        if r >= h || self.table.values[0] != 1.0 || self.table.slopes[0] != 0.0 {
            return None;
        }
        let t = r / h;
        let p1 = self.table.values[1];
        let m1 = self.table.slopes[1] * h;
        Some((p1 - 1.0) * t * t * (3.0 - 2.0 * t) + m1 * t * t * (t - 1.0))
    }

    /// `(rho(sqrt(tau)) - 1) / (2 tau)`, continuous at `tau = 0`.
    fn g0_integrand(&self, tau: f64) -> f64 {
        let r = tau.max(0.0).sqrt();
        let h = self.table.step;
        if r < h && self.minus_one_near_origin(r).is_some() {
            let t = r / h;
            let p1 = self.table.values[1];
            let m1 = self.table.slopes[1] * h;
            return ((p1 - 1.0) * (3.0 - 2.0 * t) + m1 * (t - 1.0)) / (2.0 * h * h);
        }
        (self.eval(r) - 1.0) / (2.0 * tau)
    }
}

/// Builds `rho = (psi * psi) / (psi * psi)(0)` on `[0, 1]`.
///
/// The two-dimensional convolution is evaluated in polar coordinates around
/// the evaluation point, with Gauss-Legendre rules restricted to the overlap
/// of the two supports so the flat edges of the bump are resolved.
pub fn build_mollifier(spec: &MollifierSpec) -> Result<RadialKernel> {
    spec.validate()?;
    let psi = spec.profile_fn();
    let rule = GaussRule::new(64);
    let conv = |r: f64| -> f64 {
        let s_lo = (r - 0.5).max(0.0);
        if s_lo >= 0.5 {
            return 0.0;
        }
        rule.integrate(s_lo, 0.5, |s| {
            let ps = psi(s);
            if ps == 0.0 {
                return 0.0;
            }
            let theta_max = if r == 0.0 || s == 0.0 {
                PI
            } else {
                let c = (r * r + s * s - 0.25) / (2.0 * r * s);
                if c >= 1.0 {
                    return 0.0;
                }
                c.max(-1.0).acos()
            };
            let inner = rule.integrate(0.0, theta_max, |th| {
                let d2 = r * r + s * s - 2.0 * r * s * th.cos();
                psi(d2.max(0.0).sqrt())
            });
            2.0 * s * ps * inner
        })
    };
    let norm = conv(0.0);
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::InvalidMollifier(format!(
            "self-convolution at the origin is {norm}; cannot normalize"
        )));
    }
    let n = spec.table_resolution;
    let mut values: Vec<f64> = (0..n)
        .map(|k| conv(k as f64 / (n - 1) as f64) / norm)
        .collect();
    values[0] = 1.0;
    values[n - 1] = 0.0;
    if let Some(bad) = values
        .iter()
        .find(|v| !v.is_finite() || **v < -1e-9 || **v > 1.0 + 1e-9)
    {
        return Err(Error::InvalidMollifier(format!(
            "normalized self-convolution left [-1, 1]: {bad}"
        )));
    }
    for v in &mut values {
        *v = v.clamp(0.0, 1.0);
    }
    RadialKernel::new(HermiteTable::pchip(1.0, values, true), 1.0, 3)
}

/// `R^(xi) = (1 + |xi|^2)^(-d/2 - 2)`: spectral density of the smooth perturbation field.
pub fn spectral_kernel_r(d: usize, xi: f64) -> f64 {
    assert!(xi >= 0.0, "frequency magnitude must be nonnegative");
    (1.0 + xi * xi).powf(-(d as f64) / 2.0 - 2.0)
}

/// The seed kernel together with the tabulated smooth remainder `g0`.
#[derive(Debug, Clone)]
pub struct KernelLab {
    spec: MollifierSpec,
    rho: RadialKernel,
    g0_table: Arc<HermiteTable>,
}

impl KernelLab {
    pub fn new(spec: MollifierSpec) -> Result<Self> {
        let rho = build_mollifier(&spec)?;
        let g0_table = Arc::new(tabulate_g0(&rho, spec.table_resolution));
        Ok(Self {
            spec,
            rho,
            g0_table,
        })
    }

    pub fn spec(&self) -> &MollifierSpec {
        &self.spec
    }

    pub fn rho(&self) -> &RadialKernel {
        &self.rho
    }

    /// `K0(r) = int_0^{ln(1/r)} rho(e^u r) du` by direct quadrature in the scale variable.
    pub fn eval_k0(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidArgument(format!("radius must be >= 0, got {r}")));
        }
        if r == 0.0 {
            return Err(Error::Divergent);
        }
        if r >= 1.0 {
            return Ok(0.0);
        }
        let rho = &self.rho;
        adaptive_simpson(|u| rho.eval(u.exp() * r), 0.0, -r.ln(), QUAD_TOL)
    }

    /// `g0(r) = int_{r^2}^1 (f(t) - 1) / (2t) dt` by quadrature in `t = r^2`.
    pub fn eval_g0(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidArgument(format!("radius must be >= 0, got {r}")));
        }
        if r >= 1.0 {
            return Ok(r.ln());
        }
        let rho = &self.rho;
        adaptive_simpson(|tau| rho.g0_integrand(tau), r * r, 1.0, QUAD_TOL)
    }

    /// Tabulated `g0`, extended by `ln x` for `x >= 1`.
    pub fn g0_fast(&self, x: f64) -> f64 {
        extended_g0(&self.g0_table, x)
    }

    pub fn g0_table(&self) -> &HermiteTable {
        &self.g0_table
    }

    pub fn layer_covariance(&self, s_lo: f64, s_hi: f64) -> Result<LayerCovariance> {
        layer_covariance(self, s_lo, s_hi)
    }
}

fn extended_g0(table: &HermiteTable, x: f64) -> f64 {
    let x = x.abs();
    if x >= 1.0 {
        x.ln()
    } else {
        table.eval(x)
    }
}

fn tabulate_g0(rho: &RadialKernel, n: usize) -> HermiteTable {
    let rule = GaussRule::new(8);
    let h = 1.0 / (n - 1) as f64;
    let mut values = vec![0.0; n];
    for k in (0..n - 1).rev() {
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        let piece = rule.integrate(a * a, b * b, |tau| rho.g0_integrand(tau));
        values[k] = values[k + 1] + piece;
    }
    let slopes = (0..n)
        .map(|k| {
            let x = k as f64 * h;
            if k == 0 {
                0.0
            } else {
                (1.0 - rho.eval(x)) / x
            }
        })
        .collect();
    HermiteTable::new(1.0, values, slopes)
}

/// Covariance `c(r) = int_{s_lo}^{s_hi} rho(e^u r) du` of one scale layer.
#[derive(Debug, Clone)]
pub struct LayerCovariance {
    pub s_lo: f64,
    pub s_hi: f64,
    g0: Arc<HermiteTable>,
}

impl LayerCovariance {
    pub fn variance(&self) -> f64 {
        self.s_hi - self.s_lo
    }

    /// Radius beyond which the layer covariance vanishes.
    pub fn support_radius(&self) -> f64 {
        (-self.s_lo).exp()
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if self.s_hi == self.s_lo {
            return 0.0;
        }
        let lo = self.s_lo.exp() * r;
        if lo >= 1.0 {
            return 0.0;
        }
        if r == 0.0 {
            return self.variance();
        }
        let hi = self.s_hi.exp() * r;
        self.variance() + extended_g0(&self.g0, lo) - extended_g0(&self.g0, hi)
    }

    /// Tabulated copy of the layer kernel on `[0, support]`.
    pub fn kernel(&self, resolution: usize) -> Result<RadialKernel> {
        let support = self.support_radius();
        let values: Vec<f64> = (0..resolution)
            .map(|k| self.eval(support * k as f64 / (resolution - 1) as f64))
            .collect();
        RadialKernel::new(HermiteTable::pchip(support, values, true), support, 3)
    }
}

pub fn layer_covariance(lab: &KernelLab, s_lo: f64, s_hi: f64) -> Result<LayerCovariance> {
    if !(s_lo.is_finite() && s_hi.is_finite()) || s_lo < 0.0 || s_hi < s_lo {
        return Err(Error::InvalidArgument(format!(
            "layer interval must satisfy 0 <= s_lo <= s_hi, got [{s_lo}, {s_hi}]"
        )));
    }
    Ok(LayerCovariance {
        s_lo,
        s_hi,
        g0: lab.g0_table.clone(),
    })
}

/// `ln_+(x) = max(ln x, 0)`.
pub fn ln_plus(x: f64) -> f64 {
    x.ln().max(0.0)
}

/// Grid estimate of the constant bounding `|c_{0,t}(r) - min(t, ln_+(1/r))|`.
///
/// The true constant is a supremum over all `t` and `r`, so this is a lower
/// bound that grows toward it under grid refinement.
pub fn estimate_bound_a(lab: &KernelLab, t_grid: &[f64], r_grid: &[f64]) -> Result<f64> {
    if t_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::InvalidArgument("grids must be nonempty".into()));
    }
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        let layer = layer_covariance(lab, 0.0, t)?;
        for &r in r_grid {
            let gap = (layer.eval(r) - t.min(ln_plus(1.0 / r))).abs();
            worst = worst.max(gap);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    pub(crate) fn lab() -> &'static KernelLab {
        static LAB: OnceLock<KernelLab> = OnceLock::new();
        LAB.get_or_init(|| KernelLab::new(MollifierSpec::default()).unwrap())
    }

    #[test]
    fn rho_is_normalized_and_supported_in_unit_ball() {
        let rho = lab().rho();
        assert_eq!(rho.eval(0.0), 1.0);
        assert_eq!(rho.eval(1.0), 0.0);
        assert_eq!(rho.eval(1.5), 0.0);
        assert!(rho.values().iter().all(|v| (0.0..=1.0).contains(v)));
        // radially decreasing
        assert!(rho.values().windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn tabulated_radius_returns_tabulated_value() {
        let rho = lab().rho();
        let radii = rho.radii();
        for k in [0, 1, 17, 1000, 4000] {
            assert_eq!(rho.eval(radii[k]), rho.values()[k]);
        }
    }

    #[test]
    fn k0_edge_cases() {
        assert_eq!(lab().eval_k0(1.0).unwrap(), 0.0);
        assert_eq!(lab().eval_k0(3.0).unwrap(), 0.0);
        assert!(matches!(lab().eval_k0(0.0), Err(Error::Divergent)));
        assert!(lab().eval_k0(-0.1).is_err());
    }

    #[test]
    fn g0_edge_cases() {
        assert_eq!(lab().eval_g0(1.0).unwrap(), 0.0);
        let g = lab().eval_g0(0.0).unwrap();
        assert!(g.is_finite() && g < 0.0);
    }

    #[test]
    fn k0_g0_identity_at_point_three() {
        let r = 0.3;
        let d = lab().eval_k0(r).unwrap() + r.ln() - lab().eval_g0(r).unwrap();
        assert!(d.abs() < 1e-8, "identity defect {d}");
    }

    #[test]
    fn g0_table_matches_quadrature() {
        for &r in &[0.0, 1e-4, 0.01, 0.1, 0.37, 0.5, 0.77, 0.999] {
            let q = lab().eval_g0(r).unwrap();
            let t = lab().g0_fast(r);
            assert!((q - t).abs() < 1e-9, "r={r}: quad {q} table {t}");
        }
        assert_eq!(lab().g0_fast(2.0), 2f64.ln());
    }

    #[test]
    fn layer_variance_and_support() {
        let l01 = lab().layer_covariance(0.0, 1.0).unwrap();
        assert_eq!(l01.variance(), 1.0);
        assert_eq!(l01.eval(0.0), 1.0);
        let l12 = lab().layer_covariance(1.0, 2.0).unwrap();
        assert_eq!(l12.eval(0.5), 0.0);
        assert_eq!(l12.eval(1.0 / 1f64.exp()), 0.0);
        assert!(lab().layer_covariance(2.0, 1.0).is_err());
        assert!(lab().layer_covariance(-1.0, 1.0).is_err());
        let zero = lab().layer_covariance(1.0, 1.0).unwrap();
        assert_eq!(zero.eval(0.0), 0.0);
    }

    #[test]
    fn layer_matches_direct_quadrature() {
        let lab = lab();
        let layer = lab.layer_covariance(0.5, 2.0).unwrap();
        for &r in &[0.01, 0.1, 0.2, 0.4, 0.6] {
            let direct =
                adaptive_simpson(|u| lab.rho().eval(u.exp() * r), 0.5, 2.0, 1e-12).unwrap();
            let fast = layer.eval(r);
            assert!((direct - fast).abs() < 1e-9, "r={r}: direct {direct} fast {fast}");
        }
    }

    #[test]
    fn layer_additivity() {
        let lab = lab();
        let a = lab.layer_covariance(0.0, 2.0).unwrap();
        let b = lab.layer_covariance(0.0, 1.0).unwrap();
        let c = lab.layer_covariance(1.0, 2.0).unwrap();
        for k in 0..200 {
            let r = k as f64 / 150.0;
            assert!((a.eval(r) - b.eval(r) - c.eval(r)).abs() < 1e-9);
        }
    }

    #[test]
    fn spectral_kernel_values() {
        assert_eq!(spectral_kernel_r(2, 0.0), 1.0);
        assert!((spectral_kernel_r(2, 1.0) - 0.125).abs() < 1e-15);
        assert!((spectral_kernel_r(2, 3.0) - 0.001).abs() < 1e-15);
    }

    #[test]
    fn bound_a_edge_rows() {
        let lab = lab();
        // r >= 1: both terms vanish
        assert_eq!(estimate_bound_a(lab, &[0.5, 3.0, 7.0], &[1.0, 1.5, 4.0]).unwrap(), 0.0);
        // t = 0: c_{0,0} = 0 and 0 ∧ ln_+(1/r) = 0
        assert_eq!(estimate_bound_a(lab, &[0.0], &[1e-3, 0.1, 0.5]).unwrap(), 0.0);
        assert!(estimate_bound_a(lab, &[], &[0.5]).is_err());
    }

    #[test]
    fn invalid_mollifiers_rejected() {
        let mut spec = MollifierSpec::default();
        spec.dimension = 3;
        assert!(build_mollifier(&spec).is_err());
        let spec = MollifierSpec {
            profile: Profile::Tabulated {
                samples: vec![1.0, 0.5, 0.2, 0.1],
            },
            ..MollifierSpec::default()
        };
        assert!(matches!(
            build_mollifier(&spec),
            Err(Error::InvalidMollifier(_))
        ));
        let spec = MollifierSpec {
            profile: Profile::Bump { sharpness: -1.0 },
            ..MollifierSpec::default()
        };
        assert!(build_mollifier(&spec).is_err());
    }

    #[test]
    fn tabulated_profile_builds() {
        let samples: Vec<f64> = (0..65)
            .map(|k| {
                let x = 2.0 * k as f64 / 128.0;
                if x >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - x * x)).exp()
                }
            })
            .collect();
        let spec = MollifierSpec {
            profile: Profile::Tabulated { samples },
            table_resolution: 256,
            dimension: 2,
        };
        let rho = build_mollifier(&spec).unwrap();
        assert_eq!(rho.eval(0.0), 1.0);
        let reference = lab().rho().eval(0.5);
        assert!((rho.eval(0.5) - reference).abs() < 1e-3);
    }
}
