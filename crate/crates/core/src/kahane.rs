//! Gaussian interpolation between two finite Gaussian vectors and the
//! comparison inequalities for product functionals of their chaos masses.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmc::log_sum_exp;
use crate::kernel::KernelLab;
use crate::rng::RngStream;
use crate::stats::Estimate;

/// Largest supported point set.
pub const MAX_POINTS: usize = 64;
/// Tolerance below zero accepted for eigenvalues of covariances and differences.
pub const PSD_TOL: f64 = 1e-10;

/// Centered Gaussian vector indexed by points of the unit square.
#[derive(Debug, Clone)]
pub struct GaussianVectorSpec {
    pub label: String,
    pub points: Vec<[f64; 2]>,
    pub covariance: DMatrix<f64>,
    factor: DMatrix<f64>,
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

impl GaussianVectorSpec {
    pub fn new(label: &str, points: Vec<[f64; 2]>, covariance: DMatrix<f64>) -> Result<Self> {
        let k = points.len();
        if k == 0 || k > MAX_POINTS {
            return Err(Error::InvalidArgument(format!(
                "need 1..={MAX_POINTS} points, got {k}"
            )));
        }
        if covariance.nrows() != k || covariance.ncols() != k {
            return Err(Error::InvalidArgument(format!(
                "covariance is {}x{}, expected {k}x{k}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        let scale = covariance.amax().max(1.0);
        if (&covariance - covariance.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidArgument("covariance is not symmetric".into()));
        }
        let eig = SymmetricEigen::new(covariance.clone());
        let min = eig.eigenvalues.min();
        if min < -PSD_TOL * scale {
            return Err(Error::NotPsd(min));
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let factor = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
        Ok(Self {
            label: label.to_string(),
            points,
            covariance,
            factor,
        })
    }

    /// Covariance `c(|x - y|)` of a stationary radial kernel on the given points.
    pub fn from_kernel(label: &str, points: Vec<[f64; 2]>, c: impl Fn(f64) -> f64) -> Result<Self> {
        let k = points.len();
        let cov = DMatrix::from_fn(k, k, |i, j| {
            let (p, q) = (points[i], points[j]);
            c((p[0] - q[0]).hypot(p[1] - q[1]))
        });
        Self::new(label, points, cov)
    }

    /// Same points with `extra` added to the covariance.
    pub fn plus(&self, label: &str, extra: &DMatrix<f64>) -> Result<Self> {
        Self::new(label, self.points.clone(), &self.covariance + extra)
    }

    /// Regular `side x side` lattice of cell centers in the unit square.
    pub fn lattice(side: usize) -> Vec<[f64; 2]> {
        let h = 1.0 / side as f64;
        (0..side * side)
            .map(|k| [((k % side) as f64 + 0.5) * h, ((k / side) as f64 + 0.5) * h])
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn variances(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.covariance[(i, i)]).collect()
    }

    /// `L xi` with `L L^T = covariance`.
    pub fn transform(&self, xi: &DVector<f64>) -> DVector<f64> {
        &self.factor * xi
    }
}

fn standard_normals(rng: &mut impl rand::Rng, k: usize) -> DVector<f64> {
    DVector::from_fn(k, |_, _| StandardNormal.sample(rng))
}

/// One factor `(sum_x e^{gamma Z_x - gamma^2 Var/2} mu(x))^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub p: f64,
    pub gamma: f64,
    pub weights: Vec<f64>,
}

/// Product of factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductFunctionalSpec {
    pub factors: Vec<Factor>,
}

impl ProductFunctionalSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("functional has no factors".into()));
        }
        for f in &factors {
            if f.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::InvalidArgument(
                    "weights must be finite and nonnegative".into(),
                ));
            }
            if !f.weights.iter().any(|w| *w > 0.0) {
                return Err(Error::InvalidArgument("a factor has zero total weight".into()));
            }
            if !(f.p.is_finite() && f.gamma.is_finite()) {
                return Err(Error::InvalidArgument("non-finite exponent".into()));
            }
        }
        Ok(Self { factors })
    }

    /// The balanced ratio `M_alpha^{gamma/(gamma-alpha)} M_gamma^{-alpha/(gamma-alpha)}`.
    pub fn q_functional(alpha: f64, gamma: f64, weights: Vec<f64>) -> Result<Self> {
        if alpha == gamma {
            return Err(Error::InvalidParams("alpha and gamma must differ".into()));
        }
        let gap = gamma - alpha;
        Self::new(vec![
            Factor {
                p: gamma / gap,
                gamma: alpha,
                weights: weights.clone(),
            },
            Factor {
                p: -alpha / gap,
                gamma,
                weights,
            },
        ])
    }

    pub fn single(p: f64, gamma: f64, weights: Vec<f64>) -> Result<Self> {
        Self::new(vec![Factor { p, gamma, weights }])
    }

    fn check(&self, k: usize) -> Result<()> {
        if self.factors.iter().any(|f| f.weights.len() != k) {
            return Err(Error::InvalidArgument(format!(
                "weights must have one entry per point ({k})"
            )));
        }
        Ok(())
    }

    /// `ln Phi` and the normalized tilted weights of every factor.
    fn evaluate(&self, z: &DVector<f64>, var: &[f64]) -> (f64, Vec<Vec<f64>>) {
        let mut log_phi = 0.0;
        let mut measures = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            let mut e: Vec<f64> = (0..z.len())
                .map(|x| f.gamma * z[x] - 0.5 * f.gamma * f.gamma * var[x] + f.weights[x].ln())
                .collect();
            let lse = log_sum_exp(&mut e.clone());
            for v in e.iter_mut() {
                *v = (*v - lse).exp();
            }
            log_phi += f.p * lse;
            measures.push(e);
        }
        (log_phi, measures)
    }

    /// `sum_j |gamma_j^2 p_j (p_j - 1)| + 2 sum_{i<j} |gamma_i gamma_j p_i p_j|`.
    pub fn coefficient_mass(&self) -> f64 {
        let f = &self.factors;
        let diag: f64 = f
            .iter()
            .map(|a| (a.gamma * a.gamma * a.p * (a.p - 1.0)).abs())
            .sum();
        let mut cross = 0.0;
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                cross += (f[i].gamma * f[j].gamma * f[i].p * f[j].p).abs();
            }
        }
        diag + 2.0 * cross
    }

    /// True when every diagonal and cross coefficient vanishes.
    fn derivative_vanishes(&self) -> bool {
        self.coefficient_mass() == 0.0
    }
}

/// `Z(t) = sqrt(1-t) X + sqrt(t) Y` with independent `X`, `Y`.
#[derive(Debug, Clone)]
pub struct InterpolationPath {
    pub x: GaussianVectorSpec,
    pub y: GaussianVectorSpec,
}

impl InterpolationPath {
    pub fn new(x: GaussianVectorSpec, y: GaussianVectorSpec) -> Result<Self> {
        if x.points != y.points {
            return Err(Error::InvalidArgument(
                "interpolation endpoints must share their points".into(),
            ));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `g = Cov_Y - Cov_X`.
    pub fn difference(&self) -> DMatrix<f64> {
        &self.y.covariance - &self.x.covariance
    }

    pub fn variances(&self, t: f64) -> Vec<f64> {
        let (vx, vy) = (self.x.variances(), self.y.variances());
        vx.iter().zip(vy).map(|(a, b)| (1.0 - t) * a + t * b).collect()
    }

    fn draw(&self, rng: RngStream) -> (DVector<f64>, DVector<f64>) {
        let mut r = rng.rng();
        let k = self.len();
        let a = self.x.transform(&standard_normals(&mut r, k));
        let b = self.y.transform(&standard_normals(&mut r, k));
        (a, b)
    }

    fn at(&self, t: f64, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        a * (1.0 - t).sqrt() + b * t.sqrt()
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")));
    }
    Ok(())
}

fn check_replicas(replicas: u64) -> Result<()> {
    if replicas < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicas".into()));
    }
    Ok(())
}

/// Per-replica values of `Phi(t)` for each `t`, with common random numbers.
pub fn interpolated_samples(
    path: &InterpolationPath,
    func: &ProductFunctionalSpec,
    ts: &[f64],
    replicas: u64,
    rng: RngStream,
) -> Result<Vec<Vec<f64>>> {
    func.check(path.len())?;
    for &t in ts {
        check_t(t)?;
    }
    let vars: Vec<Vec<f64>> = ts.iter().map(|&t| path.variances(t)).collect();
    Ok((0..replicas)
        .into_par_iter()
        .map(|r| {
            let (a, b) = path.draw(rng.with_replica(r));
            ts.iter()
                .zip(&vars)
                .map(|(&t, v)| func.evaluate(&path.at(t, &a, &b), v).0.exp())
                .collect()
        })
        .collect())
}

/// Monte Carlo estimate of `E[Phi(t)]`.
pub fn interpolated_expectation(
    path: &InterpolationPath,
    func: &ProductFunctionalSpec,
    t: f64,
    replicas: u64,
    rng: RngStream,
) -> Result<Estimate> {
    check_replicas(replicas)?;
    let s = interpolated_samples(path, func, &[t], replicas, rng)?;
    Ok(Estimate::from_samples(s.iter().map(|v| v[0])))
}

/// Value of the derivative integrand for one realization at time `t`.
fn derivative_integrand(
    func: &ProductFunctionalSpec,
    g: &DMatrix<f64>,
    z: &DVector<f64>,
    var: &[f64],
) -> f64 {
    let (log_phi, mu) = func.evaluate(z, var);
    let f = &func.factors;
    let quad = |a: &[f64], b: &[f64]| -> f64 {
        let va = DVector::from_column_slice(a);
        let vb = DVector::from_column_slice(b);
        va.dot(&(g * vb))
    };
    let mut total = 0.0;
    for j in 0..f.len() {
        let c = f[j].gamma * f[j].gamma * f[j].p * (f[j].p - 1.0);
        if c != 0.0 {
            total += c * quad(&mu[j], &mu[j]);
        }
        for i in 0..j {
            let c = f[i].gamma * f[j].gamma * f[i].p * f[j].p;
            total += 2.0 * c * quad(&mu[i], &mu[j]);
        }
    }
    0.5 * log_phi.exp() * total
}

/// Monte Carlo estimate of the Gaussian-interpolation derivative formula at `t`.
pub fn derivative_formula(
    path: &InterpolationPath,
    func: &ProductFunctionalSpec,
    t: f64,
    replicas: u64,
    rng: RngStream,
) -> Result<Estimate> {
    check_replicas(replicas)?;
    check_t(t)?;
    func.check(path.len())?;
    if func.derivative_vanishes() {
        return Ok(Estimate::exact(0.0, replicas));
    }
    let g = path.difference();
    let var = path.variances(t);
    let values: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let (a, b) = path.draw(rng.with_replica(r));
            derivative_integrand(func, &g, &path.at(t, &a, &b), &var)
        })
        .collect();
    Ok(Estimate::from_samples(values))
}

/// Central finite difference of `E[Phi]` at `t` with step `step`, per-replica paired.
pub fn finite_difference(
    path: &InterpolationPath,
    func: &ProductFunctionalSpec,
    t: f64,
    step: f64,
    replicas: u64,
    rng: RngStream,
) -> Result<Estimate> {
    check_replicas(replicas)?;
    let (lo, hi) = (t - step, t + step);
    let s = interpolated_samples(path, func, &[lo, hi], replicas, rng)?;
    Ok(Estimate::from_samples(
        s.iter().map(|v| (v[1] - v[0]) / (hi - lo)),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub t: f64,
    pub step: f64,
    pub finite_difference: Estimate,
    pub formula: Estimate,
    pub combined_stderr: f64,
    pub z_score: f64,
    pub pass: bool,
}

/// Compares the derivative formula with a finite difference on the same seeds.
pub fn check_derivative(
    path: &InterpolationPath,
    func: &ProductFunctionalSpec,
    t: f64,
    step: f64,
    replicas: u64,
    rng: RngStream,
    sigmas: f64,
) -> Result<DerivativeCheck> {
    let fd = finite_difference(path, func, t, step, replicas, rng)?;
    let formula = derivative_formula(path, func, t, replicas, rng)?;
    let combined = fd.stderr.hypot(formula.stderr);
    let diff = (fd.mean - formula.mean).abs();
    Ok(DerivativeCheck {
        t,
        step,
        combined_stderr: combined,
        z_score: if combined > 0.0 { diff / combined } else { 0.0 },
        pass: diff <= sigmas * combined + 1e-12 * fd.mean.abs().max(1.0),
        finite_difference: fd,
        formula,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    /// Largest entrywise covariance difference.
    pub a: f64,
    pub c: f64,
    pub bound_factor: f64,
    pub estimate_x: Estimate,
    pub estimate_y: Estimate,
    /// `E_X <= e^C E_Y` within tolerance.
    pub x_below_bound: bool,
    /// `E_Y <= e^C E_X` within tolerance.
    pub y_below_bound: bool,
    pub sigmas: f64,
    pub pass: bool,
}

/// Checks the bounded-difference comparison `E[Phi_X] <= e^C E[Phi_Y]` both ways.
pub fn check_kahane_variant(
    x: &GaussianVectorSpec,
    y: &GaussianVectorSpec,
    func: &ProductFunctionalSpec,
    replicas: u64,
    rng: RngStream,
    sigmas: f64,
) -> Result<VariantReport> {
    check_replicas(replicas)?;
    let path = InterpolationPath::new(x.clone(), y.clone())?;
    let a = path.difference().amax();
    let c = a * func.coefficient_mass();
    let s = interpolated_samples(&path, func, &[0.0, 1.0], replicas, rng)?;
    let ex = Estimate::from_samples(s.iter().map(|v| v[0]));
    let ey = Estimate::from_samples(s.iter().map(|v| v[1]));
    let k = c.exp();
    let below = |lhs: &Estimate, rhs: &Estimate| {
        lhs.mean <= k * rhs.mean + sigmas * lhs.stderr.hypot(k * rhs.stderr)
    };
    let x_below_bound = below(&ex, &ey);
    let y_below_bound = below(&ey, &ex);
    Ok(VariantReport {
        a,
        c,
        bound_factor: k,
        pass: x_below_bound && y_below_bound,
        estimate_x: ex,
        estimate_y: ey,
        x_below_bound,
        y_below_bound,
        sigmas,
    })
}

/// Nondecreasing convex test functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConvexFn {
    Identity,
    /// `(x - K)_+` with `K` the median of the `Q_X` sample.
    CallAtMedian,
    Exponential { mu: f64 },
}

impl ConvexFn {
    pub fn family(mu: f64) -> Vec<ConvexFn> {
        vec![
            ConvexFn::Identity,
            ConvexFn::CallAtMedian,
            ConvexFn::Exponential { mu },
        ]
    }

    fn apply(&self, x: f64, strike: f64) -> f64 {
        match self {
            ConvexFn::Identity => x,
            ConvexFn::CallAtMedian => (x - strike).max(0.0),
            ConvexFn::Exponential { mu } => (mu * x).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexOrderEntry {
    pub function: ConvexFn,
    pub strike: Option<f64>,
    pub estimate_x: Estimate,
    pub estimate_y: Estimate,
    pub combined_stderr: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexOrderReport {
    pub min_difference_eigenvalue: f64,
    pub entries: Vec<ConvexOrderEntry>,
    pub sigmas: f64,
    pub pass: bool,
}

/// Balanced ratio of the discrete masses with weights `w` and variances `var`.
fn q_value(z: &DVector<f64>, var: &[f64], alpha: f64, gamma: f64, log_w: &[f64]) -> f64 {
    let lm = |g: f64| {
        let mut e: Vec<f64> = (0..z.len())
            .map(|x| g * z[x] - 0.5 * g * g * var[x] + log_w[x])
            .collect();
        log_sum_exp(&mut e)
    };
    let gap = gamma - alpha;
    ((gamma / gap) * lm(alpha) - (alpha / gap) * lm(gamma)).exp()
}

/// Per-replica `(Q_X, Q_Y)` under the coupling `Y = X + R`, `R` independent.
pub fn coupled_q_samples(
    x: &GaussianVectorSpec,
    y: &GaussianVectorSpec,
    alpha: f64,
    gamma: f64,
    weights: &[f64],
    replicas: u64,
    rng: RngStream,
) -> Result<(Vec<(f64, f64)>, f64)> {
    if alpha == gamma {
        return Err(Error::InvalidParams("alpha and gamma must differ".into()));
    }
    if weights.len() != x.len() || x.points != y.points {
        return Err(Error::InvalidArgument(
            "weights and point sets must agree".into(),
        ));
    }
    let diff = &y.covariance - &x.covariance;
    let min = min_eigenvalue(&diff);
    if min < -PSD_TOL * diff.amax().max(1.0) {
        return Err(Error::NotPsd(min));
    }
    let rem = GaussianVectorSpec::new("remainder", x.points.clone(), diff)?;
    let (vx, vy) = (x.variances(), y.variances());
    let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let k = x.len();
    let samples = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut g = rng.with_replica(r).rng();
            let zx = x.transform(&standard_normals(&mut g, k));
            let zr = rem.transform(&standard_normals(&mut g, k));
            let zy = &zx + zr;
            (
                q_value(&zx, &vx, alpha, gamma, &log_w),
                q_value(&zy, &vy, alpha, gamma, &log_w),
            )
        })
        .collect();
    Ok((samples, min))
}

/// Checks `E[F(Q_X)] <= E[F(Q_Y)]` for the nondecreasing convex family.
#[allow(clippy::too_many_arguments)]
pub fn check_convex_order(
    x: &GaussianVectorSpec,
    y: &GaussianVectorSpec,
    alpha: f64,
    gamma: f64,
    weights: &[f64],
    family: &[ConvexFn],
    replicas: u64,
    rng: RngStream,
    sigmas: f64,
) -> Result<ConvexOrderReport> {
    check_replicas(replicas)?;
    let (samples, min) = coupled_q_samples(x, y, alpha, gamma, weights, replicas, rng)?;
    let mut qx: Vec<f64> = samples.iter().map(|s| s.0).collect();
    qx.sort_by(|a, b| a.total_cmp(b));
    let median = crate::stats::quantile_sorted(&qx, 0.5);
    let entries: Vec<ConvexOrderEntry> = family
        .iter()
        .map(|f| {
            let ex = Estimate::from_samples(samples.iter().map(|s| f.apply(s.0, median)));
            let ey = Estimate::from_samples(samples.iter().map(|s| f.apply(s.1, median)));
            let combined = ex.stderr.hypot(ey.stderr);
            ConvexOrderEntry {
                function: *f,
                strike: matches!(f, ConvexFn::CallAtMedian).then_some(median),
                pass: ex.mean <= ey.mean + sigmas * combined,
                combined_stderr: combined,
                estimate_x: ex,
                estimate_y: ey,
            }
        })
        .collect();
    Ok(ConvexOrderReport {
        min_difference_eigenvalue: min,
        pass: entries.iter().all(|e| e.pass),
        entries,
        sigmas,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub noise_scales: Vec<f64>,
    pub estimates: Vec<Estimate>,
    /// Stderr of each consecutive paired difference.
    pub step_stderr: Vec<f64>,
    pub pass: bool,
}

/// `E[Q]` along `Y_v = X + sqrt(v) R` for increasing `v`, common random numbers.
#[allow(clippy::too_many_arguments)]
pub fn convex_order_chain(
    x: &GaussianVectorSpec,
    noise: &GaussianVectorSpec,
    scales: &[f64],
    alpha: f64,
    gamma: f64,
    weights: &[f64],
    replicas: u64,
    rng: RngStream,
    sigmas: f64,
) -> Result<ChainReport> {
    check_replicas(replicas)?;
    if scales.windows(2).any(|w| w[1] <= w[0]) || scales.iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidArgument(
            "noise scales must be nonnegative and increasing".into(),
        ));
    }
    if x.points != noise.points || weights.len() != x.len() {
        return Err(Error::InvalidArgument("point sets must agree".into()));
    }
    let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let k = x.len();
    let (vx, vn) = (x.variances(), noise.variances());
    let rows: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut g = rng.with_replica(r).rng();
            let zx = x.transform(&standard_normals(&mut g, k));
            let zr = noise.transform(&standard_normals(&mut g, k));
            scales
                .iter()
                .map(|&v| {
                    let z = &zx + &zr * v.sqrt();
                    let var: Vec<f64> = vx.iter().zip(&vn).map(|(a, b)| a + v * b).collect();
                    q_value(&z, &var, alpha, gamma, &log_w)
                })
                .collect()
        })
        .collect();
    let estimates: Vec<Estimate> = (0..scales.len())
        .map(|j| Estimate::from_samples(rows.iter().map(|r| r[j])))
        .collect();
    let steps: Vec<Estimate> = (1..scales.len())
        .map(|j| Estimate::from_samples(rows.iter().map(|r| r[j] - r[j - 1])))
        .collect();
    Ok(ChainReport {
        noise_scales: scales.to_vec(),
        pass: steps.iter().all(|s| s.mean >= -sigmas * s.stderr),
        step_stderr: steps.iter().map(|s| s.stderr).collect(),
        estimates,
    })
}

/// Finite-difference step of the standard suite.
pub const SUITE_STEP: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub derivatives: Vec<(String, DerivativeCheck)>,
    pub convex_order: ConvexOrderReport,
    pub chain: ChainReport,
    pub variants: Vec<(String, VariantReport)>,
    pub pass: bool,
}

/// The fixed battery of interpolation and comparison checks on a 4x4 lattice.
///
/// `X` has the layer covariance `c_{0,1}`; the comparison fields add either the
/// PSD layer `c_{1,2}` or a constant `0.5` to it.
pub fn standard_suite(
    lab: &KernelLab,
    replicas: u64,
    rng: RngStream,
    sigmas: f64,
) -> Result<SuiteReport> {
    let points = GaussianVectorSpec::lattice(4);
    let k = points.len();
    let base = lab.layer_covariance(0.0, 1.0)?;
    let upper = lab.layer_covariance(1.0, 2.0)?;
    let x = GaussianVectorSpec::from_kernel("c01", points.clone(), |r| base.eval(r))?;
    let noise = GaussianVectorSpec::from_kernel("c12", points, |r| upper.eval(r))?;
    let y_layer = x.plus("c02", &noise.covariance)?;
    let y_const = x.plus("c01+0.5", &DMatrix::from_element(k, k, 0.5))?;
    let uniform = vec![1.0 / k as f64; k];
    let half: Vec<f64> = (0..k).map(|i| if i < k / 2 { 2.0 / k as f64 } else { 0.0 }).collect();
    let ramp: Vec<f64> = (0..k).map(|i| (i + 1) as f64).collect();
    let q = ProductFunctionalSpec::q_functional(1.0, 1.5, uniform.clone())?;
    let square = ProductFunctionalSpec::single(2.0, 1.0, uniform.clone())?;
    let mixed = ProductFunctionalSpec::new(vec![
        Factor {
            p: 0.5,
            gamma: 0.7,
            weights: uniform.clone(),
        },
        Factor {
            p: -1.0,
            gamma: 1.2,
            weights: half,
        },
        Factor {
            p: 1.5,
            gamma: 0.4,
            weights: ramp,
        },
    ])?;

    let configs = [
        ("q-functional/constant", InterpolationPath::new(x.clone(), y_const.clone())?, &q, 0.5),
        ("square/layer", InterpolationPath::new(x.clone(), y_layer.clone())?, &square, 0.3),
        ("mixed/reverse-layer", InterpolationPath::new(y_layer.clone(), x.clone())?, &mixed, 0.7),
    ];
    let mut derivatives = Vec::new();
    for (i, (label, path, func, t)) in configs.iter().enumerate() {
        let check = check_derivative(path, func, *t, SUITE_STEP, replicas, rng.with_layer(i as u32), sigmas)?;
        derivatives.push((label.to_string(), check));
    }
    let convex_order = check_convex_order(
        &x,
        &y_layer,
        1.0,
        1.5,
        &uniform,
        &ConvexFn::family(0.5),
        replicas,
        rng.with_layer(10),
        sigmas,
    )?;
    let chain = convex_order_chain(
        &x,
        &noise,
        &[0.0, 0.5, 1.0, 2.0],
        1.0,
        1.5,
        &uniform,
        replicas,
        rng.with_layer(11),
        sigmas,
    )?;
    let y_unit = x.plus("c01+1", &DMatrix::from_element(k, k, 1.0))?;
    let variants = vec![
        (
            "q-functional/constant".to_string(),
            check_kahane_variant(&x, &y_const, &q, replicas, rng.with_layer(20), sigmas)?,
        ),
        (
            "square/unit-constant".to_string(),
            check_kahane_variant(&x, &y_unit, &square, replicas, rng.with_layer(21), sigmas)?,
        ),
    ];
    let pass = derivatives.iter().all(|d| d.1.pass)
        && convex_order.pass
        && chain.pass
        && variants.iter().all(|v| v.1.pass);
    Ok(SuiteReport {
        derivatives,
        convex_order,
        chain,
        variants,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_covariances() {
        let pts = GaussianVectorSpec::lattice(2);
        let bad = DMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 2.0 });
        assert!(matches!(
            GaussianVectorSpec::new("x", pts.clone(), bad),
            Err(Error::NotPsd(_))
        ));
        let asym = DMatrix::from_fn(4, 4, |i, j| if i < j { 0.1 } else { 0.0 } + if i == j { 1.0 } else { 0.0 });
        assert!(GaussianVectorSpec::new("x", pts, asym).is_err());
    }

    #[test]
    fn factor_reproduces_covariance() {
        let pts = GaussianVectorSpec::lattice(3);
        let x = GaussianVectorSpec::from_kernel("x", pts, |r| (-r).exp()).unwrap();
        let l = &x.factor;
        assert!((l * l.transpose() - &x.covariance).amax() < 1e-12);
    }

    #[test]
    fn single_unit_factor_has_no_derivative() {
        let pts = GaussianVectorSpec::lattice(1);
        let x = GaussianVectorSpec::new("x", pts.clone(), DMatrix::from_element(1, 1, 1.0)).unwrap();
        let y = GaussianVectorSpec::new("y", pts, DMatrix::from_element(1, 1, 2.0)).unwrap();
        let path = InterpolationPath::new(x, y).unwrap();
        let f = ProductFunctionalSpec::single(1.0, 1.0, vec![1.0]).unwrap();
        let d = derivative_formula(&path, &f, 0.5, 10, RngStream::root(1)).unwrap();
        assert_eq!((d.mean, d.stderr), (0.0, 0.0));
        let e = interpolated_expectation(&path, &f, 0.3, 1000, RngStream::root(1)).unwrap();
        assert!((e.mean - 1.0).abs() < 5.0 * e.stderr);
    }

    #[test]
    fn coefficient_mass_of_q_functional() {
        let f = ProductFunctionalSpec::single(2.0, 1.0, vec![1.0]).unwrap();
        assert_eq!(f.coefficient_mass(), 2.0);
        let q = ProductFunctionalSpec::q_functional(1.0, 1.5, vec![1.0]).unwrap();
        // p1 = 3, p2 = -2
        let expected = 1.0 * 3.0 * 2.0 + 2.25 * 2.0 * 3.0 + 2.0 * 1.5 * 6.0;
        assert!((q.coefficient_mass() - expected).abs() < 1e-12);
    }
}
