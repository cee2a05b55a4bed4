//! Monte Carlo experiments built on the field sampler and the chaos ratios.

use serde::{Deserialize, Serialize};

use super::fit::{weighted_line_fit, LineFit};
use super::laplace::log_mean_exp;
use super::moments::{estimate_moments, MomentEstimate};
use super::tail::clopper_pearson;
use super::{replicate_pairs, Estimate};
use crate::error::{Error, Result};
use crate::field::{
    gradient_sup, CirculantSampler, FieldSample, GridSpec, IncrementSampler, LayeredSampler,
    ScaleSchedule, SmoothSampler,
};
use crate::gmc::{
    balanced_ratio, cascade_decomposition, gmc_mass, pull_back, subdivide, tilted_ratio,
    zeta, CascadeTerms, GmcParams, RegionMask,
};
use crate::kernel::KernelLab;
use crate::rng::RngStream;

/// Draws balanced ratios `Q_{X_t}(S)` (optionally tilted by a smooth field).
#[derive(Debug, Clone)]
pub struct QSampler {
    params: GmcParams,
    sampler: CirculantSampler,
    region: RegionMask,
    tilt: Option<SmoothSampler>,
}

impl QSampler {
    /// Sampler on the given grid; `t` is `params.t`.
    pub fn new(lab: &KernelLab, params: GmcParams, grid: GridSpec) -> Result<Self> {
        let cov = lab.layer_covariance(0.0, params.t)?;
        Ok(Self {
            params,
            sampler: CirculantSampler::for_layer(&cov, grid)?,
            region: RegionMask::full(&grid),
            tilt: None,
        })
    }

    /// Sampler on the coarsest grid resolving `params.t`.
    pub fn resolved(lab: &KernelLab, params: GmcParams) -> Result<Self> {
        Self::new(lab, params, GridSpec::for_scale(params.t))
    }

    /// Tilts every replica by an independent smooth field of the given amplitude.
    pub fn with_tilt(mut self, amplitude: f64) -> Result<Self> {
        self.tilt = Some(SmoothSampler::new(self.sampler.grid(), amplitude)?);
        Ok(self)
    }

    pub fn grid(&self) -> GridSpec {
        self.sampler.grid()
    }

    pub fn params(&self) -> &GmcParams {
        &self.params
    }

    fn ratio(&self, field: &FieldSample, tilt: Option<&FieldSample>) -> f64 {
        match tilt {
            None => balanced_ratio(field, &self.params, &self.region),
            Some(f) => tilted_ratio(field, &f.values, &self.params, &self.region),
        }
        .expect("full region on a matching grid")
    }

    /// Replica `2k + j` uses part `j` of the transform drawn from `rng.with_replica(k)`.
    pub fn sample(&self, replicas: u64, rng: RngStream) -> Vec<f64> {
        replicate_pairs(replicas, |k| {
            let stream = rng.with_replica(k);
            let [a, b] = self.sampler.sample_pair(stream);
            match &self.tilt {
                None => [self.ratio(&a, None), self.ratio(&b, None)],
                Some(z) => {
                    let [za, zb] = z.sample_pair(stream.with_layer(1));
                    [self.ratio(&a, Some(&za)), self.ratio(&b, Some(&zb))]
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSweep {
    pub t: Vec<f64>,
    pub grid_n: Vec<usize>,
    pub moments: Vec<Vec<MomentEstimate>>,
}

/// Moments of `Q_{X_t}(S)` across a grid of scales, fresh fields per scale.
pub fn moment_sweep(
    lab: &KernelLab,
    params: GmcParams,
    t_grid: &[f64],
    orders: &[f64],
    replicas: u64,
    tilt: Option<f64>,
    rng: RngStream,
) -> Result<MomentSweep> {
    let mut out = MomentSweep {
        t: t_grid.to_vec(),
        grid_n: Vec::new(),
        moments: Vec::new(),
    };
    for (k, &t) in t_grid.iter().enumerate() {
        let mut sampler = QSampler::resolved(lab, params.at_scale(t))?;
        if let Some(a) = tilt {
            sampler = sampler.with_tilt(a)?;
        }
        let stream = rng.with_layer(2 * k as u32);
        let q = sampler.sample(replicas, stream);
        out.grid_n.push(sampler.grid().n);
        out.moments
            .push(estimate_moments(&q, orders, stream.with_layer(2 * k as u32 + 1))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub s: f64,
    pub t: f64,
    pub log_moment: f64,
    pub stderr: f64,
    pub excluded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub p: f64,
    pub q: f64,
    pub points: Vec<ScalingPoint>,
    pub fit: LineFit,
    /// 95% interval on the slope.
    pub ci: (f64, f64),
    pub target: f64,
}

/// Regresses `ln E[G_alpha(e^{-s}S)^p / G_gamma(e^{-s}S)^q]` on `s` with `t - s = gap`,
/// for every `(p, q)` in `orders` on the same fields.
///
/// The shrunken square is sampled on an `n x n` grid of side `e^{-s}`, so the grid
/// resolves every `t` as soon as it resolves `gap` on the unit square.
#[allow(clippy::too_many_arguments)]
pub fn scaling_regression(
    lab: &KernelLab,
    params: GmcParams,
    orders: &[(f64, f64)],
    s_grid: &[f64],
    gap: f64,
    n: usize,
    replicas: u64,
    rng: RngStream,
) -> Result<Vec<ScalingReport>> {
    if s_grid.len() < 2 {
        return Err(Error::InvalidArgument("need at least two scales".into()));
    }
    let mut points: Vec<Vec<ScalingPoint>> = vec![Vec::new(); orders.len()];
    for (k, &s) in s_grid.iter().enumerate() {
        let t = s + gap;
        let grid = GridSpec::new(n, (-s).exp(), 2)?;
        let sampler = CirculantSampler::for_layer(&lab.layer_covariance(0.0, t)?, grid)?;
        let region = RegionMask::full(&grid);
        let stream = rng.with_layer(k as u32);
        let masses: Vec<Option<(f64, f64)>> = replicate_pairs(replicas, |r| {
            sampler.sample_pair(stream.with_replica(r)).map(|f| {
                let la = gmc_mass(&f, params.alpha, t, &region).ok()?;
                let lg = gmc_mass(&f, params.gamma, t, &region).ok()?;
                (!la.underflow && !lg.underflow).then_some((la.log_value, lg.log_value))
            })
        });
        for (j, &(p, q)) in orders.iter().enumerate() {
            let values: Vec<Option<f64>> = masses
                .iter()
                .map(|m| m.map(|(la, lg)| p * la - q * lg).filter(|v| v.is_finite()))
                .collect();
            let kept: Vec<f64> = values.iter().flatten().copied().collect();
            if kept.len() < 2 {
                return Err(Error::Experiment(format!("no usable replicas at s = {s}")));
            }
            let (log_moment, stderr, _) = log_mean_exp(&kept, 1.0);
            points[j].push(ScalingPoint {
                s,
                t,
                log_moment,
                stderr,
                excluded: (values.len() - kept.len()) as u64,
            });
        }
    }
    orders
        .iter()
        .zip(points)
        .map(|(&(p, q), points)| {
            let x: Vec<f64> = points.iter().map(|p| p.s).collect();
            let y: Vec<f64> = points.iter().map(|p| p.log_moment).collect();
            let exact = points.iter().all(|p| p.stderr == 0.0);
            let w: Vec<f64> = points.iter().map(|p| 1.0 / p.stderr.powi(2)).collect();
            let fit = weighted_line_fit(&x, &y, (!exact).then_some(&w[..]))?;
            let half = if exact { 0.0 } else { 1.96 * fit.slope_stderr };
            Ok(ScalingReport {
                p,
                q,
                ci: (fit.slope - half, fit.slope + half),
                target: zeta(&params, p, q),
                points,
                fit,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallPoint {
    pub t: f64,
    pub n: usize,
    pub count: u64,
    pub replicas: u64,
    pub p_hat: f64,
    pub ci: (f64, f64),
    /// Fewer than 10 successes: excluded from the fit.
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallCurve {
    pub points: Vec<SmallBallPoint>,
    /// `ln(-ln P)` against `t` over uncensored points with `0 < P < 1`.
    pub fit: Option<LineFit>,
    /// Ceiling `d` on the decay rate.
    pub dimension: usize,
}

pub const SMALL_BALL_MIN_COUNT: u64 = 10;

/// `P(max_grid |X_t| <= 1)` for each `t`; `refine` multiplies the resolved grid size.
pub fn small_ball_estimate(
    lab: &KernelLab,
    t_grid: &[f64],
    replicas: u64,
    refine: usize,
    rng: RngStream,
) -> Result<SmallBallCurve> {
    let mut points = Vec::new();
    for (k, &t) in t_grid.iter().enumerate() {
        let mut grid = GridSpec::for_scale(t);
        grid.n *= refine.max(1);
        let sampler = CirculantSampler::for_layer(&lab.layer_covariance(0.0, t)?, grid)?;
        let count = if t == 0.0 {
            replicas
        } else {
            let hits = replicate_pairs(replicas, |r| {
                sampler
                    .sample_pair(rng.with_layer(k as u32).with_replica(r))
                    .map(|f| f.max_abs() <= 1.0)
            });
            hits.iter().filter(|h| **h).count() as u64
        };
        points.push(SmallBallPoint {
            t,
            n: grid.n,
            count,
            replicas,
            p_hat: count as f64 / replicas as f64,
            ci: clopper_pearson(count, replicas, 0.95),
            censored: count < SMALL_BALL_MIN_COUNT,
        });
    }
    if points.iter().filter(|p| p.t > 0.0).all(|p| p.censored) {
        return Err(Error::Experiment(format!(
            "every small-ball point with t > 0 has fewer than {SMALL_BALL_MIN_COUNT} hits in {replicas} replicas"
        )));
    }
    let usable: Vec<&SmallBallPoint> = points
        .iter()
        .filter(|p| !p.censored && p.p_hat > 0.0 && p.p_hat < 1.0)
        .collect();
    let fit = if usable.len() >= 2 {
        let x: Vec<f64> = usable.iter().map(|p| p.t).collect();
        let y: Vec<f64> = usable.iter().map(|p| (-p.p_hat.ln()).ln()).collect();
        Some(weighted_line_fit(&x, &y, None)?)
    } else {
        None
    };
    Ok(SmallBallCurve {
        points,
        fit,
        dimension: 2,
    })
}

/// `e^{-s} sup |grad X_s|` on the grid.
pub fn gradient_statistic(field: &FieldSample, s: f64) -> f64 {
    (-s).exp() * gradient_sup(field)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCell {
    pub s: f64,
    pub m: u32,
    pub n: usize,
    pub moment: Estimate,
    /// `moment^{1/m} / (e^s + sqrt(m))`.
    pub implied_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientTable {
    pub cells: Vec<GradientCell>,
    pub spread: f64,
    pub pass: bool,
}

/// Largest admissible `max C / min C` across the table.
pub const GRADIENT_SPREAD_LIMIT: f64 = 4.0;

pub fn gradient_moment_scan(
    lab: &KernelLab,
    s_grid: &[f64],
    m_grid: &[u32],
    replicas: u64,
    refine: usize,
    rng: RngStream,
) -> Result<GradientTable> {
    if m_grid.iter().any(|m| *m < 1) {
        return Err(Error::InvalidArgument("moment orders must be >= 1".into()));
    }
    let mut cells = Vec::new();
    for (k, &s) in s_grid.iter().enumerate() {
        let mut grid = GridSpec::for_scale(s);
        grid.n *= refine.max(1);
        let sampler = CirculantSampler::for_layer(&lab.layer_covariance(0.0, s)?, grid)?;
        let stats = replicate_pairs(replicas, |r| {
            sampler
                .sample_pair(rng.with_layer(k as u32).with_replica(r))
                .map(|f| gradient_statistic(&f, s))
        });
        for &m in m_grid {
            let moment = Estimate::from_samples(stats.iter().map(|v| v.powi(m as i32)));
            cells.push(GradientCell {
                s,
                m,
                n: grid.n,
                implied_c: moment.mean.powf(1.0 / m as f64) / (s.exp() + (m as f64).sqrt()),
                moment,
            });
        }
    }
    let max = cells.iter().fold(f64::NEG_INFINITY, |a, c| a.max(c.implied_c));
    let min = cells.iter().fold(f64::INFINITY, |a, c| a.min(c.implied_c));
    let spread = if min > 0.0 { max / min } else { f64::INFINITY };
    Ok(GradientTable {
        cells,
        spread,
        pass: spread < GRADIENT_SPREAD_LIMIT,
    })
}

/// Per-replica `Q_{X_{t_k}}(S)` for nested scales sharing their layers.
pub fn nested_q_samples(
    lab: &KernelLab,
    params: GmcParams,
    t_grid: &[f64],
    replicas: u64,
    rng: RngStream,
) -> Result<Vec<Vec<f64>>> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "scales must be positive and increasing".into(),
        ));
    }
    let schedule = ScaleSchedule::through(t_grid)?;
    let grid = GridSpec::for_scale(*t_grid.last().unwrap());
    let sampler = LayeredSampler::new(lab, &schedule, grid)?;
    let region = RegionMask::full(&grid);
    Ok(replicate_pairs(replicas, |r| {
        sampler.sample_cumulative_pair(rng.with_replica(r)).map(|chain| {
            chain
                .iter()
                .map(|f| {
                    balanced_ratio(f, &params.at_scale(f.scale_hi), &region)
                        .expect("full region on a matching grid")
                })
                .collect()
        })
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceMonotonicity {
    pub t: Vec<f64>,
    pub mu: Vec<f64>,
    /// `ln E[e^{mu Q_{X_t}}]`, indexed `[mu][t]`.
    pub log_mgf: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    /// Paired differences between consecutive scales, `[mu][step]`.
    pub steps: Vec<Vec<f64>>,
    pub step_stderr: Vec<Vec<f64>>,
    pub sigmas: f64,
    pub pass: bool,
}

/// Delta-method stderr of `ln mean(a) - ln mean(b)` for paired samples.
fn paired_log_ratio(a: &[f64], b: &[f64], mu: f64) -> (f64, f64) {
    let n = a.len() as f64;
    let ta = a.iter().fold(f64::NEG_INFINITY, |m, q| m.max(mu * q));
    let tb = b.iter().fold(f64::NEG_INFINITY, |m, q| m.max(mu * q));
    let wa: Vec<f64> = a.iter().map(|q| (mu * q - ta).exp()).collect();
    let wb: Vec<f64> = b.iter().map(|q| (mu * q - tb).exp()).collect();
    let ma = wa.iter().sum::<f64>() / n;
    let mb = wb.iter().sum::<f64>() / n;
    let (mut va, mut vb, mut cab) = (0.0, 0.0, 0.0);
    for (x, y) in wa.iter().zip(&wb) {
        let (dx, dy) = (x / ma - 1.0, y / mb - 1.0);
        va += dx * dx;
        vb += dy * dy;
        cab += dx * dy;
    }
    let var = (va + vb - 2.0 * cab) / (n - 1.0) / n;
    (ta + ma.ln() - tb - mb.ln(), var.max(0.0).sqrt())
}

/// Checks that `ln E[e^{mu Q_{X_t}}]` does not decrease along `t_grid`.
pub fn laplace_monotonicity(
    lab: &KernelLab,
    params: GmcParams,
    t_grid: &[f64],
    mu_grid: &[f64],
    replicas: u64,
    sigmas: f64,
    rng: RngStream,
) -> Result<LaplaceMonotonicity> {
    let rows = nested_q_samples(lab, params, t_grid, replicas, rng)?;
    let cols: Vec<Vec<f64>> = (0..t_grid.len())
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    let mut out = LaplaceMonotonicity {
        t: t_grid.to_vec(),
        mu: mu_grid.to_vec(),
        log_mgf: Vec::new(),
        stderr: Vec::new(),
        steps: Vec::new(),
        step_stderr: Vec::new(),
        sigmas,
        pass: true,
    };
    for &mu in mu_grid {
        let (l, s): (Vec<f64>, Vec<f64>) = cols
            .iter()
            .map(|c| {
                let (l, s, _) = log_mean_exp(c, mu);
                (l, s)
            })
            .unzip();
        let (d, ds): (Vec<f64>, Vec<f64>) = (1..cols.len())
            .map(|j| paired_log_ratio(&cols[j], &cols[j - 1], mu))
            .unzip();
        if d.iter().zip(&ds).any(|(d, s)| *d < -sigmas * s) {
            out.pass = false;
        }
        out.log_mgf.push(l);
        out.stderr.push(s);
        out.steps.push(d);
        out.step_stderr.push(ds);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeReport {
    pub es: usize,
    pub s: f64,
    pub t: f64,
    pub n: usize,
    pub replicas: u64,
    /// Replicas with `lhs > (1 + tol) rhs`.
    pub violations: u64,
    pub tolerance: f64,
    /// Largest `lhs / rhs`.
    pub max_ratio: f64,
    /// Largest relative gap between a rescaled tilted term and the direct `Q_{X_t}(S_i)`.
    pub max_identity_error: f64,
    pub first: CascadeTerms,
}

/// Builds `X_s` and the increment `X_t - X_s` on `n x n` and evaluates the cascade.
pub fn cascade_experiment(
    lab: &KernelLab,
    params: GmcParams,
    es: usize,
    n: usize,
    replicas: u64,
    tolerance: f64,
    rng: RngStream,
) -> Result<CascadeReport> {
    let s = (es as f64).ln();
    let t = params.t;
    let grid = GridSpec::unit(n)?;
    let base = CirculantSampler::for_layer(&lab.layer_covariance(0.0, s)?, grid)?;
    let increments = if t > s {
        Some(IncrementSampler::new(lab, s, t, grid)?)
    } else {
        None
    };
    let cubes = subdivide(&grid, &RegionMask::full(&grid), es)?;
    let terms: Vec<Result<CascadeTerms>> = replicate_pairs(replicas, |r| {
        let stream = rng.with_replica(r);
        let xs = base.sample_pair(stream.with_layer(0));
        let inc = match &increments {
            Some(sampler) => sampler.sample_pair(stream.with_layer(1)),
            None => {
                let zero = FieldSample::zeros(grid, s, t);
                [zero.clone(), zero]
            }
        };
        let mut out = xs.iter().zip(&inc).map(|(x, d)| {
            let pieces = cubes
                .iter()
                .map(|c| {
                    let mut p = pull_back(d, c)?;
                    p.scale_lo = 0.0;
                    p.scale_hi = t - s;
                    Ok(p)
                })
                .collect::<Result<Vec<_>>>()?;
            cascade_decomposition(x, &pieces, &params, es)
        });
        [out.next().unwrap(), out.next().unwrap()]
    });
    let terms = terms.into_iter().collect::<Result<Vec<_>>>()?;
    let mut violations = 0;
    let mut max_ratio = 0.0f64;
    let mut max_identity_error = 0.0f64;
    for c in &terms {
        let rhs = c.rhs();
        if c.lhs > rhs * (1.0 + tolerance) {
            violations += 1;
        }
        max_ratio = max_ratio.max(c.lhs / rhs);
        for (a, b) in c.rhs_terms.iter().zip(&c.direct_terms) {
            max_identity_error = max_identity_error.max((a / b - 1.0).abs());
        }
    }
    Ok(CascadeReport {
        es,
        s,
        t,
        n,
        replicas,
        violations,
        tolerance,
        max_ratio,
        max_identity_error,
        first: terms.into_iter().next().ok_or_else(|| {
            Error::InvalidArgument("cascade experiment needs at least one replica".into())
        })?,
    })
}
