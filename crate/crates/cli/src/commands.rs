//! One function per subcommand. Each writes its tables and returns a JSON
//! report plus the acceptance checks enabled by `--assert`.

use balanced_chaos::field::{sample_field, write_snapshot, GridSpec, ScaleSchedule};
use balanced_chaos::gmc::GmcParams;
use balanced_chaos::kahane::standard_suite;
use balanced_chaos::kernel::{estimate_bound_a, KernelLab};
use balanced_chaos::rng::{RngStream, AUX_LAYER};
use balanced_chaos::stats::{
    cascade_experiment, fit_stretched_exponential, gradient_moment_scan, laplace_curve,
    laplace_monotonicity, laplace_tail_convert, moment_sweep, quantile_thresholds,
    scaling_regression, small_ball_estimate, tail_curve, QSampler, TailWindow,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::OutputDir;
use crate::Kind;

/// Largest accepted ratio between moments at consecutive scales.
pub const MOMENT_GROWTH_LIMIT: f64 = 2.0;
/// Ceiling on the small-ball slope in excess of the dimension.
pub const SMALL_BALL_SLACK: f64 = 0.5;
/// Largest relative gap between rescaled and directly evaluated cascade terms.
pub const CASCADE_IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub report: Value,
    pub checks: Vec<Check>,
}

#[derive(Debug, Serialize)]
pub struct Sidecar<'a> {
    pub command: &'a str,
    pub config_sha256: String,
    pub seed: u64,
    pub replicas: u64,
    pub wall_seconds: f64,
    pub report: &'a Value,
    pub checks: &'a [Check],
}

/// Table with a header and numeric rows.
fn table(out: &mut OutputDir, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string())).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    out.write_bytes(name, &bytes)
}

fn lab(config: &ExperimentConfig) -> Result<KernelLab, CliError> {
    Ok(KernelLab::new(config.mollifier()?)?)
}

pub fn execute(kind: Kind, config: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let lab = lab(config)?;
    let rng = RngStream::root(config.seed);
    match kind {
        Kind::KernelTable => kernel_table(&lab, config, out),
        Kind::Sample => sample(&lab, config, rng, out),
        Kind::Moments => moments(&lab, config, rng, out),
        Kind::Scaling => scaling(&lab, config, rng, out),
        Kind::Tail => tail(&lab, config, rng, out),
        Kind::Laplace => laplace(&lab, config, rng, out),
        Kind::SmallBall => small_ball(&lab, config, rng, out),
        Kind::GradMoments => grad_moments(&lab, config, rng, out),
        Kind::Cascade => cascade(&lab, config, rng, out),
        Kind::Kahane => kahane(&lab, config, rng, out),
    }
}

fn kernel_table(lab: &KernelLab, config: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let ts = &config.experiment.t_grid;
    let layers = ts
        .iter()
        .map(|&t| lab.layer_covariance(0.0, t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut header = vec!["r", "rho", "k0", "g0", "k0_plus_ln_r"];
    let names: Vec<String> = ts.iter().map(|t| format!("c_0_{t}")).collect();
    header.extend(names.iter().map(String::as_str));
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut k0_at_one = f64::NAN;
    for k in 1..=200 {
        let r = k as f64 / 100.0;
        let k0 = lab.eval_k0(r)?;
        let g0 = lab.eval_g0(r)?;
        if r < 1.0 {
            worst = worst.max((k0 + r.ln() - g0).abs());
        }
        if k == 100 {
            k0_at_one = k0;
        }
        let mut row = vec![r, lab.rho().eval(r), k0, g0, k0 + r.ln()];
        row.extend(layers.iter().map(|c| c.eval(r)));
        rows.push(row);
    }
    table(out, "kernel-table.csv", &header, &rows)?;
    let r_grid: Vec<f64> = (1..=400).map(|k| k as f64 / 200.0).collect();
    let bound_a = estimate_bound_a(lab, ts, &r_grid)?;
    Ok(Outcome {
        report: json!({ "bound_a": bound_a, "max_identity_gap": worst, "k0_at_1": k0_at_one }),
        checks: vec![
            Check::new("k0-vanishes-at-1", k0_at_one == 0.0, format!("K0(1) = {k0_at_one}")),
            Check::new(
                "k0-plus-ln-r-equals-g0",
                worst < 1e-8,
                format!("max |K0 + ln r - g0| = {worst:e}"),
            ),
        ],
    })
}

fn sample(lab: &KernelLab, config: &ExperimentConfig, rng: RngStream, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let t = config.field.t;
    let grid = config.grid(t)?;
    let schedule = if t == 0.0 {
        ScaleSchedule::new(vec![0.0])?
    } else {
        ScaleSchedule::uniform(t, config.field.delta)?
    };
    let mut rows = Vec::new();
    let mut finite = true;
    for k in 0..config.experiment.count {
        let field = sample_field(lab, t, &schedule, grid, rng.with_replica(k))?;
        let name = format!("sample-{k}.bin");
        write_snapshot(&out.path(&name), &field)?;
        out.register(&name)?;
        let v = &field.values;
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        finite &= field.is_finite();
        rows.push(vec![k as f64, lo, hi, mean, var]);
    }
    table(out, "sample.csv", &["index", "min", "max", "mean", "variance"], &rows)?;
    Ok(Outcome {
        report: json!({ "n": grid.n, "t": t, "layers": schedule.layer_count() }),
        checks: vec![Check::new("finite", finite, "all grid values finite".into())],
    })
}

fn moments(lab: &KernelLab, config: &ExperimentConfig, rng: RngStream, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let params = config.params(e.t_grid[0])?;
    let tilt = (e.tilt > 0.0).then_some(e.tilt);
    let sweep = moment_sweep(lab, params, &e.t_grid, &e.orders, e.replicas, tilt, rng)?;
    let mut rows = Vec::new();
    let mut excluded = 0;
    for (k, ms) in sweep.moments.iter().enumerate() {
        for m in ms {
            excluded += m.excluded;
            rows.push(vec![
                sweep.t[k],
                sweep.grid_n[k] as f64,
                m.order,
                m.estimate,
                m.stderr,
                m.replicas as f64,
                m.excluded as f64,
            ]);
        }
    }
    table(
        out,
        "moments.csv",
        &["t", "n", "order", "estimate", "stderr", "replicas", "excluded"],
        &rows,
    )?;
    let mut worst_growth: f64 = 0.0;
    for k in 1..sweep.moments.len() {
        for (a, b) in sweep.moments[k - 1].iter().zip(&sweep.moments[k]) {
            worst_growth = worst_growth.max(b.estimate / a.estimate);
        }
    }
    Ok(Outcome {
        report: serde_json::to_value(&sweep).expect("serializes"),
        checks: vec![
            Check::new("no-excluded-samples", excluded == 0, format!("{excluded} non-finite")),
            Check::new(
                "moments-bounded-in-t",
                worst_growth < MOMENT_GROWTH_LIMIT,
                format!("largest ratio between consecutive t = {worst_growth:.4}"),
            ),
        ],
    })
}

/// Tolerance on a fitted scaling slope: 0.1 absolute for `q = 0`, 15% otherwise.
pub fn scaling_tolerance(q: f64, target: f64) -> f64 {
    if q == 0.0 {
        0.1
    } else {
        0.15 * target.abs()
    }
}

fn scaling(lab: &KernelLab, config: &ExperimentConfig, rng: RngStream, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let params = config.params(e.s_grid[0] + e.gap)?;
    let n = if config.field.n == 0 {
        GridSpec::for_scale(e.gap).n
    } else {
        config.field.n
    };
    let orders: Vec<(f64, f64)> = e.pq.iter().map(|v| (v[0], v[1])).collect();
    let reports = scaling_regression(lab, params, &orders, &e.s_grid, e.gap, n, e.replicas, rng)?;
    let mut points = Vec::new();
    let mut summary = Vec::new();
    let mut checks = Vec::new();
    for r in &reports {
        for p in &r.points {
            points.push(vec![r.p, r.q, p.s, p.t, p.log_moment, p.stderr, p.excluded as f64]);
        }
        summary.push(vec![r.p, r.q, r.fit.slope, r.fit.slope_stderr, r.ci.0, r.ci.1, r.target]);
        let tol = scaling_tolerance(r.q, r.target);
        checks.push(Check::new(
            &format!("slope-p{}-q{}", r.p, r.q),
            (r.fit.slope - r.target).abs() <= tol,
            format!("slope {:.4} vs target {:.4} (tolerance {tol:.3})", r.fit.slope, r.target),
        ));
    }
    table(
        out,
        "scaling.csv",
        &["p", "q", "s", "t", "log_moment", "stderr", "excluded"],
        &points,
    )?;
    table(
        out,
        "scaling-fit.csv",
        &["p", "q", "slope", "slope_stderr", "ci_lo", "ci_hi", "target"],
        &summary,
    )?;
    Ok(Outcome {
        report: serde_json::to_value(&reports).expect("serializes"),
        checks,
    })
}

fn tail_target(params: &GmcParams) -> f64 {
    4.0 / (params.alpha * params.gamma)
}

fn tail(lab: &KernelLab, config: &ExperimentConfig, rng: RngStream, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let t = config.field.t;
    let params = config.params(t)?;
    let mut sampler = QSampler::new(lab, params, config.grid(t)?)?;
    if e.tilt > 0.0 {
        sampler = sampler.with_tilt(e.tilt)?;
    }
    let samples = sampler.sample(e.replicas, rng);
    let thresholds = quantile_thresholds(&samples, &e.quantiles);
    let curve = tail_curve(&samples, &thresholds)?;
    let rows: Vec<Vec<f64>> = (0..thresholds.len())
        .map(|i| {
            vec![
                curve.thresholds[i],
                curve.counts[i] as f64,
                curve.survival[i],
                curve.ci_lo[i],
                curve.ci_hi[i],
            ]
        })
        .collect();
    table(out, "tail.csv", &["threshold", "count", "survival", "ci_lo", "ci_hi"], &rows)?;
    let window = TailWindow {
        p_max: e.p_max,
        min_count: e.min_count,
        max_ci_width: e.max_ci_width,
    };
    let target = tail_target(&params);
    let mut fit = fit_stretched_exponential(&curve, &window, rng.with_layer(AUX_LAYER))?;
    fit.target = Some(target);
    table(
        out,
        "tail-fit.csv",
        &["beta", "ci_lo", "ci_hi", "points", "target"],
        &[vec![fit.slope, fit.ci.0, fit.ci.1, fit.points as f64, target]],
    )?;
    let max_q = samples.iter().fold(0.0f64, |a, b| a.max(*b));
    let ceiling = params.holder_ceiling();
    Ok(Outcome {
        report: json!({ "fit": fit, "target": target, "max_q": max_q, "holder_ceiling": ceiling }),
        checks: vec![
            Check::new(
                "beta-in-band",
                fit.slope >= 0.5 * target && fit.slope <= 2.0 * target,
                format!("beta {:.4} vs band [{:.4}, {:.4}]", fit.slope, 0.5 * target, 2.0 * target),
            ),
            Check::new(
                "holder-ceiling",
                max_q <= ceiling * (1.0 + 1e-9),
                format!("max Q {max_q:.4} vs ceiling {ceiling:.4}"),
            ),
        ],
    })
}

fn laplace(lab: &KernelLab, config: &ExperimentConfig, rng: RngStream, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let t = config.field.t;
    let params = config.params(t)?;
    let samples = QSampler::new(lab, params, config.grid(t)?)?.sample(e.replicas, rng);
    let curve = laplace_curve(&samples, &e.mu_grid)?;
    let rows: Vec<Vec<f64>> = (0..curve.mu.len())
        .map(|i| {
            vec![
                curve.mu[i],
                curve.log_mgf[i],
                curve.stderr[i],
                curve.max_share[i],
                curve.dominated[i] as u8 as f64,
            ]
        })
        .collect();
    table(out, "laplace.csv", &["mu", "log_mgf", "stderr", "max_share", "dominated"], &rows)?;
    let growth_target = 4.0 / (4.0 - params.alpha * params.gamma);
    let conversion = curve
        .growth
        .as_ref()
        .map(|g| 1.0 - 1.0 / g.slope)
        .and_then(|p| laplace_tail_convert(p, None).ok());

    // convexity in mu: slopes between neighbouring points do not decrease
    let mut convex = true;
    for i in 1..curve.mu.len().saturating_sub(1) {
        let (m0, m1, m2) = (curve.mu[i - 1], curve.mu[i], curve.mu[i + 1]);
        let s1 = (curve.log_mgf[i] - curve.log_mgf[i - 1]) / (m1 - m0);
        let s2 = (curve.log_mgf[i + 1] - curve.log_mgf[i]) / (m2 - m1);
        let se = (curve.stderr[i - 1].powi(2) + curve.stderr[i].powi(2)).sqrt() / (m1 - m0)
            + (curve.stderr[i].powi(2) + curve.stderr[i + 1].powi(2)).sqrt() / (m2 - m1);
        convex &= s2 >= s1 - e.sigmas * se;
    }
    let mut checks = vec![Check::new(
        "convex-in-mu",
        convex,
        "slopes of ln E[e^{mu Q}] non-decreasing within tolerance".into(),
    )];
    let mut report = json!({
        "curve": curve,
        "growth_target": growth_target,
        "tail_conversion": conversion,
    });
    if e.t_grid.len() >= 2 {
        let mono = laplace_monotonicity(lab, params, &e.t_grid, &e.mu_grid, e.replicas, e.sigmas, rng.with_layer(1))?;
        let mut rows = Vec::new();
        for (i, mu) in mono.mu.iter().enumerate() {
            for (j, t) in mono.t.iter().enumerate() {
                let (step, se) = if j == 0 {
                    (f64::NAN, f64::NAN)
                } else {
                    (mono.steps[i][j - 1], mono.step_stderr[i][j - 1])
                };
                rows.push(vec![*mu, *t, mono.log_mgf[i][j], mono.stderr[i][j], step, se]);
            }
        }
        table(
            out,
            "laplace-monotonicity.csv",
            &["mu", "t", "log_mgf", "stderr", "step", "step_stderr"],
            &rows,
        )?;
        checks.push(Check::new(
            "monotone-in-t",
            mono.pass,
            format!("non-decreasing over t = {:?} within {} stderr", mono.t, mono.sigmas),
        ));
        report["monotonicity"] = serde_json::to_value(&mono).expect("serializes");
    }
    Ok(Outcome { report, checks })
}

fn small_ball(lab: &KernelLab, config: &ExperimentConfig, rng: RngStream, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let curve = small_ball_estimate(lab, &e.ball_t_grid, e.replicas, e.refine, rng)?;
    let rows: Vec<Vec<f64>> = curve
        .points
        .iter()
        .map(|p| {
            vec![
                p.t,
                p.n as f64,
                p.count as f64,
                p.replicas as f64,
                p.p_hat,
                p.ci.0,
                p.ci.1,
                p.censored as u8 as f64,
            ]
        })
        .collect();
    table(
        out,
        "small-ball.csv",
        &["t", "n", "count", "replicas", "p_hat", "ci_lo", "ci_hi", "censored"],
        &rows,
    )?;
    let ceiling = curve.dimension as f64 + SMALL_BALL_SLACK;
    let slope_check = match &curve.fit {
        Some(f) => Check::new(
            "slope-positive-below-ceiling",
            f.slope > 0.0 && f.slope <= ceiling,
            format!("slope {:.4} vs (0, {ceiling}] over {} points", f.slope, f.points),
        ),
        None => Check::new(
            "slope-positive-below-ceiling",
            false,
            "fewer than two uncensored points".into(),
        ),
    };
    let monotone = curve
        .points
        .windows(2)
        .all(|w| w[1].p_hat <= w[0].ci.1);
    Ok(Outcome {
        report: serde_json::to_value(&curve).expect("serializes"),
        checks: vec![
            slope_check,
            Check::new("non-increasing-in-t", monotone, "P within CI of its predecessor".into()),
        ],
    })
}

fn grad_moments(lab: &KernelLab, config: &ExperimentConfig, rng: RngStream, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let table_ = gradient_moment_scan(lab, &e.grad_s_grid, &e.m_grid, e.replicas, e.refine, rng)?;
    let rows: Vec<Vec<f64>> = table_
        .cells
        .iter()
        .map(|c| vec![c.s, c.m as f64, c.n as f64, c.moment.mean, c.moment.stderr, c.implied_c])
        .collect();
    table(out, "grad-moments.csv", &["s", "m", "n", "moment", "stderr", "implied_c"], &rows)?;
    Ok(Outcome {
        report: serde_json::to_value(&table_).expect("serializes"),
        checks: vec![Check::new(
            "implied-c-bounded",
            table_.pass,
            format!("max/min implied C = {:.4}", table_.spread),
        )],
    })
}

fn cascade(lab: &KernelLab, config: &ExperimentConfig, rng: RngStream, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let t = config.field.t;
    let params = config.params(t)?;
    let n = config.grid(t)?.n;
    let r = cascade_experiment(lab, params, e.es, n, e.replicas, e.tolerance, rng)?;
    let rows: Vec<Vec<f64>> = r
        .first
        .rhs_terms
        .iter()
        .zip(&r.first.direct_terms)
        .enumerate()
        .map(|(i, (a, b))| vec![i as f64, *a, *b])
        .collect();
    table(out, "cascade-terms.csv", &["cube", "rhs_term", "direct_term"], &rows)?;
    table(
        out,
        "cascade.csv",
        &["replicas", "violations", "max_ratio", "max_identity_error", "first_lhs", "first_rhs"],
        &[vec![
            r.replicas as f64,
            r.violations as f64,
            r.max_ratio,
            r.max_identity_error,
            r.first.lhs,
            r.first.rhs(),
        ]],
    )?;
    Ok(Outcome {
        report: serde_json::to_value(&r).expect("serializes"),
        checks: vec![
            Check::new(
                "lhs-below-rhs",
                r.violations == 0,
                format!("{} violations, max lhs/rhs = {:.6}", r.violations, r.max_ratio),
            ),
            Check::new(
                "rescaling-identity",
                r.max_identity_error < CASCADE_IDENTITY_TOL,
                format!("max relative gap {:e}", r.max_identity_error),
            ),
        ],
    })
}

fn kahane(lab: &KernelLab, config: &ExperimentConfig, rng: RngStream, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let suite = standard_suite(lab, e.replicas, rng, e.sigmas)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    w.write_record(["check", "label", "value_x", "value_y", "stderr", "pass"]).map_err(io)?;
    let mut checks = Vec::new();
    for (label, d) in &suite.derivatives {
        w.write_record([
            "derivative".to_string(),
            label.clone(),
            d.finite_difference.mean.to_string(),
            d.formula.mean.to_string(),
            d.combined_stderr.to_string(),
            d.pass.to_string(),
        ])
        .map_err(io)?;
        checks.push(Check::new(
            &format!("derivative/{label}"),
            d.pass,
            format!("z = {:.3}", d.z_score),
        ));
    }
    for c in &suite.convex_order.entries {
        let label = match c.function {
            balanced_chaos::kahane::ConvexFn::Identity => "identity".to_string(),
            balanced_chaos::kahane::ConvexFn::CallAtMedian => "call-at-median".to_string(),
            balanced_chaos::kahane::ConvexFn::Exponential { mu } => format!("exp-{mu}"),
        };
        w.write_record([
            "convex-order".to_string(),
            label.clone(),
            c.estimate_x.mean.to_string(),
            c.estimate_y.mean.to_string(),
            c.combined_stderr.to_string(),
            c.pass.to_string(),
        ])
        .map_err(io)?;
        checks.push(Check::new(
            &format!("convex-order/{label}"),
            c.pass,
            format!("{:.5} <= {:.5}", c.estimate_x.mean, c.estimate_y.mean),
        ));
    }
    for (v, (est, se)) in suite
        .chain
        .noise_scales
        .iter()
        .zip(suite.chain.estimates.iter().map(|e| (e.mean, e.stderr)))
    {
        w.write_record([
            "chain".to_string(),
            format!("v={v}"),
            est.to_string(),
            String::new(),
            se.to_string(),
            suite.chain.pass.to_string(),
        ])
        .map_err(io)?;
    }
    checks.push(Check::new("convex-order/chain", suite.chain.pass, "E[Q] non-decreasing in noise".into()));
    for (label, v) in &suite.variants {
        w.write_record([
            "variant".to_string(),
            label.clone(),
            v.estimate_x.mean.to_string(),
            v.estimate_y.mean.to_string(),
            v.bound_factor.to_string(),
            v.pass.to_string(),
        ])
        .map_err(io)?;
        checks.push(Check::new(
            &format!("variant/{label}"),
            v.pass,
            format!("C = {:.4}, both directions within e^C", v.c),
        ));
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    out.write_bytes("kahane.csv", &bytes)?;
    Ok(Outcome {
        report: serde_json::to_value(&suite).expect("serializes"),
        checks,
    })
}
