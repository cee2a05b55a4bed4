//! Experiment configuration: a TOML file, overridden by command-line flags.

use std::path::Path;

use balanced_chaos::field::{torus_points, GridSpec};
use balanced_chaos::gmc::GmcParams;
use balanced_chaos::kernel::{MollifierSpec, Profile, DEFAULT_TABLE_RESOLUTION};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    /// Only `bump` is available.
    pub mollifier: String,
    pub sharpness: f64,
    pub resolution: usize,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            mollifier: "bump".into(),
            sharpness: 1.0,
            resolution: DEFAULT_TABLE_RESOLUTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSection {
    /// Grid points per side; 0 picks the coarsest grid resolving each scale.
    pub n: usize,
    pub pad_factor: usize,
    pub delta: f64,
    pub t: f64,
}

impl Default for FieldSection {
    fn default() -> Self {
        Self {
            n: 0,
            pad_factor: 2,
            delta: 0.25,
            t: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GmcSection {
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for GmcSection {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub replicas: u64,
    pub t_grid: Vec<f64>,
    pub orders: Vec<f64>,
    /// `(p, q)` pairs for `scaling`.
    pub pq: Vec<[f64; 2]>,
    pub s_grid: Vec<f64>,
    /// Fixed `t - s` for `scaling`.
    pub gap: f64,
    pub m_grid: Vec<u32>,
    /// Scales of `grad-moments`.
    pub grad_s_grid: Vec<f64>,
    /// Scales of `small-ball`.
    pub ball_t_grid: Vec<f64>,
    pub mu_grid: Vec<f64>,
    /// Quantile levels of the tail thresholds.
    pub quantiles: Vec<f64>,
    pub p_max: f64,
    pub min_count: u64,
    pub max_ci_width: f64,
    /// Subcube count per side for `cascade`.
    pub es: usize,
    pub refine: usize,
    /// Amplitude of the smooth tilt; 0 disables it.
    pub tilt: f64,
    pub sigmas: f64,
    pub tolerance: f64,
    /// Field snapshots written by `sample`.
    pub count: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            replicas: 10_000,
            t_grid: vec![1.0, 2.0, 3.0],
            orders: vec![1.0, 2.0],
            pq: vec![[1.0, 0.0], [2.0, 1.0]],
            s_grid: vec![0.0, 0.5, 1.0, 1.5],
            gap: 1.0,
            m_grid: vec![1, 2, 4],
            grad_s_grid: vec![1.0, 2.0],
            ball_t_grid: vec![0.5, 1.0, 1.5, 2.0],
            mu_grid: vec![0.5, 1.0, 2.0],
            quantiles: vec![0.9, 0.99, 0.999, 0.9999],
            p_max: 0.1,
            min_count: 10,
            max_ci_width: 0.15,
            es: 2,
            refine: 1,
            tilt: 0.0,
            sigmas: 3.0,
            tolerance: 1e-9,
            count: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub kernel: KernelSection,
    pub field: FieldSection,
    pub gmc: GmcSection,
    pub experiment: ExperimentSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            kernel: KernelSection::default(),
            field: FieldSection::default(),
            gmc: GmcSection::default(),
            experiment: ExperimentSection::default(),
        }
    }
}

/// Flag values that win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicas: Option<u64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub t: Option<f64>,
    pub n: Option<usize>,
    pub sigmas: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.replicas {
            self.experiment.replicas = v;
        }
        if let Some(v) = o.alpha {
            self.gmc.alpha = v;
        }
        if let Some(v) = o.gamma {
            self.gmc.gamma = v;
        }
        if let Some(v) = o.t {
            self.field.t = v;
        }
        if let Some(v) = o.n {
            self.field.n = v;
        }
        if let Some(v) = o.sigmas {
            self.experiment.sigmas = v;
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn mollifier(&self) -> Result<MollifierSpec, CliError> {
        if self.kernel.mollifier != "bump" {
            return Err(CliError::Config(format!(
                "unknown mollifier '{}' (available: bump)",
                self.kernel.mollifier
            )));
        }
        let spec = MollifierSpec {
            profile: Profile::Bump {
                sharpness: self.kernel.sharpness,
            },
            table_resolution: self.kernel.resolution,
            dimension: 2,
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn params(&self, t: f64) -> Result<GmcParams, CliError> {
        GmcParams::new(self.gmc.alpha, self.gmc.gamma, 2, t)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Grid for scale `t`: the configured `n` if set, else the coarsest resolving one.
    pub fn grid(&self, t: f64) -> Result<GridSpec, CliError> {
        let grid = if self.field.n == 0 {
            let mut g = GridSpec::for_scale(t);
            g.pad_factor = self.field.pad_factor;
            g
        } else {
            GridSpec::new(self.field.n, 1.0, self.field.pad_factor)
                .map_err(|e| CliError::Config(e.to_string()))?
        };
        grid.validate().map_err(|e| CliError::Config(e.to_string()))?;
        grid.check_resolves(t)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(grid)
    }

    /// Checks every precondition that does not require sampling.
    pub fn validate(&self, command: &str) -> Result<ValidationReport, CliError> {
        self.mollifier()?;
        let e = &self.experiment;
        let needs_params = !matches!(command, "kernel-table" | "sample" | "small-ball" | "grad-moments");
        if needs_params {
            self.params(self.field.t)?;
        }
        if !(self.field.t >= 0.0 && self.field.t.is_finite()) {
            return Err(CliError::Config(format!("t = {} must be >= 0", self.field.t)));
        }
        if !(self.field.delta > 0.0) {
            return Err(CliError::Config("delta must be positive".into()));
        }
        if e.replicas < 2 {
            return Err(CliError::Config("replicas must be at least 2".into()));
        }
        if !(e.sigmas > 0.0) {
            return Err(CliError::Config("sigmas must be positive".into()));
        }
        let ascending = |v: &[f64], name: &str| -> Result<(), CliError> {
            if v.is_empty() || v.windows(2).any(|w| w[1] <= w[0]) || v.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Config(format!("{name} must be a nonempty increasing list")));
            }
            Ok(())
        };
        let scales: Vec<f64> = match command {
            "moments" | "laplace" => {
                ascending(&e.t_grid, "t_grid")?;
                if e.t_grid[0] <= 0.0 {
                    return Err(CliError::Config("t_grid entries must be positive".into()));
                }
                e.t_grid.clone()
            }
            "small-ball" => {
                ascending(&e.ball_t_grid, "ball_t_grid")?;
                if e.ball_t_grid[0] < 0.0 {
                    return Err(CliError::Config("ball_t_grid entries must be >= 0".into()));
                }
                e.ball_t_grid.clone()
            }
            "grad-moments" => {
                ascending(&e.grad_s_grid, "grad_s_grid")?;
                if e.grad_s_grid[0] < 0.0 || e.m_grid.is_empty() || e.m_grid.iter().any(|m| *m < 1) {
                    return Err(CliError::Config(
                        "grad_s_grid must be >= 0 and m_grid entries >= 1".into(),
                    ));
                }
                e.grad_s_grid.clone()
            }
            "scaling" => {
                ascending(&e.s_grid, "s_grid")?;
                if e.s_grid.len() < 2 || !(e.gap >= 0.0) {
                    return Err(CliError::Config("scaling needs two scales and gap >= 0".into()));
                }
                vec![e.gap]
            }
            "cascade" => {
                if e.es < 1 || (e.es > 1 && !e.es.is_multiple_of(2)) {
                    return Err(CliError::Config("es must be 1 or even".into()));
                }
                if self.field.t < (e.es as f64).ln() {
                    return Err(CliError::Config(format!(
                        "t = {} is below s = ln {}",
                        self.field.t, e.es
                    )));
                }
                vec![self.field.t]
            }
            "tail" => {
                ascending(&e.quantiles, "quantiles")?;
                if e.quantiles.iter().any(|q| !(0.0..1.0).contains(q)) {
                    return Err(CliError::Config("quantiles must lie in [0, 1)".into()));
                }
                vec![self.field.t]
            }
            "kernel-table" | "sample" | "kahane" => vec![self.field.t],
            other => return Err(CliError::Config(format!("unknown command `{other}`"))),
        };
        if e.mu_grid.iter().any(|m| !(*m >= 0.0)) {
            return Err(CliError::Config("mu_grid entries must be >= 0".into()));
        }
        if e.refine < 1 {
            return Err(CliError::Config("refine must be >= 1".into()));
        }
        let mut bytes_per_worker = 0u64;
        let mut grids = Vec::new();
        for &t in &scales {
            let grid = if command == "scaling" {
                let mut g = if self.field.n == 0 {
                    GridSpec::for_scale(t)
                } else {
                    GridSpec::new(self.field.n, 1.0, self.field.pad_factor)
                        .map_err(|e| CliError::Config(e.to_string()))?
                };
                g.check_resolves(t).map_err(|e| CliError::Config(e.to_string()))?;
                g.pad_factor = self.field.pad_factor;
                g
            } else {
                let mut g = self.grid(t)?;
                if matches!(command, "small-ball" | "grad-moments") {
                    g.n *= e.refine;
                }
                g
            };
            let m = torus_points(&grid, 1.0) as u64;
            // one complex buffer and one amplitude table per sampler, two fields out
            bytes_per_worker = bytes_per_worker.max(m * m * 24 + 2 * (grid.cells() as u64) * 8);
            grids.push((t, grid.n, m as usize));
        }
        let workers = rayon::current_num_threads() as u64;
        let samples = e.replicas * 8 * (1 + e.t_grid.len() as u64);
        Ok(ValidationReport {
            command: command.to_string(),
            grids,
            memory_bytes: bytes_per_worker * workers + samples,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub command: String,
    /// `(scale, n, torus side)` per sampled scale.
    pub grids: Vec<(f64, usize, usize)>,
    pub memory_bytes: u64,
}
