//! Discretized chaos masses, balanced and tilted ratios, subdivisions and the
//! scaling exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSample, GridSpec};

/// Parameter pair `(alpha, gamma)` in dimension `d` at regularization scale `t`.
///
/// The pair is stored as `(min, max)`; `swapped` records whether the caller gave
/// them in the other order. Every ratio formula is symmetric under the swap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmcParams {
    pub alpha: f64,
    pub gamma: f64,
    pub d: usize,
    pub t: f64,
    pub swapped: bool,
}

impl GmcParams {
    pub fn new(alpha: f64, gamma: f64, d: usize, t: f64) -> Result<Self> {
        let limit = (2.0 * d as f64).sqrt();
        for (name, v) in [("alpha", alpha), ("gamma", gamma)] {
            if !(v > 0.0 && v < limit) {
                return Err(Error::InvalidParams(format!(
                    "{name} = {v} must lie in (0, sqrt(2d)) = (0, {limit:.6})"
                )));
            }
        }
        if alpha == gamma {
            return Err(Error::InvalidParams(format!(
                "alpha and gamma must differ, both are {alpha}"
            )));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParams(format!("t must be >= 0, got {t}")));
        }
        let swapped = alpha > gamma;
        let (alpha, gamma) = if swapped { (gamma, alpha) } else { (alpha, gamma) };
        Ok(Self {
            alpha,
            gamma,
            d,
            t,
            swapped,
        })
    }

    /// Same parameters at another scale.
    pub fn at_scale(&self, t: f64) -> Self {
        Self { t, ..*self }
    }

    /// Exponents `(gamma/(gamma-alpha), alpha/(gamma-alpha))` applied to the two masses.
    pub fn balance_exponents(&self) -> (f64, f64) {
        let gap = self.gamma - self.alpha;
        (self.gamma / gap, self.alpha / gap)
    }

    /// Pathwise ceiling `e^{alpha gamma t / 2}` of `Q / |region|`.
    pub fn holder_ceiling(&self) -> f64 {
        (self.alpha * self.gamma * self.t / 2.0).exp()
    }
}

/// Cell membership over an `n x n` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    n: usize,
    cell_area: OrderedArea,
    cells: Vec<bool>,
    members: Vec<usize>,
}

// cell_area as bits so the mask stays Eq
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct OrderedArea(u64);

impl RegionMask {
    pub fn full(grid: &GridSpec) -> Self {
        Self::from_cells(grid, vec![true; grid.cells()])
    }

    pub fn empty(grid: &GridSpec) -> Self {
        Self::from_cells(grid, vec![false; grid.cells()])
    }

    pub fn from_cells(grid: &GridSpec, cells: Vec<bool>) -> Self {
        assert_eq!(cells.len(), grid.cells());
        let members = cells.iter().enumerate().filter(|(_, c)| **c).map(|(k, _)| k).collect();
        Self {
            n: grid.n,
            cell_area: OrderedArea(grid.cell_area().to_bits()),
            cells,
            members,
        }
    }

    /// Axis-aligned square of `size` cells with lower corner at (`row`, `col`).
    pub fn square(grid: &GridSpec, row: usize, col: usize, size: usize) -> Result<Self> {
        if row + size > grid.n || col + size > grid.n || size == 0 {
            return Err(Error::InvalidArgument(format!(
                "square at ({row}, {col}) of size {size} exceeds the {0}x{0} grid",
                grid.n
            )));
        }
        let n = grid.n;
        let cells = (0..n * n)
            .map(|k| (row..row + size).contains(&(k / n)) && (col..col + size).contains(&(k % n)))
            .collect();
        Ok(Self::from_cells(grid, cells))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cell_area(&self) -> f64 {
        f64::from_bits(self.cell_area.0)
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.n + col]
    }

    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.count() as f64 * self.cell_area()
    }

    /// Row-major indices of the member cells, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.members
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.cell_area != other.cell_area {
            return Err(Error::InvalidArgument("regions live on different grids".into()));
        }
        Ok(())
    }

    pub fn is_disjoint(&self, other: &Self) -> Result<bool> {
        self.check_same(other)?;
        Ok(!self.cells.iter().zip(&other.cells).any(|(a, b)| *a && *b))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(a, b)| *a || *b).collect();
        let members = self.indices().iter().chain(other.indices()).copied();
        let mut members: Vec<usize> = members.collect();
        members.sort_unstable();
        members.dedup();
        Ok(Self {
            n: self.n,
            cell_area: self.cell_area,
            cells,
            members,
        })
    }

    /// Bounding square `(row, col, size)` if the mask is exactly a filled square.
    pub fn as_square(&self) -> Option<(usize, usize, usize)> {
        let first = *self.members.first()?;
        let last = *self.members.last()?;
        let (r0, c0) = (first / self.n, first % self.n);
        let (r1, c1) = (last / self.n, last % self.n);
        let size = r1 + 1 - r0;
        (c1 + 1 - c0 == size && self.count() == size * size).then_some((r0, c0, size))
    }
}

/// Natural logarithm of a chaos mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogMass {
    pub log_value: f64,
    /// `exp(log_value)` is not representable as a normal f64.
    pub underflow: bool,
    pub empty: bool,
}

impl LogMass {
    fn from_log(log_value: f64) -> Self {
        Self {
            log_value,
            underflow: log_value < f64::MIN_POSITIVE.ln(),
            empty: false,
        }
    }

    pub fn empty() -> Self {
        Self {
            log_value: f64::NEG_INFINITY,
            underflow: false,
            empty: true,
        }
    }

    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Sum in a balanced binary tree; error grows like `log n` instead of `n`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `ln sum_k exp(e_k)` over a nonempty list.
pub fn log_sum_exp(exponents: &mut [f64]) -> f64 {
    let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    for e in exponents.iter_mut() {
        *e = (*e - max).exp();
    }
    max + pairwise_sum(exponents).ln()
}

fn check_grid(field: &FieldSample, region: &RegionMask) -> Result<()> {
    if field.n() != region.n() || field.grid.cell_area().to_bits() != region.cell_area.0 {
        return Err(Error::InvalidArgument(format!(
            "field grid {} does not match region grid {}",
            field.n(),
            region.n()
        )));
    }
    Ok(())
}

/// `ln int_region exp(gamma (X + f) - gamma^2 t / 2) dx` by the cell-center rule.
fn log_mass_core(
    field: &FieldSample,
    tilt: Option<&[f64]>,
    gamma: f64,
    t: f64,
    region: &RegionMask,
) -> Result<LogMass> {
    check_grid(field, region)?;
    if region.is_empty() {
        return Ok(LogMass::empty());
    }
    let mut exponents: Vec<f64> = match tilt {
        None => region.indices().iter().map(|&k| gamma * field.values[k]).collect(),
        Some(f) => {
            if f.len() != field.values.len() {
                return Err(Error::InvalidArgument(format!(
                    "tilt has {} values, field has {}",
                    f.len(),
                    field.values.len()
                )));
            }
            region
                .indices()
                .iter()
                .map(|&k| gamma * field.values[k] + gamma * f[k])
                .collect()
        }
    };
    let lse = log_sum_exp(&mut exponents);
    if !lse.is_finite() {
        return Err(Error::InvalidArgument(
            "non-finite field or tilt value in region".into(),
        ));
    }
    Ok(LogMass::from_log(
        lse - 0.5 * gamma * gamma * t + region.cell_area().ln(),
    ))
}

/// Log of the chaos mass of `region` with parameter `gamma` for the field `X_t`.
pub fn gmc_mass(field: &FieldSample, gamma: f64, t: f64, region: &RegionMask) -> Result<LogMass> {
    log_mass_core(field, None, gamma, t, region)
}

fn combine(params: &GmcParams, log_alpha: LogMass, log_gamma: LogMass) -> Result<f64> {
    if log_alpha.empty || log_gamma.empty {
        return Err(Error::EmptyRegion);
    }
    let (pa, pg) = params.balance_exponents();
    Ok((pa * log_alpha.log_value - pg * log_gamma.log_value).exp())
}

/// `Q = M_alpha^{gamma/(gamma-alpha)} / M_gamma^{alpha/(gamma-alpha)}` over `region`.
pub fn balanced_ratio(field: &FieldSample, params: &GmcParams, region: &RegionMask) -> Result<f64> {
    let la = log_mass_core(field, None, params.alpha, params.t, region)?;
    let lg = log_mass_core(field, None, params.gamma, params.t, region)?;
    combine(params, la, lg)
}

/// Balanced ratio with both integrands tilted by `e^{alpha f}` and `e^{gamma f}`.
pub fn tilted_ratio(
    field: &FieldSample,
    f: &[f64],
    params: &GmcParams,
    region: &RegionMask,
) -> Result<f64> {
    let la = log_mass_core(field, Some(f), params.alpha, params.t, region)?;
    let lg = log_mass_core(field, Some(f), params.gamma, params.t, region)?;
    combine(params, la, lg)
}

/// Affine map `x -> scale * x + offset` from the unit square onto a subcube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub offset: [f64; 2],
}

impl AffineMap {
    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        [
            self.scale * x[0] + self.offset[0],
            self.scale * x[1] + self.offset[1],
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SubCube {
    pub mask: RegionMask,
    pub row: usize,
    pub col: usize,
    pub size: usize,
    /// One of `2^d` groups; cubes of one group are at least one side apart.
    pub group: usize,
    pub map: AffineMap,
}

/// Splits a square region into `es^2` equal squares (`es = e^s`).
///
/// `es` must be 1 or even and must divide the side of the region in cells.
pub fn subdivide(grid: &GridSpec, region: &RegionMask, es: usize) -> Result<Vec<SubCube>> {
    if es == 0 || (es != 1 && !es.is_multiple_of(2)) {
        return Err(Error::InvalidArgument(format!(
            "subdivision factor must be 1 or even, got {es}"
        )));
    }
    let (row, col, size) = region
        .as_square()
        .ok_or_else(|| Error::InvalidArgument("subdivision needs a square region".into()))?;
    if size % es != 0 {
        return Err(Error::InvalidArgument(format!(
            "subdivision factor {es} does not divide the region side of {size} cells"
        )));
    }
    let h = grid.spacing();
    let sub = size / es;
    let mut cubes = Vec::with_capacity(es * es);
    for i in 0..es {
        for j in 0..es {
            let (r, c) = (row + i * sub, col + j * sub);
            cubes.push(SubCube {
                mask: RegionMask::square(grid, r, c, sub)?,
                row: r,
                col: c,
                size: sub,
                group: (j % 2) + 2 * (i % 2),
                map: AffineMap {
                    scale: sub as f64 * h,
                    offset: [c as f64 * h, r as f64 * h],
                },
            });
        }
    }
    Ok(cubes)
}

/// Pulls the restriction of a field to a subcube back to the unit square.
pub fn pull_back(field: &FieldSample, cube: &SubCube) -> Result<FieldSample> {
    let grid = GridSpec::new(cube.size, 1.0, field.grid.pad_factor)?;
    Ok(FieldSample {
        grid,
        scale_lo: field.scale_lo,
        scale_hi: field.scale_hi,
        seed_path: field.seed_path.clone(),
        values: field.block(cube.row, cube.col, cube.size),
    })
}

/// Both sides of the one-step cascade inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeTerms {
    /// `Q_{X_t}(S)` of the stitched field.
    pub lhs: f64,
    /// `e^{(alpha gamma/2 - d) s} L^{(i)}_{X_s o phi_i}(S)` per subcube.
    pub rhs_terms: Vec<f64>,
    /// `Q_{X_t}(S_i)` evaluated directly on the fine grid.
    pub direct_terms: Vec<f64>,
}

impl CascadeTerms {
    pub fn rhs(&self) -> f64 {
        pairwise_sum(&self.rhs_terms)
    }
}

/// Stitches `X_t = X_s + X^{(i)} o phi_i^{-1}` on each subcube and evaluates the
/// cascade terms.
///
/// `field_s` is `X_s` on the unit grid with `e^s = es`; `increments[i]` is
/// `(X_t - X_s) o phi_i` on the unit grid with `n / es` points per side, ordered
/// as the output of [`subdivide`]. `params.t` is the total scale `t`.
pub fn cascade_decomposition(
    field_s: &FieldSample,
    increments: &[FieldSample],
    params: &GmcParams,
    es: usize,
) -> Result<CascadeTerms> {
    let grid = field_s.grid;
    let s = field_s.variance();
    if field_s.scale_lo != 0.0 || ((es as f64).ln() - s).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "field_s covers scales [{}, {}] but es = {es} needs [0, ln es]",
            field_s.scale_lo, field_s.scale_hi
        )));
    }
    if params.t < s {
        return Err(Error::InvalidArgument(format!(
            "t = {} is below s = {s}",
            params.t
        )));
    }
    let full = RegionMask::full(&grid);
    let cubes = subdivide(&grid, &full, es)?;
    if increments.len() != cubes.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} increments, got {}",
            cubes.len(),
            increments.len()
        )));
    }
    let m = grid.n / es;
    let mut stitched = field_s.clone();
    stitched.scale_hi = params.t;
    let inc_params = params.at_scale(params.t - s);
    let weight = ((params.alpha * params.gamma / 2.0 - params.d as f64) * s).exp();
    let mut rhs_terms = Vec::with_capacity(cubes.len());
    for (cube, inc) in cubes.iter().zip(increments) {
        if inc.n() != m || (inc.variance() - (params.t - s)).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "increment must be an {m}x{m} field of variance {}",
                params.t - s
            )));
        }
        let tilt = pull_back(field_s, cube)?;
        let unit = RegionMask::full(&inc.grid);
        rhs_terms.push(weight * tilted_ratio(inc, &tilt.values, &inc_params, &unit)?);
        for a in 0..m {
            for b in 0..m {
                stitched.values[(cube.row + a) * grid.n + cube.col + b] += inc.values[a * m + b];
            }
        }
    }
    let lhs = balanced_ratio(&stitched, params, &full)?;
    let direct_terms = cubes
        .iter()
        .map(|c| balanced_ratio(&stitched, params, &c.mask))
        .collect::<Result<Vec<_>>>()?;
    Ok(CascadeTerms {
        lhs,
        rhs_terms,
        direct_terms,
    })
}

/// `zeta(p, q) = a^2 p^2/2 - (a^2/2 + d + a g q) p + (g^2/2 + d) q + g^2 q^2 / 2`.
pub fn zeta(params: &GmcParams, p: f64, q: f64) -> f64 {
    let (a, g, d) = (params.alpha, params.gamma, params.d as f64);
    0.5 * a * a * p * p - (0.5 * a * a + d + a * g * q) * p + (0.5 * g * g + d) * q
        + 0.5 * g * g * q * q
}

/// Closed form `(alpha gamma / 2 - d) n` of the balanced exponent.
pub fn zeta_balanced(params: &GmcParams, n: f64) -> f64 {
    (params.alpha * params.gamma / 2.0 - params.d as f64) * n
}

/// `zeta` at the balanced point `(n gamma/(gamma-alpha), n alpha/(gamma-alpha))`.
pub fn zeta_balanced_direct(params: &GmcParams, n: f64) -> f64 {
    let (pa, pg) = params.balance_exponents();
    zeta(params, n * pa, n * pg)
}

/// `epsilon = d / alpha^2 + 1/2`.
pub fn epsilon(params: &GmcParams) -> f64 {
    params.d as f64 / (params.alpha * params.alpha) + 0.5
}

/// `zeta_n = (gamma - alpha)(alpha/2 - d/gamma) n - (alpha/2 + d/alpha)^2 / 2`.
pub fn zeta_n(params: &GmcParams, n: f64) -> f64 {
    let (a, g, d) = (params.alpha, params.gamma, params.d as f64);
    (g - a) * (a / 2.0 - d / g) * n - 0.5 * (a / 2.0 + d / a).powi(2)
}
