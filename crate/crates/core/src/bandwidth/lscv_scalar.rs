use std::f64::consts::PI;

use super::{BandwidthResult, ScalarTrace};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::{run_partitioned, ExecMode};
use crate::linalg::CovarianceSummary;
use crate::pairwise::{
    precompute_quadratic_forms_probed, OpCounts, OpProbe, TileGeometry, TriangularBuffer,
    DEFAULT_BUFFER_BUDGET,
};
use crate::reduce::{reduce_map_sum, ReductionPlan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LscvHConfig {
    /// Number of bandwidths tried, endpoints included.
    pub n_grid: usize,
    /// The grid spans `[h₀ / range_factor, h₀ · range_factor]`.
    pub range_factor: f64,
    pub exec: ExecMode,
    /// Largest quadratic-form buffer, in bytes, the selector may allocate.
    pub memory_budget: u64,
}

impl Default for LscvHConfig {
    fn default() -> Self {
        Self {
            n_grid: 150,
            range_factor: 4.0,
            exec: ExecMode::Sequential,
            memory_budget: DEFAULT_BUFFER_BUDGET,
        }
    }
}

impl LscvHConfig {
    fn validate(&self) -> Result<()> {
        if self.n_grid < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid needs at least 2 points, got {}",
                self.n_grid
            )));
        }
        if !(self.range_factor > 1.0 && self.range_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "range factor must exceed 1, got {}",
                self.range_factor
            )));
        }
        self.exec.validate().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LscvTrace {
    /// Normal-reference bandwidth at the centre of the grid.
    pub h0: f64,
    pub grid: Vec<f64>,
    pub objective: Vec<f64>,
    pub counts: OpCounts,
}

/// Normal-reference starting bandwidth
/// `h₀ = (R(K) / (μ₂² R(f″) n))^{1/(d+4)}` with `R(K)/μ₂² = 1/(2^d π^{d/2} d²)`
/// and `R(f″) = d(d+2) / (2^{d+2} π^{d/2})`.
pub fn lscv_h_grid_center(n: usize, d: usize) -> f64 {
    let df = d as f64;
    let nf = n as f64;
    let pi_d2 = PI.powf(df / 2.0);
    let ratio = 1.0 / (2f64.powf(df) * pi_d2 * df * df);
    let r_f2 = df * (df + 2.0) / (2f64.powf(df + 2.0) * pi_d2);
    (ratio / (r_f2 * nf)).powf(1.0 / (df + 4.0))
}

/// Cross-validation objective for scalar `h`, read entirely from the
/// precomputed `S(v) = vᵀΣ⁻¹v`:
/// `g(h) = h^{−d} [2n^{−2} Σ T̃(v) + n^{−1} R(K)]`.
pub fn lscv_h_objective(
    h: f64,
    sv: &TriangularBuffer,
    det_sigma: f64,
    n: usize,
    d: usize,
) -> Result<f64> {
    lscv_h_objective_with(h, sv, det_sigma, n, d, &ReductionPlan::sequential(), None)
}

/// [`lscv_h_objective`] with an explicit reduction plan and optional probe.
pub fn lscv_h_objective_with(
    h: f64,
    sv: &TriangularBuffer,
    det_sigma: f64,
    n: usize,
    d: usize,
    plan: &ReductionPlan,
    probe: Option<&OpProbe>,
) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::NonPositiveBandwidth(h));
    }
    if !(det_sigma > 0.0 && det_sigma.is_finite()) {
        return Err(Error::SingularCovariance);
    }
    if sv.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: sv.n(),
        });
    }
    let df = d as f64;
    let nf = n as f64;
    let inv_sqrt_det = 1.0 / det_sigma.sqrt();
    // (K̃*K̃)(0) and K̃(0) with the Σ-weighted normal kernel
    let c4 = (4.0 * PI).powf(-df / 2.0) * inv_sqrt_det;
    let c2 = (2.0 * PI).powf(-df / 2.0) * inv_sqrt_det;
    let (a4, a2) = (-1.0 / (4.0 * h * h), -1.0 / (2.0 * h * h));
    let sum = if sv.is_empty() {
        0.0
    } else {
        reduce_map_sum(
            sv.values(),
            |s| c4 * (a4 * s).exp() - 2.0 * c2 * (a2 * s).exp(),
            plan,
        )?
    };
    if let Some(p) = probe {
        p.add_objective(sv.len());
    }
    Ok(h.powf(-df) * (2.0 / (nf * nf) * sum + c4 / nf))
}

/// Scalar bandwidth minimising the cross-validation objective over an evenly
/// spaced grid around the normal-reference `h₀`. Ties go to the smaller `h`.
pub fn lscv_h_bandwidth(x: &Dataset, cfg: &LscvHConfig) -> Result<BandwidthResult> {
    lscv_h_bandwidth_probed(x, cfg, &OpProbe::new())
}

/// [`lscv_h_bandwidth`], recording quadratic-form and objective work in
/// `probe`.
pub fn lscv_h_bandwidth_probed(
    x: &Dataset,
    cfg: &LscvHConfig,
    probe: &OpProbe,
) -> Result<BandwidthResult> {
    cfg.validate()?;
    let (n, d) = (x.len(), x.dim());
    let cov = CovarianceSummary::from_dataset(x)?;

    let required = TriangularBuffer::required_bytes(n);
    if required > cfg.memory_budget {
        return Err(Error::BufferTooLarge {
            n,
            required,
            budget: cfg.memory_budget,
        });
    }
    let geom = TileGeometry::with_default_tile(n);
    let sv = precompute_quadratic_forms_probed(x, &cov.inv, &geom, cfg.exec, Some(probe))?;

    let h0 = lscv_h_grid_center(n, d);
    let (lo, hi) = (h0 / cfg.range_factor, h0 * cfg.range_factor);
    let step = (hi - lo) / (cfg.n_grid - 1) as f64;
    let mut grid: Vec<f64> = (0..cfg.n_grid).map(|i| lo + i as f64 * step).collect();
    grid[cfg.n_grid - 1] = hi;

    // grid points are independent; each objective is reduced single-threaded
    let inner = ReductionPlan::with_mode(cfg.exec.per_worker())?;
    let objective: Vec<f64> = run_partitioned(grid.len(), cfg.exec.workers(), |range| {
        range
            .map(|i| lscv_h_objective_with(grid[i], &sv, cov.det, n, d, &inner, Some(probe)))
            .collect::<Result<Vec<f64>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?
    .concat();

    let mut best = 0;
    for (i, &g) in objective.iter().enumerate() {
        if !g.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "objective is {g} at h = {}",
                grid[i]
            )));
        }
        if g < objective[best] {
            best = i;
        }
    }
    let h = grid[best];
    Ok(BandwidthResult::Scalar {
        h,
        trace: ScalarTrace::Lscv(LscvTrace {
            h0,
            grid,
            objective,
            counts: probe.counts(),
        }),
    })
}
