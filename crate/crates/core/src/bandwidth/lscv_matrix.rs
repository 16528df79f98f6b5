use std::f64::consts::PI;

use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use super::BandwidthResult;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::linalg::{cholesky, covariance, inverse, sqrt_spd, unvech, vech, SquareMatrix};
use crate::pairwise::{fused_quadratic_map_sum, TileGeometry};

/// Objective value reported for matrices that are not positive-definite.
pub const PENALTY: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LscvMatrixConfig {
    pub max_iterations: usize,
    /// Relative spread of simplex objective values that ends the search.
    pub tolerance: f64,
    /// Initial simplex step as a fraction of each coordinate of `vech(H_start)`.
    pub initial_scale: f64,
    pub penalty: f64,
    pub exec: ExecMode,
}

impl Default for LscvMatrixConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-7,
            initial_scale: 0.1,
            penalty: PENALTY,
            exec: ExecMode::Sequential,
        }
    }
}

/// `(4/(d+2))^{1/(d+4)} n^{−1/(d+4)} Σ^{1/2}`.
pub fn rule_of_thumb_matrix(sigma: &SquareMatrix, n: usize) -> Result<SquareMatrix> {
    let df = sigma.order() as f64;
    let factor = (4.0 / (df + 2.0)).powf(1.0 / (df + 4.0)) * (n as f64).powf(-1.0 / (df + 4.0));
    let root = sqrt_spd(sigma).map_err(|_| Error::SingularCovariance)?;
    Ok(root.scale(factor))
}

/// Rule-of-thumb starting matrix for the search, from the sample covariance.
pub fn lscv_matrix_start(x: &Dataset) -> Result<SquareMatrix> {
    let sigma = covariance(x)?;
    rule_of_thumb_matrix(&sigma, x.len())
}

/// `g(H) = 2n^{−2} Σ_{i<j} T_H(X_i − X_j) + n^{−1} R(K)` with
/// `T_H = (K*K)_H − 2K_H`, evaluated without storing pair terms. Matrices
/// that fail a Cholesky factorisation score [`PENALTY`].
pub fn lscv_matrix_objective(h: &SquareMatrix, x: &Dataset, exec: ExecMode) -> Result<f64> {
    lscv_matrix_objective_with(h, x, exec, PENALTY)
}

/// [`lscv_matrix_objective`] with a custom penalty.
pub fn lscv_matrix_objective_with(
    h: &SquareMatrix,
    x: &Dataset,
    exec: ExecMode,
    penalty: f64,
) -> Result<f64> {
    let d = x.dim();
    if h.order() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h.order(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            found: x.len(),
        });
    }
    let Some(l) = cholesky(h) else {
        return Ok(penalty);
    };
    let Ok(h_inv) = inverse(h) else {
        return Ok(penalty);
    };
    let det: f64 = (0..d).map(|i| l.get(i, i)).product::<f64>().powi(2);
    let (df, nf) = (d as f64, x.len() as f64);
    let inv_sqrt_det = 1.0 / det.sqrt();
    let c4 = (4.0 * PI).powf(-df / 2.0) * inv_sqrt_det;
    let c2 = (2.0 * PI).powf(-df / 2.0) * inv_sqrt_det;
    let geom = TileGeometry::with_default_tile(x.len());
    let sum = fused_quadratic_map_sum(
        x,
        &h_inv,
        |q| c4 * (-0.25 * q).exp() - 2.0 * c2 * (-0.5 * q).exp(),
        &geom,
        exec,
    )?;
    // R(K) = 2^{−d} π^{−d/2} |H|^{−1/2} = c4
    let g = 2.0 / (nf * nf) * sum + c4 / nf;
    Ok(if g.is_finite() { g } else { penalty })
}

/// Full bandwidth matrix minimising the cross-validation objective, searched
/// by Nelder–Mead over `vech(H)` from the rule-of-thumb start.
pub fn lscv_matrix_bandwidth(x: &Dataset, cfg: &LscvMatrixConfig) -> Result<BandwidthResult> {
    if cfg.max_iterations == 0 {
        return Err(Error::InvalidConfig(
            "max_iterations must be at least 1".into(),
        ));
    }
    cfg.exec.validate()?;
    let d = x.dim();
    let start = lscv_matrix_start(x)?;
    let v0 = vech(&start);

    // off-diagonal entries can be zero; fall back to the diagonal scale there
    let mut steps = Vec::with_capacity(v0.len());
    for j in 0..d {
        for i in j..d {
            let v = start.get(i, j);
            let step = if v != 0.0 {
                cfg.initial_scale * v
            } else {
                cfg.initial_scale * (start.get(i, i) * start.get(j, j)).sqrt()
            };
            steps.push(step);
        }
    }

    let mut failure = None;
    let objective = |v: &[f64]| -> f64 {
        let result =
            unvech(v, d).and_then(|h| lscv_matrix_objective_with(&h, x, cfg.exec, cfg.penalty));
        match result {
            Ok(g) => g,
            Err(e) => {
                failure.get_or_insert(e);
                cfg.penalty
            }
        }
    };
    let opts = NelderMeadOptions {
        max_iterations: cfg.max_iterations,
        tolerance: cfg.tolerance,
        ..Default::default()
    };
    let found = nelder_mead(objective, &v0, &steps, &opts);
    if let Some(e) = failure {
        return Err(e);
    }
    if found.value >= cfg.penalty {
        return Err(Error::NoFeasiblePoint);
    }
    let h = unvech(&found.x, d)?;
    debug_assert!(cholesky(&h).is_some());
    Ok(BandwidthResult::Matrix {
        h,
        objective: found.value,
        iterations: found.iterations,
    })
}
