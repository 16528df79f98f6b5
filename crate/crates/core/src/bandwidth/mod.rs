//! Bandwidth selectors: the univariate plug-in rule, scalar least-squares
//! cross-validation over a grid, and full-matrix least-squares
//! cross-validation by Nelder–Mead.

mod lscv_matrix;
mod lscv_scalar;
mod nelder_mead;
mod plugin;

pub use lscv_matrix::{
    lscv_matrix_bandwidth, lscv_matrix_objective, lscv_matrix_objective_with, lscv_matrix_start,
    rule_of_thumb_matrix, LscvMatrixConfig, PENALTY,
};
pub use lscv_scalar::{
    lscv_h_bandwidth, lscv_h_bandwidth_probed, lscv_h_grid_center, lscv_h_objective,
    lscv_h_objective_with, LscvHConfig, LscvTrace,
};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use plugin::{plugin_bandwidth, PluginTrace};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;

/// Gaussian kernel constants used by the plug-in rule.
pub struct KernelFunctionals;

impl KernelFunctionals {
    /// `K⁽⁴⁾(0) = 3/√(2π)`.
    pub const K4_AT_0: f64 = 3.0 * FRAC_1_SQRT_2PI;
    /// `K⁽⁶⁾(0) = −15/√(2π)`.
    pub const K6_AT_0: f64 = -15.0 * FRAC_1_SQRT_2PI;
    /// `R(K) = ∫K² = 1/(2√π)`.
    pub const R_K: f64 = 0.5 * FRAC_1_SQRT_PI;
    /// Second moment of the kernel.
    pub const MU2_K: f64 = 1.0;
}

pub(crate) const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub(crate) const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// A kernel bandwidth: isotropic scalar `h` or a symmetric positive-definite
/// matrix `H`.
#[derive(Debug, Clone, PartialEq)]
pub enum Bandwidth {
    Scalar(f64),
    Matrix(SquareMatrix),
}

impl Bandwidth {
    pub fn scalar(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::NonPositiveBandwidth(h));
        }
        Ok(Self::Scalar(h))
    }
}

/// How a scalar bandwidth was found.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarTrace {
    Plugin(PluginTrace),
    Lscv(LscvTrace),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BandwidthResult {
    Scalar {
        h: f64,
        trace: ScalarTrace,
    },
    Matrix {
        h: SquareMatrix,
        objective: f64,
        iterations: usize,
    },
}

impl BandwidthResult {
    pub fn bandwidth(&self) -> Bandwidth {
        match self {
            Self::Scalar { h, .. } => Bandwidth::Scalar(*h),
            Self::Matrix { h, .. } => Bandwidth::Matrix(h.clone()),
        }
    }

    /// The scalar `h`, if this is a scalar result.
    pub fn scalar(&self) -> Option<f64> {
        match self {
            Self::Scalar { h, .. } => Some(*h),
            Self::Matrix { .. } => None,
        }
    }

    /// The matrix `H`, if this is a matrix result.
    pub fn matrix(&self) -> Option<&SquareMatrix> {
        match self {
            Self::Matrix { h, .. } => Some(h),
            Self::Scalar { .. } => None,
        }
    }
}
