use super::{BandwidthResult, KernelFunctionals, ScalarTrace, FRAC_1_SQRT_2PI, FRAC_1_SQRT_PI};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::pairwise::{pairwise_map_sum, TileGeometry};
use crate::reduce::{reduce_map_sum, reduce_sum, ReductionPlan};

/// Every intermediate of the plug-in rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PluginTrace {
    pub v_hat: f64,
    pub sigma_hat: f64,
    pub psi8_ns: f64,
    pub g1: f64,
    pub psi6: f64,
    pub g2: f64,
    pub psi4: f64,
    pub h: f64,
}

/// Sixth derivative of the standard normal density.
#[inline]
pub(crate) fn k6(x: f64) -> f64 {
    let y = x * x;
    let poly = ((y - 15.0) * y + 45.0) * y - 15.0;
    FRAC_1_SQRT_2PI * (-0.5 * y).exp() * poly
}

/// Fourth derivative of the standard normal density.
#[inline]
pub(crate) fn k4(x: f64) -> f64 {
    let y = x * x;
    let poly = (y - 6.0) * y + 3.0;
    FRAC_1_SQRT_2PI * (-0.5 * y).exp() * poly
}

/// Two-stage plug-in bandwidth for univariate data.
///
/// `Ψ̂ = (2 Σ_{i<j} K⁽ʳ⁾((X_i − X_j)/g) + n K⁽ʳ⁾(0)) / (n² g^{r+1})`, i.e. the
/// full double sum with its diagonal written out.
pub fn plugin_bandwidth(x: &Dataset, mode: ExecMode) -> Result<BandwidthResult> {
    if x.dim() != 1 {
        return Err(Error::NotUnivariate(x.dim()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            found: n,
        });
    }
    let a = x.row(0);
    let nf = n as f64;
    let plan = ReductionPlan::with_mode(mode)?;

    let sum = reduce_sum(a, &plan)?;
    let sum_sq = reduce_map_sum(a, |v| v * v, &plan)?;
    let v_hat = sum_sq / (nf - 1.0) - sum * sum / (nf * (nf - 1.0));
    let (lo, hi) = x.row_range(0);
    // rounding leaves a few ulps of variance on constant data
    if lo == hi || v_hat <= 64.0 * f64::EPSILON * sum_sq / (nf - 1.0) {
        return Err(Error::DegenerateData(
            "sample variance is zero; all samples are equal".into(),
        ));
    }
    let sigma_hat = v_hat.sqrt();

    let psi8_ns = 105.0 / 32.0 * FRAC_1_SQRT_PI / sigma_hat.powi(9);
    let g1 = (-2.0 * KernelFunctionals::K6_AT_0 / (psi8_ns * nf)).powf(1.0 / 9.0);

    let geom = TileGeometry::with_default_tile(n);
    let s6 = pairwise_map_sum(a, |d| k6(d / g1), &geom, mode)?;
    let psi6 = (2.0 * s6 + nf * KernelFunctionals::K6_AT_0) / (nf * nf * g1.powi(7));
    if !(psi6 < 0.0) {
        return Err(Error::NumericalFailure(format!(
            "sixth-order functional estimate must be negative, got {psi6}"
        )));
    }
    let g2 = (-2.0 * KernelFunctionals::K4_AT_0 / (psi6 * nf)).powf(1.0 / 7.0);

    let s4 = pairwise_map_sum(a, |d| k4(d / g2), &geom, mode)?;
    let psi4 = (2.0 * s4 + nf * KernelFunctionals::K4_AT_0) / (nf * nf * g2.powi(5));
    if !(psi4 > 0.0) {
        return Err(Error::NumericalFailure(format!(
            "fourth-order functional estimate must be positive, got {psi4}"
        )));
    }
    let mu2 = KernelFunctionals::MU2_K;
    let h = (KernelFunctionals::R_K / (mu2 * mu2 * psi4 * nf)).powf(0.2);
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "bandwidth {h} is not usable"
        )));
    }

    Ok(BandwidthResult::Scalar {
        h,
        trace: ScalarTrace::Plugin(PluginTrace {
            v_hat,
            sigma_hat,
            psi8_ns,
            g1,
            psi6,
            g2,
            psi4,
            h,
        }),
    })
}
