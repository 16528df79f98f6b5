//! Gaussian kernel density estimates with a scalar or full-matrix bandwidth.

use std::f64::consts::PI;

use crate::bandwidth::Bandwidth;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::{run_partitioned, ExecMode};
use crate::linalg::{cholesky, inverse, SquareMatrix, MAX_DIM};
use crate::reduce::{reduce_indexed_sum, ReductionPlan};

#[derive(Debug, Clone)]
enum Cached {
    Scalar { inv_h: f64 },
    Matrix { inv: SquareMatrix },
}

/// A dataset together with its bandwidth.
#[derive(Debug, Clone)]
pub struct KdeModel {
    data: Dataset,
    bandwidth: Bandwidth,
    cached: Cached,
    /// `(2π)^{−d/2} |H|^{−1/2} / n`, with `|H|^{1/2} = h^d` in the scalar case.
    norm: f64,
}

impl KdeModel {
    pub fn new(data: Dataset, bandwidth: Bandwidth) -> Result<Self> {
        let d = data.dim();
        let base = (2.0 * PI).powf(-(d as f64) / 2.0) / data.len() as f64;
        let (cached, norm) = match &bandwidth {
            &Bandwidth::Scalar(h) => {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(Error::NonPositiveBandwidth(h));
                }
                (
                    Cached::Scalar { inv_h: 1.0 / h },
                    base * h.powi(-(d as i32)),
                )
            }
            Bandwidth::Matrix(h) => {
                if h.order() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: h.order(),
                    });
                }
                if !h.is_symmetric() {
                    return Err(Error::NotPositiveDefinite);
                }
                let l = cholesky(h).ok_or(Error::NotPositiveDefinite)?;
                let sqrt_det: f64 = (0..d).map(|i| l.get(i, i)).product();
                let inv = inverse(h)?.symmetrized();
                (Cached::Matrix { inv }, base / sqrt_det)
            }
        };
        Ok(Self {
            data,
            bandwidth,
            cached,
            norm,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn bandwidth(&self) -> &Bandwidth {
        &self.bandwidth
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Kernel standard deviation along coordinate `i`: `h`, or `√H_ii`.
    pub fn axis_scale(&self, i: usize) -> f64 {
        match &self.bandwidth {
            Bandwidth::Scalar(h) => *h,
            Bandwidth::Matrix(m) => m.get(i, i).sqrt(),
        }
    }

    /// `f̂(x)` without the dimension check.
    pub(crate) fn density(&self, x: &[f64]) -> f64 {
        let (d, n) = (self.dim(), self.len());
        let data = &self.data;
        let plan = ReductionPlan::sequential();
        let sum = match &self.cached {
            Cached::Scalar { inv_h } => reduce_indexed_sum(
                n,
                |j| {
                    let mut q = 0.0;
                    for (c, &xc) in x.iter().enumerate() {
                        let u = (xc - data.get(c, j)) * inv_h;
                        q += u * u;
                    }
                    (-0.5 * q).exp()
                },
                &plan,
            ),
            Cached::Matrix { inv } => reduce_indexed_sum(
                n,
                |j| {
                    let mut v = [0.0; MAX_DIM];
                    for c in 0..d {
                        v[c] = x[c] - data.get(c, j);
                    }
                    (-0.5 * inv.quadratic_form(&v[..d])).exp()
                },
                &plan,
            ),
        };
        self.norm * sum.expect("datasets are never empty")
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// Density estimate at `x`.
pub fn kde_eval(model: &KdeModel, x: &[f64]) -> Result<f64> {
    model.check_point(x)?;
    Ok(model.density(x))
}

/// [`kde_eval`] at every point. Threaded mode splits the points into
/// contiguous blocks; each value is computed exactly as [`kde_eval`] would.
pub fn kde_eval_batch<P>(model: &KdeModel, points: &[P], mode: ExecMode) -> Result<Vec<f64>>
where
    P: AsRef<[f64]> + Sync,
{
    let mode = mode.validate()?;
    for p in points {
        model.check_point(p.as_ref())?;
    }
    Ok(run_partitioned(points.len(), mode.workers(), |range| {
        points[range]
            .iter()
            .map(|p| model.density(p.as_ref()))
            .collect::<Vec<f64>>()
    })
    .concat())
}
