//! Small dense symmetric-matrix utilities used by the selectors.
//!
//! Everything here runs in `f64`. Matrices are at most [`MAX_DIM`] on a side,
//! so the O(d³) factorizations are negligible next to the O(n²) kernels.

use nalgebra::DMatrix;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::reduce::{reduce_indexed_sum, ReductionPlan};

/// Largest supported dimensionality.
pub const MAX_DIM: usize = 16;

/// `|det| ≤ SINGULAR_RTOL · scale^d` is treated as singular, where `scale` is
/// the largest absolute entry.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Square `f64` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(order: usize, entries: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidConfig("matrix order must be positive".into()));
        }
        if order > MAX_DIM {
            return Err(Error::DimensionTooLarge(order));
        }
        if entries.len() != order * order {
            return Err(Error::DimensionMismatch {
                expected: order * order,
                found: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(
                "matrix has non-finite entries".into(),
            ));
        }
        Ok(Self { order, entries })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let order = rows.len();
        let mut entries = Vec::with_capacity(order * order);
        for r in rows {
            let r = r.as_ref();
            if r.len() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    found: r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        Self::new(order, entries)
    }

    pub fn identity(order: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; order])
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let mut entries = vec![0.0; d * d];
        for (i, &v) in diag.iter().enumerate() {
            entries[i * d + i] = v;
        }
        Self::new(d, entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            order: self.order,
            entries: self.entries.iter().map(|v| v * c).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let d = self.order;
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.get(i, j);
            }
        }
        Self { order: d, entries }
    }

    pub fn matmul(&self, rhs: &SquareMatrix) -> Result<Self> {
        let d = self.order;
        if rhs.order != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rhs.order,
            });
        }
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                for j in 0..d {
                    entries[i * d + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(Self { order: d, entries })
    }

    /// `(M + Mᵀ) / 2`, exactly symmetric.
    pub fn symmetrized(&self) -> Self {
        let d = self.order;
        let mut out = self.clone();
        for i in 0..d {
            for j in 0..i {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                out.entries[i * d + j] = v;
                out.entries[j * d + i] = v;
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.order).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `vᵀ M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let d = self.order;
        let mut acc = 0.0;
        for a in 0..d {
            let mut z = 0.0;
            for (c, vc) in v.iter().enumerate().take(d) {
                z += vc * self.get(c, a);
            }
            acc += z * v[a];
        }
        acc
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.order, self.order, &self.entries)
    }

    fn from_nalgebra(m: &DMatrix<f64>) -> Result<Self> {
        let d = m.nrows();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(m[(i, j)]);
            }
        }
        Self::new(d, entries)
    }
}

/// Covariance matrix together with its determinant and inverse.
#[derive(Debug, Clone)]
pub struct CovarianceSummary {
    pub sigma: SquareMatrix,
    pub det: f64,
    pub inv: SquareMatrix,
}

impl CovarianceSummary {
    /// Covariance, determinant and inverse of `x`. Fails with
    /// [`Error::SingularCovariance`] when the covariance is singular.
    pub fn from_dataset(x: &Dataset) -> Result<Self> {
        let sigma = covariance(x)?;
        let det = determinant(&sigma);
        let inv = match inverse(&sigma) {
            Ok(inv) => inv.symmetrized(),
            Err(Error::SingularMatrix) => return Err(Error::SingularCovariance),
            Err(e) => return Err(e),
        };
        if det <= 0.0 {
            return Err(Error::SingularCovariance);
        }
        Ok(Self { sigma, det, inv })
    }
}

/// Unbiased sample covariance from raw moments:
/// `σ_ab = Σ x_a x_b / (n−1) − Σ x_a Σ x_b / (n(n−1))`.
///
/// Each off-diagonal pair is computed once and mirrored, so the result is
/// exactly symmetric.
pub fn covariance(x: &Dataset) -> Result<SquareMatrix> {
    let n = x.len();
    let d = x.dim();
    if n < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            found: n,
        });
    }
    if d > MAX_DIM {
        return Err(Error::DimensionTooLarge(d));
    }
    let plan = ReductionPlan::sequential();
    let nf = n as f64;
    let sums: Vec<f64> = (0..d)
        .map(|a| {
            let row = x.row(a);
            reduce_indexed_sum(n, |j| row[j], &plan)
        })
        .collect::<Result<_>>()?;

    let mut entries = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..=a {
            let (ra, rb) = (x.row(a), x.row(b));
            let cross = reduce_indexed_sum(n, |j| ra[j] * rb[j], &plan)?;
            let v = cross / (nf - 1.0) - sums[a] * sums[b] / (nf * (nf - 1.0));
            entries[a * d + b] = v;
            entries[b * d + a] = v;
        }
    }
    SquareMatrix::new(d, entries)
}

/// Determinant via LU decomposition with partial pivoting.
pub fn determinant(m: &SquareMatrix) -> f64 {
    m.to_nalgebra().lu().determinant()
}

/// Matrix inverse. Fails with [`Error::SingularMatrix`] when
/// `|det| ≤ 1e-12 · max|m_ij|^d`.
pub fn inverse(m: &SquareMatrix) -> Result<SquareMatrix> {
    let scale = m.max_abs();
    let lu = m.to_nalgebra().lu();
    let det = lu.determinant();
    if scale == 0.0 || det.abs() <= SINGULAR_RTOL * scale.powi(m.order as i32) {
        return Err(Error::SingularMatrix);
    }
    let inv = lu.try_inverse().ok_or(Error::SingularMatrix)?;
    SquareMatrix::from_nalgebra(&inv)
}

/// Symmetric square root of an SPD matrix, through the symmetric
/// eigendecomposition `M = V Λ Vᵀ ⇒ √M = V √Λ Vᵀ`.
pub fn sqrt_spd(m: &SquareMatrix) -> Result<SquareMatrix> {
    let eig = m.symmetrized().to_nalgebra().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = f64::EPSILON * m.order() as f64 * lmax;
    if lmax == 0.0 || eig.eigenvalues.iter().any(|&l| l <= tol) {
        return Err(Error::NotPositiveDefinite);
    }
    let d = m.order();
    let v = &eig.eigenvectors;
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|l| l.sqrt()).collect();
    let mut entries = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..d).map(|k| v[(i, k)] * roots[k] * v[(j, k)]).sum();
            entries[i * d + j] = s;
            entries[j * d + i] = s;
        }
    }
    SquareMatrix::new(d, entries)
}

/// Half-vectorization: the lower triangle stacked column by column.
pub fn vech(m: &SquareMatrix) -> Vec<f64> {
    let d = m.order();
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for j in 0..d {
        for i in j..d {
            out.push(m.get(i, j));
        }
    }
    out
}

/// Inverse of [`vech`]: rebuilds the symmetric matrix of order `d`.
pub fn unvech(v: &[f64], d: usize) -> Result<SquareMatrix> {
    let expected = d * (d + 1) / 2;
    if v.len() != expected {
        return Err(Error::LengthMismatch {
            order: d,
            expected,
            found: v.len(),
        });
    }
    let mut entries = vec![0.0; d * d];
    let mut k = 0;
    for j in 0..d {
        for i in j..d {
            entries[i * d + j] = v[k];
            entries[j * d + i] = v[k];
            k += 1;
        }
    }
    SquareMatrix::new(d, entries)
}

/// Lower Cholesky factor, or `None` when a pivot falls at or below
/// `ε · d · max|m_ii|`. Only the lower triangle of `m` is read.
pub fn cholesky(m: &SquareMatrix) -> Option<SquareMatrix> {
    let d = m.order();
    let diag_scale = (0..d).fold(0.0f64, |a, i| a.max(m.get(i, i).abs()));
    let tol = f64::EPSILON * d as f64 * diag_scale;
    let mut l = vec![0.0; d * d];
    for j in 0..d {
        let mut pivot = m.get(j, j);
        for k in 0..j {
            pivot -= l[j * d + k] * l[j * d + k];
        }
        if !(pivot > tol) {
            return None;
        }
        let ljj = pivot.sqrt();
        l[j * d + j] = ljj;
        for i in j + 1..d {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = s / ljj;
        }
    }
    SquareMatrix::new(d, l).ok()
}

pub fn is_positive_definite(m: &SquareMatrix) -> bool {
    cholesky(m).is_some()
}
