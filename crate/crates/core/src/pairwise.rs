//! Cache-blocked evaluation of sums over all sample pairs `i < j`.
//!
//! The strict upper triangle of the `n × n` pair matrix is covered by `k × k`
//! tiles. Tile `(q, l)` with `q ≤ l` pairs chunk `q` of the samples (rows,
//! index `i`) with chunk `l` (columns, index `j`). Tiles are numbered column
//! by column, so column `l` holds tiles `l(l+1)/2 ..= l(l+1)/2 + l` and the
//! diagonal tile is the last of its column; [`tri_block_position`] inverts
//! that numbering.
//!
//! Every tile produces a `k × k` buffer of values in which masked positions
//! (`i ≥ j` on diagonal tiles) and padding positions (past `n` in the last
//! chunk) hold exactly zero. The buffer is tree-reduced to one partial per
//! tile and the partials are tree-reduced in tile order, so results do not
//! depend on the thread count.

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::{run_partitioned, split_ranges, ExecMode};
use crate::linalg::SquareMatrix;
use crate::reduce::{reduce_sum, tree_sum_in_place, ReductionPlan};

pub const DEFAULT_TILE: usize = 16;

/// Counts the work done by the quadratic-form kernels and by objective
/// evaluations that consume them. Counters are updated once per row or per
/// evaluation, not per element.
#[derive(Debug, Default)]
pub struct OpProbe {
    quadratic_forms: AtomicU64,
    multiply_adds: AtomicU64,
    objective_evals: AtomicU64,
    kernel_evals: AtomicU64,
}

/// Snapshot of an [`OpProbe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    /// Pair quadratic forms `vᵀMv` computed.
    pub quadratic_forms: u64,
    /// Multiply-adds spent on those forms (`d² + d` per pair).
    pub multiply_adds: u64,
    pub objective_evals: u64,
    /// Scalar kernel terms evaluated by objectives.
    pub kernel_evals: u64,
}

impl OpProbe {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self) -> OpCounts {
        OpCounts {
            quadratic_forms: self.quadratic_forms.load(Ordering::Relaxed),
            multiply_adds: self.multiply_adds.load(Ordering::Relaxed),
            objective_evals: self.objective_evals.load(Ordering::Relaxed),
            kernel_evals: self.kernel_evals.load(Ordering::Relaxed),
        }
    }

    fn add_forms(&self, pairs: usize, d: usize) {
        let pairs = pairs as u64;
        let d = d as u64;
        self.quadratic_forms.fetch_add(pairs, Ordering::Relaxed);
        self.multiply_adds
            .fetch_add(pairs * (d * d + d), Ordering::Relaxed);
    }

    pub(crate) fn add_objective(&self, kernel_terms: usize) {
        self.objective_evals.fetch_add(1, Ordering::Relaxed);
        self.kernel_evals
            .fetch_add(kernel_terms as u64, Ordering::Relaxed);
    }
}

/// Default cap on the size of a materialised [`TriangularBuffer`] (2 GiB).
pub const DEFAULT_BUFFER_BUDGET: u64 = 2 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileGeometry {
    k: usize,
    n: usize,
    n_chunks: usize,
    n_tiles: usize,
}

impl TileGeometry {
    /// Tiling of `n` samples with edge `k` (a power of two).
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || !k.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "tile edge must be a power of two, got {k}"
            )));
        }
        let n_chunks = n.div_ceil(k);
        Ok(Self {
            k,
            n,
            n_chunks,
            n_tiles: n_chunks * (n_chunks + 1) / 2,
        })
    }

    pub fn with_default_tile(n: usize) -> Self {
        Self::new(n, DEFAULT_TILE).expect("default tile edge is a power of two")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_chunks(&self) -> usize {
        self.n_chunks
    }

    pub fn n_tiles(&self) -> usize {
        self.n_tiles
    }

    /// Sample indices covered by chunk `c`, clipped to `n`.
    fn chunk(&self, c: usize) -> Range<usize> {
        c * self.k..((c + 1) * self.k).min(self.n)
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: n,
            });
        }
        Ok(())
    }
}

/// Column `l` and row `q` (`q ≤ l`) of tile number `bx`:
/// `l = ⌈(√(8bx + 9) − 3) / 2⌉`, `q = bx − l(l+1)/2`.
pub fn tri_block_position(bx: u64) -> (u64, u64) {
    let mut l = (((8.0 * bx as f64 + 9.0).sqrt() - 3.0) / 2.0).ceil() as u128;
    let b = u128::from(bx);
    // the float square root can land one off once 8bx+9 exceeds 2^53
    while l > 0 && l * (l + 1) / 2 > b {
        l -= 1;
    }
    while (l + 1) * (l + 2) / 2 <= b {
        l += 1;
    }
    (l as u64, (b - l * (l + 1) / 2) as u64)
}

/// The `n(n−1)/2` values of a function of each sample pair `i < j`, stored
/// row by row over the strict upper triangle: `(0,1), (0,2), …, (1,2), …`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularBuffer {
    n: usize,
    values: Vec<f64>,
}

impl TriangularBuffer {
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != pair_count(n) {
            return Err(Error::DimensionMismatch {
                expected: pair_count(n),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite pair value".into()));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value for the pair `i < j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < j && j < self.n);
        self.values[row_start(self.n, i) + (j - i - 1)]
    }

    /// Bytes needed to hold the buffer for `n` samples.
    pub fn required_bytes(n: usize) -> u64 {
        pair_count(n) as u64 * std::mem::size_of::<f64>() as u64
    }
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Offset of the first pair `(i, i+1)` of row `i`; `row_start(n, n)` is the
/// total pair count.
#[inline]
fn row_start(n: usize, i: usize) -> usize {
    i * (2 * n - i - 1) / 2
}

/// `Σ_{i<j} fun(a_i − a_j)`.
///
/// In the lane-blocked modes, diagonal tiles evaluate whole 4-wide groups and
/// zero the positions at or below the diagonal by multiplying with a 0/1
/// mask, so `fun` must be finite at every difference of two samples,
/// including zero.
pub fn pairwise_map_sum<F>(a: &[f64], fun: F, geom: &TileGeometry, mode: ExecMode) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    geom.check(a.len())?;
    let mode = mode.validate()?;
    if geom.n < 2 {
        return Ok(0.0);
    }
    let lanes = mode.lanes();
    let k = geom.k;
    let partials = tile_partials(geom, mode, |bx, tile| {
        let (l, q) = tri_block_position(bx as u64);
        let (rows, cols) = (geom.chunk(q as usize), geom.chunk(l as usize));
        let (e, f) = (&a[rows], &a[cols]);
        let diagonal = l == q;
        for (r, &er) in e.iter().enumerate() {
            let out = &mut tile[r * k..(r + 1) * k];
            let first = if diagonal { r + 1 } else { 0 };
            if lanes {
                lane_row(out, first, f.len(), |p| fun(er - f[p]));
            } else {
                for p in first..f.len() {
                    out[p] = fun(er - f[p]);
                }
            }
        }
    });
    reduce_sum(&partials, &ReductionPlan::with_mode(mode.per_worker())?)
}

/// Fills `out[first..len]` in 4-wide groups starting from the group that
/// contains `first`; positions before `first` in that group are computed and
/// multiplied by zero.
#[inline]
fn lane_row(out: &mut [f64], first: usize, len: usize, value: impl Fn(usize) -> f64) {
    let mut p0 = first / 4 * 4;
    while p0 + 4 <= len {
        let mask: [f64; 4] = std::array::from_fn(|l| f64::from(u8::from(p0 + l >= first)));
        let v: [f64; 4] = std::array::from_fn(|l| value(p0 + l));
        for l in 0..4 {
            out[p0 + l] = v[l] * mask[l];
        }
        p0 += 4;
    }
    let start = p0.max(first).min(len);
    for (p, slot) in out[start..len].iter_mut().enumerate() {
        *slot = value(start + p);
    }
}

/// Runs `fill` on a zeroed `k × k` buffer for every tile, tree-reduces each
/// buffer and returns the partials in tile order. Workers take contiguous
/// ranges of tile numbers.
fn tile_partials<F>(geom: &TileGeometry, mode: ExecMode, fill: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let kk = geom.k * geom.k;
    let lanes = mode.lanes();
    run_partitioned(geom.n_tiles, mode.workers(), |range| {
        let mut tile = vec![0.0; kk];
        range
            .map(|bx| {
                tile.fill(0.0);
                fill(bx, &mut tile);
                tree_sum_in_place(&mut tile, lanes)
            })
            .collect::<Vec<f64>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Computes `y[p] = (x_i − x_{j0+p})ᵀ M (x_i − x_{j0+p})` for `p < len` by
/// accumulating whole chunk rows:
/// `y = Σ_a (Σ_c m_ca ([x_ci] − X_c,cols)) ∘ ([x_ai] − X_a,cols)`.
/// Each inner step reads one contiguous slice of a row of the row-major data.
fn quadratic_row(
    x: &Dataset,
    m: &SquareMatrix,
    i: usize,
    j0: usize,
    len: usize,
    part: &mut [f64],
    y: &mut [f64],
) {
    let d = x.dim();
    let (part, y) = (&mut part[..len], &mut y[..len]);
    y.fill(0.0);
    for a in 0..d {
        part.fill(0.0);
        for c in 0..d {
            let mca = m.get(c, a);
            let row = x.row(c);
            let e = row[i];
            for (acc, &fv) in part.iter_mut().zip(&row[j0..j0 + len]) {
                *acc += mca * (e - fv);
            }
        }
        let row = x.row(a);
        let e = row[i];
        for ((acc, &pv), &fv) in y.iter_mut().zip(part.iter()).zip(&row[j0..j0 + len]) {
            *acc += pv * (e - fv);
        }
    }
}

fn check_quadratic(x: &Dataset, m: &SquareMatrix, geom: &TileGeometry) -> Result<()> {
    if m.order() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: m.order(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            found: x.len(),
        });
    }
    geom.check(x.len())
}

/// `S_ij = (x_i − x_j)ᵀ M (x_i − x_j)` for every pair `i < j`, computed tile
/// row by tile row. Workers own contiguous bands of tile rows, which map to
/// contiguous stretches of the output.
pub fn precompute_quadratic_forms(
    x: &Dataset,
    m: &SquareMatrix,
    geom: &TileGeometry,
    mode: ExecMode,
) -> Result<TriangularBuffer> {
    precompute_quadratic_forms_probed(x, m, geom, mode, None)
}

/// [`precompute_quadratic_forms`], recording the work in `probe`.
pub fn precompute_quadratic_forms_probed(
    x: &Dataset,
    m: &SquareMatrix,
    geom: &TileGeometry,
    mode: ExecMode,
    probe: Option<&OpProbe>,
) -> Result<TriangularBuffer> {
    check_quadratic(x, m, geom)?;
    let mode = mode.validate()?;
    let n = x.len();
    let k = geom.k;
    let mut values = vec![0.0; pair_count(n)];

    let band_pairs = |q: usize| {
        let rows = geom.chunk(q);
        row_start(n, rows.end) - row_start(n, rows.start)
    };
    let bands = balanced_bands(geom.n_chunks, mode.workers(), band_pairs);

    let fill_band = |qs: Range<usize>, out: &mut [f64]| {
        let offset = row_start(n, geom.chunk(qs.start).start);
        let mut part = vec![0.0; k];
        let mut y = vec![0.0; k];
        for q in qs {
            for i in geom.chunk(q) {
                let base = row_start(n, i) - offset;
                // columns i+1..n, in chunk-sized pieces
                let mut j = i + 1;
                while j < n {
                    let len = k.min(n - j).min(k - j % k);
                    quadratic_row(x, m, i, j, len, &mut part, &mut y);
                    if let Some(p) = probe {
                        p.add_forms(len, x.dim());
                    }
                    let at = base + (j - i - 1);
                    out[at..at + len].copy_from_slice(&y[..len]);
                    j += len;
                }
            }
        }
    };

    if bands.len() <= 1 {
        fill_band(0..geom.n_chunks, &mut values);
    } else {
        std::thread::scope(|s| {
            let mut rest: &mut [f64] = &mut values;
            for qs in bands {
                let len: usize = qs.clone().map(band_pairs).sum();
                let (mine, tail) = rest.split_at_mut(len);
                rest = tail;
                let fill_band = &fill_band;
                s.spawn(move || fill_band(qs, mine));
            }
        });
    }

    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite quadratic form".into()));
    }
    Ok(TriangularBuffer { n, values })
}

/// Splits `0..count` into at most `parts` contiguous ranges with roughly equal
/// total `weight`.
fn balanced_bands(
    count: usize,
    parts: usize,
    weight: impl Fn(usize) -> usize,
) -> Vec<Range<usize>> {
    if parts <= 1 || count <= 1 {
        return split_ranges(count, 1);
    }
    let total: usize = (0..count).map(&weight).sum();
    let target = total.div_ceil(parts).max(1);
    let mut out = Vec::new();
    let (mut start, mut acc) = (0, 0);
    for q in 0..count {
        acc += weight(q);
        if acc >= target && out.len() + 1 < parts {
            out.push(start..q + 1);
            start = q + 1;
            acc = 0;
        }
    }
    if start < count {
        out.push(start..count);
    }
    out
}

/// `Σ_{i<j} fun1((x_i − x_j)ᵀ M (x_i − x_j))` without storing the quadratic
/// forms: each tile row is computed, mapped through `fun1` and written to the
/// tile buffer, which is then tree-reduced.
///
/// `fun1` must be finite at every quadratic form value, for the same reason
/// as in [`pairwise_map_sum`].
pub fn fused_quadratic_map_sum<F>(
    x: &Dataset,
    m: &SquareMatrix,
    fun1: F,
    geom: &TileGeometry,
    mode: ExecMode,
) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    check_quadratic(x, m, geom)?;
    let mode = mode.validate()?;
    let lanes = mode.lanes();
    let k = geom.k;
    let partials = tile_partials(geom, mode, |bx, tile| {
        let (l, q) = tri_block_position(bx as u64);
        let (rows, cols) = (geom.chunk(q as usize), geom.chunk(l as usize));
        let diagonal = l == q;
        let mut part = [0.0; 256];
        let mut y = [0.0; 256];
        let (part, y) = (&mut part[..k.min(256)], &mut y[..k.min(256)]);
        for (r, i) in rows.enumerate() {
            let first = if diagonal { r + 1 } else { 0 };
            let start = if lanes { first / 4 * 4 } else { first };
            if start >= cols.len() {
                continue;
            }
            let out = &mut tile[r * k..(r + 1) * k];
            quadratic_row(x, m, i, cols.start + start, cols.len() - start, part, y);
            if lanes {
                lane_row(out, first, cols.len(), |p| fun1(y[p - start]));
            } else {
                for p in first..cols.len() {
                    out[p] = fun1(y[p - start]);
                }
            }
        }
    });
    reduce_sum(&partials, &ReductionPlan::with_mode(mode.per_worker())?)
}
