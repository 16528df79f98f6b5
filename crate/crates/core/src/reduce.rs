//! Pairwise (tree-shaped) summation.
//!
//! The input is cut into chunks of `chunk_size` values. Inside a chunk,
//! neighbouring values are added pairwise and the results are written to the
//! front of a scratch buffer; this halving repeats until one value is left. A
//! value whose partner would fall past the end of the level is carried up
//! unchanged. The per-chunk partials are then reduced by the same procedure,
//! recursively, until a single value remains.
//!
//! The tree depends only on the input length and `chunk_size`. Execution
//! modes only change how the tree is walked (scalar loop, 4-lane blocks, or
//! chunk ranges spread over threads), so every mode returns bit-identical
//! results.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::exec::{run_partitioned, ExecMode};

/// Floating-point element type of the reduction kernels.
pub trait Real:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + 'static
{
    const ZERO: Self;
    fn to_f64(self) -> f64;
}

impl Real for f32 {
    const ZERO: Self = 0.0;
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    const ZERO: Self = 0.0;
    fn to_f64(self) -> f64 {
        self
    }
}

pub const DEFAULT_CHUNK_SIZE: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionPlan {
    chunk_size: usize,
    mode: ExecMode,
}

impl ReductionPlan {
    /// `chunk_size` must be a power of two and at least 4.
    pub fn new(chunk_size: usize, mode: ExecMode) -> Result<Self> {
        if chunk_size < 4 || !chunk_size.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "chunk size must be a power of two ≥ 4, got {chunk_size}"
            )));
        }
        Ok(Self {
            chunk_size,
            mode: mode.validate()?,
        })
    }

    pub fn with_mode(mode: ExecMode) -> Result<Self> {
        Self::new(DEFAULT_CHUNK_SIZE, mode)
    }

    pub fn sequential() -> Self {
        Self {
            chunk_size: DEFAULT_CHUNK_SIZE,
            mode: ExecMode::Sequential,
        }
    }

    pub fn chunk_size(&self) -> usize {
        self.chunk_size
    }

    pub fn mode(&self) -> ExecMode {
        self.mode
    }
}

impl Default for ReductionPlan {
    fn default() -> Self {
        Self::sequential()
    }
}

/// Pairwise sum of `a`.
pub fn reduce_sum<T: Real>(a: &[T], plan: &ReductionPlan) -> Result<T> {
    reduce_indexed_sum(a.len(), |i| a[i], plan)
}

/// Pairwise sum of `fun(a_i)`. The mapped values are folded into the first
/// tree level as they are produced and never stored as a whole.
pub fn reduce_map_sum<T, F>(a: &[T], fun: F, plan: &ReductionPlan) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T + Sync,
{
    reduce_indexed_sum(a.len(), |i| fun(a[i]), plan)
}

/// Pairwise sum of `term(0), …, term(len − 1)`.
pub fn reduce_indexed_sum<T, F>(len: usize, term: F, plan: &ReductionPlan) -> Result<T>
where
    T: Real,
    F: Fn(usize) -> T + Sync,
{
    if len == 0 {
        return Err(Error::EmptyArray);
    }
    let chunk = plan.chunk_size;
    let n_chunks = len.div_ceil(chunk);
    let lanes = plan.mode.lanes();

    let partial = |c: usize, scratch: &mut Vec<T>| {
        let start = c * chunk;
        let m = chunk.min(len - start);
        chunk_sum(start, m, &term, lanes, scratch)
    };

    if n_chunks == 1 {
        let mut scratch = Vec::with_capacity(chunk / 2 + 1);
        return Ok(partial(0, &mut scratch));
    }

    let partials: Vec<T> = run_partitioned(n_chunks, plan.mode.workers(), |range| {
        let mut scratch = Vec::with_capacity(chunk / 2 + 1);
        range.map(|c| partial(c, &mut scratch)).collect::<Vec<T>>()
    })
    .into_iter()
    .flatten()
    .collect();

    // The cross-chunk tree is small; it runs on the caller's thread.
    let combine = ReductionPlan {
        chunk_size: chunk,
        mode: plan.mode.per_worker(),
    };
    reduce_sum(&partials, &combine)
}

/// Reduces an already materialised buffer in place, with the same tree a
/// single chunk of that length would get. The buffer is clobbered.
pub(crate) fn tree_sum_in_place<T: Real>(buf: &mut [T], lanes: bool) -> T {
    let mut m = buf.len();
    if m == 0 {
        return T::ZERO;
    }
    while m > 1 {
        m = if lanes {
            halve_lanes(buf, m)
        } else {
            halve_scalar(buf, m)
        };
    }
    buf[0]
}

fn chunk_sum<T, F>(start: usize, m: usize, term: &F, lanes: bool, scratch: &mut Vec<T>) -> T
where
    T: Real,
    F: Fn(usize) -> T,
{
    if m == 1 {
        return term(start);
    }
    scratch.clear();
    if lanes {
        first_level_lanes(start, m, term, scratch);
    } else {
        first_level_scalar(start, m, term, scratch);
    }
    tree_sum_in_place(scratch, lanes)
}

fn first_level_scalar<T: Real, F: Fn(usize) -> T>(
    start: usize,
    m: usize,
    term: &F,
    out: &mut Vec<T>,
) {
    for i in 0..m / 2 {
        out.push(term(start + 2 * i) + term(start + 2 * i + 1));
    }
    if m % 2 == 1 {
        out.push(term(start + m - 1));
    }
}

fn first_level_lanes<T: Real, F: Fn(usize) -> T>(
    start: usize,
    m: usize,
    term: &F,
    out: &mut Vec<T>,
) {
    let blocks = m / 8;
    for b in 0..blocks {
        let base = start + 8 * b;
        let x: [T; 8] = std::array::from_fn(|l| term(base + l));
        out.extend_from_slice(&hadd4(&x));
    }
    let done = blocks * 8;
    for i in done / 2..m / 2 {
        out.push(term(start + 2 * i) + term(start + 2 * i + 1));
    }
    if m % 2 == 1 {
        out.push(term(start + m - 1));
    }
}

/// One tree level over `buf[..m]`; returns the new length.
fn halve_scalar<T: Real>(buf: &mut [T], m: usize) -> usize {
    let half = m / 2;
    for i in 0..half {
        buf[i] = buf[2 * i] + buf[2 * i + 1];
    }
    if m % 2 == 1 {
        buf[half] = buf[m - 1];
        half + 1
    } else {
        half
    }
}

fn halve_lanes<T: Real>(buf: &mut [T], m: usize) -> usize {
    let half = m / 2;
    let blocks = half / 4;
    for b in 0..blocks {
        let x: [T; 8] = buf[8 * b..8 * b + 8].try_into().unwrap();
        buf[4 * b..4 * b + 4].copy_from_slice(&hadd4(&x));
    }
    for i in blocks * 4..half {
        buf[i] = buf[2 * i] + buf[2 * i + 1];
    }
    if m % 2 == 1 {
        buf[half] = buf[m - 1];
        half + 1
    } else {
        half
    }
}

/// Horizontal add of two 4-lane vectors: `[a0+a1, a2+a3, b0+b1, b2+b3]`.
#[inline(always)]
fn hadd4<T: Real>(x: &[T; 8]) -> [T; 4] {
    [x[0] + x[1], x[2] + x[3], x[4] + x[5], x[6] + x[7]]
}
