use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How a kernel is executed.
///
/// All three modes evaluate the same summation tree, so results do not depend
/// on the mode. `Vectorized` uses 4-lane blocked inner loops; `Threaded` uses
/// the same lane loops on `k` worker threads, each owning a contiguous range
/// of work items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Sequential,
    Vectorized,
    Threaded(usize),
}

impl ExecMode {
    /// Threaded mode with one worker per available core.
    pub fn threaded_auto() -> Self {
        let k = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self::Threaded(k)
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Self::Threaded(0) => Err(Error::InvalidConfig(
                "thread count must be at least 1".into(),
            )),
            m => Ok(m),
        }
    }

    pub fn workers(self) -> usize {
        match self {
            Self::Threaded(k) => k.max(1),
            _ => 1,
        }
    }

    /// Whether inner loops use the lane-blocked form.
    pub fn lanes(self) -> bool {
        !matches!(self, Self::Sequential)
    }

    /// The single-threaded mode used inside each worker.
    pub fn per_worker(self) -> Self {
        match self {
            Self::Threaded(_) => Self::Vectorized,
            m => m,
        }
    }
}

impl fmt::Display for ExecMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sequential => f.write_str("seq"),
            Self::Vectorized => f.write_str("vec"),
            Self::Threaded(k) => write!(f, "thr:{k}"),
        }
    }
}

impl FromStr for ExecMode {
    type Err = Error;

    /// Accepts `seq`, `vec`, `thr` (all cores) and `thr:K`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seq" | "sequential" => Ok(Self::Sequential),
            "vec" | "vectorized" => Ok(Self::Vectorized),
            "thr" | "threaded" => Ok(Self::threaded_auto()),
            _ => {
                let k = s
                    .strip_prefix("thr:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown mode {s:?}")))?;
                Self::Threaded(k).validate()
            }
        }
    }
}

/// Splits `0..total` into at most `parts` contiguous, nearly equal ranges.
pub(crate) fn split_ranges(total: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.clamp(1, total.max(1));
    let base = total / parts;
    let extra = total % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for p in 0..parts {
        let len = base + usize::from(p < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Runs `job` over contiguous ranges of `0..total` on `workers` threads and
/// returns the results in range order. One worker runs inline.
pub(crate) fn run_partitioned<R, F>(total: usize, workers: usize, job: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<usize>) -> R + Sync,
{
    let ranges = split_ranges(total, workers);
    if ranges.len() <= 1 {
        return ranges.into_iter().map(&job).collect();
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| {
                let job = &job;
                s.spawn(move || job(r))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}
