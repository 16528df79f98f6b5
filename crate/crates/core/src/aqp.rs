//! Approximate COUNT, SUM and AVG over range predicates, answered by
//! integrating a kernel density estimate with composite Simpson quadrature.
//!
//! Bounds are clipped to the data range widened by `tail_width` kernel scales
//! per axis, so infinite bounds are allowed.

use crate::error::{Error, Result};
use crate::exec::{run_partitioned, ExecMode};
use crate::kde::KdeModel;
use crate::reduce::{reduce_indexed_sum, reduce_sum, ReductionPlan};

pub const DEFAULT_RESOLUTION: usize = 2048;
pub const MIN_RESOLUTION: usize = 16;
pub const DEFAULT_TAIL_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    Count,
    Sum,
    Avg,
}

/// Integrand weight: `1`, the first queried coordinate or the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    One,
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeQuery {
    pub aggregate: Aggregate,
    pub column: usize,
    pub bounds: (f64, f64),
    /// Second column and its bounds for two-dimensional predicates.
    pub second: Option<(usize, (f64, f64))>,
    /// Simpson intervals per axis, rounded up to an even count.
    pub resolution: usize,
    /// Kernel scales beyond the data range that are still integrated.
    pub tail_width: f64,
    pub exec: ExecMode,
}

impl RangeQuery {
    pub fn new(aggregate: Aggregate, column: usize, a: f64, b: f64) -> Self {
        Self {
            aggregate,
            column,
            bounds: (a, b),
            second: None,
            resolution: DEFAULT_RESOLUTION,
            tail_width: DEFAULT_TAIL_WIDTH,
            exec: ExecMode::Sequential,
        }
    }

    pub fn with_second(mut self, column: usize, c: f64, d: f64) -> Self {
        self.second = Some((column, (c, d)));
        self
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn with_exec(mut self, exec: ExecMode) -> Self {
        self.exec = exec;
        self
    }

    fn validate(&self, model: &KdeModel) -> Result<()> {
        check_bounds(self.bounds)?;
        check_resolution(self.resolution)?;
        if !(self.tail_width > 0.0) {
            return Err(Error::InvalidQuery(format!(
                "tail width must be positive, got {}",
                self.tail_width
            )));
        }
        self.exec.validate()?;
        let columns = match self.second {
            None => vec![self.column],
            Some((c2, b2)) => {
                check_bounds(b2)?;
                if c2 == self.column {
                    return Err(Error::InvalidQuery("the two columns must differ".into()));
                }
                vec![self.column, c2]
            }
        };
        if model.dim() != columns.len() {
            return Err(Error::InvalidQuery(format!(
                "a {}-column query needs a {}-dimensional model, got {}",
                columns.len(),
                columns.len(),
                model.dim()
            )));
        }
        if let Some(&c) = columns.iter().find(|&&c| c >= model.dim()) {
            return Err(Error::InvalidQuery(format!(
                "column {c} is out of range for a {}-dimensional model",
                model.dim()
            )));
        }
        Ok(())
    }
}

fn check_bounds((a, b): (f64, f64)) -> Result<()> {
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::InvalidRange { lo: a, hi: b });
    }
    Ok(())
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidQuery(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    Ok(())
}

/// Clips `[a, b]` to the integrable window of coordinate `axis`. `None` when
/// nothing of the interval is left.
fn clip(model: &KdeModel, axis: usize, (a, b): (f64, f64), tail: f64) -> Option<(f64, f64)> {
    let (lo, hi) = model.data().row_range(axis);
    let pad = tail * model.axis_scale(axis);
    let (a, b) = (a.max(lo - pad), b.min(hi + pad));
    (a < b).then_some((a, b))
}

/// Composite Simpson nodes and weights on `[a, b]` with `m` (even) intervals.
struct Simpson {
    a: f64,
    step: f64,
    m: usize,
}

impl Simpson {
    fn new((a, b): (f64, f64), resolution: usize) -> Self {
        let m = resolution + resolution % 2;
        Self {
            a,
            step: (b - a) / m as f64,
            m,
        }
    }

    fn nodes(&self) -> usize {
        self.m + 1
    }

    fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.step
    }

    fn weight(&self, i: usize) -> f64 {
        let w = if i == 0 || i == self.m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        w * self.step / 3.0
    }
}

/// Simpson sum over `rule`. Workers fill contiguous node ranges; the weighted
/// terms are then reduced in node order, so the result does not depend on
/// the worker count.
fn simpson_sum(rule: &Simpson, exec: ExecMode, term: impl Fn(usize) -> f64 + Sync) -> f64 {
    let terms = run_partitioned(rule.nodes(), exec.workers(), |range| {
        range
            .map(|i| rule.weight(i) * term(i))
            .collect::<Vec<f64>>()
    })
    .concat();
    reduce_sum(&terms, &ReductionPlan::sequential()).expect("at least one node")
}

/// `∫_a^b w(x) f̂(x) dx` for a one-dimensional model.
pub fn integrate_1d(
    model: &KdeModel,
    a: f64,
    b: f64,
    weight: Weight,
    resolution: usize,
) -> Result<f64> {
    integrate_1d_with(
        model,
        (a, b),
        weight,
        resolution,
        DEFAULT_TAIL_WIDTH,
        ExecMode::Sequential,
    )
}

fn integrate_1d_with(
    model: &KdeModel,
    bounds: (f64, f64),
    weight: Weight,
    resolution: usize,
    tail: f64,
    exec: ExecMode,
) -> Result<f64> {
    check_bounds(bounds)?;
    check_resolution(resolution)?;
    if model.dim() != 1 {
        return Err(Error::InvalidQuery(format!(
            "one-dimensional integration needs a 1-dimensional model, got {}",
            model.dim()
        )));
    }
    if weight == Weight::Y {
        return Err(Error::InvalidQuery("weight y needs a 2-d query".into()));
    }
    let Some(range) = clip(model, 0, bounds, tail) else {
        return Ok(0.0);
    };
    let rule = Simpson::new(range, resolution);
    Ok(simpson_sum(&rule, exec, |i| {
        let x = rule.node(i);
        let f = model.density(&[x]);
        match weight {
            Weight::One => f,
            _ => x * f,
        }
    }))
}

/// `∬ w(x, y) f̂(x, y) dy dx` over the rectangle of a 2-d query, by
/// tensor-product Simpson. Outer-axis strips run in parallel.
fn integrate_2d(model: &KdeModel, q: &RangeQuery, weight: Weight) -> Result<f64> {
    let (c2, b2) = q.second.expect("2-d query");
    let (Some(rx), Some(ry)) = (
        clip(model, q.column, q.bounds, q.tail_width),
        clip(model, c2, b2, q.tail_width),
    ) else {
        return Ok(0.0);
    };
    let (outer, inner) = (
        Simpson::new(rx, q.resolution),
        Simpson::new(ry, q.resolution),
    );
    let plan = ReductionPlan::sequential();
    Ok(simpson_sum(&outer, q.exec, |i| {
        let x = outer.node(i);
        let mut point = [0.0; 2];
        point[q.column] = x;
        reduce_indexed_sum(
            inner.nodes(),
            |k| {
                let y = inner.node(k);
                let mut p = point;
                p[c2] = y;
                let f = model.density(&p);
                inner.weight(k)
                    * match weight {
                        Weight::One => f,
                        Weight::X => x * f,
                        Weight::Y => y * f,
                    }
            },
            &plan,
        )
        .expect("rule has nodes")
    }))
}

fn integral(model: &KdeModel, q: &RangeQuery, weight: Weight) -> Result<f64> {
    q.validate(model)?;
    match q.second {
        None => integrate_1d_with(model, q.bounds, weight, q.resolution, q.tail_width, q.exec),
        Some(_) => integrate_2d(model, q, weight),
    }
}

/// `n ∫ f̂` over the query range.
pub fn aqp_count(model: &KdeModel, q: &RangeQuery) -> Result<f64> {
    Ok(model.len() as f64 * integral(model, q, Weight::One)?)
}

/// `n ∫ x f̂` over the query range, `x` being the first queried column.
pub fn aqp_sum(model: &KdeModel, q: &RangeQuery) -> Result<f64> {
    Ok(model.len() as f64 * integral(model, q, Weight::X)?)
}

/// Sum over count. Fails when the estimated count is below `10⁻⁹ n`.
pub fn aqp_avg(model: &KdeModel, q: &RangeQuery) -> Result<f64> {
    let count = aqp_count(model, q)?;
    if !(count >= 1e-9 * model.len() as f64) {
        return Err(Error::EmptyRangeEstimate);
    }
    Ok(aqp_sum(model, q)? / count)
}

/// Dispatches on `q.aggregate`.
pub fn aqp_evaluate(model: &KdeModel, q: &RangeQuery) -> Result<f64> {
    match q.aggregate {
        Aggregate::Count => aqp_count(model, q),
        Aggregate::Sum => aqp_sum(model, q),
        Aggregate::Avg => aqp_avg(model, q),
    }
}
