mod bench;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kdeband::bandwidth::{LscvTrace, ScalarTrace};
use kdeband::linalg::{unvech, vech};
use kdeband::{
    aqp_evaluate, kde_eval_batch, load_csv, lscv_h_bandwidth, lscv_matrix_bandwidth,
    plugin_bandwidth, Aggregate, Bandwidth, BandwidthResult, CsvOptions, Dataset, ExecMode,
    KdeModel, LscvHConfig, LscvMatrixConfig, RangeQuery, SquareMatrix,
};
use serde_json::{json, Value};

use report::Report;

#[derive(Parser)]
#[command(
    name = "kdeband",
    version,
    about = "Kernel density bandwidth selection and KDE-backed range aggregates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select a bandwidth for a dataset
    #[command(subcommand)]
    Bandwidth(BandwidthCommand),
    /// Evaluate a density estimate
    #[command(subcommand)]
    Kde(KdeCommand),
    /// Approximate aggregates over a range predicate
    Aqp(AqpArgs),
    /// Time a selector on synthetic gaussian data, sequential vs another mode
    Bench(bench::BenchArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// CSV file, one sample per line
    #[arg(long)]
    input: PathBuf,
    /// The first line holds column names
    #[arg(long)]
    header: bool,
    /// Field delimiter
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

impl InputArgs {
    fn load(&self) -> Result<Dataset> {
        load_matrix_csv(&self.input, self.header, self.delimiter)
    }
}

fn load_matrix_csv(path: &Path, header: bool, delimiter: char) -> Result<Dataset> {
    if !delimiter.is_ascii() {
        bail!("delimiter must be a single ASCII character");
    }
    let opts = CsvOptions {
        has_header: header,
        delimiter: delimiter as u8,
    };
    load_csv(path, opts).with_context(|| format!("reading {}", path.display()))
}

#[derive(Args)]
struct OutputArgs {
    /// Emit a JSON record instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum BandwidthCommand {
    /// Plug-in rule (univariate data)
    Plugin {
        #[command(flatten)]
        input: InputArgs,
        /// Execution mode: seq, vec or thr:K
        #[arg(long, default_value = "seq")]
        mode: ExecMode,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Least-squares cross-validation over a grid of scalar bandwidths
    LscvH {
        #[command(flatten)]
        input: InputArgs,
        /// Number of grid points
        #[arg(long, default_value_t = 150)]
        grid: usize,
        /// Execution mode: seq, vec or thr:K
        #[arg(long, default_value = "seq")]
        mode: ExecMode,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Least-squares cross-validation over full bandwidth matrices
    LscvMatrix {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        /// Execution mode: seq, vec or thr:K
        #[arg(long, default_value = "seq")]
        mode: ExecMode,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Subcommand)]
enum KdeCommand {
    /// Density at each point of a CSV file
    Eval {
        #[command(flatten)]
        input: InputArgs,
        /// Scalar bandwidth
        #[arg(long, group = "bw", required = true)]
        h: Option<f64>,
        /// Bandwidth matrix: a full d×d CSV, or one row holding vech(H)
        #[arg(long = "H-file", group = "bw")]
        h_file: Option<PathBuf>,
        /// CSV of query points, one per line
        #[arg(long)]
        points: PathBuf,
        /// Execution mode: seq, vec or thr:K
        #[arg(long, default_value = "seq")]
        mode: ExecMode,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregateArg {
    Count,
    Sum,
    Avg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Selector {
    Plugin,
    LscvH,
    LscvMatrix,
}

#[derive(Args)]
struct AqpArgs {
    aggregate: AggregateArg,
    #[command(flatten)]
    input: InputArgs,
    /// Queried column (0-based)
    #[arg(long)]
    col: usize,
    /// Range `A:B`; either end may be empty or ±inf
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    range: (f64, f64),
    /// Second queried column for a 2-d predicate
    #[arg(long, requires = "range2")]
    col2: Option<usize>,
    /// Range on the second column, same syntax as --range
    #[arg(long, requires = "col2", allow_hyphen_values = true, value_parser = parse_range)]
    range2: Option<(f64, f64)>,
    /// Fixed scalar bandwidth
    #[arg(long, conflicts_with = "select")]
    h: Option<f64>,
    /// Bandwidth selector (default: plugin for 1-d, lscv-h for 2-d)
    #[arg(long, value_enum)]
    select: Option<Selector>,
    /// Simpson intervals per axis (default 2048 for 1-d, 256 for 2-d)
    #[arg(long)]
    resolution: Option<usize>,
    /// Execution mode: seq, vec or thr:K
    #[arg(long, default_value = "seq")]
    mode: ExecMode,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected A:B, got {s:?}"))?;
    let bound = |t: &str, missing: f64| -> std::result::Result<f64, String> {
        let t = t.trim();
        if t.is_empty() {
            return Ok(missing);
        }
        t.parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| format!("invalid bound {t:?}"))
    };
    Ok((bound(a, f64::NEG_INFINITY)?, bound(b, f64::INFINITY)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bandwidth(cmd) => run_bandwidth(cmd),
        Command::Kde(cmd) => run_kde(cmd),
        Command::Aqp(args) => run_aqp(args),
        Command::Bench(args) => bench::run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn bandwidth_json(result: &BandwidthResult) -> Value {
    match result {
        BandwidthResult::Scalar { h, trace } => match trace {
            ScalarTrace::Plugin(t) => json!({
                "h": h,
                "trace": {
                    "v_hat": t.v_hat,
                    "sigma_hat": t.sigma_hat,
                    "psi8_ns": t.psi8_ns,
                    "g1": t.g1,
                    "psi6": t.psi6,
                    "g2": t.g2,
                    "psi4": t.psi4,
                },
            }),
            ScalarTrace::Lscv(LscvTrace {
                h0,
                grid,
                objective,
                ..
            }) => {
                let best = grid.iter().position(|g| g == h).map(|i| objective[i]);
                json!({
                    "h": h,
                    "h0": h0,
                    "grid_points": grid.len(),
                    "grid_min": grid.first(),
                    "grid_max": grid.last(),
                    "objective": best,
                })
            }
        },
        BandwidthResult::Matrix {
            h,
            objective,
            iterations,
        } => json!({
            "d": h.order(),
            "vech_H": vech(h),
            "objective": objective,
            "iterations": iterations,
        }),
    }
}

fn run_bandwidth(cmd: BandwidthCommand) -> Result<()> {
    let (name, input, mode, json) = match &cmd {
        BandwidthCommand::Plugin { input, mode, out } => {
            ("bandwidth plugin", input, *mode, out.json)
        }
        BandwidthCommand::LscvH {
            input, mode, out, ..
        } => ("bandwidth lscv-h", input, *mode, out.json),
        BandwidthCommand::LscvMatrix {
            input, mode, out, ..
        } => ("bandwidth lscv-matrix", input, *mode, out.json),
    };
    let mut report = Report::new(name);
    let data = report.time("load", || input.load())?;
    report.param("input", input.input.display().to_string());
    report.param("n", data.len());
    report.param("d", data.dim());
    report.param("mode", mode.to_string());
    let result = match &cmd {
        BandwidthCommand::Plugin { .. } => {
            report.time("select", || plugin_bandwidth(&data, mode))?
        }
        BandwidthCommand::LscvH { grid, .. } => {
            report.param("grid", *grid);
            let cfg = LscvHConfig {
                n_grid: *grid,
                exec: mode,
                ..Default::default()
            };
            report.time("select", || lscv_h_bandwidth(&data, &cfg))?
        }
        BandwidthCommand::LscvMatrix { max_iter, .. } => {
            report.param("max_iter", *max_iter);
            let cfg = LscvMatrixConfig {
                max_iterations: *max_iter,
                exec: mode,
                ..Default::default()
            };
            report.time("select", || lscv_matrix_bandwidth(&data, &cfg))?
        }
    };
    report.result(bandwidth_json(&result));
    report.emit(json, || match &result {
        BandwidthResult::Scalar { h, .. } => format!("h = {h}"),
        BandwidthResult::Matrix {
            h,
            objective,
            iterations,
        } => {
            let rows: Vec<String> = (0..h.order())
                .map(|i| {
                    let row: Vec<String> =
                        (0..h.order()).map(|j| h.get(i, j).to_string()).collect();
                    row.join(" ")
                })
                .collect();
            format!(
                "H =\n  {}\nvech(H) = {:?}\nobjective = {objective}\niterations = {iterations}",
                rows.join("\n  "),
                vech(h)
            )
        }
    })
}

/// A full `d × d` matrix, or a single row with the `d(d+1)/2` entries of
/// `vech(H)`.
fn load_bandwidth_matrix(path: &Path, d: usize) -> Result<SquareMatrix> {
    let m = load_matrix_csv(path, false, ',')?;
    if m.len() == 1 && m.dim() == d * (d + 1) / 2 {
        return Ok(unvech(&m.sample(0), d)?);
    }
    if m.len() != d || m.dim() != d {
        bail!(
            "bandwidth matrix file must hold a {d}×{d} matrix or one row of {} values",
            d * (d + 1) / 2
        );
    }
    let rows: Vec<Vec<f64>> = m.samples().collect();
    let h = SquareMatrix::from_rows(&rows)?;
    if !h.is_symmetric() {
        bail!("bandwidth matrix is not symmetric");
    }
    Ok(h)
}

fn run_kde(cmd: KdeCommand) -> Result<()> {
    let KdeCommand::Eval {
        input,
        h,
        h_file,
        points,
        mode,
        out,
    } = cmd;
    let mut report = Report::new("kde eval");
    let (data, pts) = report.time("load", || -> Result<_> {
        Ok((input.load()?, load_matrix_csv(&points, false, ',')?))
    })?;
    report.param("input", input.input.display().to_string());
    report.param("points", points.display().to_string());
    report.param("n", data.len());
    report.param("d", data.dim());
    report.param("mode", mode.to_string());
    let bandwidth = match (h, h_file) {
        (Some(h), _) => {
            report.param("h", h);
            Bandwidth::scalar(h)?
        }
        (None, Some(path)) => {
            let m = load_bandwidth_matrix(&path, data.dim())?;
            report.param("vech_H", vech(&m));
            Bandwidth::Matrix(m)
        }
        (None, None) => unreachable!("clap requires one bandwidth"),
    };
    let model = KdeModel::new(data, bandwidth)?;
    let samples: Vec<Vec<f64>> = pts.samples().collect();
    let values = report.time("eval", || kde_eval_batch(&model, &samples, mode))?;
    report.result(json!({ "densities": values }));
    report.emit(out.json, || {
        values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    })
}

fn run_aqp(args: AqpArgs) -> Result<()> {
    let name = match args.aggregate {
        AggregateArg::Count => "aqp count",
        AggregateArg::Sum => "aqp sum",
        AggregateArg::Avg => "aqp avg",
    };
    let mut report = Report::new(name);
    let full = report.time("load", || args.input.load())?;
    let two_d = args.col2.is_some();
    let mut columns = vec![args.col];
    columns.extend(args.col2);
    // the model covers exactly the queried columns, in query order
    let data = full.select_columns(&columns)?;
    let selector = args.select.unwrap_or(if two_d {
        Selector::LscvH
    } else {
        Selector::Plugin
    });
    let resolution = args.resolution.unwrap_or(if two_d { 256 } else { 2048 });
    report.param("input", args.input.input.display().to_string());
    report.param("n", data.len());
    report.param("columns", columns.clone());
    report.param("range", vec![args.range.0, args.range.1]);
    if let Some(r2) = args.range2 {
        report.param("range2", vec![r2.0, r2.1]);
    }
    report.param("resolution", resolution);
    report.param("mode", args.mode.to_string());

    let bandwidth = match args.h {
        Some(h) => {
            report.param("h", h);
            Bandwidth::scalar(h)?
        }
        None => {
            let result = report.time("select", || match selector {
                Selector::Plugin => plugin_bandwidth(&data, args.mode),
                Selector::LscvH => lscv_h_bandwidth(
                    &data,
                    &LscvHConfig {
                        exec: args.mode,
                        ..Default::default()
                    },
                ),
                Selector::LscvMatrix => lscv_matrix_bandwidth(
                    &data,
                    &LscvMatrixConfig {
                        exec: args.mode,
                        ..Default::default()
                    },
                ),
            })?;
            report.param(
                "select",
                match selector {
                    Selector::Plugin => "plugin",
                    Selector::LscvH => "lscv-h",
                    Selector::LscvMatrix => "lscv-matrix",
                },
            );
            report.param("bandwidth", bandwidth_json(&result));
            result.bandwidth()
        }
    };
    let model = KdeModel::new(data, bandwidth)?;
    let aggregate = match args.aggregate {
        AggregateArg::Count => Aggregate::Count,
        AggregateArg::Sum => Aggregate::Sum,
        AggregateArg::Avg => Aggregate::Avg,
    };
    let mut query = RangeQuery::new(aggregate, 0, args.range.0, args.range.1)
        .with_resolution(resolution)
        .with_exec(args.mode);
    if let Some((c, d)) = args.range2 {
        query = query.with_second(1, c, d);
    }
    let value = report.time("integrate", || aqp_evaluate(&model, &query))?;
    report.result(json!({ "value": value }));
    report.emit(args.out.json, || {
        format!("{} = {value}", name.trim_start_matches("aqp "))
    })
}
