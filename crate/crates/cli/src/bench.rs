use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use kdeband::bandwidth::{lscv_matrix_objective, lscv_matrix_start};
use kdeband::synth::gaussian_dataset;
use kdeband::{lscv_h_bandwidth, plugin_bandwidth, Dataset, ExecMode, LscvHConfig};
use serde_json::{json, Value};

/// Objective evaluations timed per matrix-selector run.
const MATRIX_EVALS: usize = 100;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Plugin,
    LscvH,
    LscvMatrix,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    /// Sample count; repeat for several sizes. Defaults to a doubling sweep.
    #[arg(long = "n")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Mode compared against the sequential baseline
    #[arg(long, default_value = "thr")]
    mode: ExecMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Timed runs per mode; the median is reported
    #[arg(long, default_value_t = 5)]
    repeat: usize,
    #[arg(long)]
    json: bool,
}

fn default_sizes(algo: Algo) -> Vec<usize> {
    let (lo, hi) = match algo {
        Algo::Plugin => (1024, 32768),
        Algo::LscvH => (64, 1024),
        Algo::LscvMatrix => (1024, 16384),
    };
    std::iter::successors(Some(lo), |&n| (n < hi).then_some(n * 2)).collect()
}

/// One run; returns the selected value (`h`, or the last objective value).
fn run_once(algo: Algo, data: &Dataset, mode: ExecMode) -> Result<f64> {
    Ok(match algo {
        Algo::Plugin => plugin_bandwidth(data, mode)?
            .scalar()
            .expect("scalar result"),
        Algo::LscvH => {
            let cfg = LscvHConfig {
                exec: mode,
                ..Default::default()
            };
            lscv_h_bandwidth(data, &cfg)?
                .scalar()
                .expect("scalar result")
        }
        Algo::LscvMatrix => {
            let h = lscv_matrix_start(data)?;
            let mut g = 0.0;
            for _ in 0..MATRIX_EVALS {
                g = lscv_matrix_objective(&h, data, mode)?;
            }
            g
        }
    })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn timed(algo: Algo, data: &Dataset, mode: ExecMode, repeat: usize) -> Result<(f64, f64)> {
    let mut times = Vec::with_capacity(repeat);
    let mut value = f64::NAN;
    for _ in 0..repeat {
        let start = Instant::now();
        value = run_once(algo, data, mode)?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok((median(times), value))
}

pub fn run(args: BenchArgs) -> Result<()> {
    if args.repeat == 0 {
        bail!("--repeat must be at least 1");
    }
    if args.algo == Algo::Plugin && args.d != 1 {
        bail!("the plug-in selector is univariate; use --d 1");
    }
    let sizes = if args.sizes.is_empty() {
        default_sizes(args.algo)
    } else {
        args.sizes.clone()
    };
    let algo_name = args
        .algo
        .to_possible_value()
        .expect("named")
        .get_name()
        .to_string();
    let mut rows = Vec::new();
    for &n in &sizes {
        let data = gaussian_dataset(n, args.d, args.seed)?;
        let (seq_ms, seq_value) = timed(args.algo, &data, ExecMode::Sequential, args.repeat)?;
        let (mode_ms, mode_value) = if args.mode == ExecMode::Sequential {
            (seq_ms, seq_value)
        } else {
            timed(args.algo, &data, args.mode, args.repeat)?
        };
        let agree = ((mode_value - seq_value) / seq_value).abs() <= 1e-12;
        if !agree {
            bail!(
                "n = {n}: {} gave {mode_value}, sequential gave {seq_value}",
                args.mode
            );
        }
        let row = json!({
            "n": n,
            "d": args.d,
            "seq_ms": seq_ms,
            "mode_ms": mode_ms,
            "speedup": seq_ms / mode_ms,
            "value": seq_value,
        });
        if !args.json {
            println!(
                "{algo_name} n={n} d={} seq={seq_ms:.3}ms {}={mode_ms:.3}ms speedup={:.2} value={seq_value}",
                args.d,
                args.mode,
                seq_ms / mode_ms
            );
        }
        rows.push(row);
    }
    if args.json {
        let record: Value = json!({
            "command": "bench",
            "params": {
                "algo": algo_name,
                "d": args.d,
                "mode": args.mode.to_string(),
                "seed": args.seed,
                "repeat": args.repeat,
                "sizes": sizes,
            },
            "result": rows,
            "timings_ms": rows.iter().map(|r| json!({"n": r["n"], "seq": r["seq_ms"], "mode": r["mode_ms"]})).collect::<Vec<_>>(),
        });
        println!("{}", serde_json::to_string_pretty(&record)?);
    }
    Ok(())
}
