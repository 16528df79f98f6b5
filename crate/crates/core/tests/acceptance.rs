//! Acceptance checks, one line per criterion.
//!
//! Every oracle here is written independently of the library: plain loops,
//! direct enumeration, and dense scans. Criterion 10 is a timing report and
//! only gates when `KDEBAND_PERF_GATE=1`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use kdeband::aqp::{aqp_count, Aggregate, RangeQuery};
use kdeband::bandwidth::{
    lscv_h_bandwidth, lscv_matrix_bandwidth, lscv_matrix_objective, lscv_matrix_start,
    plugin_bandwidth, Bandwidth, BandwidthResult, LscvHConfig, LscvMatrixConfig, ScalarTrace,
    PENALTY,
};
use kdeband::dataset::Dataset;
use kdeband::exec::ExecMode;
use kdeband::kde::{kde_eval_batch, KdeModel};
use kdeband::linalg::{covariance, SquareMatrix};
use kdeband::pairwise::{
    fused_quadratic_map_sum, pairwise_map_sum, precompute_quadratic_forms, tri_block_position,
    TileGeometry,
};
use kdeband::reduce::{reduce_map_sum, reduce_sum, ReductionPlan};
use kdeband::synth::gaussian_dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

const MODES: [ExecMode; 3] = [
    ExecMode::Sequential,
    ExecMode::Vectorized,
    ExecMode::Threaded(4),
];

// 1 ------------------------------------------------------------------------

fn reduction_oracle() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let plan = ReductionPlan::default();
    for (size, arrays) in [(1_000usize, 50u64), (1_000_000, 50)] {
        for seed in 0..arrays {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 7919 + size as u64);
            let a: Vec<f64> = (0..size).map(|_| rng.gen::<f64>()).collect();
            let mut naive = 0.0;
            let mut naive_map = 0.0;
            for &v in &a {
                naive += v;
                naive_map += (v * 3.0).sin() + 1.5;
            }
            let s = reduce_sum(&a, &plan).unwrap();
            let m = reduce_map_sum(&a, |v| (v * 3.0).sin() + 1.5, &plan).unwrap();
            worst = worst.max(rel(s, naive)).max(rel(m, naive_map));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-12, || {
        format!("max relative difference {worst:e}")
    })?;
    ensure(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!("100 arrays, max rel diff {worst:.1e}, {secs:.2} s"))
}

// 2 ------------------------------------------------------------------------

fn pairwise_oracle() -> Check {
    let fun = |x: f64| (-x * x).exp() + 0.25 * x.cos();
    let mut worst: f64 = 0.0;
    for n in [1, 2, 3, 4, 5, 63, 64, 65, 1000] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut naive = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                naive += fun(a[i] - a[j]);
            }
        }
        for k in [4, 16] {
            let geom = TileGeometry::new(n, k).unwrap();
            for mode in MODES {
                let got = pairwise_map_sum(&a, fun, &geom, mode).unwrap();
                let r = rel(got, naive);
                ensure(r <= 1e-10, || {
                    format!("n={n} k={k} {mode}: {got} vs {naive}")
                })?;
                worst = worst.max(r);
            }
        }
    }
    Ok(format!("max rel diff {worst:.1e}"))
}

// 3 ------------------------------------------------------------------------

fn triangular_bijection() -> Check {
    let start = Instant::now();
    let (mut l, mut q) = (0u64, 0u64);
    for bx in 0..1_000_000u64 {
        let got = tri_block_position(bx);
        ensure(got == (l, q), || {
            format!("bx={bx}: {got:?} vs {:?}", (l, q))
        })?;
        if q == l {
            l += 1;
            q = 0;
        } else {
            q += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("took {secs:.2} s"))?;
    Ok(format!("10^6 tiles, {secs:.3} s"))
}

// 4 ------------------------------------------------------------------------

fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> SquareMatrix {
    let b: Vec<f64> = (0..d * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let dot: f64 = (0..d).map(|t| b[i * d + t] * b[j * d + t]).sum();
            m[i * d + j] = dot + if i == j { 0.5 } else { 0.0 };
        }
    }
    SquareMatrix::new(d, m).unwrap()
}

fn naive_form(x: &Dataset, m: &SquareMatrix, i: usize, j: usize) -> f64 {
    let d = x.dim();
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            s += (x.get(a, i) - x.get(a, j)) * m.get(a, b) * (x.get(b, i) - x.get(b, j));
        }
    }
    s
}

fn quadratic_oracle() -> Check {
    let mut worst: f64 = 0.0;
    for d in [1, 2, 3, 8, 16] {
        for n in [2, 50, 257] {
            let mut rng = ChaCha8Rng::seed_from_u64((d * 1000 + n) as u64);
            let data = (0..d * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = Dataset::new(d, n, data).unwrap();
            let m = random_spd(&mut rng, d);
            let geom = TileGeometry::with_default_tile(n);
            let scale = d as f64;
            let fun1 = move |q: f64| (-q / scale).exp() + 0.1;
            let mut naive_total;
            let mut idx = 0;
            for mode in MODES {
                let sv = precompute_quadratic_forms(&x, &m, &geom, mode).unwrap();
                idx = 0;
                naive_total = 0.0;
                for i in 0..n {
                    for j in i + 1..n {
                        let want = naive_form(&x, &m, i, j);
                        let got = sv.values()[idx];
                        let r = rel(got, want);
                        ensure(r <= 1e-10, || {
                            format!("d={d} n={n} pair ({i},{j}): {got} vs {want}")
                        })?;
                        worst = worst.max(r);
                        naive_total += fun1(want);
                        idx += 1;
                    }
                }
                let fused = fused_quadratic_map_sum(&x, &m, fun1, &geom, mode).unwrap();
                let r = rel(fused, naive_total);
                ensure(r <= 1e-10, || {
                    format!("fused d={d} n={n} {mode}: {fused} vs {naive_total}")
                })?;
                worst = worst.max(r);
            }
            ensure(idx == n * (n - 1) / 2, || "pair count".into())?;
        }
    }
    Ok(format!("15 shapes x 3 modes, max rel diff {worst:.1e}"))
}

// 5 ------------------------------------------------------------------------

/// Cross-validation objective straight from its definition: kernels with
/// covariance `Σ` applied to `(X_i − X_j)/h`, quadratic forms recomputed at
/// every `h`.
fn naive_lscv_h(x: &Dataset, h: f64) -> f64 {
    let (n, d) = (x.len(), x.dim());
    let sigma = covariance(x).unwrap();
    let (inv, det) = invert(&sigma);
    let df = d as f64;
    let kern = |u: &[f64], var: f64| {
        let mut q = 0.0;
        for a in 0..d {
            for b in 0..d {
                q += u[a] * inv[a * d + b] * u[b];
            }
        }
        (2.0 * PI * var).powf(-df / 2.0) / det.sqrt() * (-q / (2.0 * var)).exp()
    };
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let u: Vec<f64> = (0..d).map(|c| (x.get(c, i) - x.get(c, j)) / h).collect();
            total += kern(&u, 2.0) - 2.0 * kern(&u, 1.0);
        }
    }
    let rk = kern(&vec![0.0; d], 2.0);
    h.powf(-df) * (2.0 * total / (n * n) as f64 + rk / n as f64)
}

/// Gauss–Jordan inverse and determinant.
fn invert(m: &SquareMatrix) -> (Vec<f64>, f64) {
    let d = m.order();
    let mut a = m.as_slice().to_vec();
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    let mut det = 1.0;
    for c in 0..d {
        let p = (c..d)
            .max_by(|&r, &s| a[r * d + c].abs().total_cmp(&a[s * d + c].abs()))
            .unwrap();
        if p != c {
            for k in 0..d {
                a.swap(p * d + k, c * d + k);
                inv.swap(p * d + k, c * d + k);
            }
            det = -det;
        }
        let piv = a[c * d + c];
        det *= piv;
        for k in 0..d {
            a[c * d + k] /= piv;
            inv[c * d + k] /= piv;
        }
        for r in 0..d {
            if r != c {
                let f = a[r * d + c];
                for k in 0..d {
                    a[r * d + k] -= f * a[c * d + k];
                    inv[r * d + k] -= f * inv[c * d + k];
                }
            }
        }
    }
    (inv, det)
}

fn lscv_equivalence() -> Check {
    let mut worst: f64 = 0.0;
    let mut per_eval = Vec::new();
    for d in [1, 2, 4] {
        for n in [64, 256] {
            let x = gaussian_dataset(n, d, (d * 100 + n) as u64).unwrap();
            let r = lscv_h_bandwidth(&x, &LscvHConfig::default()).unwrap();
            let BandwidthResult::Scalar {
                trace: ScalarTrace::Lscv(t),
                ..
            } = r
            else {
                return Err("expected a cross-validation trace".into());
            };
            ensure(t.grid.len() == 150, || {
                format!("grid has {} points", t.grid.len())
            })?;
            for (&h, &g) in t.grid.iter().zip(&t.objective) {
                let want = naive_lscv_h(&x, h);
                let r = rel(g, want);
                ensure(r <= 1e-10, || format!("d={d} n={n} h={h}: {g} vs {want}"))?;
                worst = worst.max(r);
            }
            let pairs = (n * (n - 1) / 2) as u64;
            let c = t.counts;
            ensure(c.quadratic_forms == pairs, || {
                format!("{} quadratic forms for {pairs} pairs", c.quadratic_forms)
            })?;
            ensure(c.objective_evals == 150, || {
                format!("{} evaluations", c.objective_evals)
            })?;
            per_eval.push((n, c.kernel_evals / c.objective_evals));
        }
    }
    for n in [64u64, 256] {
        let k: Vec<u64> = per_eval
            .iter()
            .filter(|p| p.0 as u64 == n)
            .map(|p| p.1)
            .collect();
        ensure(k.iter().all(|&v| v == n * (n - 1) / 2), || {
            format!("per-evaluation kernel work depends on d: {k:?}")
        })?;
    }
    Ok(format!(
        "max rel diff {worst:.1e}; forms computed once, per-g work n(n-1)/2 for every d"
    ))
}

// 6 ------------------------------------------------------------------------

fn plugin_h(x: &Dataset) -> f64 {
    plugin_bandwidth(x, ExecMode::Sequential)
        .unwrap()
        .scalar()
        .unwrap()
}

fn plugin_properties() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let x = gaussian_dataset(500, 1, seed).unwrap();
        let h = plugin_h(&x);
        let hc = plugin_h(&x.scaled(3.7).unwrap());
        let r = rel(hc, 3.7 * h);
        ensure(r <= 1e-10, || {
            format!("seed {seed}: h(cX) = {hc}, c·h(X) = {}", 3.7 * h)
        })?;
        worst = worst.max(r);
    }
    let mut ratios: Vec<f64> = (0..5)
        .map(|seed| {
            let small = plugin_h(&gaussian_dataset(1024, 1, 1000 + seed).unwrap());
            let large = plugin_h(&gaussian_dataset(16384, 1, 2000 + seed).unwrap());
            large / small
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let median = ratios[2];
    let target = 16f64.powf(-0.2);
    let secs = start.elapsed().as_secs_f64();
    ensure((median / target - 1.0).abs() <= 0.15, || {
        format!("median ratio {median:.4}, expected {target:.4} ± 15%")
    })?;
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "equivariance max rel {worst:.1e}; median h ratio {median:.4} vs {target:.4}; {secs:.1} s"
    ))
}

// 7 ------------------------------------------------------------------------

fn naive_lscv_matrix(h: &SquareMatrix, x: &Dataset) -> f64 {
    let (n, d) = (x.len(), x.dim());
    let (inv, det) = invert(h);
    let df = d as f64;
    let kern = |u: &[f64], var: f64| {
        let mut q = 0.0;
        for a in 0..d {
            for b in 0..d {
                q += u[a] * inv[a * d + b] * u[b];
            }
        }
        (2.0 * PI * var).powf(-df / 2.0) / det.sqrt() * (-q / (2.0 * var)).exp()
    };
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            for _ in 0..usize::from(i != j) {
                let u: Vec<f64> = (0..d).map(|c| x.get(c, i) - x.get(c, j)).collect();
                total += kern(&u, 2.0) - 2.0 * kern(&u, 1.0);
            }
        }
    }
    let rk = 2f64.powf(-df) * PI.powf(-df / 2.0) / det.sqrt();
    total / (n * n) as f64 + rk / n as f64
}

fn lscv_matrix_checks() -> Check {
    let mut worst: f64 = 0.0;
    for d in [1, 2, 4] {
        for n in [16, 128] {
            let x = gaussian_dataset(n, d, (d * 10 + n) as u64).unwrap();
            let start = lscv_matrix_start(&x).unwrap();
            for s in [0.6, 1.0, 1.7] {
                let h = start.scale(s);
                let got = lscv_matrix_objective(&h, &x, ExecMode::Sequential).unwrap();
                let want = naive_lscv_matrix(&h, &x);
                let r = rel(got, want);
                ensure(r <= 1e-10, || format!("d={d} n={n}: {got} vs {want}"))?;
                worst = worst.max(r);
            }
        }
    }
    let x2 = gaussian_dataset(40, 2, 3).unwrap();
    let indefinite = SquareMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
    let g = lscv_matrix_objective(&indefinite, &x2, ExecMode::Sequential).unwrap();
    ensure(g == PENALTY, || format!("non-PD matrix scored {g}"))?;

    let x1 = gaussian_dataset(300, 1, 11).unwrap();
    let found = lscv_matrix_bandwidth(&x1, &LscvMatrixConfig::default()).unwrap();
    let h_opt = found.matrix().unwrap().get(0, 0).sqrt();
    let h0 = lscv_matrix_start(&x1).unwrap().get(0, 0);
    let g_of = |h: f64| naive_lscv_matrix(&SquareMatrix::new(1, vec![h * h]).unwrap(), &x1);
    let (lo, hi, steps) = (h0 / 8.0, h0 * 8.0, 2000);
    let mut best = (f64::INFINITY, lo);
    for i in 0..=steps {
        let h = lo + (hi - lo) * i as f64 / steps as f64;
        let g = g_of(h);
        if g < best.0 {
            best = (g, h);
        }
    }
    let r = rel(h_opt, best.1);
    ensure(r <= 0.05, || {
        format!("optimizer h {h_opt}, scan h {}", best.1)
    })?;
    Ok(format!(
        "objective max rel {worst:.1e}; penalty ok; d=1 optimum {h_opt:.5} vs scan {:.5}",
        best.1
    ))
}

// 8 ------------------------------------------------------------------------

fn kde_aqp_checks() -> Check {
    let x = gaussian_dataset(1000, 1, 21).unwrap();
    let h = plugin_h(&x);
    let model = KdeModel::new(x.clone(), Bandwidth::Scalar(h)).unwrap();
    let (lo, hi) = x.row_range(0);
    let (a, b) = (lo - 8.0 * h, hi + 8.0 * h);
    let nodes = 10_000;
    let pts: Vec<[f64; 1]> = (0..nodes)
        .map(|i| [a + (b - a) * i as f64 / (nodes - 1) as f64])
        .collect();
    let ys = kde_eval_batch(&model, &pts, ExecMode::Sequential).unwrap();
    let step = (b - a) / (nodes - 1) as f64;
    let integral = step * (ys.iter().sum::<f64>() - 0.5 * (ys[0] + ys[nodes - 1]));
    ensure((0.995..=1.005).contains(&integral), || {
        format!("integral {integral}")
    })?;

    let inf = f64::INFINITY;
    let full = aqp_count(&model, &RangeQuery::new(Aggregate::Count, 0, -inf, inf)).unwrap();
    ensure(rel(full, 1000.0) <= 0.01, || {
        format!("full-domain count {full}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let u: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
    let exact = u.iter().filter(|&&v| (0.0..=0.5).contains(&v)).count() as f64;
    let ux = Dataset::univariate(&u).unwrap();
    let um = KdeModel::new(ux.clone(), Bandwidth::Scalar(plugin_h(&ux))).unwrap();
    let half = aqp_count(&um, &RangeQuery::new(Aggregate::Count, 0, 0.0, 0.5)).unwrap();
    ensure(rel(half, exact) <= 0.03, || {
        format!("half-range count {half} vs {exact}")
    })?;

    let x2 = gaussian_dataset(400, 2, 5).unwrap();
    let h2 = lscv_matrix_start(&x2).unwrap();
    let m2 = KdeModel::new(x2, Bandwidth::Matrix(h2)).unwrap();
    let q2 = RangeQuery::new(Aggregate::Count, 0, -inf, inf)
        .with_second(1, -inf, inf)
        .with_resolution(128);
    let plane = aqp_count(&m2, &q2).unwrap();
    ensure(rel(plane, 400.0) <= 0.01, || {
        format!("2-d plane count {plane}")
    })?;
    Ok(format!(
        "integral {integral:.5}; count {full:.2}/1000; half {half:.1} vs {exact}; plane {plane:.2}/400"
    ))
}

// 9 ------------------------------------------------------------------------

fn determinism() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let a: Vec<f64> = (0..300_001).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let af: Vec<f32> = a.iter().map(|&v| v as f32).collect();
    for chunk in [4, 64, 1024] {
        let seq = ReductionPlan::new(chunk, ExecMode::Sequential).unwrap();
        let base = reduce_sum(&a, &seq).unwrap();
        let base_f = reduce_sum(&af, &seq).unwrap();
        for mode in [
            ExecMode::Vectorized,
            ExecMode::Threaded(3),
            ExecMode::Threaded(8),
        ] {
            let plan = ReductionPlan::new(chunk, mode).unwrap();
            let got = reduce_sum(&a, &plan).unwrap();
            let got_f = reduce_sum(&af, &plan).unwrap();
            ensure(
                got.to_bits() == base.to_bits() && got_f.to_bits() == base_f.to_bits(),
                || format!("chunk {chunk} {mode}: reduction differs"),
            )?;
        }
    }
    let x1 = gaussian_dataset(2000, 1, 1).unwrap();
    let x3 = gaussian_dataset(300, 3, 2).unwrap();
    let x2 = gaussian_dataset(150, 2, 3).unwrap();
    let select = |mode: ExecMode| -> (f64, f64, SquareMatrix) {
        let p = plugin_bandwidth(&x1, mode).unwrap().scalar().unwrap();
        let cfg = LscvHConfig {
            exec: mode,
            ..Default::default()
        };
        let l = lscv_h_bandwidth(&x3, &cfg).unwrap().scalar().unwrap();
        let mcfg = LscvMatrixConfig {
            exec: mode,
            ..Default::default()
        };
        let m = lscv_matrix_bandwidth(&x2, &mcfg)
            .unwrap()
            .matrix()
            .unwrap()
            .clone();
        (p, l, m)
    };
    let base = select(ExecMode::Sequential);
    for mode in [ExecMode::Vectorized, ExecMode::Threaded(4)] {
        let (p, l, m) = select(mode);
        ensure(rel(p, base.0) <= 1e-12 && rel(l, base.1) <= 1e-12, || {
            format!("{mode}: scalar bandwidths differ")
        })?;
        ensure(m.max_abs_diff(&base.2) <= 1e-12 * base.2.max_abs(), || {
            format!("{mode}: matrix bandwidths differ")
        })?;
    }
    Ok("reductions bit-identical in f32 and f64; bandwidths agree across modes".into())
}

// 10 -----------------------------------------------------------------------

fn time_plugin(x: &Dataset, mode: ExecMode) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..2 {
        let start = Instant::now();
        plugin_bandwidth(x, mode).unwrap();
        best = best.min(start.elapsed().as_secs_f64());
    }
    best
}

fn soft_performance(gate: bool) -> Check {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let sizes: &[usize] = if gate || cores >= 4 {
        &[4096, 8192, 16384, 32768]
    } else {
        &[4096, 8192]
    };
    let mode = ExecMode::Threaded(cores.max(2));
    let mut speedups = Vec::new();
    for &n in sizes {
        let x = gaussian_dataset(n, 1, 0).unwrap();
        let seq = time_plugin(&x, ExecMode::Sequential);
        let par = time_plugin(&x, mode);
        speedups.push((n, seq / par));
    }
    let summary: Vec<String> = speedups
        .iter()
        .map(|(n, s)| format!("n={n}: {s:.2}x"))
        .collect();
    let summary = format!("{cores} core(s), {mode}; {}", summary.join(", "));
    let last = speedups.last().unwrap().1;
    let monotone = speedups.windows(2).all(|w| w[1].1 >= w[0].1);
    let met = cores >= 4 && sizes.len() == 4 && last >= 2.0 && monotone;
    if met {
        Ok(summary)
    } else {
        Err(format!("target not met ({summary})"))
    }
}

// 11 -----------------------------------------------------------------------

fn single_precision_study() -> Check {
    let plan = ReductionPlan::default();
    let mut wins = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 5000);
        let a: Vec<f32> = (0..1_000_000).map(|_| rng.gen::<f32>()).collect();
        // Kahan-compensated double sum of the exact f32 inputs
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for &v in &a {
            let y = f64::from(v) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        let mut naive = 0.0f32;
        for &v in &a {
            naive += v;
        }
        let tree = reduce_sum(&a, &plan).unwrap();
        let (e_tree, e_naive) = (
            (f64::from(tree) - sum).abs(),
            (f64::from(naive) - sum).abs(),
        );
        if e_tree <= e_naive {
            wins += 1;
        }
    }
    ensure(wins >= 95, || {
        format!("tree error <= naive error in only {wins}/100 trials")
    })?;
    Ok(format!("tree error <= naive error in {wins}/100 trials"))
}

fn run(id: u32, title: &str, gating: bool, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail, ok) = match (&outcome, gating) {
        (Ok(d), _) => ("PASS", d.clone(), true),
        (Err(e), true) => ("FAIL", e.clone(), false),
        (Err(e), false) => ("INFO", e.clone(), true),
    };
    println!("{tag} [{id:>2}] {title}: {detail} ({secs:.2} s)");
    ok
}

fn main() {
    // `cargo test -- --list` and filters pass arguments; nothing to list here
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut ok = true;
    ok &= run(1, "reduction oracle", true, reduction_oracle);
    ok &= run(2, "pairwise-sum oracle", true, pairwise_oracle);
    ok &= run(3, "triangular index bijection", true, triangular_bijection);
    ok &= run(4, "quadratic-form oracle", true, quadratic_oracle);
    ok &= run(
        5,
        "precomputed vs direct scalar cross-validation",
        true,
        lscv_equivalence,
    );
    ok &= run(6, "plug-in equivariance and rate", true, plugin_properties);
    ok &= run(
        7,
        "matrix cross-validation objective",
        true,
        lscv_matrix_checks,
    );
    ok &= run(
        8,
        "density normalisation and aggregates",
        true,
        kde_aqp_checks,
    );
    ok &= run(9, "determinism across execution modes", true, determinism);
    let gate = std::env::var("KDEBAND_PERF_GATE").is_ok_and(|v| v == "1");
    ok &= run(10, "threaded plug-in speedup (soft)", gate, || {
        soft_performance(gate)
    });
    ok &= run(
        11,
        "single-precision reduction error",
        true,
        single_precision_study,
    );
    if !ok {
        println!("acceptance: FAILED");
        std::process::exit(1);
    }
    println!("acceptance: all gating criteria passed");
}
