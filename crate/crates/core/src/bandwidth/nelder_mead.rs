/// Simplex coefficients and stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Stop once `f_worst − f_best ≤ tolerance · |f_best|`.
    pub tolerance: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-7,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimises `f` from `start`. Vertex `i + 1` of the initial simplex is
/// `start` moved by `steps[i]` along coordinate `i`.
///
/// The best vertex never gets worse, so the result is no worse than `start`.
pub fn nelder_mead<F>(
    mut f: F,
    start: &[f64],
    steps: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(start.len(), steps.len(), "one step per coordinate");
    let m = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + 1);
    simplex.push((start.to_vec(), eval(start)));
    for i in 0..m {
        let mut x = start.to_vec();
        x[i] += steps[i];
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    let along = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };
    loop {
        // stable sort keeps the incumbent first among equal values
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[m].1);
        if worst - best <= opts.tolerance * best.abs() {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; m];
        for (x, _) in &simplex[..m] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / m as f64;
            }
        }
        let xw = simplex[m].0.clone();
        let second_worst = simplex[m - 1].1;

        let xr = along(&centroid, &xw, -opts.reflection);
        let fr = eval(&xr);
        if fr < best {
            let xe = along(&centroid, &xw, -opts.expansion);
            let fe = eval(&xe);
            simplex[m] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second_worst {
            simplex[m] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let xc = along(&centroid, &xr, opts.contraction);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(&centroid, &xw, opts.contraction);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(worst) {
            simplex[m] = (xc, fc);
            continue;
        }
        let x0 = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = along(&x0, &vertex.0, opts.shrink);
            let v = eval(&x);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        value,
        iterations,
        evaluations,
        converged,
    }
}
