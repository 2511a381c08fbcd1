//! Derivative-free search primitives: golden-section line search, a
//! Nelder–Mead simplex with dimension-adaptive coefficients, and a
//! coordinate-descent polish pass. All deterministic for fixed inputs.

const INVPHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of `f` on [a, b] with a fixed iteration count.
/// Returns (argmax, max).
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Golden-section minimization on [a, b].
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let (x, v) = golden_max(|t| -f(t), a, b, iters);
    (x, -v)
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Nelder–Mead minimization with the dimension-adaptive coefficients of
/// Gao & Han; the simplex starts at `x0` stepping `step` along each axis.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], step: f64, maxfev: usize) -> NmResult {
    nelder_mead_stop(f, x0, step, maxfev, f64::NEG_INFINITY)
}

/// [`nelder_mead`] with an early exit once the best value drops below
/// `stop_below` (feasibility searches only need to clear a threshold).
pub fn nelder_mead_stop<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    maxfev: usize,
    stop_below: f64,
) -> NmResult {
    let dim = x0.len();
    if dim == 0 {
        let value = f(x0);
        return NmResult { x: x0.to_vec(), value, evals: 1 };
    }
    let nd = dim as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nd;
    let gamma = (0.75 - 1.0 / (2.0 * nd)).max(0.1);
    let delta = (1.0 - 1.0 / nd).max(0.1);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += if x[i].abs() > 1.0 { step * x[i].abs() } else { step };
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

    while evals < maxfev && simplex[0].1 >= stop_below {
        let worst = simplex[dim].clone();
        let mut centroid = vec![0.0; dim];
        for (x, _) in simplex.iter().take(dim) {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / nd;
            }
        }
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst.0)
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let fr = eval(&reflect, &mut evals);

        if fr < simplex[0].1 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(c, r)| c + beta * (r - c))
                .collect();
            let fe = eval(&expand, &mut evals);
            simplex[dim] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflect, fr);
        } else {
            let outside = fr < worst.1;
            let anchor = if outside { &reflect } else { &worst.0 };
            let contract: Vec<f64> = centroid
                .iter()
                .zip(anchor)
                .map(|(c, a)| c + gamma * (a - c))
                .collect();
            let fcv = eval(&contract, &mut evals);
            if fcv < fr.min(worst.1) {
                simplex[dim] = (contract, fcv);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = best
                        .iter()
                        .zip(&entry.0)
                        .map(|(b, x)| b + delta * (x - b))
                        .collect();
                    let fv = eval(&shrunk, &mut evals);
                    *entry = (shrunk, fv);
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

        let spread = simplex[dim].1 - simplex[0].1;
        if spread.abs() < 1e-14 * (1.0 + simplex[0].1.abs()) {
            break;
        }
    }

    NmResult { x: simplex[0].0.clone(), value: simplex[0].1, evals }
}

/// One-at-a-time golden-section polish around `x0`; each pass sweeps every
/// coordinate on a bracket of half-width `h` and the bracket shrinks with
/// the observed steps.
pub fn coordinate_descent<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    h0: f64,
    passes: usize,
    line_iters: usize,
) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut best = f(&x);
    let mut h = h0;
    for _ in 0..passes {
        let mut moved = 0.0f64;
        for i in 0..x.len() {
            let xi = x[i];
            let (t, v) = golden_min(
                |t| {
                    let mut y = x.clone();
                    y[i] = t;
                    f(&y)
                },
                xi - h,
                xi + h,
                line_iters,
            );
            if v < best {
                best = v;
                moved = moved.max((t - xi).abs());
                x[i] = t;
            }
        }
        h = (moved * 2.0).max(h * 0.25);
        if h < 1e-13 {
            break;
        }
    }
    (x, best)
}
