//! Box-bounded Nelder–Mead simplex search.
//!
//! Trial points are projected onto the box. Non-finite objective values are
//! treated as `+inf`, so the search walks away from regions where the model
//! cannot be evaluated.

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub max_iters: usize,
    /// Stop once `f_worst - f_best` is at most `f_tol + f_rel_tol * |f_best|`...
    pub f_tol: f64,
    pub f_rel_tol: f64,
    /// ...and every vertex is within this distance (max norm) of the best.
    pub x_tol: f64,
    /// Initial edge length per coordinate.
    pub initial_step: Vec<f64>,
    /// After convergence, rebuild the simplex around the best vertex and
    /// search again, at most this many times. A restart that gains no more
    /// than `f_tol` ends the search.
    pub max_restarts: usize,
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    /// Objective at the start point.
    pub f_start: f64,
    pub iters: usize,
    pub evals: usize,
    pub converged: bool,
    /// Best objective after each iteration.
    pub best_history: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(lo, hi);
    }
}

/// Point `centroid + coef * (toward - centroid)`, projected.
fn along(centroid: &[f64], toward: &[f64], coef: f64, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = centroid.iter().zip(toward).map(|(c, t)| c + coef * (t - c)).collect();
    project(&mut x, lower, upper);
    x
}

/// Start vertex plus one vertex per axis, stepping inward when the start sits
/// near the upper face.
fn build_simplex(
    vertices: &mut Vec<(Vec<f64>, f64)>,
    x0: Vec<f64>,
    f0: f64,
    step: &[f64],
    lower: &[f64],
    upper: &[f64],
    eval: &mut impl FnMut(&[f64]) -> f64,
) {
    for j in 0..x0.len() {
        let mut x = x0.clone();
        if x[j] + step[j] <= upper[j] {
            x[j] += step[j];
        } else {
            x[j] -= step[j];
        }
        project(&mut x, lower, upper);
        let f = eval(&x);
        vertices.push((x, f));
    }
    vertices.insert(0, (x0, f0));
}

pub fn minimize<F>(mut objective: F, start: &[f64], lower: &[f64], upper: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = start.len();
    assert!(dim > 0 && lower.len() == dim && upper.len() == dim && opts.initial_step.len() == dim);
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        let f = objective(x);
        if f.is_finite() { f } else { f64::INFINITY }
    };

    let mut x0 = start.to_vec();
    project(&mut x0, lower, upper);
    let f_start = eval(&x0);
    let mut vertices = Vec::with_capacity(dim + 1);
    build_simplex(&mut vertices, x0, f_start, &opts.initial_step, lower, upper, &mut eval);

    let mut best_history = Vec::with_capacity(opts.max_iters);
    let mut iters = 0;
    let mut converged = false;
    let mut restarts = 0;
    let mut f_at_restart = f64::INFINITY;
    // Stable sort: among equal values the older vertex stays ahead.
    let sort = |v: &mut Vec<(Vec<f64>, f64)>| v.sort_by(|a, b| a.1.total_cmp(&b.1));
    sort(&mut vertices);

    while iters < opts.max_iters {
        let f_best = vertices[0].1;
        let f_worst = vertices[dim].1;
        let spread = f_worst - f_best;
        let diameter = vertices[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&vertices[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_best.is_finite() && spread <= opts.f_tol + opts.f_rel_tol * f_best.abs() && diameter <= opts.x_tol {
            if restarts >= opts.max_restarts || f_at_restart - f_best <= opts.f_tol {
                converged = true;
                break;
            }
            restarts += 1;
            f_at_restart = f_best;
            let (x, f) = vertices.swap_remove(0);
            vertices.clear();
            build_simplex(&mut vertices, x, f, &opts.initial_step, lower, upper, &mut eval);
            sort(&mut vertices);
            continue;
        }
        iters += 1;

        let mut centroid = vec![0.0; dim];
        for (x, _) in &vertices[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let worst = vertices[dim].0.clone();
        let f_second = vertices[dim - 1].1;

        let xr = along(&centroid, &worst, -REFLECT, lower, upper);
        let fr = eval(&xr);
        let mut shrink = false;
        if fr < f_best {
            let xe = along(&centroid, &xr, EXPAND, lower, upper);
            let fe = eval(&xe);
            vertices[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < f_second {
            vertices[dim] = (xr, fr);
        } else if fr < f_worst {
            let xc = along(&centroid, &xr, CONTRACT, lower, upper);
            let fc = eval(&xc);
            if fc <= fr {
                vertices[dim] = (xc, fc);
            } else {
                shrink = true;
            }
        } else {
            let xc = along(&centroid, &worst, CONTRACT, lower, upper);
            let fc = eval(&xc);
            if fc < f_worst {
                vertices[dim] = (xc, fc);
            } else {
                shrink = true;
            }
        }
        if shrink {
            let best = vertices[0].0.clone();
            for v in vertices.iter_mut().skip(1) {
                let x = along(&best, &v.0, SHRINK, lower, upper);
                let f = eval(&x);
                *v = (x, f);
            }
        }
        sort(&mut vertices);
        best_history.push(vertices[0].1);
    }

    let (x, f) = vertices.swap_remove(0);
    SimplexResult {
        x,
        f,
        f_start,
        iters,
        evals,
        converged,
        best_history,
    }
}
