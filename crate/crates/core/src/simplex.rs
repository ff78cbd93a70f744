//! Nelder–Mead downhill simplex with optional box bounds.
//!
//! Bounded problems are handled by projecting every trial point onto the
//! box before evaluation, so the objective is never called outside it.

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Stop once `f_worst - f_best <= ftol_rel * |f_best|` and every vertex is
    /// within `xtol_rel` (relative) of the best one.
    pub ftol_rel: f64,
    pub xtol_rel: f64,
    pub max_iters: usize,
    /// Relative size of the initial simplex edges.
    pub initial_step: f64,
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Number of times the search is restarted from its best vertex.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { ftol_rel: 1e-12, xtol_rel: 1e-10, max_iters: 2000, initial_step: 0.05, bounds: None, restarts: 4 }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn project(x: &mut [f64], bounds: Option<&[(f64, f64)]>) {
    if let Some(b) = bounds {
        for (v, &(lo, hi)) in x.iter_mut().zip(b) {
            *v = v.clamp(lo, hi);
        }
    }
}

struct Search<'a, F> {
    f: F,
    bounds: Option<&'a [(f64, f64)]>,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Search<'_, F> {
    fn eval(&mut self, x: &mut [f64]) -> f64 {
        project(x, self.bounds);
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn run(&mut self, x0: &[f64], opts: &SimplexOptions) -> SimplexResult {
        let dim = x0.len();
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        let mut start = x0.to_vec();
        project(&mut start, self.bounds);
        pts.push(start.clone());
        for i in 0..dim {
            let mut p = start.clone();
            let step = if p[i] != 0.0 { opts.initial_step * p[i] } else { 2.5e-4 };
            p[i] += step;
            if let Some(b) = self.bounds {
                // step inward if the edge would leave the box
                if p[i] > b[i].1 {
                    p[i] = start[i] - step.abs();
                }
                if p[i] < b[i].0 {
                    p[i] = start[i] + step.abs();
                }
            }
            pts.push(p);
        }
        let mut vals: Vec<f64> = Vec::with_capacity(dim + 1);
        for p in pts.iter_mut() {
            vals.push(self.eval(p));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_iters {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            let f_spread = vals[dim] - vals[0];
            let x_spread = pts[1..]
                .iter()
                .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs() / (1.0 + b.abs())))
                .fold(0.0, f64::max);
            if vals[0].is_finite()
                && (f_spread <= opts.ftol_rel * vals[0].abs() || f_spread <= f64::MIN_POSITIVE)
                && x_spread <= opts.xtol_rel
            {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> =
                (0..dim).map(|j| pts[..dim].iter().map(|p| p[j]).sum::<f64>() / dim as f64).collect();
            let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[dim]).map(|(c, w)| c + t * (c - w)).collect() };

            let mut xr = along(1.0);
            let fr = self.eval(&mut xr);
            if fr < vals[0] {
                let mut xe = along(2.0);
                let fe = self.eval(&mut xe);
                if fe < fr {
                    pts[dim] = xe;
                    vals[dim] = fe;
                } else {
                    pts[dim] = xr;
                    vals[dim] = fr;
                }
                continue;
            }
            if fr < vals[dim - 1] {
                pts[dim] = xr;
                vals[dim] = fr;
                continue;
            }
            let (mut xc, outside) = if fr < vals[dim] { (along(0.5), true) } else { (along(-0.5), false) };
            let fc = self.eval(&mut xc);
            if (outside && fc <= fr) || (!outside && fc < vals[dim]) {
                pts[dim] = xc;
                vals[dim] = fc;
                continue;
            }
            // shrink toward the best vertex
            let best = pts[0].clone();
            for i in 1..=dim {
                let mut p: Vec<f64> = best.iter().zip(&pts[i]).map(|(b, v)| b + 0.5 * (v - b)).collect();
                vals[i] = self.eval(&mut p);
                pts[i] = p;
            }
        }

        let best = (0..=dim).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
        SimplexResult { x: pts[best].clone(), fx: vals[best], iterations, evaluations: self.evaluations, converged }
    }
}

/// Minimizes `f` starting from `x0`. The returned value is never worse than
/// `f(x0)` (after projection onto the bounds).
pub fn minimize<F>(f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let mut search = Search { f, bounds: opts.bounds.as_deref(), evaluations: 0 };
    let mut start = x0.to_vec();
    let f0 = search.eval(&mut start);
    let mut best = search.run(&start, opts);
    if f0 < best.fx {
        best.x = start;
        best.fx = f0;
    }
    let mut total_iters = best.iterations;
    for _ in 0..opts.restarts {
        let next = search.run(&best.x, opts);
        total_iters += next.iterations;
        let improved = best.fx - next.fx;
        let done = !(improved > opts.ftol_rel * best.fx.abs());
        if next.fx < best.fx {
            best.x = next.x;
            best.fx = next.fx;
            best.converged = next.converged;
        }
        if done {
            break;
        }
    }
    best.iterations = total_iters;
    best.evaluations = search.evaluations;
    best
}
