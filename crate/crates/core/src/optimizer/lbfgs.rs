//! Limited-memory BFGS with a strong-Wolfe line search.

use std::collections::VecDeque;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct LbfgsOptions {
    /// Number of correction pairs kept.
    pub memory: usize,
    /// Stop when `max |g_i|` falls to this value.
    pub grad_tolerance: f64,
    /// Stop when `(f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1)` falls to this value.
    pub rel_f_tolerance: f64,
    pub max_iterations: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 10,
            grad_tolerance: 1e-5,
            rel_f_tolerance: 2.2e-9,
            max_iterations: 15000,
            c1: 1e-4,
            c2: 0.9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    FunctionTolerance,
    MaxIterations,
    LineSearchFailed,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(self, Termination::GradientTolerance | Termination::FunctionTolerance)
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Objective at the start point and at every accepted iterate.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
}

impl Minimum {
    pub fn converged(&self) -> bool {
        self.termination.converged()
    }
}

const MAX_LINE_SEARCH_EVALS: usize = 60;

/// Minimizes `objective`, which returns the value and gradient at a point.
///
/// An error from the objective at `x0` is returned. Errors and non-finite values
/// at trial points inside the line search shrink the step instead.
pub fn minimize<F>(mut objective: F, x0: &[f64], opts: &LbfgsOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut x = x0.to_vec();
    let (mut f, mut g) = objective(&x)?;
    let mut trace = vec![f];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;

    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Ok(finish(x, f, g, trace, 0, Termination::LineSearchFailed));
    }

    loop {
        if max_abs(&g) <= opts.grad_tolerance {
            return Ok(finish(x, f, g, trace, iterations, Termination::GradientTolerance));
        }
        if iterations >= opts.max_iterations {
            return Ok(finish(x, f, g, trace, iterations, Termination::MaxIterations));
        }

        let mut d = two_loop(&g, &pairs);
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            // curvature information went stale; fall back to steepest descent
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let initial_step = if pairs.is_empty() {
            (1.0 / norm(&d)).min(1.0)
        } else {
            1.0
        };

        let Some(step) = line_search(&mut objective, &x, f, slope, &d, initial_step, opts) else {
            return Ok(finish(x, f, g, trace, iterations, Termination::LineSearchFailed));
        };
        iterations += 1;

        let s: Vec<f64> = d.iter().map(|di| step.alpha * di).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * dot(&y, &y) {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }

        let f_prev = f;
        x = step.x;
        f = step.f;
        g = step.g;
        trace.push(f);

        if max_abs(&g) <= opts.grad_tolerance {
            return Ok(finish(x, f, g, trace, iterations, Termination::GradientTolerance));
        }
        let scale = f_prev.abs().max(f.abs()).max(1.0);
        if (f_prev - f) / scale <= opts.rel_f_tolerance {
            return Ok(finish(x, f, g, trace, iterations, Termination::FunctionTolerance));
        }
    }
}

fn finish(
    x: Vec<f64>,
    value: f64,
    gradient: Vec<f64>,
    trace: Vec<f64>,
    iterations: usize,
    termination: Termination,
) -> Minimum {
    Minimum {
        x,
        value,
        gradient,
        trace,
        iterations,
        termination,
    }
}

/// Search direction `-H g` from the stored correction pairs.
fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        axpy(-a, y, &mut q);
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        axpy(a - b, s, &mut q);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

struct Step {
    alpha: f64,
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Probe {
    alpha: f64,
    f: f64,
    slope: f64,
}

fn line_search<F>(
    objective: &mut F,
    x: &[f64],
    f0: f64,
    slope0: f64,
    d: &[f64],
    alpha0: f64,
    opts: &LbfgsOptions,
) -> Option<Step>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut evals = 0;
    let mut eval = |alpha: f64| -> (Step, f64) {
        let xt: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        let (f, g) = match objective(&xt) {
            Ok((f, g)) if f.is_finite() && g.iter().all(|v| v.is_finite()) => (f, g),
            _ => (f64::INFINITY, vec![f64::NAN; xt.len()]),
        };
        let slope = dot(&g, d);
        (Step { alpha, x: xt, f, g }, slope)
    };
    let armijo = |alpha: f64, f: f64| f <= f0 + opts.c1 * alpha * slope0;

    let mut prev = Probe {
        alpha: 0.0,
        f: f0,
        slope: slope0,
    };
    let mut best: Option<Step> = None;
    let mut alpha = alpha0;

    // bracketing phase
    let (mut lo, mut hi) = loop {
        if evals >= MAX_LINE_SEARCH_EVALS {
            return best;
        }
        evals += 1;
        let (step, slope) = eval(alpha);
        let probe = Probe {
            alpha,
            f: step.f,
            slope,
        };
        if !armijo(alpha, step.f) || (evals > 1 && step.f >= prev.f) {
            break (prev, probe);
        }
        if slope.abs() <= -opts.c2 * slope0 {
            return Some(step);
        }
        if slope >= 0.0 {
            best = Some(step);
            break (probe, prev);
        }
        best = Some(step);
        prev = probe;
        alpha *= 2.0;
        if alpha > 1e20 {
            return best;
        }
    };

    // zoom phase: `lo` satisfies sufficient decrease and has the lowest value seen
    while evals < MAX_LINE_SEARCH_EVALS {
        let width = (hi.alpha - lo.alpha).abs();
        if width <= f64::EPSILON * hi.alpha.abs().max(lo.alpha.abs()) {
            break;
        }
        let alpha = interpolate(lo, hi);
        evals += 1;
        let (step, slope) = eval(alpha);
        let probe = Probe {
            alpha,
            f: step.f,
            slope,
        };
        if !armijo(alpha, step.f) || step.f >= lo.f {
            hi = probe;
        } else {
            if slope.abs() <= -opts.c2 * slope0 {
                return Some(step);
            }
            if slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = probe;
            best = Some(step);
        }
    }
    // fall back to the best point satisfying sufficient decrease
    best.filter(|s| s.alpha > 0.0 && s.f < f0)
}

/// Safeguarded cubic interpolation between two probes, bisecting when unusable.
fn interpolate(lo: Probe, hi: Probe) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let mid = 0.5 * (a + b);
    if !(lo.f.is_finite() && hi.f.is_finite() && lo.slope.is_finite() && hi.slope.is_finite()) {
        return mid;
    }
    let d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = hi.slope - lo.slope + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let t = b - (b - a) * (hi.slope + d2 - d1) / denom;
    let (low, high) = (a.min(b), a.max(b));
    let margin = 0.1 * (high - low);
    if t.is_finite() && t >= low + margin && t <= high - margin {
        t
    } else {
        mid
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let f = x.iter().map(|v| (v - 3.0).powi(2)).sum();
        let g = x.iter().map(|v| 2.0 * (v - 3.0)).collect();
        Ok((f, g))
    }

    fn rosenbrock(x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        Ok((f, g))
    }

    fn tight() -> LbfgsOptions {
        LbfgsOptions {
            grad_tolerance: 1e-10,
            rel_f_tolerance: 1e-16,
            ..LbfgsOptions::default()
        }
    }

    fn non_increasing(trace: &[f64]) -> bool {
        trace.windows(2).all(|w| w[1] <= w[0])
    }

    #[test]
    fn quadratic_converges_to_threes() {
        let r = minimize(quadratic, &[0.0; 5], &LbfgsOptions::default()).unwrap();
        assert!(r.converged());
        assert!(r.x.iter().all(|v| (v - 3.0).abs() < 1e-8), "{:?}", r.x);
        assert!(non_increasing(&r.trace));
    }

    #[test]
    fn rosenbrock_converges_from_standard_start() {
        let r = minimize(rosenbrock, &[-1.2, 1.0], &tight()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
        assert!(non_increasing(&r.trace));
        assert_eq!(r.trace.len(), r.iterations + 1);
        assert_eq!(*r.trace.last().unwrap(), r.value);
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let opts = LbfgsOptions {
            max_iterations: 3,
            ..tight()
        };
        let r = minimize(rosenbrock, &[-1.2, 1.0], &opts).unwrap();
        assert_eq!(r.iterations, 3);
        assert_eq!(r.termination, Termination::MaxIterations);
        assert!(!r.converged());
    }

    #[test]
    fn non_finite_region_shrinks_step() {
        // log barrier: infinite for x <= 0, minimum at x = 1
        let f = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let v = x[0];
            if v <= 0.0 {
                return Ok((f64::NAN, vec![f64::NAN]));
            }
            Ok((v - v.ln(), vec![1.0 - 1.0 / v]))
        };
        let r = minimize(f, &[10.0], &tight()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-6, "{:?}", r.x);
        assert!(non_increasing(&r.trace));
    }

    #[test]
    fn start_at_minimum_stops_immediately() {
        let r = minimize(quadratic, &[3.0; 2], &LbfgsOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.trace, vec![0.0]);
        assert!(r.converged());
    }

    #[test]
    fn objective_error_at_start_propagates() {
        let f = |_: &[f64]| -> Result<(f64, Vec<f64>)> { Err(crate::Error::EmptyGraph) };
        assert!(minimize(f, &[0.0], &LbfgsOptions::default()).is_err());
    }
}
