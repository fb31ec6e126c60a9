//! Independent reference computations shared by the integration tests.
//!
//! The forward model here is written straight from its definition with
//! nalgebra (no shortcuts such as `B = U W Uᵀ`), so agreement with the library
//! is a real cross-check rather than a restatement.

#![allow(dead_code)]

use latentstep::{AdjacencyMatrix, LatentGraph, LatentStepModel, Matrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut impl Rng, rows: usize, cols: usize, half_width: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-half_width..half_width))
}

/// Symmetric non-negative graph with some exact zeros and no isolated node.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> AdjacencyMatrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let w = if rng.gen_bool(0.35) {
                0.0
            } else {
                rng.gen_range(0.1..3.0)
            };
            m.row_mut(i)[j] = w;
            m.row_mut(j)[i] = w;
        }
    }
    // a ring guarantees every node has an edge
    for i in 0..n {
        let j = (i + 1) % n;
        if m[(i, j)] == 0.0 {
            m.row_mut(i)[j] = 1.0;
            m.row_mut(j)[i] = 1.0;
        }
    }
    AdjacencyMatrix::new(m).unwrap()
}

/// Strictly positive symmetric latent graph.
pub fn random_latent(rng: &mut impl Rng, m: usize) -> LatentGraph {
    let mut w = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let x = rng.gen_range(0.05..1.0);
            w.row_mut(i)[j] = x;
            w.row_mut(j)[i] = x;
        }
    }
    LatentGraph::fixed(w).unwrap()
}

pub fn dm(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn row_normalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    out
}

/// `W = exp(S) / Σ exp(S)` with `S = W_p + W_pᵀ`.
pub fn ref_latent(wp: &Matrix) -> DMatrix<f64> {
    let wp = dm(wp);
    let e = (&wp + wp.transpose()).map(f64::exp);
    let total = e.sum();
    e / total
}

/// `V = colsoftmax(V_p) · diag(rowsums(W))`.
pub fn ref_bipartite(vp: &Matrix, w: &DMatrix<f64>) -> DMatrix<f64> {
    let mut u = dm(vp).map(f64::exp);
    for mut col in u.column_iter_mut() {
        let s = col.sum();
        col /= s;
    }
    let d: Vec<f64> = (0..w.nrows()).map(|i| w.row(i).sum()).collect();
    u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d))
}

/// `B = V D_W⁻¹ W D_W⁻¹ Vᵀ`.
pub fn ref_reconstruction(v: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let dinv: Vec<f64> = (0..w.nrows()).map(|i| 1.0 / w.row(i).sum()).collect();
    let dinv = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(dinv));
    v * &dinv * w * &dinv * v.transpose()
}

/// `π(V) π(W) π(Vᵀ)`.
pub fn ref_transition(v: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    row_normalize(v) * row_normalize(w) * row_normalize(&v.transpose())
}

/// Cross-entropy between normalized `a` and normalized `b`, skipping zero data entries.
pub fn ref_data_term(a: &AdjacencyMatrix, b: &DMatrix<f64>) -> f64 {
    let a = dm(a.weights());
    let (sa, sb) = (a.sum(), b.sum());
    a.iter()
        .zip(b.iter())
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, y)| -(x / sa) * (y / sb).ln())
        .sum()
}

pub fn ref_loss(model: &LatentStepModel, a: &AdjacencyMatrix) -> f64 {
    let p = model.params();
    let w = match model.fixed_latent() {
        Some(w) => dm(w.weights()),
        None => ref_latent(&p.wp),
    };
    let v = ref_bipartite(&p.vp, &w);
    let b = ref_reconstruction(&v, &w);
    let x = p.to_vec();
    let penalty = model.reg_coefficient() * x.iter().map(|t| t * t).sum::<f64>() / x.len() as f64;
    ref_data_term(a, &b) + penalty
}

pub fn entropy_of(a: &AdjacencyMatrix) -> f64 {
    let s = a.total_mass();
    a.weights()
        .as_slice()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -(x / s) * (x / s).ln())
        .sum()
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn central_differences(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut x = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + h;
            let up = f(&x);
            x[i] = orig - h;
            let down = f(&x);
            x[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Fourth-order stencil; truncation error is O(h⁴), so a step near 1e-3 keeps
/// rounding noise far below what plain central differences manage.
pub fn five_point_differences(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut x = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = x[i];
            let mut at = |d: f64| {
                x[i] = orig + d;
                f(&x)
            };
            let d = at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h);
            x[i] = orig;
            d / (12.0 * h)
        })
        .collect()
}

/// Entries below this magnitude are compared absolutely rather than relatively;
/// a central difference at step 1e-5 cannot resolve them any better.
pub const RELATIVE_FLOOR: f64 = 1e-4;

pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(RELATIVE_FLOOR))
        .fold(0.0, f64::max)
}

/// Relative error of the analytic gradient against central differences of the loss.
pub fn gradient_error(model: &LatentStepModel, a: &AdjacencyMatrix, h: f64) -> f64 {
    gradient_error_with(model, a, h, central_differences)
}

/// Same, against the five-point stencil.
pub fn gradient_error_5pt(model: &LatentStepModel, a: &AdjacencyMatrix, h: f64) -> f64 {
    gradient_error_with(model, a, h, five_point_differences)
}

type Stencil = fn(&mut dyn FnMut(&[f64]) -> f64, &[f64], f64) -> Vec<f64>;

fn gradient_error_with(model: &LatentStepModel, a: &AdjacencyMatrix, h: f64, stencil: Stencil) -> f64 {
    let analytic = model.loss_gradient(a).unwrap().to_vec();
    let mut probe = model.clone();
    let mut f = |x: &[f64]| {
        probe.set_params_from_slice(x);
        probe.loss(a).unwrap()
    };
    let numeric = stencil(&mut f, &model.params().to_vec(), h);
    max_relative_error(&analytic, &numeric)
}

/// Random model on `n` nodes and `m` latent nodes, fixed or joint.
pub fn random_model(rng: &mut impl Rng, n: usize, m: usize, joint: bool, reg: f64) -> LatentStepModel {
    let vp = uniform_matrix(rng, n, m, 1.5);
    if joint {
        LatentStepModel::joint(vp, uniform_matrix(rng, m, m, 1.5), reg).unwrap()
    } else {
        LatentStepModel::with_fixed_latent(vp, random_latent(rng, m), reg).unwrap()
    }
}
