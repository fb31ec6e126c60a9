//! The latent random step model.
//!
//! A random step on the input graph `A` is approximated by three steps: from the
//! `n` original nodes to `m` latent nodes along a bipartite graph `V`, one step
//! inside the latent graph `W`, and back along `V`. When the column sums of `V`
//! equal the degrees of `W`, the composed walk is reversible and comes from the
//! symmetric rank-`m` graph `B = V D_W⁻¹ W D_W⁻¹ Vᵀ`.
//!
//! Both factors are built from unconstrained parameters: `W` is a softmax over
//! all entries of `W_p + W_pᵀ`, and `V` is a column softmax of `V_p` scaled by
//! the degrees of `W`, so every parameter value yields a valid reversible model.

use crate::error::{Error, Result};
use crate::graph::{self, AdjacencyMatrix, Axis, Matrix, TransitionMatrix};

/// Column sums of `V` may differ from the degrees of `W` by at most this much.
pub const REVERSIBILITY_TOLERANCE: f64 = 1e-9;

/// Symmetric non-negative `m x m` graph on the latent nodes, entries summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentGraph {
    weights: Matrix,
    degrees: Vec<f64>,
}

impl LatentGraph {
    /// Softmax over all entries of `W_p + W_pᵀ`.
    pub fn from_params(wp: &Matrix) -> Result<Self> {
        if !wp.is_square() || wp.rows() == 0 {
            return Err(Error::Shape(format!(
                "latent parameters must be square and non-empty, got {}x{}",
                wp.rows(),
                wp.cols()
            )));
        }
        let sym = wp.add(&wp.transpose());
        let weights = softmax_all(&sym);
        let degrees = weights.row_sums();
        Ok(LatentGraph { weights, degrees })
    }

    /// A user-supplied latent graph. Zeros are allowed; every node needs positive
    /// degree. The weights are rescaled to sum to 1.
    pub fn fixed(weights: Matrix) -> Result<Self> {
        if !weights.is_square() || weights.rows() == 0 {
            return Err(Error::Shape(format!(
                "latent graph must be square and non-empty, got {}x{}",
                weights.rows(),
                weights.cols()
            )));
        }
        weights.check_finite_non_negative()?;
        let deviation = weights.asymmetry();
        if deviation > graph::SYMMETRY_TOLERANCE * weights.max_abs() {
            return Err(Error::NotSymmetric {
                what: "latent graph",
                deviation,
            });
        }
        let weights = graph::total_normalize(&weights)?;
        let degrees = weights.row_sums();
        if let Some(row) = degrees.iter().position(|&d| d <= 0.0) {
            return Err(Error::ZeroRow { row });
        }
        Ok(LatentGraph { weights, degrees })
    }

    pub fn m(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }
}

/// Non-negative `n x m` graph linking original nodes to latent nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteGraph {
    weights: Matrix,
}

impl BipartiteGraph {
    pub fn new(weights: Matrix) -> Result<Self> {
        weights.check_finite_non_negative()?;
        Ok(BipartiteGraph { weights })
    }

    /// Column softmax of `V_p`, with column `j` scaled by degree `j` of `latent`.
    pub fn from_params(vp: &Matrix, latent: &LatentGraph) -> Result<Self> {
        if vp.cols() != latent.m() {
            return Err(Error::Shape(format!(
                "V_p has {} columns, latent graph has {} nodes",
                vp.cols(),
                latent.m()
            )));
        }
        let mut weights = column_softmax(vp);
        for i in 0..weights.rows() {
            for (x, d) in weights.row_mut(i).iter_mut().zip(latent.degrees()) {
                *x *= d;
            }
        }
        Ok(BipartiteGraph { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.rows()
    }

    pub fn m(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }
}

fn check_reversible(v: &BipartiteGraph, w: &LatentGraph) -> Result<()> {
    if v.m() != w.m() {
        return Err(Error::Shape(format!("V has {} columns, W has {} nodes", v.m(), w.m())));
    }
    let sums = v.weights.col_sums();
    let worst = sums
        .iter()
        .zip(w.degrees())
        .map(|(s, d)| (s - d).abs())
        .enumerate()
        .fold((0, 0.0f64), |best, (j, dev)| if dev > best.1 { (j, dev) } else { best });
    if worst.1 > REVERSIBILITY_TOLERANCE {
        let column = worst.0;
        return Err(Error::Reversibility {
            column,
            column_sum: sums[column],
            degree: w.degrees()[column],
        });
    }
    Ok(())
}

/// The simplified graph `B = V D_W⁻¹ W D_W⁻¹ Vᵀ`.
pub fn reconstruct(v: &BipartiteGraph, w: &LatentGraph) -> Result<AdjacencyMatrix> {
    check_reversible(v, w)?;
    let scaled = Matrix::from_fn(v.n(), v.m(), |i, a| v.weights[(i, a)] / w.degrees()[a]);
    let b = symmetric_product(&scaled, w.weights());
    AdjacencyMatrix::new(b)
}

/// `π(V) π(W) π(Vᵀ)`, computed directly from the three factors.
pub fn transition(v: &BipartiteGraph, w: &LatentGraph) -> Result<TransitionMatrix> {
    check_reversible(v, w)?;
    let forward = graph::row_normalize(v.weights())?;
    let latent = graph::row_normalize(w.weights())?;
    let back = graph::row_normalize(&v.weights().transpose())?;
    Ok(forward.matmul(&latent).matmul(&back))
}

/// Each node's distribution over latent clusters, `π(V)`.
pub fn soft_assignments(v: &BipartiteGraph) -> Result<TransitionMatrix> {
    graph::row_normalize(v.weights())
}

/// Per-row argmax, ties going to the lowest index.
pub fn hard_assignments(s: &TransitionMatrix) -> Vec<usize> {
    (0..s.rows())
        .map(|i| {
            s.row(i)
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |best, (j, &p)| if p > best.1 { (j, p) } else { best },
                )
                .0
        })
        .collect()
}

/// `U X Uᵀ` for symmetric `X`, mirrored so the result is exactly symmetric.
fn symmetric_product(u: &Matrix, x: &Matrix) -> Matrix {
    let ux = u.matmul(x);
    let n = u.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = ux.row(i).iter().zip(u.row(j)).map(|(a, b)| a * b).sum();
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}

fn softmax_all(m: &Matrix) -> Matrix {
    let max = m.as_slice().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = m.map(|x| (x - max).exp());
    let s = e.sum();
    e.map(|x| x / s)
}

fn column_softmax(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for j in 0..m.cols() {
        let max = (0..m.rows()).map(|i| m[(i, j)]).fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for i in 0..m.rows() {
            let e = (m[(i, j)] - max).exp();
            out[(i, j)] = e;
            s += e;
        }
        for i in 0..m.rows() {
            out[(i, j)] /= s;
        }
    }
    out
}

/// Free parameters: `V_p` (`n x m`) and `W_p` (`m x m`).
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSet {
    pub vp: Matrix,
    pub wp: Matrix,
    pub w_trainable: bool,
}

impl ParameterSet {
    pub fn zeros(n: usize, m: usize, w_trainable: bool) -> Self {
        ParameterSet {
            vp: Matrix::zeros(n, m),
            wp: Matrix::zeros(m, m),
            w_trainable,
        }
    }

    pub fn n(&self) -> usize {
        self.vp.rows()
    }

    pub fn m(&self) -> usize {
        self.vp.cols()
    }

    /// Number of trainable entries.
    pub fn len(&self) -> usize {
        let m = self.m();
        self.n() * m + if self.w_trainable { m * m } else { 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Trainable entries, row-major, `V_p` first then `W_p` when trainable.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut x = self.vp.as_slice().to_vec();
        if self.w_trainable {
            x.extend_from_slice(self.wp.as_slice());
        }
        x
    }

    /// Inverse of [`to_vec`](Self::to_vec). Panics on length mismatch.
    pub fn set_from_slice(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.len(), "parameter vector length");
        let nv = self.vp.as_slice().len();
        self.vp.as_mut_slice().copy_from_slice(&x[..nv]);
        if self.w_trainable {
            self.wp.as_mut_slice().copy_from_slice(&x[nv..]);
        }
    }
}

/// Gradient of the loss with respect to the trainable parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub vp: Matrix,
    pub wp: Option<Matrix>,
}

impl Gradient {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut g = self.vp.as_slice().to_vec();
        if let Some(wp) = &self.wp {
            g.extend_from_slice(wp.as_slice());
        }
        g
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatentStepModel {
    params: ParameterSet,
    fixed_w: Option<LatentGraph>,
    reg_coefficient: f64,
}

impl LatentStepModel {
    /// Model with a fixed latent graph; only `V_p` is trainable.
    pub fn with_fixed_latent(vp: Matrix, latent: LatentGraph, reg_coefficient: f64) -> Result<Self> {
        if vp.cols() != latent.m() {
            return Err(Error::Shape(format!(
                "V_p has {} columns, latent graph has {} nodes",
                vp.cols(),
                latent.m()
            )));
        }
        check_reg(reg_coefficient)?;
        let m = latent.m();
        Ok(LatentStepModel {
            params: ParameterSet {
                vp,
                wp: Matrix::zeros(m, m),
                w_trainable: false,
            },
            fixed_w: Some(latent),
            reg_coefficient,
        })
    }

    /// Model with both `V_p` and `W_p` trainable.
    pub fn joint(vp: Matrix, wp: Matrix, reg_coefficient: f64) -> Result<Self> {
        if !wp.is_square() || wp.rows() != vp.cols() {
            return Err(Error::Shape(format!(
                "W_p is {}x{}, V_p has {} columns",
                wp.rows(),
                wp.cols(),
                vp.cols()
            )));
        }
        check_reg(reg_coefficient)?;
        Ok(LatentStepModel {
            params: ParameterSet {
                vp,
                wp,
                w_trainable: true,
            },
            fixed_w: None,
            reg_coefficient,
        })
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn fixed_latent(&self) -> Option<&LatentGraph> {
        self.fixed_w.as_ref()
    }

    pub fn reg_coefficient(&self) -> f64 {
        self.reg_coefficient
    }

    pub fn set_params_from_slice(&mut self, x: &[f64]) {
        self.params.set_from_slice(x);
    }

    pub fn latent(&self) -> LatentGraph {
        match &self.fixed_w {
            Some(w) => w.clone(),
            None => LatentGraph::from_params(&self.params.wp).expect("shape checked at construction"),
        }
    }

    pub fn bipartite(&self) -> BipartiteGraph {
        BipartiteGraph::from_params(&self.params.vp, &self.latent()).expect("shape checked at construction")
    }

    pub fn reconstruction(&self) -> AdjacencyMatrix {
        reconstruct(&self.bipartite(), &self.latent()).expect("parametrized V satisfies the criterion")
    }

    /// Cross-entropy `-Σ Ā log B̄` over pairs where `Ā > 0`.
    pub fn data_term(&self, a: &AdjacencyMatrix) -> Result<f64> {
        Ok(self.evaluate(a, false)?.0)
    }

    /// Data term plus `λ · mean(p²)` over the trainable parameter entries.
    pub fn loss(&self, a: &AdjacencyMatrix) -> Result<f64> {
        Ok(self.evaluate(a, false)?.0 + self.penalty())
    }

    pub fn loss_gradient(&self, a: &AdjacencyMatrix) -> Result<Gradient> {
        let (_, grad) = self.evaluate(a, true)?;
        Ok(grad.expect("requested"))
    }

    /// Loss and flattened gradient in one pass.
    pub fn loss_and_gradient(&self, a: &AdjacencyMatrix) -> Result<(f64, Vec<f64>)> {
        let (data, grad) = self.evaluate(a, true)?;
        Ok((data + self.penalty(), grad.expect("requested").to_vec()))
    }

    fn penalty(&self) -> f64 {
        if self.reg_coefficient == 0.0 {
            return 0.0;
        }
        let x = self.params.to_vec();
        self.reg_coefficient * x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
    }

    fn evaluate(&self, a: &AdjacencyMatrix, want_grad: bool) -> Result<(f64, Option<Gradient>)> {
        let n = self.params.n();
        if a.n() != n {
            return Err(Error::Shape(format!("graph has {} nodes, model has {n}", a.n())));
        }
        let abar = graph::total_normalize(a.weights())?;
        let latent = self.latent();
        let w = latent.weights();
        // V D_W⁻¹ is the column softmax itself, so B = U W Uᵀ.
        let u = column_softmax(&self.params.vp);
        let b = symmetric_product(&u, w);
        let b_sum = b.sum();

        let mut data = b_sum.ln();
        for i in 0..n {
            for j in 0..n {
                let p = abar[(i, j)];
                if p > 0.0 {
                    let q = b[(i, j)];
                    if q <= 0.0 {
                        return Err(Error::LossDomain { row: i, col: j });
                    }
                    data -= p * q.ln();
                }
            }
        }
        if !want_grad {
            return Ok((data, None));
        }

        // dL/dB
        let inv_sum = 1.0 / b_sum;
        let g = Matrix::from_fn(n, n, |i, j| {
            let p = abar[(i, j)];
            let base = if p > 0.0 { -p / b[(i, j)] } else { 0.0 };
            base + inv_sum
        });
        let g_sym = g.add(&g.transpose());
        let grad_u = g_sym.matmul(&u.matmul(w));
        let mut grad_vp = Matrix::zeros(n, u.cols());
        for col in 0..u.cols() {
            let inner: f64 = (0..n).map(|k| u[(k, col)] * grad_u[(k, col)]).sum();
            for i in 0..n {
                grad_vp[(i, col)] = u[(i, col)] * (grad_u[(i, col)] - inner);
            }
        }

        let grad_wp = if self.params.w_trainable {
            let grad_w = u.transpose().matmul(&g).matmul(&u);
            let inner: f64 = w.as_slice().iter().zip(grad_w.as_slice()).map(|(a, b)| a * b).sum();
            let grad_s = Matrix::from_fn(w.rows(), w.cols(), |x, y| w[(x, y)] * (grad_w[(x, y)] - inner));
            Some(grad_s.add(&grad_s.transpose()))
        } else {
            None
        };

        let mut grad = Gradient {
            vp: grad_vp,
            wp: grad_wp,
        };
        if self.reg_coefficient != 0.0 {
            let scale = 2.0 * self.reg_coefficient / self.params.len() as f64;
            add_scaled(&mut grad.vp, &self.params.vp, scale);
            if let Some(gw) = grad.wp.as_mut() {
                add_scaled(gw, &self.params.wp, scale);
            }
        }
        Ok((data, Some(grad)))
    }
}

fn add_scaled(target: &mut Matrix, source: &Matrix, scale: f64) {
    for (t, s) in target.as_mut_slice().iter_mut().zip(source.as_slice()) {
        *t += scale * s;
    }
}

fn check_reg(reg: f64) -> Result<()> {
    if reg.is_finite() && reg >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "regularization must be non-negative, got {reg}"
        )))
    }
}

/// Column sums of a matrix.
pub fn column_sums(v: &BipartiteGraph) -> Vec<f64> {
    graph::degrees(v.weights(), Axis::Columns).values().to_vec()
}

/// Latent graphs used by the bundled experiments.
pub mod presets {
    use super::LatentGraph;
    use crate::graph::Matrix;

    fn fixed(m: Matrix) -> LatentGraph {
        LatentGraph::fixed(m).expect("preset latent graphs are valid")
    }

    /// `k` disjoint self-loops of weight `1/k`: homophilous clusters.
    pub fn clique(k: usize) -> LatentGraph {
        fixed(Matrix::identity(k).scale(1.0 / k as f64))
    }

    /// Single edge between two latent nodes, weight `1/2` each way.
    pub fn biclique() -> LatentGraph {
        fixed(Matrix::from_rows(&[[0.0, 0.5], [0.5, 0.0]]))
    }

    /// Triangle without self-loops, weight `1/6` per ordered pair.
    pub fn triangle() -> LatentGraph {
        fixed(Matrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 / 6.0 }))
    }

    /// `k` disjoint latent edges (`2k` nodes), weight `1/(2k)` per ordered pair.
    /// Mapping each biclique side to one latent node reproduces a union of
    /// `k` equal bicliques exactly.
    pub fn biclique_union(k: usize) -> LatentGraph {
        let w = 1.0 / (2 * k) as f64;
        fixed(Matrix::from_fn(2 * k, 2 * k, |i, j| {
            if i / 2 == j / 2 && i != j {
                w
            } else {
                0.0
            }
        }))
    }
}
