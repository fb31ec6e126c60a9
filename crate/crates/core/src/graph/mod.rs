//! Dense graph representation and the normalization operators the model is built from.
//!
//! `row_normalize` turns an adjacency matrix into a random-walk transition matrix,
//! `total_normalize` turns it into a distribution over node pairs, and `degrees`
//! reads off row or column sums.

mod io;
mod matrix;

pub use io::{format_matrix, parse_matrix, read_labels, read_matrix, write_labels, write_matrix};
pub use matrix::Matrix;

use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as symmetric: `max|M - Mᵀ| <= tol * max|M|`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Symmetric non-negative weighted graph on `n` nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacencyMatrix {
    weights: Matrix,
    labels: Option<Vec<String>>,
}

impl AdjacencyMatrix {
    pub fn new(weights: Matrix) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::Shape(format!(
                "adjacency matrix must be square, got {}x{}",
                weights.rows(),
                weights.cols()
            )));
        }
        weights.check_finite_non_negative()?;
        let deviation = weights.asymmetry();
        if deviation > SYMMETRY_TOLERANCE * weights.max_abs() {
            return Err(Error::NotSymmetric {
                what: "adjacency matrix",
                deviation,
            });
        }
        Ok(AdjacencyMatrix { weights, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::Shape(format!("{} labels for {} nodes", labels.len(), self.n())));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display labels, falling back to node indices.
    pub fn display_labels(&self) -> Vec<String> {
        match &self.labels {
            Some(l) => l.clone(),
            None => (0..self.n()).map(|i| i.to_string()).collect(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.sum()
    }

    /// Fails on the first node with zero degree.
    pub fn check_no_isolated(&self) -> Result<()> {
        if self.total_mass() <= 0.0 {
            return Err(Error::EmptyGraph);
        }
        match self.weights.row_sums().iter().position(|&s| s <= 0.0) {
            Some(row) => Err(Error::ZeroRow { row }),
            None => Ok(()),
        }
    }

    /// Simultaneously permutes rows and columns: node `i` of the result is node `perm[i]` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n()];
        if perm.len() != self.n()
            || perm
                .iter()
                .any(|&p| p >= self.n() || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        Ok(AdjacencyMatrix {
            weights: self.weights.select(perm),
            labels: self
                .labels
                .as_ref()
                .map(|l| perm.iter().map(|&p| l[p].clone()).collect()),
        })
    }

    /// Drops nodes with zero degree, returning the kept original indices.
    pub fn drop_isolated(&self) -> (AdjacencyMatrix, Vec<usize>) {
        let keep: Vec<usize> = self
            .weights
            .row_sums()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0.0)
            .map(|(i, _)| i)
            .collect();
        let graph = AdjacencyMatrix {
            weights: self.weights.select(&keep),
            labels: self
                .labels
                .as_ref()
                .map(|l| keep.iter().map(|&k| l[k].clone()).collect()),
        };
        (graph, keep)
    }
}

/// Row-stochastic matrix: every row is a probability distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    probs: Matrix,
}

impl TransitionMatrix {
    pub fn probs(&self) -> &Matrix {
        &self.probs
    }

    pub fn into_matrix(self) -> Matrix {
        self.probs
    }

    pub fn rows(&self) -> usize {
        self.probs.rows()
    }

    pub fn cols(&self) -> usize {
        self.probs.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.probs.row(i)
    }

    pub fn matmul(&self, other: &TransitionMatrix) -> TransitionMatrix {
        TransitionMatrix {
            probs: self.probs.matmul(&other.probs),
        }
    }
}

/// Row or column sums of a non-negative matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeVector {
    values: Vec<f64>,
}

impl DegreeVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn all_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Columns,
}

/// Divides every row by its sum.
pub fn row_normalize(m: &Matrix) -> Result<TransitionMatrix> {
    m.check_finite_non_negative()?;
    let mut probs = m.clone();
    for i in 0..probs.rows() {
        let row = probs.row_mut(i);
        let s: f64 = row.iter().sum();
        if s <= 0.0 {
            return Err(Error::ZeroRow { row: i });
        }
        row.iter_mut().for_each(|x| *x /= s);
    }
    Ok(TransitionMatrix { probs })
}

/// Divides every entry by the total sum.
pub fn total_normalize(m: &Matrix) -> Result<Matrix> {
    m.check_finite_non_negative()?;
    let s = m.sum();
    if s <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    Ok(m.map(|x| x / s))
}

pub fn degrees(m: &Matrix, axis: Axis) -> DegreeVector {
    let values = match axis {
        Axis::Rows => m.row_sums(),
        Axis::Columns => m.col_sums(),
    };
    DegreeVector { values }
}

/// Shannon entropy (natural log) of a matrix viewed as a distribution, with `0 log 0 = 0`.
pub fn entropy(m: &Matrix) -> Result<f64> {
    m.check_finite_non_negative()?;
    let s = m.sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "entropy needs entries summing to 1, got {s}"
        )));
    }
    Ok(-m
        .as_slice()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>())
}
