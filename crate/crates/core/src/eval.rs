//! Clustering diagnostics: how edge mass splits across hard clusters, and
//! agreement with known node classes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, AdjacencyMatrix, Matrix, TransitionMatrix};

/// Largest cluster or class count accepted by the exhaustive matching.
pub const MAX_MATCHED_GROUPS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutReport {
    /// Entry `(a, b)` is the fraction of normalized edge mass running from cluster `a` to `b`.
    pub pair_mass: Vec<Vec<f64>>,
    pub within_fraction: f64,
    pub across_fraction: f64,
}

pub fn cut_report(a: &AdjacencyMatrix, labels: &[usize], m: usize) -> Result<CutReport> {
    if labels.len() != a.n() {
        return Err(Error::Shape(format!("{} labels for {} nodes", labels.len(), a.n())));
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= m) {
        return Err(Error::LabelOutOfRange { label, clusters: m });
    }
    let abar = graph::total_normalize(a.weights())?;
    let mut mass = Matrix::zeros(m, m);
    for i in 0..a.n() {
        for j in 0..a.n() {
            mass[(labels[i], labels[j])] += abar[(i, j)];
        }
    }
    let within_fraction: f64 = (0..m).map(|c| mass[(c, c)]).sum();
    Ok(CutReport {
        pair_mass: (0..m).map(|r| mass.row(r).to_vec()).collect(),
        within_fraction,
        across_fraction: 1.0 - within_fraction,
    })
}

/// Known class of every node, keyed by node label.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
pub struct GroundTruth {
    pub name: String,
    pub classes: BTreeMap<String, String>,
}

impl GroundTruth {
    pub fn new(name: impl Into<String>, classes: BTreeMap<String, String>) -> Self {
        GroundTruth {
            name: name.into(),
            classes,
        }
    }

    /// Reads a JSON object mapping node label to class; the name is the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let classes = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        Ok(GroundTruth { name, classes })
    }

    /// Letters `a-z` as vowel (`a e i o u y`) or consonant.
    pub fn vowels_and_consonants() -> Self {
        let classes = crate::ingest::LETTERS
            .iter()
            .map(|l| {
                let class = if "aeiouy".contains(l) { "vowel" } else { "consonant" };
                (l.to_string(), class.to_string())
            })
            .collect();
        GroundTruth::new("vowels_and_consonants", classes)
    }

    /// The 39 phonemes as vowel, stop, nasal_liquid, or other.
    pub fn phoneme_classes() -> Self {
        const VOWELS: [&str; 15] = [
            "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH", "UW",
        ];
        const STOPS: [&str; 6] = ["P", "B", "T", "D", "K", "G"];
        const NASALS_LIQUIDS: [&str; 5] = ["M", "N", "NG", "L", "R"];
        let classes = crate::ingest::PHONEMES
            .iter()
            .map(|p| {
                let class = if VOWELS.contains(p) {
                    "vowel"
                } else if STOPS.contains(p) {
                    "stop"
                } else if NASALS_LIQUIDS.contains(p) {
                    "nasal_liquid"
                } else {
                    "other"
                };
                (p.to_string(), class.to_string())
            })
            .collect();
        GroundTruth::new("phoneme_classes", classes)
    }

    /// Class of each node, in node order.
    pub fn classes_for(&self, node_labels: &[String]) -> Result<Vec<String>> {
        node_labels
            .iter()
            .map(|n| self.class_of(n).map(str::to_string))
            .collect()
    }

    fn class_of(&self, node: &str) -> Result<&str> {
        self.classes
            .get(node)
            .map(String::as_str)
            .ok_or_else(|| Error::MissingTruth { node: node.to_string() })
    }
}

/// Per class, how many of its nodes landed in each cluster.
pub fn class_counts(
    labels: &[usize],
    truth: &GroundTruth,
    node_labels: &[String],
    m: usize,
) -> Result<BTreeMap<String, Vec<usize>>> {
    if labels.len() != node_labels.len() {
        return Err(Error::Shape(format!(
            "{} cluster labels for {} nodes",
            labels.len(),
            node_labels.len()
        )));
    }
    let mut counts: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (&label, node) in labels.iter().zip(node_labels) {
        if label >= m {
            return Err(Error::LabelOutOfRange { label, clusters: m });
        }
        let class = truth.class_of(node)?;
        counts.entry(class.to_string()).or_insert_with(|| vec![0; m])[label] += 1;
    }
    Ok(counts)
}

/// Fraction of nodes whose cluster maps to their class under the best one-to-one
/// matching of clusters and classes.
pub fn cluster_accuracy(labels: &[usize], truth: &GroundTruth, node_labels: &[String]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::InvalidArgument("no nodes to score".into()));
    }
    let m = labels.iter().max().map_or(0, |&l| l + 1);
    let counts = class_counts(labels, truth, node_labels, m)?;
    let classes: BTreeSet<&String> = counts.keys().collect();
    if m > MAX_MATCHED_GROUPS || classes.len() > MAX_MATCHED_GROUPS {
        return Err(Error::InvalidArgument(format!(
            "exact matching supports at most {MAX_MATCHED_GROUPS} clusters and classes"
        )));
    }
    // table[cluster][class]
    let table: Vec<Vec<usize>> = (0..m).map(|c| counts.values().map(|v| v[c]).collect()).collect();
    let best = best_matching(&table);
    Ok(best as f64 / labels.len() as f64)
}

/// Maximum total of `table[r][c]` over one-to-one pairings of rows and columns.
fn best_matching(table: &[Vec<usize>]) -> usize {
    fn search(table: &[Vec<usize>], row: usize, used: &mut Vec<bool>) -> usize {
        if row == table.len() {
            return 0;
        }
        // leaving a row unmatched is allowed when rows outnumber columns
        let mut best = if table.len() > used.len() {
            search(table, row + 1, used)
        } else {
            0
        };
        for col in 0..used.len() {
            if !used[col] {
                used[col] = true;
                best = best.max(table[row][col] + search(table, row + 1, used));
                used[col] = false;
            }
        }
        best
    }
    let cols = table.first().map_or(0, Vec::len);
    search(table, 0, &mut vec![false; cols])
}

/// Probability that `node` is assigned to `cluster`.
pub fn affinity_margin(s: &TransitionMatrix, node_labels: &[String], node: &str, cluster: usize) -> Result<f64> {
    let i = node_labels
        .iter()
        .position(|l| l == node)
        .ok_or_else(|| Error::UnknownNode { node: node.to_string() })?;
    if i >= s.rows() {
        return Err(Error::UnknownNode { node: node.to_string() });
    }
    if cluster >= s.cols() {
        return Err(Error::LabelOutOfRange {
            label: cluster,
            clusters: s.cols(),
        });
    }
    Ok(s.row(i)[cluster])
}
