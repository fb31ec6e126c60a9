//! Result bundle written by every command.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::plot;
use crate::error::{Error, Result};
use crate::eval::{self, CutReport, GroundTruth};
use crate::graph::{self, AdjacencyMatrix};
use crate::optimizer::{FitConfig, FitResult, Termination};

/// Twelve significant digits.
pub fn fmt_prob(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// Sorted bars of each node's probability for cluster 0 (two clusters).
    Bars,
    /// Triangle projection of three-cluster assignments.
    Ternary,
    HeatmapOnly,
}

#[derive(Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

pub fn digest_file(role: &str, path: &Path) -> Result<InputDigest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let hash = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in hash {
        write!(hex, "{b:02x}").unwrap();
    }
    Ok(InputDigest {
        role: role.to_string(),
        path: path.display().to_string(),
        sha256: hex,
    })
}

/// Enough to rerun the command and get identical files.
#[derive(Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub command: String,
    pub config: FitConfig,
    pub latent: String,
    pub inputs: Vec<InputDigest>,
    pub seeds: Vec<u64>,
    pub library_version: String,
}

#[derive(Serialize)]
struct Summary<'a> {
    nodes: usize,
    clusters: usize,
    final_loss: f64,
    data_term: f64,
    entropy_lower_bound: f64,
    converged: bool,
    termination: Termination,
    iterations: usize,
    seed_used: u64,
    restart_losses: Vec<RestartLoss>,
    notes: &'a BTreeMap<String, serde_json::Value>,
    ground_truth: Option<TruthSummary>,
}

#[derive(Serialize)]
struct RestartLoss {
    seed: u64,
    final_loss: f64,
}

#[derive(Serialize)]
struct TruthSummary {
    name: String,
    accuracy: f64,
    class_counts: BTreeMap<String, Vec<usize>>,
}

pub struct Bundle<'a> {
    pub graph: &'a AdjacencyMatrix,
    pub result: &'a FitResult,
    pub manifest: RunManifest,
    pub truth: Option<GroundTruth>,
    pub plot: PlotKind,
    pub title: String,
    /// Extra facts about ingestion (dropped symbols, missing words, ...).
    pub notes: BTreeMap<String, serde_json::Value>,
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

/// Writes every output file into `dir`, returning the cut report.
pub fn write_bundle(dir: &Path, bundle: &Bundle<'_>) -> Result<CutReport> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let r = bundle.result;
    let labels = bundle.graph.display_labels();
    let m = r.latent.m();

    let mut soft = String::from("node");
    for c in 0..m {
        write!(soft, ",cluster_{c}").unwrap();
    }
    soft.push('\n');
    for (i, label) in labels.iter().enumerate() {
        soft.push_str(label);
        for &p in r.soft_assignments.row(i) {
            soft.push(',');
            soft.push_str(&fmt_prob(p));
        }
        soft.push('\n');
    }
    write(dir, "soft_assignments.csv", soft)?;

    let mut hard = String::from("node,cluster\n");
    for (label, c) in labels.iter().zip(&r.hard_assignments) {
        writeln!(hard, "{label},{c}").unwrap();
    }
    write(dir, "hard_assignments.csv", hard)?;

    write(
        dir,
        "reconstruction.txt",
        graph::format_matrix(r.reconstruction.weights()),
    )?;
    write(dir, "latent.txt", graph::format_matrix(r.latent.weights()))?;
    write(
        dir,
        "node_labels.json",
        serde_json::to_string(&labels).expect("labels serialize") + "\n",
    )?;

    let mut trace = String::from("iteration,loss\n");
    for (k, f) in r.loss_trace.iter().enumerate() {
        writeln!(trace, "{k},{f:e}").unwrap();
    }
    write(dir, "loss_trace.csv", trace)?;

    let cut = eval::cut_report(bundle.graph, &r.hard_assignments, m)?;
    write(dir, "cut_report.json", to_json(&cut))?;

    let classes = match &bundle.truth {
        Some(t) => Some(t.classes_for(&labels)?),
        None => None,
    };
    let ground_truth = match &bundle.truth {
        Some(t) => Some(TruthSummary {
            name: t.name.clone(),
            accuracy: eval::cluster_accuracy(&r.hard_assignments, t, &labels)?,
            class_counts: eval::class_counts(&r.hard_assignments, t, &labels, m)?,
        }),
        None => None,
    };
    let abar = graph::total_normalize(bundle.graph.weights())?;
    let summary = Summary {
        nodes: bundle.graph.n(),
        clusters: m,
        final_loss: r.final_loss,
        data_term: r.data_term,
        entropy_lower_bound: graph::entropy(&abar)?,
        converged: r.converged,
        termination: r.termination,
        iterations: r.iterations,
        seed_used: r.seed_used,
        restart_losses: r
            .restart_losses
            .iter()
            .map(|&(seed, final_loss)| RestartLoss { seed, final_loss })
            .collect(),
        notes: &bundle.notes,
        ground_truth,
    };
    write(dir, "summary.json", to_json(&summary))?;
    write(dir, "manifest.json", to_json(&bundle.manifest))?;

    write(
        dir,
        "assignments_heatmap.svg",
        plot::heatmap(&labels, &r.soft_assignments, &bundle.title),
    )?;
    match bundle.plot {
        PlotKind::Bars if m == 2 => {
            let first: Vec<f64> = (0..labels.len()).map(|i| r.soft_assignments.row(i)[0]).collect();
            write(
                dir,
                "cluster0_bars.svg",
                plot::bar_chart(&labels, &first, classes.as_deref(), &bundle.title),
            )?;
        }
        PlotKind::Ternary if m == 3 => {
            write(
                dir,
                "ternary.svg",
                plot::ternary(&labels, &r.soft_assignments, classes.as_deref(), &bundle.title),
            )?;
        }
        _ => {}
    }
    Ok(cut)
}

/// Wall-clock time lives apart from the manifest so reruns produce identical bundles.
pub fn write_timing(dir: &Path, seconds: f64) -> Result<()> {
    write(
        dir,
        "timing.json",
        format!("{{\n  \"wall_clock_seconds\": {seconds}\n}}\n"),
    )?;
    Ok(())
}
