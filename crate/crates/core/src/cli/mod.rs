//! `latentstep` command-line interface.
//!
//! Exit codes: 0 on success, 2 on invalid input, 1 on runtime failure.

mod output;
pub mod plot;

pub use output::{fmt_prob, RunManifest};

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::eval::GroundTruth;
use crate::graph::{self, AdjacencyMatrix};
use crate::ingest;
use crate::model::{presets, LatentGraph};
use crate::optimizer::{self, FitConfig, LatentSpec};
use output::{Bundle, InputDigest, PlotKind};

/// Environment variable capping the number of restarts fitted in parallel.
pub const THREADS_ENV: &str = "LATENTSTEP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "latentstep", version, about = "Latent random step graph factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a union of bicliques with a fixed latent graph.
    Synth(SynthArgs),
    /// Fit the letter adjacency graph of a word list.
    Ortho(OrthoArgs),
    /// Fit the phoneme adjacency graph of a word list.
    Phono(PhonoArgs),
    /// Fit an arbitrary edge-list graph.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
struct FitFlags {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of seeds tried (seed, seed+1, ...); the lowest final loss wins.
    #[arg(long)]
    restarts: Option<usize>,
    /// Coefficient on the mean squared parameter penalty.
    #[arg(long, default_value_t = 0.1)]
    reg: f64,
    /// Stop when the largest gradient component is at most this.
    #[arg(long, default_value_t = 1e-5)]
    grad_tol: f64,
    #[arg(long, default_value_t = 15000)]
    max_iter: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

impl FitFlags {
    fn config(&self, default_restarts: usize) -> FitConfig {
        FitConfig {
            seed: self.seed,
            reg_coefficient: self.reg,
            grad_tolerance: self.grad_tol,
            max_iterations: self.max_iter,
            restarts: self.restarts.unwrap_or(default_restarts),
            ..FitConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Number of bicliques.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Nodes on the left side of each biclique.
    #[arg(long, default_value_t = 10)]
    a: usize,
    /// Nodes on the right side of each biclique.
    #[arg(long, default_value_t = 10)]
    b: usize,
    #[arg(long, default_value_t = 1.0)]
    weight: f64,
    /// clique3 | biclique2 | exact6 | file:<path>
    #[arg(long, default_value = "clique3")]
    latent: String,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Debug, Args)]
struct OrthoArgs {
    /// Word list, one word per line.
    #[arg(long)]
    words: PathBuf,
    /// bi | tri | file:<path>
    #[arg(long, default_value = "bi")]
    latent: String,
    /// Ground-truth JSON (node label to class); defaults to vowels vs consonants.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Debug, Args)]
struct PhonoArgs {
    #[arg(long)]
    words: PathBuf,
    /// Pronouncing dictionary.
    #[arg(long)]
    dict: PathBuf,
    /// bi | tri | file:<path>
    #[arg(long, default_value = "tri")]
    latent: String,
    /// Ground-truth JSON; defaults to vowel/stop/nasal_liquid/other phoneme classes.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("latent_mode").required(true).args(["latent", "train_w"])))]
struct FitArgs {
    /// Edge list: `i<TAB>j<TAB>weight` per line.
    #[arg(long)]
    graph: PathBuf,
    /// Number of latent nodes.
    #[arg(long)]
    m: usize,
    /// Fixed latent graph, `file:<path>` in matrix text format.
    #[arg(long)]
    latent: Option<String>,
    /// Fit the latent graph jointly with the assignments.
    #[arg(long)]
    train_w: bool,
    /// JSON array of node labels.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    fit: FitFlags,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let command_line = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match configure_threads().and_then(|()| dispatch(cli.command, command_line)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize =
        value.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
            Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {value:?}"))
        })?;
    // already initialized when run() is called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn dispatch(command: Command, command_line: Vec<String>) -> Result<()> {
    let started = Instant::now();
    let out = match &command {
        Command::Synth(a) => &a.fit.out,
        Command::Ortho(a) => &a.fit.out,
        Command::Phono(a) => &a.fit.out,
        Command::Fit(a) => &a.fit.out,
    }
    .clone();
    let job = match command {
        Command::Synth(args) => synth_job(args)?,
        Command::Ortho(args) => ortho_job(args)?,
        Command::Phono(args) => phono_job(args)?,
        Command::Fit(args) => fit_job(args)?,
    };
    job.config.validate()?;

    let result = optimizer::fit(&job.graph, &job.latent, &job.config)?;
    let seeds = (0..job.config.restarts as u64)
        .map(|k| job.config.seed.wrapping_add(k))
        .collect();
    let manifest = RunManifest {
        command_line,
        command: job.name.to_string(),
        config: job.config.clone(),
        latent: job.latent_name.clone(),
        inputs: job.inputs,
        seeds,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let bundle = Bundle {
        graph: &job.graph,
        result: &result,
        manifest,
        truth: job.truth,
        plot: job.plot,
        title: format!("{} / {}", job.name, job.latent_name),
        notes: job.notes,
    };
    let cut = output::write_bundle(&out, &bundle)?;
    output::write_timing(&out, started.elapsed().as_secs_f64())?;

    println!(
        "{}: n={} m={} final_loss={:.6} data_term={:.6} across={:.4} converged={} seed={} -> {}",
        job.name,
        job.graph.n(),
        job.latent.m(),
        result.final_loss,
        result.data_term,
        cut.across_fraction,
        result.converged,
        result.seed_used,
        out.display()
    );
    Ok(())
}

struct Job {
    name: &'static str,
    graph: AdjacencyMatrix,
    latent: LatentSpec,
    latent_name: String,
    config: FitConfig,
    truth: Option<GroundTruth>,
    plot: PlotKind,
    inputs: Vec<InputDigest>,
    notes: BTreeMap<String, serde_json::Value>,
}

type Preset<'a> = (&'a str, &'a dyn Fn() -> LatentGraph);

/// Resolves a named preset or `file:<path>`, recording the file digest.
fn resolve_latent(spec: &str, presets: &[Preset<'_>], inputs: &mut Vec<InputDigest>) -> Result<LatentGraph> {
    if let Some(path) = spec.strip_prefix("file:") {
        let path = Path::new(path);
        let m = graph::read_matrix(path)?;
        inputs.push(output::digest_file("latent", path)?);
        return LatentGraph::fixed(m);
    }
    match presets.iter().find(|(name, _)| *name == spec) {
        Some((_, build)) => Ok(build()),
        None => {
            let names: Vec<&str> = presets.iter().map(|p| p.0).collect();
            Err(Error::InvalidArgument(format!(
                "unknown latent graph {spec:?}; expected one of {} or file:<path>",
                names.join(", ")
            )))
        }
    }
}

fn plot_for(m: usize) -> PlotKind {
    match m {
        2 => PlotKind::Bars,
        3 => PlotKind::Ternary,
        _ => PlotKind::HeatmapOnly,
    }
}

fn index_truth(name: &str, classes: &[usize]) -> GroundTruth {
    let map = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (i.to_string(), c.to_string()))
        .collect();
    GroundTruth::new(name, map)
}

fn synth_job(args: SynthArgs) -> Result<Job> {
    let SynthArgs {
        k,
        a,
        b,
        weight,
        latent,
        fit,
    } = args;
    let graph = ingest::gen_bicliques(k, a, b, weight)?;
    let mut inputs = Vec::new();
    let latent_graph = resolve_latent(
        &latent,
        &[
            ("clique3", &|| presets::clique(3)),
            ("biclique2", &presets::biclique),
            ("exact6", &|| presets::biclique_union(k)),
        ],
        &mut inputs,
    )?;
    let blocks = ingest::biclique_blocks(k, a, b);
    let sides = ingest::biclique_sides(k, a, b);
    let truth = match latent.as_str() {
        "clique3" => Some(index_truth("bicliques", &blocks)),
        "biclique2" => Some(index_truth("sides", &sides)),
        "exact6" => Some(index_truth(
            "biclique_sides",
            &blocks.iter().zip(&sides).map(|(bl, s)| 2 * bl + s).collect::<Vec<_>>(),
        )),
        _ => None,
    };
    let mut notes = BTreeMap::new();
    notes.insert("bicliques".into(), json!({ "k": k, "a": a, "b": b, "weight": weight }));
    Ok(Job {
        name: "synth",
        plot: plot_for(latent_graph.m()),
        latent: LatentSpec::Fixed(latent_graph),
        latent_name: latent,
        graph,
        config: fit.config(10),
        // exact matching only scales to a handful of groups
        truth: truth.filter(|_| 2 * k <= crate::eval::MAX_MATCHED_GROUPS),
        inputs,
        notes,
    })
}

fn bigram_presets() -> [Preset<'static>; 2] {
    [("bi", &presets::biclique), ("tri", &presets::triangle)]
}

fn ortho_job(args: OrthoArgs) -> Result<Job> {
    let words = ingest::load_word_list(&args.words)?;
    let mut inputs = vec![output::digest_file("words", &args.words)?];
    let bigram = ingest::letter_bigram_graph(&words)?;
    let latent = resolve_latent(&args.latent, &bigram_presets(), &mut inputs)?;
    let truth = match &args.truth {
        Some(p) => {
            inputs.push(output::digest_file("truth", p)?);
            GroundTruth::load(p)?
        }
        None => GroundTruth::vowels_and_consonants(),
    };
    if !bigram.dropped.is_empty() {
        eprintln!(
            "note: letters without adjacencies dropped: {}",
            bigram.dropped.join(" ")
        );
    }
    let mut notes = BTreeMap::new();
    notes.insert("words_used".into(), json!(words.len()));
    notes.insert("adjacent_pairs".into(), json!(bigram.pairs));
    notes.insert("dropped_symbols".into(), json!(bigram.dropped));
    Ok(Job {
        name: "ortho",
        plot: plot_for(latent.m()),
        latent: LatentSpec::Fixed(latent),
        latent_name: args.latent,
        graph: bigram.graph,
        config: args.fit.config(10),
        truth: Some(truth),
        inputs,
        notes,
    })
}

fn phono_job(args: PhonoArgs) -> Result<Job> {
    let words = ingest::load_word_list(&args.words)?;
    let dict = ingest::parse_pronouncing_dict(&args.dict)?;
    let mut inputs = vec![
        output::digest_file("words", &args.words)?,
        output::digest_file("dict", &args.dict)?,
    ];
    let pg = ingest::phoneme_bigram_graph(&words, &dict)?;
    let latent = resolve_latent(&args.latent, &bigram_presets(), &mut inputs)?;
    let truth = match &args.truth {
        Some(p) => {
            inputs.push(output::digest_file("truth", p)?);
            GroundTruth::load(p)?
        }
        None => GroundTruth::phoneme_classes(),
    };
    if pg.missing_words > 0 {
        eprintln!("note: {} words not in the dictionary were skipped", pg.missing_words);
    }
    if !pg.bigram.dropped.is_empty() {
        eprintln!(
            "note: phonemes without adjacencies dropped: {}",
            pg.bigram.dropped.join(" ")
        );
    }
    let mut notes = BTreeMap::new();
    notes.insert("words_used".into(), json!(words.len() - pg.missing_words));
    notes.insert("words_missing_from_dictionary".into(), json!(pg.missing_words));
    notes.insert("adjacent_pairs".into(), json!(pg.bigram.pairs));
    notes.insert("dropped_symbols".into(), json!(pg.bigram.dropped));
    Ok(Job {
        name: "phono",
        plot: plot_for(latent.m()),
        latent: LatentSpec::Fixed(latent),
        latent_name: args.latent,
        graph: pg.bigram.graph,
        config: args.fit.config(10),
        truth: Some(truth),
        inputs,
        notes,
    })
}

fn fit_job(args: FitArgs) -> Result<Job> {
    if args.m == 0 {
        return Err(Error::InvalidArgument("--m must be at least 1".into()));
    }
    let mut graph = ingest::load_edge_list(&args.graph)?;
    let mut inputs = vec![output::digest_file("graph", &args.graph)?];
    if let Some(p) = &args.labels {
        graph = graph.with_labels(graph::read_labels(p)?)?;
        inputs.push(output::digest_file("labels", p)?);
    }
    let (latent, latent_name) = match &args.latent {
        Some(spec) => {
            if !spec.starts_with("file:") {
                return Err(Error::InvalidArgument(format!(
                    "--latent must be file:<path>, got {spec:?}"
                )));
            }
            let w = resolve_latent(spec, &[], &mut inputs)?;
            if w.m() != args.m {
                return Err(Error::InvalidArgument(format!(
                    "latent graph has {} nodes but --m is {}",
                    w.m(),
                    args.m
                )));
            }
            (LatentSpec::Fixed(w), spec.clone())
        }
        None => (LatentSpec::Trainable { m: args.m }, "trainable".to_string()),
    };
    let truth = match &args.truth {
        Some(p) => {
            inputs.push(output::digest_file("truth", p)?);
            Some(GroundTruth::load(p)?)
        }
        None => None,
    };
    Ok(Job {
        name: "fit",
        graph,
        latent,
        latent_name,
        config: args.fit.config(1),
        truth,
        plot: PlotKind::HeatmapOnly,
        inputs,
        notes: BTreeMap::new(),
    })
}
