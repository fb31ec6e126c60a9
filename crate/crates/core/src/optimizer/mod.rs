//! Seeded initialization and quasi-Newton fitting of the latent step model.

mod lbfgs;

pub use lbfgs::{minimize, LbfgsOptions, Minimum, Termination};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, TransitionMatrix};
use crate::model::{self, BipartiteGraph, LatentGraph, LatentStepModel, ParameterSet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitConfig {
    pub seed: u64,
    /// Initial parameters are uniform on `(-init_half_width, init_half_width)`.
    pub init_half_width: f64,
    pub reg_coefficient: f64,
    pub memory: usize,
    pub grad_tolerance: f64,
    pub rel_f_tolerance: f64,
    pub max_iterations: usize,
    pub restarts: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            seed: 0,
            init_half_width: 1e-2,
            reg_coefficient: 1e-1,
            memory: 10,
            grad_tolerance: 1e-5,
            rel_f_tolerance: 2.2e-9,
            max_iterations: 15000,
            restarts: 1,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        positive("init_half_width", self.init_half_width)?;
        positive("grad_tolerance", self.grad_tolerance)?;
        positive("rel_f_tolerance", self.rel_f_tolerance)?;
        if !(self.reg_coefficient.is_finite() && self.reg_coefficient >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "reg_coefficient must be non-negative, got {}",
                self.reg_coefficient
            )));
        }
        for (name, v) in [
            ("memory", self.memory),
            ("max_iterations", self.max_iterations),
            ("restarts", self.restarts),
        ] {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    fn lbfgs_options(&self) -> LbfgsOptions {
        LbfgsOptions {
            memory: self.memory,
            grad_tolerance: self.grad_tolerance,
            rel_f_tolerance: self.rel_f_tolerance,
            max_iterations: self.max_iterations,
            ..LbfgsOptions::default()
        }
    }
}

/// What the latent side of the model looks like during a fit.
#[derive(Clone, Debug, PartialEq)]
pub enum LatentSpec {
    Fixed(LatentGraph),
    Trainable { m: usize },
}

impl LatentSpec {
    pub fn m(&self) -> usize {
        match self {
            LatentSpec::Fixed(w) => w.m(),
            LatentSpec::Trainable { m } => *m,
        }
    }

    pub fn w_trainable(&self) -> bool {
        matches!(self, LatentSpec::Trainable { .. })
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub params: ParameterSet,
    pub bipartite: BipartiteGraph,
    pub latent: LatentGraph,
    pub reconstruction: AdjacencyMatrix,
    pub soft_assignments: TransitionMatrix,
    pub hard_assignments: Vec<usize>,
    /// Objective (including the penalty) at the start point and each accepted iterate.
    pub loss_trace: Vec<f64>,
    pub final_loss: f64,
    /// Cross-entropy part of `final_loss`.
    pub data_term: f64,
    pub converged: bool,
    pub termination: Termination,
    pub iterations: usize,
    pub seed_used: u64,
    /// `(seed, final_loss)` of every restart, in seed order.
    pub restart_losses: Vec<(u64, f64)>,
}

/// Draws every trainable entry i.i.d. uniform on the open interval
/// `(-init_half_width, init_half_width)`: `V_p` row-major, then `W_p` if trainable.
pub fn init_params(n: usize, m: usize, w_trainable: bool, config: &FitConfig) -> ParameterSet {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let h = config.init_half_width;
    let mut draw = || loop {
        let v = rng.gen_range(-h..h);
        if v != -h {
            break v;
        }
    };
    let mut params = ParameterSet::zeros(n, m, w_trainable);
    params.vp.as_mut_slice().iter_mut().for_each(|x| *x = draw());
    if w_trainable {
        params.wp.as_mut_slice().iter_mut().for_each(|x| *x = draw());
    }
    params
}

fn build_model(params: ParameterSet, latent: &LatentSpec, reg: f64) -> Result<LatentStepModel> {
    match latent {
        LatentSpec::Fixed(w) => LatentStepModel::with_fixed_latent(params.vp, w.clone(), reg),
        LatentSpec::Trainable { .. } => LatentStepModel::joint(params.vp, params.wp, reg),
    }
}

/// Fits `config.restarts` models from seeds `seed, seed + 1, ...` and keeps the
/// one with the lowest final loss (ties go to the lower seed).
pub fn fit(a: &AdjacencyMatrix, latent: &LatentSpec, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    a.check_no_isolated()?;
    let (n, m) = (a.n(), latent.m());
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "latent dimension must be in 1..={n}, got {m}"
        )));
    }

    let runs: Vec<Result<FitResult>> = (0..config.restarts as u64)
        .into_par_iter()
        .map(|offset| {
            let run_config = FitConfig {
                seed: config.seed.wrapping_add(offset),
                ..config.clone()
            };
            fit_once(a, latent, &run_config)
        })
        .collect();

    let mut results = Vec::with_capacity(runs.len());
    for run in runs {
        results.push(run?);
    }
    let restart_losses: Vec<(u64, f64)> = results.iter().map(|r| (r.seed_used, r.final_loss)).collect();
    let mut best = results
        .into_iter()
        .min_by(|x, y| {
            x.final_loss
                .total_cmp(&y.final_loss)
                .then(x.seed_used.cmp(&y.seed_used))
        })
        .expect("at least one restart");
    best.restart_losses = restart_losses;
    Ok(best)
}

fn fit_once(a: &AdjacencyMatrix, latent: &LatentSpec, config: &FitConfig) -> Result<FitResult> {
    let params = init_params(a.n(), latent.m(), latent.w_trainable(), config);
    let x0 = params.to_vec();
    let mut model = build_model(params, latent, config.reg_coefficient)?;
    // surfaces loss-domain problems of a fixed latent graph before optimizing
    model.loss(a)?;

    let mut scratch = model.clone();
    let objective = |x: &[f64]| {
        scratch.set_params_from_slice(x);
        scratch.loss_and_gradient(a)
    };
    let min = minimize(objective, &x0, &config.lbfgs_options())?;
    model.set_params_from_slice(&min.x);

    let bipartite = model.bipartite();
    let latent_graph = model.latent();
    let reconstruction = model::reconstruct(&bipartite, &latent_graph)?;
    let soft = model::soft_assignments(&bipartite)?;
    let hard = model::hard_assignments(&soft);
    let data_term = model.data_term(a)?;
    Ok(FitResult {
        params: model.params().clone(),
        bipartite,
        latent: latent_graph,
        reconstruction,
        soft_assignments: soft,
        hard_assignments: hard,
        final_loss: min.value,
        loss_trace: min.trace,
        data_term,
        converged: min.termination.converged(),
        termination: min.termination,
        iterations: min.iterations,
        seed_used: config.seed,
        restart_losses: vec![(config.seed, min.value)],
    })
}
