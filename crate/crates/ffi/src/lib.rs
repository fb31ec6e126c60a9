//! C ABI over `latentstep`.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `ls_*_new*` style constructor and released with the matching `ls_*_free`.
//! Fallible calls return an [`LsStatus`]; on failure the message is available
//! from [`ls_last_error_message`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use latentstep::model::presets;
use latentstep::{AdjacencyMatrix, Error, FitConfig, FitResult, LatentGraph, LatentSpec, Matrix};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad argument value (size mismatch, unknown preset, short buffer, ...).
    InvalidArgument = 2,
    /// Input data rejected (asymmetric, negative, isolated node, ...).
    Validation = 3,
    /// The loss hit a zero reconstruction entry where the data has mass.
    Domain = 4,
    Io = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Input graph.
pub struct LsGraph(AdjacencyMatrix);

/// Fixed latent graph.
pub struct LsLatent(LatentGraph);

/// Outcome of a fit.
pub struct LsFitResult(FitResult);

/// Mirror of the core fitting configuration.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct LsFitConfig {
    pub seed: u64,
    pub init_half_width: f64,
    pub reg_coefficient: f64,
    pub memory: usize,
    pub grad_tolerance: f64,
    pub rel_f_tolerance: f64,
    pub max_iterations: usize,
    pub restarts: usize,
}

impl From<LsFitConfig> for FitConfig {
    fn from(c: LsFitConfig) -> Self {
        FitConfig {
            seed: c.seed,
            init_half_width: c.init_half_width,
            reg_coefficient: c.reg_coefficient,
            memory: c.memory,
            grad_tolerance: c.grad_tolerance,
            rel_f_tolerance: c.rel_f_tolerance,
            max_iterations: c.max_iterations,
            restarts: c.restarts,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(LsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidArgument(_) => LsStatus::InvalidArgument,
            Error::LossDomain { .. } => LsStatus::Domain,
            Error::Io { .. } => LsStatus::Io,
            _ => LsStatus::Validation,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(LsStatus::InvalidArgument, msg.into())
}

fn null(what: &str) -> Failure {
    Failure(LsStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("panic: {msg}"));
            LsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn square(n: usize, weights: *const f64) -> Result<Matrix, Failure> {
    if weights.is_null() {
        return Err(null("weights"));
    }
    let len = n.checked_mul(n).ok_or_else(|| invalid("matrix size overflows"))?;
    let data = std::slice::from_raw_parts(weights, len).to_vec();
    Ok(Matrix::from_vec(n, n, data)?)
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(Path::new(s))
}

unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < src.len() {
        return Err(invalid(format!("buffer holds {len} values, need {}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message of the last failing call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn ls_fit_config_default() -> LsFitConfig {
    let c = FitConfig::default();
    LsFitConfig {
        seed: c.seed,
        init_half_width: c.init_half_width,
        reg_coefficient: c.reg_coefficient,
        memory: c.memory,
        grad_tolerance: c.grad_tolerance,
        rel_f_tolerance: c.rel_f_tolerance,
        max_iterations: c.max_iterations,
        restarts: c.restarts,
    }
}

/// Graph from a row-major `n * n` weight array.
///
/// # Safety
/// `weights` must point to `n * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_graph_new_dense(n: usize, weights: *const f64, out: *mut *mut LsGraph) -> LsStatus {
    guard(|| {
        let m = square(n, weights)?;
        put(out, LsGraph(AdjacencyMatrix::new(m)?))
    })
}

/// Union of `k` disjoint `a x b` bicliques with uniform edge `weight`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_graph_bicliques(
    k: usize,
    a: usize,
    b: usize,
    weight: f64,
    out: *mut *mut LsGraph,
) -> LsStatus {
    guard(|| put(out, LsGraph(latentstep::ingest::gen_bicliques(k, a, b, weight)?)))
}

/// Graph from a tab-separated edge list file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_graph_from_edge_list(path: *const c_char, out: *mut *mut LsGraph) -> LsStatus {
    guard(|| {
        let path = path_arg(path)?;
        put(out, LsGraph(latentstep::ingest::load_edge_list(path)?))
    })
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_graph_node_count(graph: *const LsGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.n())
}

/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_graph_free(graph: *mut LsGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Fixed latent graph from a symmetric row-major `m * m` array; rescaled to sum 1.
///
/// # Safety
/// `weights` must point to `m * m` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_latent_new_dense(m: usize, weights: *const f64, out: *mut *mut LsLatent) -> LsStatus {
    guard(|| {
        let w = square(m, weights)?;
        put(out, LsLatent(LatentGraph::fixed(w)?))
    })
}

/// Named latent graph: `"clique"` (k nodes), `"biclique"`, `"triangle"`, or
/// `"biclique_union"` (2k nodes). `k` is ignored by the fixed-size presets.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_latent_preset(name: *const c_char, k: usize, out: *mut *mut LsLatent) -> LsStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| invalid("preset name is not valid UTF-8"))?;
        let needs_k = matches!(name, "clique" | "biclique_union");
        if needs_k && k == 0 {
            return Err(invalid(format!("preset {name} needs k >= 1")));
        }
        let latent = match name {
            "clique" => presets::clique(k),
            "biclique" => presets::biclique(),
            "triangle" => presets::triangle(),
            "biclique_union" => presets::biclique_union(k),
            other => return Err(invalid(format!("unknown latent preset {other:?}"))),
        };
        put(out, LsLatent(latent))
    })
}

/// Latent node count, or 0 for a null handle.
///
/// # Safety
/// `latent` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_latent_node_count(latent: *const LsLatent) -> usize {
    latent.as_ref().map_or(0, |w| w.0.m())
}

/// # Safety
/// `latent` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_latent_free(latent: *mut LsLatent) {
    if !latent.is_null() {
        drop(Box::from_raw(latent));
    }
}

/// Fits the model to `graph`.
///
/// With a non-null `latent` that graph stays fixed and `m` must be 0 or equal
/// its size. With a null `latent` an `m`-node latent graph is learned jointly.
/// A null `config` means the defaults.
///
/// # Safety
/// Handles must be live; `config` null or readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_fit(
    graph: *const LsGraph,
    latent: *const LsLatent,
    m: usize,
    config: *const LsFitConfig,
    out: *mut *mut LsFitResult,
) -> LsStatus {
    guard(|| {
        let graph = deref(graph, "graph")?;
        let spec = match latent.as_ref() {
            Some(w) if m != 0 && m != w.0.m() => {
                return Err(invalid(format!("m = {m} but the latent graph has {} nodes", w.0.m())))
            }
            Some(w) => LatentSpec::Fixed(w.0.clone()),
            None if m == 0 => return Err(invalid("m must be at least 1 when learning the latent graph")),
            None => LatentSpec::Trainable { m },
        };
        let config: FitConfig = config
            .as_ref()
            .copied()
            .unwrap_or_else(|| ls_fit_config_default())
            .into();
        put(out, LsFitResult(latentstep::fit(&graph.0, &spec, &config)?))
    })
}

/// Objective value at the returned parameters; NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_final_loss(result: *const LsFitResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.final_loss)
}

/// Cross-entropy part of the final loss; NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_data_term(result: *const LsFitResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.data_term)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_converged(result: *const LsFitResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.converged)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_iterations(result: *const LsFitResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.iterations)
}

/// Seed of the restart that was kept.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_seed_used(result: *const LsFitResult) -> u64 {
    result.as_ref().map_or(0, |r| r.0.seed_used)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_node_count(result: *const LsFitResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.bipartite.n())
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_cluster_count(result: *const LsFitResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.latent.m())
}

/// Copies the row-major `n * m` soft assignment matrix into `buf`.
///
/// # Safety
/// `result` must be live; `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_soft_assignments(
    result: *const LsFitResult,
    buf: *mut f64,
    len: usize,
) -> LsStatus {
    guard(|| copy_out(deref(result, "result")?.0.soft_assignments.probs().as_slice(), buf, len))
}

/// Copies the `n` argmax cluster indices into `buf`.
///
/// # Safety
/// `result` must be live; `buf` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_hard_assignments(
    result: *const LsFitResult,
    buf: *mut usize,
    len: usize,
) -> LsStatus {
    guard(|| copy_out(&deref(result, "result")?.0.hard_assignments, buf, len))
}

/// Copies the row-major `n * n` reconstructed graph into `buf`.
///
/// # Safety
/// `result` must be live; `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_reconstruction(
    result: *const LsFitResult,
    buf: *mut f64,
    len: usize,
) -> LsStatus {
    guard(|| copy_out(deref(result, "result")?.0.reconstruction.weights().as_slice(), buf, len))
}

/// Copies the row-major `m * m` latent graph (fixed or learned) into `buf`.
///
/// # Safety
/// `result` must be live; `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_latent(result: *const LsFitResult, buf: *mut f64, len: usize) -> LsStatus {
    guard(|| copy_out(deref(result, "result")?.0.latent.weights().as_slice(), buf, len))
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_fit_result_free(result: *mut LsFitResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
