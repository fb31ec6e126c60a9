/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef LATENTSTEP_H
#define LATENTSTEP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  /**
   * Bad argument value (size mismatch, unknown preset, short buffer, ...).
   */
  LS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Input data rejected (asymmetric, negative, isolated node, ...).
   */
  LS_STATUS_VALIDATION = 3,
  /**
   * The loss hit a zero reconstruction entry where the data has mass.
   */
  LS_STATUS_DOMAIN = 4,
  LS_STATUS_IO = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  LS_STATUS_PANIC = 6,
} LsStatus;

/**
 * Outcome of a fit.
 */
typedef struct LsFitResult LsFitResult;

/**
 * Input graph.
 */
typedef struct LsGraph LsGraph;

/**
 * Fixed latent graph.
 */
typedef struct LsLatent LsLatent;

/**
 * Mirror of the core fitting configuration.
 */
typedef struct LsFitConfig {
  uint64_t seed;
  double init_half_width;
  double reg_coefficient;
  size_t memory;
  double grad_tolerance;
  double rel_f_tolerance;
  size_t max_iterations;
  size_t restarts;
} LsFitConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ls_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ls_version(void);

struct LsFitConfig ls_fit_config_default(void);

/**
 * Graph from a row-major `n * n` weight array.
 *
 * # Safety
 * `weights` must point to `n * n` readable doubles; `out` must be writable.
 */
enum LsStatus ls_graph_new_dense(size_t n, const double *weights, struct LsGraph **out);

/**
 * Union of `k` disjoint `a x b` bicliques with uniform edge `weight`.
 *
 * # Safety
 * `out` must be writable.
 */
enum LsStatus ls_graph_bicliques(size_t k, size_t a, size_t b, double weight, struct LsGraph **out);

/**
 * Graph from a tab-separated edge list file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum LsStatus ls_graph_from_edge_list(const char *path, struct LsGraph **out);

/**
 * Node count, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t ls_graph_node_count(const struct LsGraph *graph);

/**
 * # Safety
 * `graph` must be null or a handle not yet freed.
 */
void ls_graph_free(struct LsGraph *graph);

/**
 * Fixed latent graph from a symmetric row-major `m * m` array; rescaled to sum 1.
 *
 * # Safety
 * `weights` must point to `m * m` readable doubles; `out` must be writable.
 */
enum LsStatus ls_latent_new_dense(size_t m, const double *weights, struct LsLatent **out);

/**
 * Named latent graph: `"clique"` (k nodes), `"biclique"`, `"triangle"`, or
 * `"biclique_union"` (2k nodes). `k` is ignored by the fixed-size presets.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum LsStatus ls_latent_preset(const char *name, size_t k, struct LsLatent **out);

/**
 * Latent node count, or 0 for a null handle.
 *
 * # Safety
 * `latent` must be null or a live handle.
 */
size_t ls_latent_node_count(const struct LsLatent *latent);

/**
 * # Safety
 * `latent` must be null or a handle not yet freed.
 */
void ls_latent_free(struct LsLatent *latent);

/**
 * Fits the model to `graph`.
 *
 * With a non-null `latent` that graph stays fixed and `m` must be 0 or equal
 * its size. With a null `latent` an `m`-node latent graph is learned jointly.
 * A null `config` means the defaults.
 *
 * # Safety
 * Handles must be live; `config` null or readable; `out` writable.
 */
enum LsStatus ls_fit(const struct LsGraph *graph,
                     const struct LsLatent *latent,
                     size_t m,
                     const struct LsFitConfig *config,
                     struct LsFitResult **out);

/**
 * Objective value at the returned parameters; NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double ls_fit_result_final_loss(const struct LsFitResult *result);

/**
 * Cross-entropy part of the final loss; NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double ls_fit_result_data_term(const struct LsFitResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
bool ls_fit_result_converged(const struct LsFitResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t ls_fit_result_iterations(const struct LsFitResult *result);

/**
 * Seed of the restart that was kept.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
uint64_t ls_fit_result_seed_used(const struct LsFitResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t ls_fit_result_node_count(const struct LsFitResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t ls_fit_result_cluster_count(const struct LsFitResult *result);

/**
 * Copies the row-major `n * m` soft assignment matrix into `buf`.
 *
 * # Safety
 * `result` must be live; `buf` must hold `len` writable doubles.
 */
enum LsStatus ls_fit_result_soft_assignments(const struct LsFitResult *result,
                                             double *buf,
                                             size_t len);

/**
 * Copies the `n` argmax cluster indices into `buf`.
 *
 * # Safety
 * `result` must be live; `buf` must hold `len` writable values.
 */
enum LsStatus ls_fit_result_hard_assignments(const struct LsFitResult *result,
                                             size_t *buf,
                                             size_t len);

/**
 * Copies the row-major `n * n` reconstructed graph into `buf`.
 *
 * # Safety
 * `result` must be live; `buf` must hold `len` writable doubles.
 */
enum LsStatus ls_fit_result_reconstruction(const struct LsFitResult *result,
                                           double *buf,
                                           size_t len);

/**
 * Copies the row-major `m * m` latent graph (fixed or learned) into `buf`.
 *
 * # Safety
 * `result` must be live; `buf` must hold `len` writable doubles.
 */
enum LsStatus ls_fit_result_latent(const struct LsFitResult *result, double *buf, size_t len);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void ls_fit_result_free(struct LsFitResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LATENTSTEP_H */
