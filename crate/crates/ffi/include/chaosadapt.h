#ifndef CHAOSADAPT_H
#define CHAOSADAPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CaStatus {
  CA_STATUS_OK = 0,
  CA_STATUS_NULL_POINTER = 1,
  CA_STATUS_INVALID_ARGUMENT = 2,
  CA_STATUS_DIMENSION_MISMATCH = 3,
  CA_STATUS_INFEASIBLE = 4,
  CA_STATUS_NUMERICAL_FAILURE = 5,
  CA_STATUS_IO = 6,
  CA_STATUS_PARSE = 7,
  CA_STATUS_FORMAT = 8,
  CA_STATUS_OUT_OF_BOUNDS = 9,
  CA_STATUS_PANIC = 10,
} CaStatus;

/**
 * Samples and observations.
 */
typedef struct CaDataset CaDataset;

/**
 * One adapted expansion `u(ξ) ≈ Σ c_k ψ_k(Wξ)`.
 */
typedef struct CaExpansion CaExpansion;

/**
 * Results of a successive adaptation, one per reduced dimension.
 */
typedef struct CaRun CaRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *ca_last_error(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ca_string_free(char *s);

/**
 * Number of total-degree multi-indices in `dim` variables up to `order`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CaStatus ca_count_basis(size_t dim, size_t order, size_t *out);

/**
 * Orthonormal probabilists' Hermite polynomial of degree `n` at `x`.
 */
double ca_hermite(size_t n, double x);

/**
 * Dataset from `n × dim` row-major inputs and `n` outputs.
 *
 * # Safety
 * `inputs` must hold `n * dim` values, `outputs` `n` values.
 */
enum CaStatus ca_dataset_new(const double *inputs,
                             const double *outputs,
                             size_t n,
                             size_t dim,
                             struct CaDataset **out);

/**
 * Reads a dataset CSV (`xi_1,…,xi_d,u` layout).
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum CaStatus ca_dataset_read_csv(const char *path, struct CaDataset **out);

/**
 * # Safety
 * `ds` must be a live handle or NULL.
 */
size_t ca_dataset_len(const struct CaDataset *ds);

/**
 * # Safety
 * `ds` must be a live handle or NULL.
 */
size_t ca_dataset_dim(const struct CaDataset *ds);

/**
 * # Safety
 * `ds` must come from this library and not be freed twice.
 */
void ca_dataset_free(struct CaDataset *ds);

/**
 * Fits reduced dimensions `1..=max_reduced` at polynomial order `order`.
 * `config_json` may be NULL for defaults; otherwise a JSON object whose
 * fields override the defaults (`{"seed": 3, "dr": {"gamma": 0.1}}`).
 *
 * # Safety
 * `ds` must be a live handle, `config_json` NULL or NUL-terminated.
 */
enum CaStatus ca_adapt_successive(const struct CaDataset *ds,
                                  size_t max_reduced,
                                  size_t order,
                                  const char *config_json,
                                  struct CaRun **out);

/**
 * # Safety
 * `run` must be a live handle or NULL.
 */
size_t ca_run_len(const struct CaRun *run);

/**
 * Copies result `index` (reduced dimension `index + 1`) into a new handle.
 *
 * # Safety
 * `run` must be a live handle.
 */
enum CaStatus ca_run_get(const struct CaRun *run, size_t index, struct CaExpansion **out);

/**
 * # Safety
 * `run` must come from this library and not be freed twice.
 */
void ca_run_free(struct CaRun *run);

/**
 * Shape of an expansion. Any output pointer may be NULL.
 *
 * # Safety
 * `e` must be a live handle; non-NULL outputs must be writable.
 */
enum CaStatus ca_expansion_shape(const struct CaExpansion *e,
                                 size_t *reduced_dim,
                                 size_t *input_dim,
                                 size_t *order,
                                 size_t *n_coefficients);

/**
 * Copies the `reduced_dim × input_dim` projection, row-major.
 *
 * # Safety
 * `out` must hold `len` values.
 */
enum CaStatus ca_expansion_projection(const struct CaExpansion *e, double *out, size_t len);

/**
 * Copies the coefficients in graded multi-index order.
 *
 * # Safety
 * `out` must hold `len` values.
 */
enum CaStatus ca_expansion_coefficients(const struct CaExpansion *e, double *out, size_t len);

/**
 * Evaluates at `n` points given row-major as `n × dim`.
 *
 * # Safety
 * `points` must hold `n * dim` values and `out` `n` values.
 */
enum CaStatus ca_expansion_evaluate(const struct CaExpansion *e,
                                    const double *points,
                                    size_t n,
                                    size_t dim,
                                    double *out);

/**
 * Mean and variance under standard Gaussian inputs.
 *
 * # Safety
 * `mean` and `variance` must be writable.
 */
enum CaStatus ca_expansion_moments(const struct CaExpansion *e, double *mean, double *variance);

/**
 * Serializes to the expansion document format. Free with `ca_string_free`.
 *
 * # Safety
 * `e` must be a live handle and `out` writable.
 */
enum CaStatus ca_expansion_to_json(const struct CaExpansion *e, char **out);

/**
 * Parses an expansion document.
 *
 * # Safety
 * `json` must be NUL-terminated and `out` writable.
 */
enum CaStatus ca_expansion_from_json(const char *json, struct CaExpansion **out);

/**
 * # Safety
 * `e` must come from this library and not be freed twice.
 */
void ca_expansion_free(struct CaExpansion *e);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAOSADAPT_H */
