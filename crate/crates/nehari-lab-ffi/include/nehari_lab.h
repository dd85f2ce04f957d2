#ifndef NEHARI_LAB_H
#define NEHARI_LAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum NlStatus {
  NL_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NL_STATUS_NULL_POINTER = 1,
  /**
   * An argument is outside its documented range.
   */
  NL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The parameters are valid but outside the regime of the operation.
   */
  NL_STATUS_OUT_OF_REGIME = 3,
  /**
   * The requested Nehari branch does not exist for this ray.
   */
  NL_STATUS_NO_BRANCH = 4,
  /**
   * A numerical kernel failed (shooting, non-finite values).
   */
  NL_STATUS_NUMERICAL = 5,
  /**
   * A caller-supplied buffer is too small.
   */
  NL_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * A panic was caught at the boundary.
   */
  NL_STATUS_PANIC = 7,
} NlStatus;

typedef enum NlScheme {
  NL_SCHEME_UNIFORM = 0,
  NL_SCHEME_LOG = 1,
} NlScheme;

typedef enum NlSolveMode {
  NL_SOLVE_MODE_GLOBAL = 0,
  NL_SOLVE_MODE_NEHARI_MINUS = 1,
} NlSolveMode;

/**
 * Opaque radial grid.
 */
typedef struct NlGrid NlGrid;

/**
 * Opaque solve report.
 */
typedef struct NlReport NlReport;

/**
 * Nehari class codes: 0 none, 1 Minus, 2 Zero, 3 Plus.
 */
typedef struct NlRoots {
  uint32_t count;
  /**
   * NaN when absent.
   */
  double t_minus;
  double t_plus;
  int32_t class_minus;
  int32_t class_plus;
} NlRoots;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nl_version(void);

/**
 * The message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *nl_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void nl_string_free(char *s);

/**
 * Creates a grid with `n` nodes on [0, r_max].
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum NlStatus nl_grid_new(size_t n, double r_max, enum NlScheme scheme, struct NlGrid **out);

/**
 * # Safety
 * `grid` must come from `nl_grid_new` and not have been freed. Null is ignored.
 */
void nl_grid_free(struct NlGrid *grid);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live grid handle.
 */
size_t nl_grid_len(const struct NlGrid *grid);

/**
 * Copies the node radii into `buf` (capacity `len`).
 *
 * # Safety
 * `grid` must be a live grid handle and `buf` valid for `len` writes.
 */
enum NlStatus nl_grid_nodes(const struct NlGrid *grid, double *buf, size_t len);

/**
 * Maximizer s_β ∈ [0, ½] and maximum of g_β.
 *
 * # Safety
 * `s_out` and `g_out` must be valid for one write each.
 */
enum NlStatus nl_g_beta(double p, double beta, double *s_out, double *g_out);

/**
 * Nehari times of h(t) = (t²/2)A + (λt⁴/4)B − (t^p/p)C.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum NlStatus nl_fibering_roots(double a,
                                double b,
                                double c,
                                double p,
                                double lambda,
                                struct NlRoots *out);

/**
 * Threshold report as a JSON string (free with `nl_string_free`).
 *
 * # Safety
 * `grid` must be a live grid handle and `out` valid for one write.
 */
enum NlStatus nl_thresholds_json(const struct NlGrid *grid,
                                 double p,
                                 double lambda,
                                 double beta,
                                 double kappa,
                                 char **out);

/**
 * Runs one solve with default settings. A Minus-branch report is also
 * passed through ground-state certification.
 *
 * # Safety
 * `grid` must be a live grid handle and `out` valid for one write.
 */
enum NlStatus nl_solve(const struct NlGrid *grid,
                       double p,
                       double lambda,
                       double beta,
                       double kappa,
                       enum NlSolveMode mode,
                       struct NlReport **out);

/**
 * # Safety
 * `report` must come from `nl_solve` and not have been freed. Null is ignored.
 */
void nl_report_free(struct NlReport *report);

/**
 * Energy J of the reported pair, NaN for a null handle.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
double nl_report_energy(const struct NlReport *report);

/**
 * Euler–Lagrange residual norm, NaN for a null handle.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
double nl_report_residual(const struct NlReport *report);

/**
 * 1 if the solve converged, 0 otherwise (including a null handle).
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
int32_t nl_report_converged(const struct NlReport *report);

/**
 * Nehari class code of the reported pair (see `NlRoots`).
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
int32_t nl_report_class(const struct NlReport *report);

/**
 * Copies component 0 (u) or 1 (v) of the solution into `buf`.
 *
 * # Safety
 * `report` must be a live report handle and `buf` valid for `len` writes.
 */
enum NlStatus nl_report_profile(const struct NlReport *report,
                                uint32_t component,
                                double *buf,
                                size_t len);

/**
 * The full report as JSON (free with `nl_string_free`).
 *
 * # Safety
 * `report` must be a live report handle and `out` valid for one write.
 */
enum NlStatus nl_report_json(const struct NlReport *report, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEHARI_LAB_H */
