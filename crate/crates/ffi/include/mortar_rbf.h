#ifndef MORTAR_RBF_H
#define MORTAR_RBF_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum MrStatus {
  MR_STATUS_OK = 0,
  MR_STATUS_NULL_POINTER = 1,
  MR_STATUS_INVALID_ARGUMENT = 2,
  MR_STATUS_DIMENSION_MISMATCH = 3,
  MR_STATUS_ILL_CONDITIONED = 4,
  MR_STATUS_SINGULAR_D = 5,
  MR_STATUS_INVALID_GEOMETRY = 6,
  MR_STATUS_SOLVER_FAILURE = 7,
  MR_STATUS_PANIC = 8,
  MR_STATUS_OTHER = 9,
} MrStatus;

/**
 * Interface element kinds, passed as `int`.
 */
typedef enum MrElementKind {
  MR_ELEMENT_KIND_SEG2 = 0,
  MR_ELEMENT_KIND_SEG3 = 1,
  MR_ELEMENT_KIND_QUAD4 = 2,
  MR_ELEMENT_KIND_QUAD8 = 3,
} MrElementKind;

/**
 * Quadrature schemes, passed as `int`.
 */
typedef enum MrScheme {
  MR_SCHEME_RB = 0,
  MR_SCHEME_EB = 1,
  MR_SCHEME_SB1D = 2,
} MrScheme;

/**
 * Kernel families for the RB scheme, passed as `int`.
 */
typedef enum MrKernel {
  MR_KERNEL_GAUSSIAN = 0,
  MR_KERNEL_INV_MULTIQUADRIC = 1,
  MR_KERNEL_WENDLAND_C2 = 2,
} MrKernel;

/**
 * Interface mesh handle.
 */
typedef struct MrMesh MrMesh;

/**
 * Assembled mortar operator `E = D^-1 M` with its diagnostics.
 */
typedef struct MrOperator MrOperator;

/**
 * Assembly settings. `max_condition <= 0` disables the kernel-matrix condition check.
 */
typedef struct MrConfig {
  int scheme;
  /**
   * Gauss points per slave element (total, a square number on quadrilaterals).
   */
  size_t n_gauss;
  int kernel;
  /**
   * Interpolation points per edge.
   */
  size_t n_m;
  double max_condition;
} MrConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a NUL-terminated string with static lifetime.
 */
const char *mr_version(void);

/**
 * Copies the last error message of the calling thread into `buf` (truncated,
 * always NUL-terminated when `len > 0`) and returns the full length including the NUL.
 * Pass a null `buf` to query the length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t mr_last_error_message(char *buf, size_t len);

/**
 * Default settings: RB scheme, Gaussian kernel, `n_M = 6`, 2 Gauss points and
 * the default condition ceiling.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `MrConfig`.
 */
enum MrStatus mr_config_default(struct MrConfig *out);

/**
 * Builds an interface mesh from `n_nodes` points of `dim` coordinates each
 * (row-major) and `n_connectivity` node indices, `node_count(kind)` per element.
 *
 * # Safety
 * `nodes` must hold `n_nodes * dim` values, `connectivity` `n_connectivity`
 * values, and `out` must be writable.
 */
enum MrStatus mr_mesh_new(size_t dim,
                          const double *nodes,
                          size_t n_nodes,
                          int kind,
                          const size_t *connectivity,
                          size_t n_connectivity,
                          struct MrMesh **out);

/**
 * Uniform mesh of `[a, b]` on the x-axis with `n` elements.
 *
 * # Safety
 * `out` must be writable.
 */
enum MrStatus mr_mesh_interval(double a, double b, size_t n, int kind, struct MrMesh **out);

/**
 * `n x n` mesh of `[-1, 1]^2` lifted by `z = amplitude sin(pi (x+1)/2) sin(pi (y+1)/2)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MrStatus mr_mesh_square(size_t n, int kind, double amplitude, struct MrMesh **out);

/**
 * # Safety
 * `mesh` must be a live handle and `out` writable.
 */
enum MrStatus mr_mesh_node_count(const struct MrMesh *mesh, size_t *out);

/**
 * Releases a mesh; null is ignored.
 *
 * # Safety
 * `mesh` must be null or a handle not yet freed.
 */
void mr_mesh_free(struct MrMesh *mesh);

/**
 * Assembles `D` and `M` for the pair and factors `E = D^-1 M`. The meshes are
 * copied, so they may be freed afterwards.
 *
 * # Safety
 * `master` and `slave` must be live handles, `config` valid and `out` writable.
 */
enum MrStatus mr_assemble(const struct MrMesh *master,
                          const struct MrMesh *slave,
                          const struct MrConfig *config,
                          struct MrOperator **out);

/**
 * Rows (slave nodes) and columns (master nodes) of `E`.
 *
 * # Safety
 * `op` must be a live handle; `rows` and `cols` writable.
 */
enum MrStatus mr_operator_dims(const struct MrOperator *op, size_t *rows, size_t *cols);

/**
 * `max |sum_k E[i, k] - 1|` over covered slave nodes.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum MrStatus mr_operator_row_sum_defect(const struct MrOperator *op, double *out);

/**
 * Fraction of slave Gauss points discarded by support detection.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum MrStatus mr_operator_dropped_fraction(const struct MrOperator *op, double *out);

/**
 * `u_slave = E u_master`.
 *
 * # Safety
 * `u_master` must hold `n_master` values and `u_slave` have room for `n_slave`.
 */
enum MrStatus mr_operator_transfer(const struct MrOperator *op,
                                   const double *u_master,
                                   size_t n_master,
                                   double *u_slave,
                                   size_t n_slave);

/**
 * Writes `E` densely in row-major order into `out`, which holds `len` values.
 *
 * # Safety
 * `op` must be a live handle and `out` valid for `len` values.
 */
enum MrStatus mr_operator_dense(const struct MrOperator *op, double *out, size_t len);

/**
 * Releases an operator; null is ignored.
 *
 * # Safety
 * `op` must be null or a handle not yet freed.
 */
void mr_operator_free(struct MrOperator *op);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MORTAR_RBF_H */
