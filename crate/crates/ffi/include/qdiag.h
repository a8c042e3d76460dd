#ifndef QDIAG_H
#define QDIAG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum qd_status {
  QD_STATUS_OK = 0,
  QD_STATUS_NULL_POINTER = 1,
  QD_STATUS_INVALID_UTF8 = 2,
  QD_STATUS_PARSE = 3,
  QD_STATUS_UNKNOWN_NAME = 4,
  QD_STATUS_EVAL = 5,
  QD_STATUS_INVALID_ARGUMENT = 6,
  QD_STATUS_BUFFER_TOO_SMALL = 7,
  QD_STATUS_PANIC = 8,
} qd_status;

/**
 * A parsed program.
 */
typedef struct qd_program qd_program;

/**
 * A dense tensor; shape lists output dims then input dims, entries row-major.
 */
typedef struct qd_tensor qd_tensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` as a
 * NUL-terminated string, truncating if needed. Returns the full message
 * length in bytes, excluding the terminator.
 */
size_t qd_last_error_message(char *buf, size_t len);

/**
 * Parses DSL source text into a program handle.
 */
enum qd_status qd_program_parse(const char *src, struct qd_program **out);

void qd_program_free(struct qd_program *p);

/**
 * Number of declared diagrams.
 */
enum qd_status qd_program_diagram_count(const struct qd_program *p, size_t *out);

/**
 * Evaluates the diagram `name` into a new tensor handle.
 */
enum qd_status qd_program_eval(const struct qd_program *p,
                               const char *name,
                               struct qd_tensor **out);

void qd_tensor_free(struct qd_tensor *t);

/**
 * Number of legs and how many of them are outputs.
 */
enum qd_status qd_tensor_rank(const struct qd_tensor *t, size_t *rank, size_t *outputs);

/**
 * Writes the shape into `dims[0..len]`; `len` must be at least the rank.
 */
enum qd_status qd_tensor_shape(const struct qd_tensor *t, size_t *dims, size_t len);

/**
 * Number of complex entries.
 */
enum qd_status qd_tensor_len(const struct qd_tensor *t, size_t *out);

/**
 * Writes the entries as interleaved `(re, im)` into `data[0..len]`;
 * `len` must be at least twice the entry count.
 */
enum qd_status qd_tensor_data(const struct qd_tensor *t, double *data, size_t len);

/**
 * Largest CHSH value over deterministic hidden-variable strategies.
 */
enum qd_status qd_chsh_lhv_max(double *out);

/**
 * Largest CHSH value for a two-qubit state over planar measurement settings
 * on a grid of `resolution` angles. `state` is a length-4 interleaved vector.
 */
enum qd_status qd_chsh_tsirelson_scan(const double *state, size_t resolution, double *out);

/**
 * Von Neumann entropy in bits of a `dim x dim` density matrix given as
 * interleaved row-major entries.
 */
enum qd_status qd_von_neumann_entropy(const double *rho, size_t dim, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDIAG_H */
