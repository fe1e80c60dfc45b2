#ifndef BOTT_H
#define BOTT_H

/* Generated by the bott-ffi build script; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define BOTT_OK 0

#define BOTT_ERR_NULL_ARGUMENT 1

#define BOTT_ERR_PARSE 2

#define BOTT_ERR_DIMENSION 3

#define BOTT_ERR_BUFFER_TOO_SMALL 4

#define BOTT_ERR_INTERNAL 5

/**
 * Opaque matrix value.
 */
typedef struct BottMatrixHandle BottMatrixHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null when the
 * last call succeeded. The pointer stays valid until the next failing
 * call on the same thread.
 */
const char *bott_last_error_message(void);

/**
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
int32_t bott_matrix_parse(const char *text, struct BottMatrixHandle **out);

/**
 * Releases a handle returned by this library. Null is accepted.
 *
 * # Safety
 * `m` must be a handle from this library that has not been freed yet.
 */
void bott_matrix_free(struct BottMatrixHandle *m);

/**
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
int32_t bott_matrix_dim(const struct BottMatrixHandle *m, size_t *out);

/**
 * Row-major entry bitmask key of the matrix.
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
int32_t bott_matrix_key(const struct BottMatrixHandle *m, uint64_t *out);

/**
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
int32_t bott_matrix_is_orientable(const struct BottMatrixHandle *m, bool *out);

/**
 * Writes the type signature parts into `out` (capacity `cap`) and the
 * part count into `written`. When the capacity is too small nothing is
 * written except the required count.
 *
 * # Safety
 * `m` must be a live handle; `out` must point to at least `cap` slots;
 * `written` must be a valid pointer.
 */
int32_t bott_matrix_type_signature(const struct BottMatrixHandle *m,
                                   size_t *out,
                                   size_t cap,
                                   size_t *written);

/**
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
int32_t bott_matrix_normal_form(const struct BottMatrixHandle *m, struct BottMatrixHandle **out);

/**
 * Size of the conjugation orbit: over all permutations, or restricted to
 * conjugates that are again normal forms.
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
int32_t bott_matrix_orbit_size(const struct BottMatrixHandle *m,
                               bool normal_forms_only,
                               size_t *out);

/**
 * Formats the matrix in the text file format accepted by
 * [`bott_matrix_parse`].
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
int32_t bott_matrix_format(const struct BottMatrixHandle *m, char **out);

/**
 * Decides whether the manifolds of two matrices are diffeomorphic, by
 * testing their cohomology rings for graded isomorphism.
 *
 * # Safety
 * `a` and `b` must be live handles and `out` a valid pointer.
 */
int32_t bott_isomorphic(const struct BottMatrixHandle *a,
                        const struct BottMatrixHandle *b,
                        bool *out);

/**
 * Classifies one dimension and returns the full report as a JSON string.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t bott_classify_json(size_t dim, char **out);

/**
 * Releases a string returned by this library. Null is accepted.
 *
 * # Safety
 * `s` must be a string from this library that has not been freed yet.
 */
void bott_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOTT_H */
