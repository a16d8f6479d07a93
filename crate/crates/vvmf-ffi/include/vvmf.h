#ifndef VVMF_H
#define VVMF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VvmfStatus {
  VVMF_STATUS_OK = 0,
  VVMF_STATUS_NULL_POINTER = 1,
  VVMF_STATUS_INVALID_UTF8 = 2,
  VVMF_STATUS_PARSE = 3,
  VVMF_STATUS_DOMAIN = 4,
  VVMF_STATUS_OUT_OF_RANGE = 5,
  VVMF_STATUS_PANIC = 6,
} VvmfStatus;

// Opaque character-vector expansion.
typedef struct VvmfExpansion VvmfExpansion;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; valid until the next call on this thread.
const char *vvmf_last_error(void);

// Static description of a status code.
const char *vvmf_status_name(enum VvmfStatus status);

// Solve the minimal MLDE of rank 2 or 4 for comma-separated rational `exponents`,
// normalized so every coordinate starts with 1.
//
// # Safety
// `exponents` must be a NUL-terminated string; `out` must be writable.
enum VvmfStatus vvmf_solve(uint32_t rank,
                           const char *exponents,
                           uint32_t n_terms,
                           struct VvmfExpansion **out);

// Expansion of a named built-in instance with its published normalization.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum VvmfStatus vvmf_builtin(const char *name, uint32_t n_terms, struct VvmfExpansion **out);

// Number of coordinates.
//
// # Safety
// `x` must come from this library and not yet be freed.
enum VvmfStatus vvmf_expansion_rank(const struct VvmfExpansion *x, uint32_t *out);

// Coefficient `i` of coordinate `j` as a `"p/q"` string.
//
// # Safety
// `x` must be a live handle; `out` must be writable. Free the result with `vvmf_string_free`.
enum VvmfStatus vvmf_expansion_coeff(const struct VvmfExpansion *x,
                                     uint32_t j,
                                     uint32_t i,
                                     char **out);

// Leading exponent of coordinate `j` as a `"p/q"` string.
//
// # Safety
// As for `vvmf_expansion_coeff`.
enum VvmfStatus vvmf_expansion_exponent(const struct VvmfExpansion *x, uint32_t j, char **out);

// The whole expansion as JSON.
//
// # Safety
// As for `vvmf_expansion_coeff`.
enum VvmfStatus vvmf_expansion_json(const struct VvmfExpansion *x, char **out);

// Conformal verdict against an S-matrix given as JSON `{"d": n, "entries": [[...]]}`.
// Writes 1 for conformal, 0 otherwise.
//
// # Safety
// `x` must be a live handle, `smatrix_json` NUL-terminated, `out` writable.
enum VvmfStatus vvmf_check_conformal(const struct VvmfExpansion *x,
                                     const char *smatrix_json,
                                     uint32_t vacuum,
                                     int32_t *out);

// Rank-2 extremal dim M0 for rational strings `c`, `h`; `integral` gets 1 when within 1e-6 of an integer.
//
// # Safety
// `c`, `h` NUL-terminated; `value`, `integral` writable.
enum VvmfStatus vvmf_dim_m0(const char *c,
                            const char *h,
                            double *value,
                            int32_t *integral);

// Release an expansion handle; null is ignored.
//
// # Safety
// `x` must be null or a handle not yet freed.
void vvmf_expansion_free(struct VvmfExpansion *x);

// Release a string returned by this library; null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void vvmf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VVMF_H */
