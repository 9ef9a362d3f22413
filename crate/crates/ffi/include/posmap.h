#ifndef POSMAP_H
#define POSMAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum PosmapStatus {
  POSMAP_STATUS_OK = 0,
  POSMAP_STATUS_NULL_POINTER = 1,
  POSMAP_STATUS_INVALID_ARGUMENT = 2,
  POSMAP_STATUS_DIMENSION_MISMATCH = 3,
  POSMAP_STATUS_NOT_HERMITIAN = 4,
  POSMAP_STATUS_NOT_PSD = 5,
  POSMAP_STATUS_NOT_CP = 6,
  POSMAP_STATUS_NOT_A_STATE = 7,
  POSMAP_STATUS_NOT_ABSOLUTELY_CONTINUOUS = 8,
  POSMAP_STATUS_ROUTE_DISAGREEMENT = 9,
  POSMAP_STATUS_PANIC = 10,
} PosmapStatus;

// Outcome of a property test.
typedef enum PosmapVerdict {
  POSMAP_VERDICT_CERTIFIED_YES = 0,
  POSMAP_VERDICT_CERTIFIED_NO = 1,
  POSMAP_VERDICT_NO_VIOLATION_FOUND = 2,
  POSMAP_VERDICT_INCONCLUSIVE = 3,
} PosmapVerdict;

// Opaque bipartite operator on `C^d1 (x) C^d2`.
typedef struct PosmapOperator PosmapOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the
// next failing call on the same thread.
const char *posmap_last_error(void);

// Builds an operator of size `(d1*d2) x (d1*d2)` from `2*(d1*d2)^2`
// interleaved doubles.
//
// # Safety
// `data` must point to `len` readable doubles and `out` must be writable.
enum PosmapStatus posmap_operator_new(size_t d1,
                                      size_t d2,
                                      const double *data,
                                      size_t len,
                                      struct PosmapOperator **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `h` must come from this library and not be used afterwards.
void posmap_operator_free(struct PosmapOperator *h);

// Factor dimensions of a handle.
//
// # Safety
// `h` must be a live handle; `d1` and `d2` must be writable.
enum PosmapStatus posmap_operator_dims(const struct PosmapOperator *h, size_t *d1, size_t *d2);

// Copies the entries as interleaved doubles into `buf` of length `len`.
//
// # Safety
// `h` must be a live handle and `buf` must hold `len` writable doubles.
enum PosmapStatus posmap_operator_data(const struct PosmapOperator *h, double *buf, size_t len);

// Seeded random density matrix on `C^d1 (x) C^d2`.
//
// # Safety
// `out` must be writable.
enum PosmapStatus posmap_random_state(uint64_t seed,
                                      size_t d1,
                                      size_t d2,
                                      struct PosmapOperator **out);

// Werner state on `C^d (x) C^d` with antisymmetric weight `p`.
//
// # Safety
// `out` must be writable.
enum PosmapStatus posmap_werner(size_t d, double p, struct PosmapOperator **out);

// Complete positivity of the map whose Choi matrix is `choi`. `value` is
// the smallest Choi eigenvalue.
//
// # Safety
// `choi` must be a live handle; `verdict` and `value` must be writable.
enum PosmapStatus posmap_is_cp(const struct PosmapOperator *choi,
                               double tol,
                               enum PosmapVerdict *verdict,
                               double *value);

// Block positivity by seeded product-vector search. `value` is the least
// product expectation found.
//
// # Safety
// `choi` must be a live handle; `verdict` and `value` must be writable.
enum PosmapStatus posmap_is_block_positive(const struct PosmapOperator *choi,
                                           double tol,
                                           size_t restarts,
                                           uint64_t seed,
                                           enum PosmapVerdict *verdict,
                                           double *value);

// PPT test of a state. `min_eig` is the smallest partial-transpose
// eigenvalue.
//
// # Safety
// `state` must be a live handle; `ppt` and `min_eig` must be writable.
enum PosmapStatus posmap_ppt_check(const struct PosmapOperator *state,
                                   double tol,
                                   bool *ppt,
                                   double *min_eig);

// Certified interval for the α norm (square factors only).
//
// # Safety
// `h` must be a live handle; `lower` and `upper` must be writable.
enum PosmapStatus posmap_alpha_norm(const struct PosmapOperator *h,
                                    uint64_t seed,
                                    double *lower,
                                    double *upper);

// Certified interval for the projective norm. `r_max == 0` selects the
// default term budget.
//
// # Safety
// `h` must be a live handle; `lower` and `upper` must be writable.
enum PosmapStatus posmap_pi_norm(const struct PosmapOperator *h,
                                 size_t r_max,
                                 uint64_t seed,
                                 double *lower,
                                 double *upper);

// Radon-Nikodym derivative `D` of `phi` with respect to `psi`, both given
// by Choi matrices with `d1 = din`, `d2 = dout`.
//
// # Safety
// `phi` and `psi` must be live handles; `out` and `residual` must be
// writable.
enum PosmapStatus posmap_rn_derivative(const struct PosmapOperator *phi,
                                       const struct PosmapOperator *psi,
                                       double tol,
                                       struct PosmapOperator **out,
                                       double *residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POSMAP_H */
