#ifndef CHARP_H
#define CHARP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Ring operations available through [`charp_ring_op`].
typedef enum CharpOp {
  CHARP_OP_ADD = 0,
  CHARP_OP_SUB = 1,
  CHARP_OP_MUL = 2,
  // Inverse of `a`; `b` is ignored.
  CHARP_OP_INV = 3,
} CharpOp;

// Result codes returned by every function.
typedef enum CharpStatus {
  CHARP_STATUS_OK = 0,
  CHARP_STATUS_NULL_POINTER = 1,
  CHARP_STATUS_INVALID_UTF8 = 2,
  CHARP_STATUS_INVALID_ARGUMENT = 3,
  CHARP_STATUS_UNKNOWN_SCENARIO = 4,
  CHARP_STATUS_BUDGET = 5,
  CHARP_STATUS_NOT_INVERTIBLE = 6,
  CHARP_STATUS_INTERNAL = 7,
  CHARP_STATUS_PANIC = 8,
} CharpStatus;

// The report of one scenario run.
typedef struct CharpReport CharpReport;

// A coefficient ring.
typedef struct CharpRing CharpRing;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The engine version as a static NUL-terminated string.
const char *charp_version(void);

// The message of the last failed call on this thread (empty after a success).
// The pointer stays valid until the next charp call on the same thread.
const char *charp_last_error(void);

// Create the prime field `F_p`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum CharpStatus charp_ring_fp(uint64_t p, struct CharpRing **out);

// Create the Galois field `F_{p^r}` with the default modulus.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum CharpStatus charp_ring_gf(uint64_t p, uint32_t r, struct CharpRing **out);

// Create `Z/p^e`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum CharpStatus charp_ring_zpe(uint64_t p, uint32_t e, struct CharpRing **out);

// Release a ring handle. Passing null is a no-op.
//
// # Safety
// `ring` must be null or a handle returned by a `charp_ring_*` constructor
// that has not been freed.
void charp_ring_free(struct CharpRing *ring);

// Number of elements of the ring; elements are encoded as `0..order`.
//
// # Safety
// `ring` must be a live ring handle and `out` a valid writable pointer.
enum CharpStatus charp_ring_order(const struct CharpRing *ring, uint64_t *out);

// Apply a ring operation to encoded elements.
//
// # Safety
// `ring` must be a live ring handle, `op` one of the declared [`CharpOp`]
// values and `out` a valid writable pointer.
enum CharpStatus charp_ring_op(const struct CharpRing *ring,
                               enum CharpOp op,
                               uint64_t a,
                               uint64_t b,
                               uint64_t *out);

// Rank of a `rows x cols` matrix over a field, given row-major.
//
// # Safety
// `ring` must be a live ring handle, `data` must point to `rows * cols`
// readable elements (may be null when that product is zero) and `out` must be
// a valid writable pointer.
enum CharpStatus charp_matrix_rank(const struct CharpRing *ring,
                                   size_t rows,
                                   size_t cols,
                                   const uint64_t *data,
                                   size_t *out);

// Cokernel of a matrix over a local ring such as `Z/p^e`: writes the
// exponents `e_i` of the cyclic summands `R/p^{e_i}` (ascending) to `exps`
// and their number to `len`. At most `cap` exponents are written; if more
// are needed `len` receives the required count and `InvalidArgument` is
// returned.
//
// # Safety
// `ring` must be a live ring handle, `data` must point to `rows * cols`
// readable elements, `exps` must point to `cap` writable slots (may be null
// when `cap` is zero) and `len` must be a valid writable pointer.
enum CharpStatus charp_matrix_cokernel(const struct CharpRing *ring,
                                       size_t rows,
                                       size_t cols,
                                       const uint64_t *data,
                                       uint32_t *exps,
                                       size_t cap,
                                       size_t *len);

// Number of registered scenarios.
size_t charp_scenario_count(void);

// Id of scenario `index` as a static string, or null when out of range.
const char *charp_scenario_id(size_t index);

// Run a scenario. Negative `p`, `q`, `dim` or `seed` select the default.
// The budget comes from `CHARP_BUDGET_PROFILE`.
//
// # Safety
// `id` must be a NUL-terminated string and `out` a valid pointer to writable
// storage for one handle.
enum CharpStatus charp_run(const char *id,
                           int64_t p,
                           int64_t q,
                           int64_t dim,
                           int64_t seed,
                           struct CharpReport **out);

// Whether the report passed (1) or not (0); skipped runs never pass.
//
// # Safety
// `report` must be null or a live report handle.
int32_t charp_report_pass(const struct CharpReport *report);

// Whether the run was skipped for exceeding the budget (1) or not (0).
//
// # Safety
// `report` must be null or a live report handle.
int32_t charp_report_skipped(const struct CharpReport *report);

// The report as a JSON string, owned by the caller and released with
// [`charp_string_free`].
//
// # Safety
// `report` must be a live report handle and `out` a valid writable pointer.
enum CharpStatus charp_report_json(const struct CharpReport *report, char **out);

// Release a report handle. Passing null is a no-op.
//
// # Safety
// `report` must be null or a handle returned by [`charp_run`] that has not
// been freed.
void charp_report_free(struct CharpReport *report);

// Release a string returned by this library. Passing null is a no-op.
//
// # Safety
// `s` must be null or a string returned by [`charp_report_json`] that has not
// been freed.
void charp_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CHARP_H */
