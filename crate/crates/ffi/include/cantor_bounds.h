#ifndef CANTOR_BOUNDS_H
#define CANTOR_BOUNDS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Seed diameter for the lower-bound refinement.
typedef enum CbSeed {
  CB_SEED_FIVE_NINTHS = 0,
  CB_SEED_ONE_THIRD = 1,
} CbSeed;

// Outcome of a library call.
typedef enum CbStatus {
  CB_STATUS_OK = 0,
  CB_STATUS_INVALID_ARGUMENT = 1,
  CB_STATUS_BUDGET_EXCEEDED = 2,
  CB_STATUS_REPLAY_FAILED = 3,
  CB_STATUS_EMPTY_CACHE = 4,
  CB_STATUS_NULL_POINTER = 5,
  CB_STATUS_IO = 6,
  CB_STATUS_INTERNAL = 7,
} CbStatus;

// A certified upper or lower bound.
typedef struct CbBound CbBound;

// A lower-bound refinement chain.
typedef struct CbChain CbChain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *cb_last_error(void);

// Library version as a static NUL-terminated string.
const char *cb_version(void);

// `d log_3 2`, nearest double; NaN outside the supported range.
double cb_dimension(uint32_t dim);

// Cover-by-cube bound `d^{s_d / 2}`, rounded up.
//
// # Safety
// `out` must be null or valid for a write of one `double`.
enum CbStatus cb_naive_upper(uint32_t dim, double *out);

// Upper bound at depth `depth`; `budget` caps the number of lattice points
// (0 selects the default).
//
// # Safety
// `out` must be null or valid for a write of one pointer.
enum CbStatus cb_upper_bound(uint32_t dim, uint32_t depth, uint64_t budget, struct CbBound **out);

// # Safety
// `bound` must be null or a live handle from this library.
double cb_bound_value(const struct CbBound *bound);

// # Safety
// `bound` must be null or a live handle from this library.
uint32_t cb_bound_dim(const struct CbBound *bound);

// # Safety
// `bound` must be null or a live handle from this library.
uint32_t cb_bound_depth(const struct CbBound *bound);

// 1 for an upper bound, 0 for a lower bound, -1 for null.
//
// # Safety
// `bound` must be null or a live handle from this library.
int32_t cb_bound_is_upper(const struct CbBound *bound);

// The bound as JSON; free with [`cb_string_free`]. Null on failure.
//
// # Safety
// `bound` must be null or a live handle from this library.
char *cb_bound_to_json(const struct CbBound *bound);

// # Safety
// `bound` must be null or a handle from this library not yet freed.
void cb_bound_free(struct CbBound *bound);

// Lower-bound refinement against the upper bound `upper`.
//
// # Safety
// `upper` must be a live bound handle; `out` must be null or valid for a
// write of one pointer.
enum CbStatus cb_lower_bound(uint32_t dim,
                             uint32_t depth,
                             const struct CbBound *upper,
                             enum CbSeed seed,
                             struct CbChain **out);

// Replays the published three-dimensional level-2 chain. On a failed check
// the status is [`CbStatus::ReplayFailed`] and `out` still receives the
// chain of the steps verified before it.
//
// # Safety
// As for [`cb_lower_bound`].
enum CbStatus cb_replay_d3(const struct CbBound *upper, struct CbChain **out);

// # Safety
// `chain` must be null or a live handle from this library.
double cb_chain_final_value(const struct CbChain *chain);

// Final squared diameter bound as `numerator / denominator`, when both fit.
//
// # Safety
// `chain` must be a live handle; `num` and `den` must be valid for writes.
enum CbStatus cb_chain_final_diameter_sq(const struct CbChain *chain, uint64_t *num, uint64_t *den);

// # Safety
// `chain` must be null or a live handle from this library.
size_t cb_chain_step_count(const struct CbChain *chain);

// The chain's lower bound as a new bound handle.
//
// # Safety
// `chain` must be null or a live handle from this library.
struct CbBound *cb_chain_bound(const struct CbChain *chain);

// The chain as JSON; free with [`cb_string_free`].
//
// # Safety
// `chain` must be null or a live handle from this library.
char *cb_chain_to_json(const struct CbChain *chain);

// # Safety
// `chain` must be null or a handle from this library not yet freed.
void cb_chain_free(struct CbChain *chain);

// # Safety
// `s` must be null or a string returned by this library not yet freed.
void cb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CANTOR_BOUNDS_H */
