#ifndef MMNET_H
#define MMNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum MmnetStatus {
  MMNET_STATUS_OK = 0,
  MMNET_STATUS_NULL_POINTER = 1,
  MMNET_STATUS_INVALID_UTF8 = 2,
  MMNET_STATUS_PARSE_ERROR = 3,
  MMNET_STATUS_INVALID_ARGUMENT = 4,
  MMNET_STATUS_BUDGET_EXHAUSTED = 5,
  MMNET_STATUS_PANIC = 6,
} MmnetStatus;

/**
 * Region selector for [`mmnet_region_membership`].
 */
typedef enum MmnetRegion {
  MMNET_REGION_OUT = 0,
  MMNET_REGION_OUT_STAR = 1,
  /**
   * Inner region at the uniform input.
   */
  MMNET_REGION_IN = 2,
  /**
   * Cut-set region at the uniform input.
   */
  MMNET_REGION_CUT_SET = 3,
  MMNET_REGION_PRIME = 4,
} MmnetRegion;

/**
 * Membership verdict.
 */
typedef enum MmnetVerdict {
  MMNET_VERDICT_MEMBER = 0,
  MMNET_VERDICT_NON_MEMBER = 1,
  MMNET_VERDICT_BOUNDARY = 2,
} MmnetVerdict;

/**
 * Opaque code handle.
 */
typedef struct MmnetCode MmnetCode;

/**
 * Opaque network handle.
 */
typedef struct MmnetNetwork MmnetNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer
 * stays valid until the next failing call on this thread.
 */
const char *mmnet_last_error_message(void);

/**
 * Parses a network from JSON text.
 *
 * # Safety
 * `json` is a nul-terminated string; `out` is valid for writes.
 */
enum MmnetStatus mmnet_network_from_json(const char *json, struct MmnetNetwork **out);

/**
 * Loads a bundled network by name (`bsc2`, `bec2`, `line3`,
 * `line3_feedback`, `erasure_relay3`).
 *
 * # Safety
 * `name` is a nul-terminated string; `out` is valid for writes.
 */
enum MmnetStatus mmnet_network_from_fixture(const char *name, struct MmnetNetwork **out);

/**
 * Releases a network; null is ignored.
 *
 * # Safety
 * `network` is null or came from this API and was not freed before.
 */
void mmnet_network_free(struct MmnetNetwork *network);

/**
 * # Safety
 * `network` is a live handle; `out` is valid for writes.
 */
enum MmnetStatus mmnet_network_node_count(const struct MmnetNetwork *network, size_t *out);

/**
 * Capacity in bits of the link `from → to` of an independent-link network.
 *
 * # Safety
 * `network` is a live handle; `out` is valid for writes.
 */
enum MmnetStatus mmnet_link_capacity(const struct MmnetNetwork *network,
                                     size_t from,
                                     size_t to,
                                     double *out);

/**
 * Membership of `rates` (one per node) in `region`.
 *
 * # Safety
 * `network` is a live handle; `rates` is valid for `len` reads; `out` is
 * valid for writes.
 */
enum MmnetStatus mmnet_region_membership(const struct MmnetNetwork *network,
                                         const double *rates,
                                         size_t len,
                                         enum MmnetRegion region,
                                         enum MmnetVerdict *out);

/**
 * Draws a random code with ML decoding. `rates` has one entry per node.
 *
 * # Safety
 * `network` is a live handle; `rates` is valid for `len` reads; `out` is
 * valid for writes.
 */
enum MmnetStatus mmnet_code_random(const struct MmnetNetwork *network,
                                   const double *rates,
                                   size_t len,
                                   size_t n,
                                   uint64_t seed,
                                   struct MmnetCode **out);

/**
 * Repetition code: `n / copies` message bits, each sent `copies` times.
 *
 * # Safety
 * `network` is a live handle; `out` is valid for writes.
 */
enum MmnetStatus mmnet_code_repetition(const struct MmnetNetwork *network,
                                       size_t n,
                                       size_t copies,
                                       struct MmnetCode **out);

/**
 * Releases a code; null is ignored.
 *
 * # Safety
 * `code` is null or came from this API and was not freed before.
 */
void mmnet_code_free(struct MmnetCode *code);

/**
 * Exact average error probability, enumerating at most `budget` trajectories.
 *
 * # Safety
 * Handles are live; `out` is valid for writes.
 */
enum MmnetStatus mmnet_code_exact_error(const struct MmnetNetwork *network,
                                        const struct MmnetCode *code,
                                        size_t budget,
                                        double *out);

/**
 * Monte Carlo error estimate with a 95% confidence half-width.
 *
 * # Safety
 * Handles are live; `point` and `half_width` are valid for writes.
 */
enum MmnetStatus mmnet_code_monte_carlo_error(const struct MmnetNetwork *network,
                                              const struct MmnetCode *code,
                                              uint64_t trials,
                                              uint64_t seed,
                                              double *point,
                                              double *half_width);

/**
 * Evaluates the converse chain of `code` across `cut` towards destination
 * `d` at order `lambda > 1` with error bound `eps_bar`. Writes whether
 * every step held and the Rényi Fano term in bits.
 *
 * # Safety
 * Handles are live; `passed` and `lhs_bits` are valid for writes.
 */
enum MmnetStatus mmnet_certificate(const struct MmnetNetwork *network,
                                   const struct MmnetCode *code,
                                   uint32_t cut_bits,
                                   size_t d,
                                   double lambda,
                                   double eps_bar,
                                   size_t budget,
                                   bool *passed,
                                   double *lhs_bits);

/**
 * `D_λ(p‖q)` in bits for two pmfs of length `len`, `λ ≥ 1`.
 *
 * # Safety
 * `p` and `q` are valid for `len` reads; `out` is valid for writes.
 */
enum MmnetStatus mmnet_renyi_divergence(const double *p,
                                        const double *q,
                                        size_t len,
                                        double lambda,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MMNET_H */
