#ifndef K3TWIST_H
#define K3TWIST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum K3Status {
  K3_OK = 0,
  /**
   * The search ended without a certificate; not an error.
   */
  K3_INCONCLUSIVE = 1,
  K3_NULL_POINTER = 2,
  K3_INVALID_ARGUMENT = 3,
  K3_NOT_SQUAREFREE = 4,
  K3_OFF_CURVE = 5,
  K3_BUDGET_EXCEEDED = 6,
  K3_EXCEPTIONAL = 7,
  K3_INTERNAL = 8,
} K3Status;

/**
 * Exact surface points generated from a certificate.
 */
typedef struct K3Atlas K3Atlas;

/**
 * A verified SPR certificate.
 */
typedef struct K3Certificate K3Certificate;

/**
 * A surface `d(1 + a²T⁴)Y² = X³ - X`.
 */
typedef struct K3Family K3Family;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last error on this thread, or NULL. The caller owns
 * the returned string.
 */
char *k3_last_error_message(void);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void k3_string_free(char *s);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum K3Status k3_family_new(int64_t d, int64_t a, struct K3Family **out);

/**
 * # Safety
 * `f` must come from `k3_family_new` and not be freed twice.
 */
void k3_family_free(struct K3Family *f);

/**
 * Search for an SPR(C) certificate. Returns `K3_INCONCLUSIVE` and sets
 * `*out` to NULL when some leg has no witness within `height`.
 *
 * # Safety
 * `family` must be a live handle and `out` a valid pointer.
 */
enum K3Status k3_spr_check(const struct K3Family *family,
                           int64_t c,
                           uint64_t height,
                           bool allow_external_facts,
                           struct K3Certificate **out);

/**
 * # Safety
 * `cert` must come from `k3_spr_check` and not be freed twice.
 */
void k3_certificate_free(struct K3Certificate *cert);

/**
 * Whether the certificate relies on a curated rank fact.
 *
 * # Safety
 * `cert` must be a live handle.
 */
bool k3_certificate_uses_external_facts(const struct K3Certificate *cert);

/**
 * # Safety
 * `cert` must be a live handle and `out` a valid pointer.
 */
enum K3Status k3_certificate_to_json(const struct K3Certificate *cert, char **out);

/**
 * # Safety
 * `cert` must be a live handle and `out` a valid pointer.
 */
enum K3Status k3_atlas_generate(const struct K3Certificate *cert,
                                uint32_t max_i,
                                uint32_t max_j,
                                struct K3Atlas **out);

/**
 * # Safety
 * `atlas` must come from `k3_atlas_generate` and not be freed twice.
 */
void k3_atlas_free(struct K3Atlas *atlas);

/**
 * Number of points, 0 for NULL.
 *
 * # Safety
 * `atlas` must be NULL or a live handle.
 */
uintptr_t k3_atlas_len(const struct K3Atlas *atlas);

/**
 * Point `index` as `{"x": "...", "y": "...", "t": "...", "exceptional": false}`.
 *
 * # Safety
 * `atlas` must be a live handle and `out` a valid pointer.
 */
enum K3Status k3_atlas_point_json(const struct K3Atlas *atlas, uintptr_t index, char **out);

/**
 * Root number of `y² = x³ - D²x` for positive squarefree `D`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum K3Status k3_root_number(int64_t d, int8_t *out);

/**
 * Local solubility of `C·s² = 1 + t⁴` from the congruence criterion.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum K3Status k3_solubility_a1(int64_t c, bool *out);

/**
 * Positive-rank search on `D·y² = x³ - x`; `*out` receives the outcome
 * as JSON in both the certified and the inconclusive case.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum K3Status k3_twist_rank_json(int64_t d, uint64_t height, bool allow_external_facts, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* K3TWIST_H */
