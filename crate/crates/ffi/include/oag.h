#ifndef OAG_H
#define OAG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OagStatus {
  OAG_STATUS_OK = 0,
  OAG_STATUS_NULL_POINTER = 1,
  OAG_STATUS_INVALID_UTF8 = 2,
  OAG_STATUS_PARSE = 3,
  OAG_STATUS_NOT_COMPUTABLE = 4,
  /**
   * A precondition, hypothesis or other domain error.
   */
  OAG_STATUS_DOMAIN = 5,
  /**
   * The enumeration cap or atom budget was exceeded.
   */
  OAG_STATUS_LIMIT = 6,
  OAG_STATUS_INTERNAL = 7,
  OAG_STATUS_PANIC = 8,
} OagStatus;

/**
 * A formula parsed against a spec.
 */
typedef struct OagFormula OagFormula;

/**
 * A parsed group spec.
 */
typedef struct OagSpec OagSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread, or null. Valid
 * until the next failing call on the same thread.
 */
const char *oag_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void oag_string_free(char *s);

/**
 * Parses the spec text format.
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum OagStatus oag_spec_parse(const char *text, struct OagSpec **out);

/**
 * # Safety
 * `spec` must be null or a handle from [`oag_spec_parse`], freed once.
 */
void oag_spec_free(struct OagSpec *spec);

/**
 * Number of archimedean components, not counting an ω-tower.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be writable.
 */
enum OagStatus oag_spec_components(const struct OagSpec *spec, size_t *out);

/**
 * Writes the dp-rank to `rank` and whether it is finite to `finite`;
 * `rank` is 0 when it is infinite.
 *
 * # Safety
 * `spec` must be a live handle; `rank` and `finite` must be writable.
 */
enum OagStatus oag_spec_dp_rank(const struct OagSpec *spec, uint64_t *rank, bool *finite);

/**
 * `kind=<kind> dp_rank=<n|inf>`.
 *
 * # Safety
 * `spec` must be a live handle; `out` must be writable.
 */
enum OagStatus oag_spec_classify(const struct OagSpec *spec, char **out);

/**
 * # Safety
 * `spec` must be a live handle, `text` a nul-terminated string and `out`
 * writable.
 */
enum OagStatus oag_formula_parse(const struct OagSpec *spec,
                                 const char *text,
                                 struct OagFormula **out);

/**
 * # Safety
 * `f` must be null or a handle from this library, freed once.
 */
void oag_formula_free(struct OagFormula *f);

/**
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum OagStatus oag_formula_to_string(const struct OagFormula *f, char **out);

/**
 * Eliminates every quantifier of `f`; the result is a new handle.
 *
 * # Safety
 * `spec` and `f` must be live handles; `out` must be writable.
 */
enum OagStatus oag_formula_eliminate(const struct OagSpec *spec,
                                     const struct OagFormula *f,
                                     struct OagFormula **out);

/**
 * Solves a congruence system given one `x == a mod H` per line. Writes
 * `SOLVABLE base=<element> modulus=<subgroup>` or `UNSOLVABLE pair=(i,j)`.
 *
 * # Safety
 * `spec` must be a live handle, `system` a nul-terminated string and `out`
 * writable.
 */
enum OagStatus oag_solve(const struct OagSpec *spec, const char *system, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OAG_H */
