#ifndef FLOWCALC_H
#define FLOWCALC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum FcStatus {
  FC_STATUS_OK = 0,
  FC_STATUS_NULL_ARGUMENT = 1,
  FC_STATUS_INVALID_UTF8 = 2,
  FC_STATUS_PARSE_ERROR = 3,
  FC_STATUS_INPUT_ERROR = 4,
  FC_STATUS_BUDGET_EXCEEDED = 5,
  FC_STATUS_INTERNAL = 6,
} FcStatus;

/**
 * A saturated flow.
 */
typedef struct FcFlow FcFlow;

/**
 * A finite poset.
 */
typedef struct FcPoset FcPoset;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a poset file. On success `*out` owns a new handle.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` a valid pointer.
 */
enum FcStatus fc_poset_parse(const char *text_in, struct FcPoset **out);

/**
 * # Safety
 * `p` must be null or a handle from this library, not yet freed.
 */
void fc_poset_free(struct FcPoset *p);

/**
 * Number of elements.
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
enum FcStatus fc_poset_len(const struct FcPoset *p, size_t *out);

/**
 * Longest chain length between the named elements `a < b`.
 *
 * # Safety
 * `p` must be a live handle, `a` and `b` nul-terminated strings, `out` a valid pointer.
 */
enum FcStatus fc_poset_chain_length(const struct FcPoset *p,
                                    const char *a,
                                    const char *b,
                                    size_t *out);

/**
 * Degree and triangle checks of the exterior simplex category, as JSON.
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
enum FcStatus fc_poset_report_json(const struct FcPoset *p, char **out);

/**
 * Parses and saturates a flow file. `cap` is the truncation dimension
 * (1 to 6) and `budget` bounds the words enumerated per pair and level.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` a valid pointer.
 */
enum FcStatus fc_flow_parse(const char *text_in, size_t cap, size_t budget, struct FcFlow **out);

/**
 * The poset flow of `p`.
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
enum FcStatus fc_flow_from_poset(const struct FcPoset *p, size_t cap, struct FcFlow **out);

/**
 * # Safety
 * `f` must be null or a handle from this library, not yet freed.
 */
void fc_flow_free(struct FcFlow *f);

/**
 * # Safety
 * `f` must be a live handle and `out` a valid pointer.
 */
enum FcStatus fc_flow_state_count(const struct FcFlow *f, size_t *out);

/**
 * Per-state branching (or, when `merging`, merging) spaces and their
 * homology, as JSON.
 *
 * # Safety
 * `f` must be a live handle and `out` a valid pointer.
 */
enum FcStatus fc_flow_branch_json(const struct FcFlow *f, bool merging, char **out);

/**
 * The ball conditions and, for a ball, the branching space at the bottom.
 *
 * # Safety
 * `f` must be a live handle and `out` a valid pointer.
 */
enum FcStatus fc_flow_ball_check_json(const struct FcFlow *f, char **out);

/**
 * Subdivides vertex `vertex` of the path space from `source` to `target`
 * by the ball `ball` and compares branching and merging homology.
 *
 * # Safety
 * `x` and `ball` must be live handles, `source` and `target` nul-terminated
 * strings and `out` a valid pointer.
 */
enum FcStatus fc_check_invariance_json(const struct FcFlow *x,
                                       const char *source,
                                       const char *target,
                                       size_t vertex,
                                       const struct FcFlow *ball,
                                       size_t budget,
                                       char **out);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string from this library, not yet freed.
 */
void fc_string_free(char *s);

/**
 * The message of the last failed call on this thread, or null. Valid
 * until the next call into the library on the same thread.
 */
const char *fc_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOWCALC_H */
