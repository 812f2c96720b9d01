#ifndef SUMSETS_H
#define SUMSETS_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SumsetsStatus {
  SUMSETS_STATUS_OK = 0,
  SUMSETS_STATUS_NULL_POINTER = 1,
  SUMSETS_STATUS_INVALID_UTF8 = 2,
  SUMSETS_STATUS_PARSE = 3,
  SUMSETS_STATUS_AMBIGUOUS_BOUNDARY = 4,
  SUMSETS_STATUS_RESOURCE_LIMIT = 5,
  SUMSETS_STATUS_UNKNOWN_SCHEDULE = 6,
  SUMSETS_STATUS_UNKNOWN_KEY = 7,
  SUMSETS_STATUS_DISJOINTNESS_VIOLATED = 8,
  SUMSETS_STATUS_HORIZON_EXCEEDED = 9,
  SUMSETS_STATUS_SAMPLE_EXHAUSTED = 10,
  SUMSETS_STATUS_MATERIALIZATION_FAILURE = 11,
  SUMSETS_STATUS_INVALID_PARAMETER = 12,
  SUMSETS_STATUS_BUFFER_TOO_SMALL = 13,
  SUMSETS_STATUS_PANIC = 14,
} SumsetsStatus;

/**
 * Opaque set expression.
 */
typedef struct SumsetsSet SumsetsSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *sumsets_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sumsets_version(void);

/**
 * Parses DSL text into a new handle.
 *
 * # Safety
 * `dsl` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SumsetsStatus sumsets_set_parse(const char *dsl, struct SumsetsSet **out);

/**
 * Built-in set by key, e.g. `P41_A`. Colorings are rejected.
 *
 * # Safety
 * `key` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SumsetsStatus sumsets_set_builtin(const char *key, struct SumsetsSet **out);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `set` must come from this library and not be used afterwards.
 */
void sumsets_set_free(struct SumsetsSet *set);

/**
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum SumsetsStatus sumsets_set_member(const struct SumsetsSet *set, uint64_t n, bool *out);

/**
 * `|A ∩ [1, horizon]|`.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum SumsetsStatus sumsets_set_count(const struct SumsetsSet *set, uint64_t horizon, uint64_t *out);

/**
 * Packs membership on `[1, horizon]` into `buf`: element `n` is bit
 * `(n - 1) % 8` of byte `(n - 1) / 8`. `len` must be at least
 * `ceil(horizon / 8)`.
 *
 * # Safety
 * `set` must be a live handle and `buf` valid for `len` bytes.
 */
enum SumsetsStatus sumsets_set_bitmap(const struct SumsetsSet *set,
                                      uint64_t horizon,
                                      uint8_t *buf,
                                      size_t len);

/**
 * Canonical DSL text of the handle.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer; release the
 * result with [`sumsets_string_free`].
 */
enum SumsetsStatus sumsets_set_render(const struct SumsetsSet *set, char **out);

/**
 * Density report along a schedule such as `powers4(8)`, as JSON.
 *
 * # Safety
 * `set` must be a live handle, `schedule` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum SumsetsStatus sumsets_density_json(const struct SumsetsSet *set,
                                        const char *schedule,
                                        char **out);

/**
 * Maximum witness search, as JSON. `exact` selects branch and bound
 * over the greedy heuristic; `node_budget` of 0 means the default. No
 * wall-clock budget is applied.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum SumsetsStatus sumsets_search_json(const struct SumsetsSet *set,
                                       uint64_t t,
                                       uint64_t horizon,
                                       bool exact,
                                       uint64_t node_budget,
                                       char **out);

/**
 * Runs the claims of a built-in up to `horizon`, as JSON.
 *
 * # Safety
 * `key` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SumsetsStatus sumsets_verify_json(const char *key, uint64_t horizon, char **out);

/**
 * Releases a string returned by this library; NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void sumsets_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUMSETS_H */
