#ifndef ASSOCIATE_ID_H
#define ASSOCIATE_ID_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum AidStatus {
  AID_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  AID_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  AID_STATUS_INVALID_UTF8 = 2,
  /**
   * The diagram failed validation.
   */
  AID_STATUS_INVALID_DIAGRAM = 3,
  /**
   * Any other model or argument error (unknown node, bad label, ...).
   */
  AID_STATUS_MODEL_ERROR = 4,
  AID_STATUS_PARSE_ERROR = 5,
  AID_STATUS_IO_ERROR = 6,
  AID_STATUS_JOINT_TOO_LARGE = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  AID_STATUS_PANIC = 8,
} AidStatus;

/**
 * Opaque influence diagram.
 */
typedef struct AidDiagram AidDiagram;

/**
 * Opaque solved policy.
 */
typedef struct AidPolicy AidPolicy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a
 * successful call. Owned by the library.
 */
const char *aid_last_error_message(void);

/**
 * Loads and validates a model document from `path`.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum AidStatus aid_diagram_load(const char *path, struct AidDiagram **out);

/**
 * Parses and validates a model document held in memory.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum AidStatus aid_diagram_from_json(const char *json, struct AidDiagram **out);

/**
 * Canonical model document text.
 *
 * # Safety
 * `diagram` must come from this library; `out` must be writable.
 */
enum AidStatus aid_diagram_to_json(const struct AidDiagram *diagram, char **out);

/**
 * # Safety
 * `diagram` must come from this library and not be used afterwards.
 */
void aid_diagram_free(struct AidDiagram *diagram);

/**
 * The rover path-deviation scenario with its reference configuration.
 *
 * # Safety
 * `out` must be writable.
 */
enum AidStatus aid_mrma_reference(struct AidDiagram **out);

/**
 * Validates `diagram`, writing the error and warning counts.
 * Returns `AID_STATUS_INVALID_DIAGRAM` when there are errors.
 *
 * # Safety
 * `diagram` must come from this library; the count pointers may be null.
 */
enum AidStatus aid_diagram_validate(const struct AidDiagram *diagram,
                                    size_t *out_errors,
                                    size_t *out_warnings);

/**
 * Optimal policy of `diagram`.
 *
 * # Safety
 * `diagram` must come from this library; `out` must be writable.
 */
enum AidStatus aid_solve(const struct AidDiagram *diagram, struct AidPolicy **out);

/**
 * # Safety
 * `policy` must come from this library; `out` must be writable.
 */
enum AidStatus aid_policy_meu(const struct AidPolicy *policy, double *out);

/**
 * Policy document text, with labels resolved against `diagram`.
 *
 * # Safety
 * Both handles must come from this library, the policy solved from the
 * diagram; `out` must be writable.
 */
enum AidStatus aid_policy_to_json(const struct AidDiagram *diagram,
                                  const struct AidPolicy *policy,
                                  char **out);

/**
 * # Safety
 * `policy` must come from this library and not be used afterwards.
 */
void aid_policy_free(struct AidPolicy *policy);

/**
 * Exact expected utility of following `policy` in `diagram`.
 *
 * # Safety
 * Both handles must come from this library; `out` must be writable.
 */
enum AidStatus aid_expected_utility(const struct AidDiagram *diagram,
                                    const struct AidPolicy *policy,
                                    double *out);

/**
 * Expected value of perfect information about `variable` before
 * `decision`.
 *
 * # Safety
 * `diagram` must come from this library; strings nul-terminated; `out`
 * writable.
 */
enum AidStatus aid_evpi(const struct AidDiagram *diagram,
                        const char *variable,
                        const char *decision,
                        double *out);

/**
 * Tornado report as a JSON document. `decisions` is `D1=a,D2=b` by label
 * (may be empty or null when the diagram has no decisions).
 *
 * # Safety
 * `diagram` must come from this library; `decisions` null or
 * nul-terminated; `out` writable.
 */
enum AidStatus aid_tornado_json(const struct AidDiagram *diagram,
                                const char *decisions,
                                char **out);

/**
 * Monte Carlo estimate of `policy`'s expected utility.
 *
 * # Safety
 * Both handles must come from this library; `out_mean` and
 * `out_std_error` writable.
 */
enum AidStatus aid_simulate(const struct AidDiagram *diagram,
                            const struct AidPolicy *policy,
                            uint64_t runs,
                            uint64_t seed,
                            double *out_mean,
                            double *out_std_error);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or come from this library, and not be used afterwards.
 */
void aid_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASSOCIATE_ID_H */
