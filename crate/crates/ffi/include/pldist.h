#ifndef PLDIST_H
#define PLDIST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PldStatus {
  PLD_STATUS_OK = 0,
  PLD_STATUS_NULL_POINTER = 1,
  PLD_STATUS_INVALID_UTF8 = 2,
  PLD_STATUS_INVALID_ARGUMENT = 3,
  PLD_STATUS_INVALID_INSTANCE = 4,
  PLD_STATUS_PRECONDITION = 5,
  PLD_STATUS_UNKNOWN_RULE = 6,
  PLD_STATUS_UNSUPPORTED_RULE = 7,
  /**
   * The population outcome is decided by a margin below the tolerance.
   */
  PLD_STATUS_AMBIGUOUS = 8,
  PLD_STATUS_NON_CONVERGENCE = 9,
  PLD_STATUS_IO = 10,
  PLD_STATUS_JSON = 11,
  PLD_STATUS_INTERNAL = 12,
  PLD_STATUS_PANIC = 13,
} PldStatus;

/**
 * An election instance.
 */
typedef struct PldInstance PldInstance;

/**
 * Counts of one simulated election.
 */
typedef struct PldTally PldTally;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into a new string, or
 * returns null when there is none. Release with [`pld_string_free`].
 */
char *pld_last_error(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pld_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pld_version(void);

/**
 * Parses an instance from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out_instance` a valid pointer.
 */
enum PldStatus pld_instance_from_json(const char *json, struct PldInstance **out_instance);

/**
 * An instance whose whole electorate shares one utility vector of length `m`.
 *
 * # Safety
 * `utilities` must point to `m` doubles and `out_instance` a valid pointer.
 */
enum PldStatus pld_instance_single(double beta,
                                   const double *utilities,
                                   size_t m,
                                   struct PldInstance **out_instance);

/**
 * # Safety
 * `instance` must come from this library and not have been freed.
 */
void pld_instance_free(struct PldInstance *instance);

/**
 * Number of candidates, or 0 for a null handle.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
size_t pld_instance_num_candidates(const struct PldInstance *instance);

/**
 * Serializes an instance to JSON.
 *
 * # Safety
 * `instance` must be a live handle and `out_json` a valid pointer.
 */
enum PldStatus pld_instance_to_json(const struct PldInstance *instance, char **out_json);

/**
 * Builds a lower-bound construction from its JSON description, e.g.
 * `{"family": "copeland", "beta": 30, "epsilon": 0.1}`. Either output may be
 * null when not wanted.
 *
 * # Safety
 * `description` must be a NUL-terminated string; outputs must be null or valid.
 */
enum PldStatus pld_construct(const char *description,
                             struct PldInstance **out_instance,
                             char **out_report_json);

/**
 * Simulates `n` voters and tallies their rankings.
 *
 * # Safety
 * `instance` must be a live handle and `out_tally` a valid pointer.
 */
enum PldStatus pld_sample_tally(const struct PldInstance *instance,
                                size_t n,
                                uint64_t seed,
                                struct PldTally **out_tally);

/**
 * # Safety
 * `tally` must come from this library and not have been freed.
 */
void pld_tally_free(struct PldTally *tally);

/**
 * Number of voters ranking `j` above `k`.
 *
 * # Safety
 * `tally` must be a live handle and `out_count` a valid pointer.
 */
enum PldStatus pld_tally_wins(const struct PldTally *tally,
                              size_t j,
                              size_t k,
                              uint64_t *out_count);

/**
 * Applies a rule (by name, e.g. `"copeland"` or `"ppv:0.5"`) with the
 * identity tie-break and writes its lottery into `lottery[0..m]`.
 *
 * # Safety
 * `tally` must be a live handle, `rule_name` NUL-terminated and `lottery`
 * point to `m` writable doubles.
 */
enum PldStatus pld_apply_rule(const struct PldTally *tally,
                              const char *rule_name,
                              double *lottery,
                              size_t m);

/**
 * Population-limit distortion of a rule; `PLD_STATUS_AMBIGUOUS` when the
 * limit outcome is decided by a margin below `tau`.
 *
 * # Safety
 * `instance` must be a live handle, `rule_name` NUL-terminated and
 * `out_distortion` valid.
 */
enum PldStatus pld_population_distortion(const struct PldInstance *instance,
                                         const char *rule_name,
                                         double tau,
                                         double *out_distortion);

/**
 * Monte Carlo distortion over `trials` elections of `n` voters. The interval
 * outputs may be null; they receive NaN when `trials < 2`.
 *
 * # Safety
 * `instance` must be a live handle, `rule_name` NUL-terminated, `out_mean`
 * valid and the interval outputs null or valid.
 */
enum PldStatus pld_empirical_distortion(const struct PldInstance *instance,
                                        const char *rule_name,
                                        size_t n,
                                        size_t trials,
                                        uint64_t seed,
                                        double *out_mean,
                                        double *out_ci_lo,
                                        double *out_ci_hi);

/**
 * Closed-form bounds for a rule. A bound that is not stated is written as
 * NaN.
 *
 * # Safety
 * `rule_name` must be NUL-terminated and the outputs valid.
 */
enum PldStatus pld_bounds(const char *rule_name,
                          double beta,
                          size_t m,
                          double epsilon,
                          double *out_upper,
                          double *out_lower,
                          double *out_pclc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLDIST_H */
