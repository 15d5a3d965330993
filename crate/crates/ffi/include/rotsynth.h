#ifndef ROTSYNTH_H
#define ROTSYNTH_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsynthStatus {
  RSYNTH_STATUS_OK = 0,
  RSYNTH_STATUS_INVALID_ARGUMENT = 1,
  RSYNTH_STATUS_CAPACITY = 2,
  RSYNTH_STATUS_NULL_POINTER = 3,
  RSYNTH_STATUS_SIMULATION_CAP = 4,
  RSYNTH_STATUS_CONSTRUCTION_BUG = 5,
  RSYNTH_STATUS_RUNAWAY = 6,
  RSYNTH_STATUS_INTERNAL = 7,
} RsynthStatus;

typedef enum RsynthFormat {
  RSYNTH_FORMAT_TEXT = 0,
  RSYNTH_FORMAT_JSON = 1,
} RsynthFormat;

/**
 * Opaque synthesized rotation.
 */
typedef struct RsynthRotation RsynthRotation;

typedef struct RsynthParams {
  uint32_t n;
  uint64_t k;
  /**
   * Power of `S` absorbed by angle reduction; applied by the caller.
   */
  int8_t clifford_power;
  double theta_star;
  /**
   * `tan(theta_star / 2) = tan_half_num / 2^tan_half_exp`, reduced.
   */
  int64_t tan_half_num;
  uint32_t tan_half_exp;
  double success_probability;
  double expected_repetitions;
  double error_bound;
  double global_phase;
} RsynthParams;

typedef struct RsynthResources {
  size_t toffoli_count;
  size_t gate_depth;
  size_t control_ancillas;
  size_t internal_ancillas;
  size_t total_ancillas;
  uint32_t dropped_controls;
  size_t num_qubits;
  size_t num_gates;
} RsynthResources;

typedef struct RsynthVerification {
  bool passed;
  double expected_success_probability;
  double measured_success_probability;
  double measured_failure_probability;
  size_t outcomes_checked;
  double success_operator_error;
  double failure_operator_error;
  size_t failure_count;
} RsynthVerification;

typedef struct RsynthMonteCarlo {
  uint64_t trials;
  uint64_t seed;
  double expected_repetitions;
  double mean_repetitions;
  double mean_repetitions_sigma;
  double mean_toffoli;
  double mean_depth;
  double toffoli_bound;
  double depth_bound;
  uint64_t max_repetitions;
  uint64_t operator_checks;
  uint64_t operator_checks_passed;
} RsynthMonteCarlo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next library call on this thread.
 */
const char *rsynth_last_error(void);

/**
 * Synthesizes `R_theta` to accuracy `epsilon` and stores a new handle in
 * `*out`. `theta` outside `[-pi/2, pi/2]` is reduced by a power of `S`,
 * reported in [`RsynthParams::clifford_power`].
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum RsynthStatus rsynth_synthesize(double theta, double epsilon, struct RsynthRotation **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `rotation` must be null or a handle from [`rsynth_synthesize`] that has
 * not been freed.
 */
void rsynth_free(struct RsynthRotation *rotation);

/**
 * # Safety
 * `rotation` must be a live handle and `out` valid for writes.
 */
enum RsynthStatus rsynth_params(const struct RsynthRotation *rotation, struct RsynthParams *out);

/**
 * # Safety
 * `rotation` must be a live handle and `out` valid for writes.
 */
enum RsynthStatus rsynth_resources(const struct RsynthRotation *rotation,
                                   struct RsynthResources *out);

/**
 * Serializes the circuit into a new NUL-terminated string stored in
 * `*out`, to be released with [`rsynth_string_free`].
 *
 * # Safety
 * `rotation` must be a live handle and `out` valid for writing one pointer.
 */
enum RsynthStatus rsynth_export(const struct RsynthRotation *rotation,
                                enum RsynthFormat format,
                                char **out);

/**
 * Releases a string from [`rsynth_export`]. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void rsynth_string_free(char *s);

/**
 * Simulates the circuit and checks every outcome's conditional operator.
 * `max_qubits = 0` selects the default cap. A circuit that simulates but
 * misbehaves returns `RSYNTH_STATUS_OK` with `passed = false`.
 *
 * # Safety
 * `rotation` must be a live handle and `out` valid for writes.
 */
enum RsynthStatus rsynth_verify(const struct RsynthRotation *rotation,
                                size_t max_qubits,
                                struct RsynthVerification *out);

/**
 * Runs `trials` repeat-until-success loops seeded by `seed`.
 *
 * # Safety
 * `rotation` must be a live handle and `out` valid for writes.
 */
enum RsynthStatus rsynth_monte_carlo(const struct RsynthRotation *rotation,
                                     uint64_t trials,
                                     uint64_t seed,
                                     struct RsynthMonteCarlo *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROTSYNTH_H */
