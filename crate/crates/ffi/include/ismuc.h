#ifndef ISMUC_H
#define ISMUC_H

/* Generated by cbindgen from the ismuc-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IsmucStatus {
  ISMUC_STATUS_OK = 0,
  ISMUC_STATUS_NULL_POINTER = 1,
  ISMUC_STATUS_INVALID_ARGUMENT = 2,
  ISMUC_STATUS_INVALID_CONFIG = 3,
  ISMUC_STATUS_INFEASIBLE = 4,
  ISMUC_STATUS_SOLVER_FAILURE = 5,
  ISMUC_STATUS_BUFFER_TOO_SMALL = 6,
  ISMUC_STATUS_PANIC = 7,
} IsmucStatus;

/**
 * Channel realization handle.
 */
typedef struct IsmucChannels IsmucChannels;

/**
 * Run configuration handle.
 */
typedef struct IsmucConfig IsmucConfig;

/**
 * Solution and solve report handle.
 */
typedef struct IsmucSolution IsmucSolution;

/**
 * Achieved rates (bits/s/Hz) and illumination power (W).
 */
typedef struct IsmucRates {
  double r_unicast;
  double r_multicast_nu;
  double r_multicast_fu;
  double r_multicast;
  double illumination;
  /**
   * 1 if every constraint holds within tolerance.
   */
  int32_t feasible;
} IsmucRates;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ismuc_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ismuc_last_error_message(void);

/**
 * Default configuration. Never null.
 */
struct IsmucConfig *ismuc_config_new_default(void);

/**
 * Parses a TOML run configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum IsmucStatus ismuc_config_from_toml(const char *toml, struct IsmucConfig **out);

/**
 * Sets the run seed (channels and initial phases).
 *
 * # Safety
 * `config` must be a live handle.
 */
enum IsmucStatus ismuc_config_set_seed(struct IsmucConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be null or a handle not yet freed.
 */
void ismuc_config_free(struct IsmucConfig *config);

/**
 * Draws channels for the configuration and its seed.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum IsmucStatus ismuc_channels_generate(const struct IsmucConfig *config,
                                         struct IsmucChannels **out);

/**
 * Loads channels from the JSON channel-file format.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum IsmucStatus ismuc_channels_from_json(const char *json, struct IsmucChannels **out);

/**
 * # Safety
 * `channels` must be null or a handle not yet freed.
 */
void ismuc_channels_free(struct IsmucChannels *channels);

/**
 * Runs the full solver.
 *
 * # Safety
 * `config` and `channels` must be live handles and `out` a valid pointer.
 */
enum IsmucStatus ismuc_solve(const struct IsmucConfig *config,
                             const struct IsmucChannels *channels,
                             struct IsmucSolution **out);

/**
 * # Safety
 * `solution` must be null or a handle not yet freed.
 */
void ismuc_solution_free(struct IsmucSolution *solution);

/**
 * # Safety
 * `solution` must be a live handle and `out` a valid pointer.
 */
enum IsmucStatus ismuc_solution_rates(const struct IsmucSolution *solution, struct IsmucRates *out);

/**
 * Antenna count `N` and element count `K` of the solution.
 *
 * # Safety
 * `solution` must be a live handle; `n` and `k` valid pointers.
 */
enum IsmucStatus ismuc_solution_dims(const struct IsmucSolution *solution, size_t *n, size_t *k);

/**
 * Copies both beamformers as `2 N` interleaved doubles each.
 *
 * # Safety
 * `w_u` and `w_m` must each point to `len` writable doubles.
 */
enum IsmucStatus ismuc_solution_beamformers(const struct IsmucSolution *solution,
                                            double *w_u,
                                            double *w_m,
                                            size_t len);

/**
 * Copies the `K` IRS phases in radians.
 *
 * # Safety
 * `phases` must point to `len` writable doubles.
 */
enum IsmucStatus ismuc_solution_phases(const struct IsmucSolution *solution,
                                       double *phases,
                                       size_t len);

/**
 * Solve report as JSON. Release with [`ismuc_string_free`].
 *
 * # Safety
 * `solution` must be a live handle and `out` a valid pointer.
 */
enum IsmucStatus ismuc_solution_report_json(const struct IsmucSolution *solution, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void ismuc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISMUC_H */
