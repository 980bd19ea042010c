/* C ABI for the isac-channel simulator. */

#ifndef ISAC_CHANNEL_H
#define ISAC_CHANNEL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum IsacStatus {
  ISAC_STATUS_OK = 0,
  // Invalid configuration or arguments (mirrors CLI exit code 2).
  ISAC_STATUS_CONFIG_ERROR = 2,
  // Model or I/O failure (mirrors CLI exit code 3).
  ISAC_STATUS_RUNTIME_ERROR = 3,
  // A required pointer argument was null.
  ISAC_STATUS_NULL_ARGUMENT = 4,
  // A string argument was not valid UTF-8.
  ISAC_STATUS_INVALID_UTF8 = 5,
  // A caller-provided buffer was too small.
  ISAC_STATUS_BUFFER_TOO_SMALL = 6,
  // An internal panic was caught at the boundary.
  ISAC_STATUS_INTERNAL_PANIC = 7,
} IsacStatus;

// Which CIR tensor of a drop result to query.
typedef enum IsacTensorKind {
  ISAC_TENSOR_KIND_COMM_TOTAL = 0,
  ISAC_TENSOR_KIND_COMM_SHARED = 1,
  ISAC_TENSOR_KIND_COMM_NON_SHARED = 2,
  ISAC_TENSOR_KIND_SENSING_TOTAL = 3,
  ISAC_TENSOR_KIND_SENSING_SHARED = 4,
  ISAC_TENSOR_KIND_SENSING_NON_SHARED = 5,
} IsacTensorKind;

// Opaque drop result handle.
typedef struct IsacDropResult IsacDropResult;

// Opaque scenario handle: parsed config plus its parameter tables.
typedef struct IsacScenario IsacScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message for the current thread, empty when no error occurred.
const char *isac_last_error_message(void);

// Library version string.
const char *isac_version(void);

// Parses a scenario from TOML text.
int isac_scenario_from_toml(const char *text, struct IsacScenario **out);

// Loads a scenario from a TOML config file.
int isac_scenario_from_file(const char *path, struct IsacScenario **out);

// Releases a scenario handle. Null is a no-op.
void isac_scenario_free(struct IsacScenario *scenario);

// Overrides the scenario's root seed.
int isac_scenario_set_seed(struct IsacScenario *scenario, uint64_t seed);

// Number of configured sensing targets.
int isac_scenario_target_count(const struct IsacScenario *scenario, size_t *out);

// Runs one drop of the scenario.
int isac_run_drop(const struct IsacScenario *scenario,
                  uint64_t drop_id,
                  struct IsacDropResult **out);

// Releases a drop result handle. Null is a no-op.
void isac_drop_free(struct IsacDropResult *result);

// Communication and sensing sharing degrees of a drop.
int isac_drop_sharing_degrees(const struct IsacDropResult *result, double *sd_c, double *sd_s);

// Number of sensing cascade paths in a drop.
int isac_drop_sensing_path_count(const struct IsacDropResult *result, size_t *out);

// Copies sensing path geometry into caller-provided arrays. Any output
// array may be null to skip that column; non-null arrays must hold at least
// `len` elements, and `len` must be at least the path count.
int isac_drop_sensing_paths(const struct IsacDropResult *result,
                            double *aod_deg,
                            double *zod_deg,
                            double *delay_s,
                            double *power,
                            uint8_t *shared,
                            size_t len);

// Dimensions of one CIR tensor: rx_elements, tx_elements, paths,
// time_samples.
int isac_drop_cir_dims(const struct IsacDropResult *result, enum IsacTensorKind kind, size_t *dims);

// Copies one CIR tensor as interleaved re/im doubles, row-major in
// (rx_element, tx_element, path, time_sample) order. `len` counts doubles
// and must be at least 2 * rx * tx * paths * times.
int isac_drop_cir_copy(const struct IsacDropResult *result,
                       enum IsacTensorKind kind,
                       double *out,
                       size_t len);

// Per-path delays of one CIR tensor, seconds. `len` must be at least the
// path count.
int isac_drop_cir_delays(const struct IsacDropResult *result,
                         enum IsacTensorKind kind,
                         double *out,
                         size_t len);

// Exports one drop (JSON record, paths CSV, CIR binaries with sidecars)
// into a directory.
int isac_drop_export(const struct IsacDropResult *result, const char *out_dir);

// Runs a sweep campaign over the given shared-cluster counts and writes the
// CDF and summary tables into a directory.
int isac_run_campaign_to_dir(const struct IsacScenario *scenario,
                             const size_t *counts,
                             size_t n_counts,
                             const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISAC_CHANNEL_H */
