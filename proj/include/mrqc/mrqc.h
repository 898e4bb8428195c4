// Copyright 2026 The mrqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the mrqc cohort quality-control engine.
 *
 * Every function returns an mrqc_status; on failure a message for the calling
 * thread is available from mrqc_last_error() until the next call. Handles are
 * opaque and owned by the caller, who releases them with the matching
 * *_destroy function. Strings are UTF-8 and copied on input.
 */
#ifndef MRQC_MRQC_H
#define MRQC_MRQC_H

#include <stddef.h>
#include <stdint.h>

#if defined(MRQC_BUILDING)
#define MRQC_API __attribute__((visibility("default")))
#else
#define MRQC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mrqc_status {
  MRQC_OK = 0,
  MRQC_ERROR = 1,           /* fatal: bad input directory, unwritable output, ... */
  MRQC_PARTIAL = 2,         /* run finished, some datasets failed */
  MRQC_EMPTY_COHORT = 3,    /* run finished, no datasets found */
  MRQC_INVALID_ARGUMENT = 4,
} mrqc_status;

typedef enum mrqc_log_level {
  MRQC_LOG_INFO = 0,
  MRQC_LOG_WARNING = 1,
  MRQC_LOG_ERROR = 2,
} mrqc_log_level;

typedef struct mrqc_config mrqc_config;
typedef struct mrqc_run_result mrqc_run_result;
typedef struct mrqc_batch_result mrqc_batch_result;
typedef struct mrqc_phantom mrqc_phantom;

MRQC_API const char* mrqc_version(void);
MRQC_API const char* mrqc_last_error(void);

/* Replaces the log sink for the whole process; NULL restores stderr. */
typedef void (*mrqc_log_fn)(mrqc_log_level level, const char* message, void* user);
MRQC_API void mrqc_set_log_callback(mrqc_log_fn fn, void* user);
MRQC_API void mrqc_set_log_level(mrqc_log_level threshold);

/* Run configuration. Defaults: single-region masks, seed 0, weights 0.5/0.5,
 * one job, data root "UserInterface/Data", thumbnails on. */
MRQC_API mrqc_status mrqc_config_create(const char* output_name, const char* input_dir, mrqc_config** out);
MRQC_API void mrqc_config_destroy(mrqc_config* config);
MRQC_API mrqc_status mrqc_config_set_tags_file(mrqc_config* config, const char* path);
MRQC_API mrqc_status mrqc_config_set_per_object(mrqc_config* config, int per_object);
MRQC_API mrqc_status mrqc_config_set_seed(mrqc_config* config, uint64_t seed);
MRQC_API mrqc_status mrqc_config_set_weights(mrqc_config* config, double original, double equalized);
MRQC_API mrqc_status mrqc_config_set_jobs(mrqc_config* config, unsigned jobs);
MRQC_API mrqc_status mrqc_config_set_data_root(mrqc_config* config, const char* path);
MRQC_API mrqc_status mrqc_config_set_thumbnails(mrqc_config* config, int enabled);

/* Runs the pipeline. On MRQC_OK, MRQC_PARTIAL and MRQC_EMPTY_COHORT *out
 * receives a result handle; on other codes *out is NULL. */
MRQC_API mrqc_status mrqc_run(const mrqc_config* config, mrqc_run_result** out);
MRQC_API void mrqc_run_result_destroy(mrqc_run_result* result);
MRQC_API const char* mrqc_run_result_path(const mrqc_run_result* result);
MRQC_API size_t mrqc_run_result_rows(const mrqc_run_result* result);
MRQC_API size_t mrqc_run_result_failed(const mrqc_run_result* result);
MRQC_API double mrqc_run_result_seconds(const mrqc_run_result* result);

/* Consensus clustering over results.tsv and a two-column sites TSV. */
MRQC_API mrqc_status mrqc_analyze_batch(const char* results_tsv, const char* sites_tsv, int k, uint64_t seed,
                                        int iterations, double subsample, unsigned jobs,
                                        mrqc_batch_result** out);
MRQC_API void mrqc_batch_result_destroy(mrqc_batch_result* result);
MRQC_API size_t mrqc_batch_result_sites(const mrqc_batch_result* result);
MRQC_API const char* mrqc_batch_result_site_name(const mrqc_batch_result* result, size_t site);
MRQC_API double mrqc_batch_result_accuracy(const mrqc_batch_result* result, size_t site);
MRQC_API const char* mrqc_batch_result_matrix_path(const mrqc_batch_result* result);
MRQC_API const char* mrqc_batch_result_summary_path(const mrqc_batch_result* result);

/* Synthetic phantom builder. Geometry in voxels; shapes are filled with the
 * foreground value on a background value, then artifacts apply in the order
 * added. */
MRQC_API mrqc_status mrqc_phantom_create(const char* id, size_t slices, size_t rows, size_t cols, double foreground,
                                         double background, uint64_t seed, mrqc_phantom** out);
MRQC_API void mrqc_phantom_destroy(mrqc_phantom* phantom);
MRQC_API mrqc_status mrqc_phantom_add_ellipse(mrqc_phantom* phantom, double center_row, double center_col,
                                              double radius_row, double radius_col);
MRQC_API mrqc_status mrqc_phantom_set_spacing(mrqc_phantom* phantom, double x, double y, double z);
MRQC_API mrqc_status mrqc_phantom_add_noise(mrqc_phantom* phantom, double sigma);
MRQC_API mrqc_status mrqc_phantom_add_bias(mrqc_phantom* phantom, double strength);
MRQC_API mrqc_status mrqc_phantom_add_ghosting(mrqc_phantom* phantom, long shift, double alpha);
/* Writes a NIfTI-1 file (.nii or .nii.gz). */
MRQC_API mrqc_status mrqc_phantom_write_nifti(const mrqc_phantom* phantom, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* MRQC_MRQC_H */
