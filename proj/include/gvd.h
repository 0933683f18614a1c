/* C interface to the latent-video dataset distillation engine.
 *
 * A session owns one experiment configuration and runs pipeline stages
 * against it; stage outputs are files under the configured output directory.
 * All functions are synchronous. Strings returned by the library are owned
 * by the session (or, for gvd_dataset_open_error, by the calling thread) and
 * remain valid until the next library call on the same object or thread.
 */
#ifndef GVD_H
#define GVD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GVD_API __declspec(dllexport)
#else
#define GVD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as process exit codes: config/precondition failures are 2,
 * numerical/training failures are 3, anything unexpected is 1. */
typedef enum gvd_status {
    GVD_OK = 0,
    GVD_ERR_INTERNAL = 1,
    GVD_ERR_CONFIG = 2,
    GVD_ERR_NUMERIC = 3
} gvd_status;

typedef struct gvd_session gvd_session;

/* Starts from the built-in default configuration. Returns NULL only on
 * allocation failure. */
GVD_API gvd_session * gvd_session_create(void);
GVD_API void gvd_session_destroy(gvd_session * session);

/* Replaces the session configuration from a JSON file or string. Unknown
 * keys and invalid values are rejected with the field named in the error. */
GVD_API gvd_status gvd_session_load_config(gvd_session * session, const char * path);
GVD_API gvd_status gvd_session_set_config_json(gvd_session * session, const char * json_text);

/* Field overrides, applied in call order on top of the current config. */
GVD_API gvd_status gvd_session_set_seed(gvd_session * session, uint64_t master_seed);
GVD_API gvd_status gvd_session_set_out_dir(gvd_session * session, const char * path);
GVD_API gvd_status gvd_session_set_workers(gvd_session * session, int workers);

/* Current configuration as JSON. */
GVD_API const char * gvd_session_config_json(gvd_session * session);

/* JSON object {kind, message, context, exit_code} for the last failed call,
 * or an empty string after a success. */
GVD_API const char * gvd_session_last_error(const gvd_session * session);

/* Pipeline stages. Each writes its artifacts under the output directory and
 * fails if required inputs from earlier stages are missing. */
GVD_API gvd_status gvd_run_synth(gvd_session * session);
GVD_API gvd_status gvd_run_cluster(gvd_session * session);
GVD_API gvd_status gvd_run_distill(gvd_session * session);
GVD_API gvd_status gvd_run_compose(gvd_session * session);
GVD_API gvd_status gvd_run_eval(gvd_session * session);
GVD_API gvd_status gvd_run_metrics(gvd_session * session);
GVD_API gvd_status gvd_run_sweep(gvd_session * session);

/* After a successful gvd_run_eval: the accuracy report as JSON. Empty string
 * before the first eval. */
GVD_API const char * gvd_session_eval_report(const gvd_session * session);

/* Read-only view of a dataset file. */
typedef struct gvd_dataset gvd_dataset;

/* NULL on failure; gvd_dataset_open_error() then returns the error JSON for
 * the calling thread. */
GVD_API gvd_dataset * gvd_dataset_open(const char * path);
GVD_API const char * gvd_dataset_open_error(void);
GVD_API void gvd_dataset_close(gvd_dataset * dataset);

GVD_API int gvd_dataset_frames(const gvd_dataset * dataset);
GVD_API int gvd_dataset_dim(const gvd_dataset * dataset);
GVD_API int gvd_dataset_classes(const gvd_dataset * dataset);
GVD_API uint64_t gvd_dataset_count(const gvd_dataset * dataset);
GVD_API int gvd_dataset_has_soft_labels(const gvd_dataset * dataset);

/* Class id of one record, or -1 if the index is out of range. */
GVD_API int gvd_dataset_class_of(const gvd_dataset * dataset, uint64_t index);

/* Copies one record's frames*dim values, frame-major. out_len must be at
 * least frames*dim. */
GVD_API gvd_status gvd_dataset_copy_record(const gvd_dataset * dataset, uint64_t index, float * out,
                                           size_t out_len);

/* Copies one record's class_count soft-label probabilities. */
GVD_API gvd_status gvd_dataset_copy_soft_labels(const gvd_dataset * dataset, uint64_t index, float * out,
                                                size_t out_len);

#ifdef __cplusplus
}
#endif

#endif /* GVD_H */
