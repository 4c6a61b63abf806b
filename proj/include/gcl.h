// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

/* C interface to gcl-lab: prompt-based continual learning experiments. */

#ifndef GCL_H
#define GCL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef GCL_BUILDING_LIBRARY
#    define GCL_API __declspec(dllexport)
#  else
#    define GCL_API __declspec(dllimport)
#  endif
#else
#  define GCL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gcl_status {
    GCL_OK = 0,
    GCL_ERR_INVALID_ARGUMENT = 1,
    GCL_ERR_DIMENSION = 2,
    GCL_ERR_MASKED_LABEL = 3,
    GCL_ERR_ORDERING = 4,
    GCL_ERR_CONFIG = 5,
    GCL_ERR_IO = 6,
    GCL_ERR_INFEASIBLE = 7,
    GCL_ERR_DIVERGENCE = 8,
    GCL_ERR_PRETRAINING = 9,
    GCL_ERR_ORACLE = 10,
    GCL_ERR_PRECONDITION = 11,
    GCL_ERR_INTERNAL = 99
} gcl_status;

typedef struct gcl_config gcl_config;
typedef struct gcl_result gcl_result;

/* Message of the last failed call on this thread; empty after success. */
GCL_API const char* gcl_last_error(void);
GCL_API const char* gcl_version(void);

/* Warnings are written to stderr unless silenced. */
GCL_API void gcl_set_quiet(int quiet);
GCL_API void gcl_set_num_threads(size_t n);

GCL_API gcl_status gcl_config_create(gcl_config** out);
GCL_API gcl_status gcl_config_load(const char* path, gcl_config** out);
GCL_API gcl_status gcl_config_parse(const char* text, gcl_config** out);
GCL_API void gcl_config_destroy(gcl_config* config);
GCL_API gcl_status gcl_config_set(gcl_config* config, const char* key, const char* value);
/* Pointers returned by the getters stay valid until the next call on the
   same handle. */
GCL_API gcl_status gcl_config_get(gcl_config* config, const char* key, const char** value);
GCL_API gcl_status gcl_config_hash(gcl_config* config, const char** hash);
GCL_API gcl_status gcl_config_text(gcl_config* config, const char** text);

/* Single run. The result owns its record line and step log. */
GCL_API gcl_status gcl_run(const gcl_config* config, gcl_result** out);
GCL_API void gcl_result_destroy(gcl_result* result);
GCL_API const char* gcl_result_record(const gcl_result* result);
GCL_API const char* gcl_result_step_log(const gcl_result* result);
GCL_API double gcl_result_wall_clock(const gcl_result* result);
/* name: a_auc, a_last or f_last */
GCL_API gcl_status gcl_result_metric(const gcl_result* result, const char* name, double* value);

/* Initial session adaption: writes the prompt checkpoint and, when log_path
   is not NULL, the per-step CSV log. */
GCL_API gcl_status gcl_isa(const gcl_config* config, const char* checkpoint_path, const char* log_path);

/* Seed grid, optionally crossed with an ablation (NULL, "mask", "isa",
   "buffer"). Records are appended to records_path in grid order. */
GCL_API gcl_status gcl_sweep(const gcl_config* config, const char* ablation, size_t jobs, const char* records_path,
                             size_t* runs_out);
/* Reads a record file and writes the mean±std table and the curve CSV. */
GCL_API gcl_status gcl_report(const char* records_path, const char* table_path, const char* curves_path);
/* Writes the per-session plan of the config's stream as JSON lines. */
GCL_API gcl_status gcl_stream_export(const gcl_config* config, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* GCL_H */
