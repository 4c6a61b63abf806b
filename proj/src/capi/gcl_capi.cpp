// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "gcl.h"

#include <fstream>
#include <new>
#include <string>

#include "core/config.hpp"
#include "core/diag.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/results.hpp"
#include "core/runner.hpp"

struct gcl_config {
    gcl::ExperimentConfig config;
    std::string scratch;
};

struct gcl_result {
    gcl::RunResult result;
    std::string record;
};

namespace {

thread_local std::string t_last_error;

gcl_status status_of(gcl::ErrorCode code) {
    switch (code) {
        case gcl::ErrorCode::invalid_argument: return GCL_ERR_INVALID_ARGUMENT;
        case gcl::ErrorCode::dimension: return GCL_ERR_DIMENSION;
        case gcl::ErrorCode::masked_label: return GCL_ERR_MASKED_LABEL;
        case gcl::ErrorCode::ordering: return GCL_ERR_ORDERING;
        case gcl::ErrorCode::config: return GCL_ERR_CONFIG;
        case gcl::ErrorCode::io: return GCL_ERR_IO;
        case gcl::ErrorCode::infeasible: return GCL_ERR_INFEASIBLE;
        case gcl::ErrorCode::divergence: return GCL_ERR_DIVERGENCE;
        case gcl::ErrorCode::pretraining: return GCL_ERR_PRETRAINING;
        case gcl::ErrorCode::oracle: return GCL_ERR_ORACLE;
        case gcl::ErrorCode::precondition: return GCL_ERR_PRECONDITION;
    }
    return GCL_ERR_INTERNAL;
}

template <typename F>
gcl_status guarded(F&& f) {
    try {
        f();
        t_last_error.clear();
        return GCL_OK;
    } catch (const gcl::Error& e) {
        t_last_error = e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        t_last_error = "out of memory";
    } catch (const std::exception& e) {
        t_last_error = e.what();
    } catch (...) {
        t_last_error = "unknown error";
    }
    return GCL_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
    if (!p) throw gcl::InvalidArgument(std::string(what) + " is NULL");
}

void write_text(const char* path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw gcl::IoError(std::string("cannot open ") + path);
    out << text;
    if (!out) throw gcl::IoError(std::string("write to ") + path + " failed");
}

}  // namespace

extern "C" {

const char* gcl_last_error(void) { return t_last_error.c_str(); }

const char* gcl_version(void) { return gcl::kCodeVersion; }

void gcl_set_quiet(int quiet) { gcl::diag::set_quiet(quiet != 0); }

void gcl_set_num_threads(size_t n) { gcl::set_num_threads(n); }

gcl_status gcl_config_create(gcl_config** out) {
    return guarded([&] {
        require(out, "out");
        *out = new gcl_config{};
    });
}

gcl_status gcl_config_load(const char* path, gcl_config** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new gcl_config{gcl::load_config(path), {}};
    });
}

gcl_status gcl_config_parse(const char* text, gcl_config** out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = new gcl_config{gcl::parse_config_text(text), {}};
    });
}

void gcl_config_destroy(gcl_config* config) { delete config; }

gcl_status gcl_config_set(gcl_config* config, const char* key, const char* value) {
    return guarded([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        config->config.set(key, value);
    });
}

gcl_status gcl_config_get(gcl_config* config, const char* key, const char** value) {
    return guarded([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        const auto kv = config->config.to_map();
        auto it = kv.find(key);
        if (it == kv.end()) throw gcl::ConfigError(std::string("unknown key '") + key + "'");
        config->scratch = it->second;
        *value = config->scratch.c_str();
    });
}

gcl_status gcl_config_hash(gcl_config* config, const char** hash) {
    return guarded([&] {
        require(config, "config");
        require(hash, "hash");
        config->scratch = config->config.hash();
        *hash = config->scratch.c_str();
    });
}

gcl_status gcl_config_text(gcl_config* config, const char** text) {
    return guarded([&] {
        require(config, "config");
        require(text, "text");
        config->scratch = config->config.canonical_text();
        *text = config->scratch.c_str();
    });
}

gcl_status gcl_run(const gcl_config* config, gcl_result** out) {
    return guarded([&] {
        require(config, "config");
        require(out, "out");
        auto* r = new gcl_result{gcl::run_gcl(config->config), {}};
        r->record = gcl::results::record_line(r->result);
        *out = r;
    });
}

void gcl_result_destroy(gcl_result* result) { delete result; }

const char* gcl_result_record(const gcl_result* result) { return result ? result->record.c_str() : ""; }

const char* gcl_result_step_log(const gcl_result* result) { return result ? result->result.step_log.c_str() : ""; }

double gcl_result_wall_clock(const gcl_result* result) { return result ? result->result.wall_clock_seconds : 0.0; }

gcl_status gcl_result_metric(const gcl_result* result, const char* name, double* value) {
    return guarded([&] {
        require(result, "result");
        require(name, "name");
        require(value, "value");
        const std::string n = name;
        const auto& m = result->result.metrics;
        if (n == "a_auc") *value = m.a_auc;
        else if (n == "a_last") *value = m.a_last;
        else if (n == "f_last") *value = m.f_last;
        else throw gcl::InvalidArgument("unknown metric '" + n + "'");
    });
}

gcl_status gcl_isa(const gcl_config* config, const char* checkpoint_path, const char* log_path) {
    return guarded([&] {
        require(config, "config");
        require(checkpoint_path, "checkpoint_path");
        if (config->config.isa_mode == gcl::IsaMode::off) throw gcl::ConfigError("isa = off; choose naive, sam or fam");
        const auto artifacts = gcl::produce_isa_prompts(config->config);
        gcl::model::write_checkpoint(checkpoint_path, artifacts.prompts);
        if (log_path) write_text(log_path, gcl::isa::format_log_csv(artifacts.log));
    });
}

gcl_status gcl_sweep(const gcl_config* config, const char* ablation, size_t jobs, const char* records_path,
                     size_t* runs_out) {
    return guarded([&] {
        require(config, "config");
        require(records_path, "records_path");
        const auto grid = gcl::results::expand_sweep(config->config,
                                                     gcl::results::parse_ablation(ablation ? ablation : ""));
        const auto lines = gcl::results::run_sweep(grid, jobs);
        gcl::results::append_records(records_path, lines);
        if (runs_out) *runs_out = lines.size();
    });
}

gcl_status gcl_report(const char* records_path, const char* table_path, const char* curves_path) {
    return guarded([&] {
        require(records_path, "records_path");
        const auto report = gcl::results::build_report(gcl::results::read_record_lines(records_path));
        if (table_path) write_text(table_path, report.table);
        if (curves_path) write_text(curves_path, report.curves_csv);
    });
}

gcl_status gcl_stream_export(const gcl_config* config, const char* path) {
    return guarded([&] {
        require(config, "config");
        require(path, "path");
        gcl::stream::StreamConfig sc = config->config.stream;
        sc.seed = config->config.seed;
        const auto stream = gcl::stream::build_stream(gcl::downstream_dataset(config->config), sc);
        write_text(path, gcl::stream::export_plan(stream.plan));
    });
}

}  // extern "C"
