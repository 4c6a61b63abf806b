// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

// Links against the shared library only; everything goes through gcl.h.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gcl.h>

#include "small_config.hpp"

namespace {

struct Config {
    gcl_config* ptr = nullptr;
    Config() { REQUIRE(gcl_config_parse(fixture::kSmallConfigText, &ptr) == GCL_OK); }
    ~Config() { gcl_config_destroy(ptr); }
};

struct Result {
    gcl_result* ptr = nullptr;
    ~Result() { gcl_result_destroy(ptr); }
};

std::filesystem::path tmp(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("gcl_capi_" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("version and defaults") {
    gcl_set_quiet(1);
    CHECK(std::string(gcl_version()).find("0.1.0") != std::string::npos);
    gcl_config* c = nullptr;
    REQUIRE(gcl_config_create(&c) == GCL_OK);
    const char* v = nullptr;
    REQUIRE(gcl_config_get(c, "mask", &v) == GCL_OK);
    CHECK(std::string(v) == "batch");
    REQUIRE(gcl_config_get(c, "stream.batch_size", &v) == GCL_OK);
    CHECK(std::string(v) == "32");
    gcl_config_destroy(c);
    gcl_config_destroy(nullptr);
}

TEST_CASE("config errors carry a status and a message") {
    Config c;
    CHECK(gcl_config_set(c.ptr, "nope", "1") == GCL_ERR_CONFIG);
    CHECK(std::string(gcl_last_error()).find("nope") != std::string::npos);
    CHECK(gcl_config_set(c.ptr, "mask", "session") == GCL_OK);
    CHECK(std::string(gcl_last_error()).empty());
    CHECK(gcl_config_set(nullptr, "mask", "none") == GCL_ERR_INVALID_ARGUMENT);
    gcl_config* out = nullptr;
    CHECK(gcl_config_load(tmp("absent.cfg").c_str(), &out) == GCL_ERR_IO);
    CHECK(out == nullptr);
    CHECK(gcl_config_parse("mask = maybe\n", &out) == GCL_ERR_CONFIG);
}

TEST_CASE("hash ignores the seed and round-trips through text") {
    Config a;
    const char* h = nullptr;
    REQUIRE(gcl_config_hash(a.ptr, &h) == GCL_OK);
    const std::string hash = h;
    CHECK(hash.size() == 16);
    REQUIRE(gcl_config_set(a.ptr, "seed", "42") == GCL_OK);
    REQUIRE(gcl_config_hash(a.ptr, &h) == GCL_OK);
    CHECK(hash == h);
    const char* text = nullptr;
    REQUIRE(gcl_config_text(a.ptr, &text) == GCL_OK);
    gcl_config* b = nullptr;
    REQUIRE(gcl_config_parse(text, &b) == GCL_OK);
    REQUIRE(gcl_config_hash(b, &h) == GCL_OK);
    CHECK(hash == h);
    gcl_config_destroy(b);
}

TEST_CASE("run produces a record and metrics") {
    Config c;
    Result r;
    REQUIRE(gcl_run(c.ptr, &r.ptr) == GCL_OK);
    const std::string rec = gcl_result_record(r.ptr);
    CHECK(rec.find("\"a_auc\"") != std::string::npos);
    CHECK(rec.find("\"code_version\"") != std::string::npos);
    double auc = -1;
    REQUIRE(gcl_result_metric(r.ptr, "a_auc", &auc) == GCL_OK);
    CHECK(auc >= 0.0);
    CHECK(auc <= 1.0);
    CHECK(gcl_result_metric(r.ptr, "bogus", &auc) == GCL_ERR_INVALID_ARGUMENT);
    CHECK(std::string(gcl_result_step_log(r.ptr)).rfind("step,session,loss", 0) == 0);
    CHECK(gcl_result_wall_clock(r.ptr) >= 0.0);

    Result again;
    REQUIRE(gcl_run(c.ptr, &again.ptr) == GCL_OK);
    CHECK(rec == gcl_result_record(again.ptr));
}

TEST_CASE("runtime failures map to statuses") {
    Config c;
    REQUIRE(gcl_config_set(c.ptr, "stream.sessions", "9") == GCL_OK);
    Result r;
    CHECK(gcl_run(c.ptr, &r.ptr) == GCL_ERR_INFEASIBLE);
    CHECK(r.ptr == nullptr);

    Config d;
    REQUIRE(gcl_config_set(d.ptr, "isa", "fam") == GCL_OK);
    REQUIRE(gcl_config_set(d.ptr, "isa.checkpoint", tmp("none.gclp").c_str()) == GCL_OK);
    CHECK(gcl_run(d.ptr, &r.ptr) == GCL_ERR_IO);
}

TEST_CASE("isa checkpoint feeds a run") {
    Config c;
    REQUIRE(gcl_config_set(c.ptr, "isa", "naive") == GCL_OK);
    const auto ckpt = tmp("naive.gclp");
    const auto log = tmp("naive-log.csv");
    REQUIRE(gcl_isa(c.ptr, ckpt.c_str(), log.c_str()) == GCL_OK);
    CHECK(std::filesystem::file_size(ckpt) == 20 + 2 * 8 * 8);
    CHECK(slurp(log).rfind("step,loss,grad_norm,perturbation_norm\n", 0) == 0);

    REQUIRE(gcl_config_set(c.ptr, "isa.checkpoint", ckpt.c_str()) == GCL_OK);
    Result r;
    REQUIRE(gcl_run(c.ptr, &r.ptr) == GCL_OK);
    CHECK(std::string(gcl_result_record(r.ptr)).find("\"provenance\":\"isa_naive\"") != std::string::npos);

    Config off;
    CHECK(gcl_isa(off.ptr, ckpt.c_str(), nullptr) == GCL_ERR_CONFIG);
    std::filesystem::remove(ckpt);
    std::filesystem::remove(log);
}

TEST_CASE("sweep, report and stream export") {
    Config c;
    REQUIRE(gcl_config_set(c.ptr, "repeat_seeds", "1,2") == GCL_OK);
    const auto records = tmp("records.jsonl");
    std::filesystem::remove(records);
    size_t runs = 0;
    REQUIRE(gcl_sweep(c.ptr, "mask", 2, records.c_str(), &runs) == GCL_OK);
    CHECK(runs == 8);
    const auto table = tmp("report.txt"), curves = tmp("curves.csv");
    REQUIRE(gcl_report(records.c_str(), table.c_str(), curves.c_str()) == GCL_OK);
    CHECK(slurp(table).find("mask=seen") != std::string::npos);
    CHECK(slurp(curves).rfind("step,accuracy,series,seed\n", 0) == 0);
    CHECK(gcl_sweep(c.ptr, "depth", 1, records.c_str(), &runs) == GCL_ERR_CONFIG);

    const auto plan = tmp("plan.jsonl");
    REQUIRE(gcl_stream_export(c.ptr, plan.c_str()) == GCL_OK);
    const std::string p = slurp(plan);
    CHECK(std::count(p.begin(), p.end(), '\n') == 3);
    for (const auto& f : {records, table, curves, plan}) std::filesystem::remove(f);
}
