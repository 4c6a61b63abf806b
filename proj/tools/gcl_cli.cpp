// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

// gcl: command line front end over the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcl.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::vector<std::string> overrides;
    std::size_t threads = 1;
};

struct Failure {
    std::string message;
};

void check(gcl_status s, const char* what) {
    if (s != GCL_OK) throw Failure{std::string(what) + ": " + gcl_last_error()};
}

class Config {
public:
    explicit Config(const Common& c) {
        if (c.config_path.empty()) check(gcl_config_create(&h_), "config");
        else check(gcl_config_load(c.config_path.c_str(), &h_), "config");
        for (const auto& kv : c.overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw Failure{"--set expects key=value, got '" + kv + "'"};
            set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (c.seed) set("seed", std::to_string(*c.seed));
    }
    ~Config() { gcl_config_destroy(h_); }
    Config(const Config&) = delete;
    Config& operator=(const Config&) = delete;

    void set(const std::string& k, const std::string& v) { check(gcl_config_set(h_, k.c_str(), v.c_str()), "--set"); }
    std::string get(const std::string& k) {
        const char* v = nullptr;
        check(gcl_config_get(h_, k.c_str(), &v), "config");
        return v;
    }
    gcl_config* handle() { return h_; }

private:
    gcl_config* h_ = nullptr;
};

fs::path out_dir(const Common& c) {
    fs::path dir = c.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("GCL_OUT_DIR");
        dir = env && *env ? env : "gcl_out";
    }
    fs::create_directories(dir);
    return dir;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "Config file (key = value lines)")->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "Run seed");
    sub->add_option("--out", c.out_dir, "Output directory (default $GCL_OUT_DIR or ./gcl_out)");
    sub->add_option("--set", c.overrides, "Config override key=value")->take_all();
    sub->add_option("--threads", c.threads, "Worker threads per run")->check(CLI::PositiveNumber);
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) throw Failure{"cannot write " + p.string()};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Failure{"cannot read " + p.string()};
    return {std::istreambuf_iterator<char>(in), {}};
}

int cmd_isa(const Common& c, std::string checkpoint) {
    Config cfg(c);
    const auto dir = out_dir(c);
    if (cfg.get("isa") == "off") cfg.set("isa", "fam");
    const std::string stem = "prompts-" + cfg.get("isa") + "-s" + cfg.get("seed");
    if (checkpoint.empty()) checkpoint = (dir / (stem + ".gclp")).string();
    const auto log = dir / (stem + "-log.csv");
    check(gcl_isa(cfg.handle(), checkpoint.c_str(), log.string().c_str()), "isa");
    std::cout << checkpoint << '\n';
    return 0;
}

int cmd_run(const Common& c, const std::string& checkpoint) {
    Config cfg(c);
    if (!checkpoint.empty()) cfg.set("isa.checkpoint", checkpoint);
    const auto dir = out_dir(c);
    gcl_result* r = nullptr;
    check(gcl_run(cfg.handle(), &r), "run");
    const std::string record = gcl_result_record(r);
    const std::string steps = gcl_result_step_log(r);
    const double seconds = gcl_result_wall_clock(r);
    gcl_result_destroy(r);

    const char* hash = nullptr;
    check(gcl_config_hash(cfg.handle(), &hash), "hash");
    const std::string config_hash = hash;
    const std::string run_id = config_hash + "-s" + cfg.get("seed");
    fs::create_directories(dir / "steps");
    write_file(dir / "steps" / (run_id + ".csv"), steps);
    std::ofstream rec(dir / "results.jsonl", std::ios::app | std::ios::binary);
    if (!rec || !(rec << record << '\n')) throw Failure{"cannot append to results.jsonl"};
    std::cout << record << '\n';
    std::fprintf(stderr, "gcl: run %s finished in %.2fs\n", run_id.c_str(), seconds);
    return 0;
}

int cmd_sweep(const Common& c, const std::string& ablate, std::size_t jobs) {
    Config cfg(c);
    // An explicit --seed narrows the grid to that one seed.
    if (c.seed) cfg.set("repeat_seeds", std::to_string(*c.seed));
    const auto records = out_dir(c) / "results.jsonl";
    std::size_t runs = 0;
    check(gcl_sweep(cfg.handle(), ablate.empty() ? nullptr : ablate.c_str(), jobs, records.string().c_str(), &runs),
          "sweep");
    std::cout << runs << " runs appended to " << records.string() << '\n';
    return 0;
}

int cmd_report(const Common& c, std::string records) {
    const auto dir = out_dir(c);
    if (records.empty()) records = (dir / "results.jsonl").string();
    const auto table = dir / "report.txt";
    const auto curves = dir / "curves.csv";
    check(gcl_report(records.c_str(), table.string().c_str(), curves.string().c_str()), "report");
    std::cout << read_file(table);
    return 0;
}

int cmd_plan(const Common& c) {
    Config cfg(c);
    const auto path = out_dir(c) / ("plan-s" + cfg.get("seed") + ".jsonl");
    check(gcl_stream_export(cfg.handle(), path.string().c_str()), "plan");
    std::cout << read_file(path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gcl: prompt-based general continual learning experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", gcl_version());
    bool verbose = false;
    app.add_flag("--verbose", verbose, "Print warnings");

    Common common;
    std::string checkpoint, ablate, records;
    std::size_t jobs = 1;

    auto* isa = app.add_subcommand("isa", "Initial session adaption; writes a prompt checkpoint");
    add_common(isa, common);
    isa->add_option("--checkpoint", checkpoint, "Checkpoint output path");

    auto* run = app.add_subcommand("run", "One online continual learning run");
    add_common(run, common);
    run->add_option("--checkpoint", checkpoint, "Prompt checkpoint from `isa`")->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "Seed grid, optionally crossed with an ablation");
    add_common(sweep, common);
    sweep->add_option("--ablate", ablate, "Ablated field")->check(CLI::IsMember({"mask", "isa", "buffer"}));
    sweep->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

    auto* report = app.add_subcommand("report", "Mean±std table and curve CSV from a record file");
    report->add_option("--out", common.out_dir, "Output directory (default $GCL_OUT_DIR or ./gcl_out)");
    report->add_option("--records", records, "Record file (default OUT/results.jsonl)")->check(CLI::ExistingFile);

    auto* plan = app.add_subcommand("plan", "Export the session plan of the configured stream");
    add_common(plan, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    gcl_set_quiet(verbose ? 0 : 1);
    gcl_set_num_threads(common.threads);
    try {
        if (*isa) return cmd_isa(common, checkpoint);
        if (*run) return cmd_run(common, checkpoint);
        if (*sweep) return cmd_sweep(common, ablate, jobs);
        if (*report) return cmd_report(common, records);
        if (*plan) return cmd_plan(common);
    } catch (const Failure& f) {
        std::cerr << "gcl: error: " << f.message << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "gcl: error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
