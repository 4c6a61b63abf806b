// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

// Drives the installed-style `gcl` executable through a shell.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "small_config.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
};

Outcome sh(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " '" GCL_CLI_PATH "' " + args + " 2>/dev/null";
    Outcome o;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) o.out.append(buf.data(), n);
    const int status = pclose(p);
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

struct Workdir {
    fs::path dir;
    fs::path cfg;
    explicit Workdir(const std::string& name) : dir(fs::temp_directory_path() / ("gcl_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
        cfg = dir / "small.cfg";
        std::ofstream(cfg) << fixture::kSmallConfigText;
    }
    ~Workdir() { fs::remove_all(dir); }
    std::string out() const { return dir.string() + "/out"; }
};

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) n += !line.empty();
    return n;
}

}  // namespace

TEST_CASE("run twice gives byte-identical rows") {
    Workdir w("run");
    const std::string args = "run --config " + w.cfg.string() + " --seed 7 --out " + w.out();
    const Outcome a = sh(args);
    const Outcome b = sh(args);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("\"seed\":7") != std::string::npos);
    CHECK(line_count(w.out() + "/results.jsonl") == 2);
    CHECK(fs::exists(w.out() + "/steps"));
}

TEST_CASE("usage errors exit 2, runtime failures exit 1") {
    Workdir w("codes");
    CHECK(sh("run --no-such-flag").code == 2);
    CHECK(sh("").code == 2);
    CHECK(sh("frobnicate").code == 2);
    CHECK(sh("sweep --ablate depth").code == 2);
    CHECK(sh("run --config " + (w.dir / "missing.cfg").string()).code == 2);
    CHECK(sh("run --config " + w.cfg.string() + " --set stream.sessions=9 --out " + w.out()).code == 1);
    CHECK(sh("run --config " + w.cfg.string() + " --set bogus=1 --out " + w.out()).code == 1);
    CHECK(sh("--version").code == 0);
}

TEST_CASE("isa then run with the checkpoint") {
    Workdir w("isa");
    const Outcome isa = sh("isa --config " + w.cfg.string() + " --set isa=sam --out " + w.out());
    REQUIRE(isa.code == 0);
    const std::string ckpt = w.out() + "/prompts-sam-s1.gclp";
    CHECK(isa.out == ckpt + "\n");
    CHECK(fs::exists(w.out() + "/prompts-sam-s1-log.csv"));
    const Outcome run = sh("run --config " + w.cfg.string() + " --set isa=sam --checkpoint " + ckpt + " --out " + w.out());
    REQUIRE(run.code == 0);
    CHECK(run.out.find("\"provenance\":\"isa_sam\"") != std::string::npos);
}

TEST_CASE("sweep over masks and report") {
    Workdir w("sweep");
    const Outcome s = sh("sweep --config " + w.cfg.string() + " --ablate mask --seed 3 --jobs 2", "GCL_OUT_DIR='" + w.out() + "'");
    REQUIRE(s.code == 0);
    CHECK(line_count(w.out() + "/results.jsonl") == 4);
    const Outcome r = sh("report", "GCL_OUT_DIR='" + w.out() + "'");
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("series", 0) == 0);
    for (const char* m : {"mask=none", "mask=batch", "mask=session", "mask=seen"}) CHECK(r.out.find(m) != std::string::npos);
    CHECK(r.out.find("±") != std::string::npos);
    std::ifstream curves(w.out() + "/curves.csv");
    std::string header;
    std::getline(curves, header);
    CHECK(header == "step,accuracy,series,seed");
}

TEST_CASE("plan export") {
    Workdir w("plan");
    const Outcome p = sh("plan --config " + w.cfg.string() + " --seed 4 --out " + w.out());
    REQUIRE(p.code == 0);
    CHECK(line_count(w.out() + "/plan-s4.jsonl") == 3);
    CHECK(p.out.find("\"session\":1") != std::string::npos);
}
