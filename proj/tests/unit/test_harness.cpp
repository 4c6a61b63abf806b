// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <type_traits>

#include <json.hpp>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/replay.hpp"
#include "core/results.hpp"
#include "core/runner.hpp"
#include "core/synthetic.hpp"
#include "fixtures.hpp"
#include "probe.hpp"

using namespace gcl;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("gcl_harness_" + name);
}

oracle::ProbeData probe_data(const std::vector<Example>& xs) {
    oracle::ProbeData d;
    for (const auto& e : xs) {
        d.x.push_back(e.features);
        d.y.push_back(e.label);
    }
    return d;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config text round-trip and hashing") {
    const ExperimentConfig a = fixture::small_experiment();
    const ExperimentConfig b = parse_config_text(a.canonical_text());
    CHECK(b.canonical_text() == a.canonical_text());
    CHECK(b.hash() == a.hash());

    ExperimentConfig c = a;
    c.seed = 99;
    c.label = "other";
    c.repeat_seeds = {4};
    CHECK(c.hash() == a.hash());
    c.set("mask", "session");
    CHECK(c.hash() != a.hash());

    const auto parsed = parse_config_text("# comment\n\nmask = none\n  gcl.lr=0.01  \n");
    CHECK(parsed.mask == MaskPolicy::none);
    CHECK(parsed.learning_rate == 0.01);
    CHECK_THROWS_AS(parse_config_text("no.such.key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("mask = sometimes\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("stream.sessions = two\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("just words\n"), ConfigError);

    // Keys in canonical text come out sorted.
    std::istringstream in(a.canonical_text());
    std::string line, prev;
    while (std::getline(in, line)) {
        CHECK(prev < line.substr(0, line.find(" = ")));
        prev = line.substr(0, line.find(" = "));
    }
    CHECK(config_keys().size() == a.to_map().size());
}

TEST_CASE("synthetic generator") {
    data::SyntheticSpec spec;
    spec.classes = 5;
    spec.per_class = 20;
    spec.dim = 6;
    spec.seed = 3;
    const Dataset a = data::generate_synthetic(spec);
    const Dataset b = data::generate_synthetic(spec);
    REQUIRE(a.train.size() == b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].features == b.train[i].features);
    CHECK(a.train.size() == 80);
    CHECK(a.test.size() == 20);
    std::map<std::size_t, int> per_class_test;
    for (const auto& e : a.test) per_class_test[e.label]++;
    for (const auto& [c, k] : per_class_test) CHECK(k == 4);

    spec.spread = 0.0;
    const Dataset exact = data::generate_synthetic(spec);
    std::map<std::size_t, std::vector<double>> centre;
    for (const auto& e : exact.train) centre[e.label] = e.features;
    for (const auto& e : exact.test) CHECK(e.features == centre[e.label]);
    for (const auto& [i, ci] : centre) {
        for (const auto& [j, cj] : centre) {
            if (i >= j) continue;
            double d2 = 0.0;
            for (std::size_t k = 0; k < ci.size(); ++k) d2 += (ci[k] - cj[k]) * (ci[k] - cj[k]);
            CHECK(std::sqrt(d2) >= spec.margin - 1e-9);
        }
    }

    spec.classes = 50;
    spec.dim = 1;
    CHECK_THROWS_AS(data::generate_synthetic(spec), ConfigError);
}

TEST_CASE("default downstream data is linearly separable to 95%") {
    const ExperimentConfig c;
    const Dataset d = downstream_dataset(c);
    CHECK(d.num_classes == 20);
    CHECK(d.feature_dim == 64);
    const auto r = oracle::linear_probe(probe_data(d.train), probe_data(d.test), d.num_classes, 200);
    MESSAGE("probe test accuracy " << r.test_accuracy);
    CHECK(r.test_accuracy >= 0.95);
}

TEST_CASE("delimited dataset ingestion") {
    const auto path = temp_file("data.csv");
    {
        std::ofstream out(path);
        for (int i = 0; i < 6; ++i) out << (i % 2 ? 7 : 3) << ',' << i << ',' << -i << '\n';
    }
    const Dataset d = data::load_delimited(path, 0.5, 1);
    CHECK(d.num_classes == 2);
    CHECK(d.feature_dim == 2);
    CHECK(d.train.size() + d.test.size() == 6);
    {
        std::ofstream out(path);
        out << "1,2,3\n0,4\n";
    }
    CHECK_THROWS_AS(data::load_delimited(path, 0.5, 1), DimensionError);
    {
        std::ofstream out(path);
        out << "1,2,x\n";
    }
    CHECK_THROWS_AS(data::load_delimited(path, 0.5, 1), IoError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(data::load_delimited(path, 0.5, 1), IoError);
}

TEST_CASE("reservoir sampling") {
    ReplayBuffer empty(0, 1);
    for (int i = 0; i < 50; ++i) empty.reservoir_update({{}, 0});
    CHECK(empty.size() == 0);
    Rng rng = make_rng(1, "s");
    CHECK(empty.sample(4, rng).empty());

    // Each of 1000 items should survive in a 100-slot buffer with probability 0.1.
    std::vector<int> kept(1000, 0);
    const int trials = 10000;
    std::size_t peak = 0;
    for (int t = 0; t < trials; ++t) {
        ReplayBuffer buf(100, static_cast<std::uint64_t>(t));
        for (std::size_t i = 0; i < 1000; ++i) {
            buf.reservoir_update({{}, i});
            peak = std::max(peak, buf.size());
        }
        for (const auto& e : buf.items()) kept[e.label]++;
    }
    CHECK(peak == 100);
    double worst = 0.0;
    for (int k : kept) worst = std::max(worst, std::abs(k / double(trials) - 0.1));
    // sd of one frequency is 0.003; 0.015 is five of them.
    CHECK(worst < 0.015);

    ReplayBuffer buf(5, 2);
    for (std::size_t i = 0; i < 20; ++i) buf.reservoir_update({{}, i});
    const Batch s = buf.sample(3, rng);
    std::set<std::size_t> distinct;
    for (const auto& e : s) distinct.insert(e.label);
    CHECK(distinct.size() == 3);
    CHECK(buf.sample(10, rng).size() == 5);
    CHECK(buf.peak_size() == 5);
}

TEST_CASE("inference takes no mask and no session") {
    using Predict = std::size_t (*)(const ParameterStore&, const model::BackboneConfig&, std::span<const double>,
                                    std::span<const std::size_t>);
    static_assert(std::is_same_v<decltype(&model::predict), Predict>);
    using Accuracy = double (*)(const ParameterStore&, const model::BackboneConfig&, std::span<const Example>,
                                std::span<const std::size_t>);
    static_assert(std::is_same_v<decltype(&accuracy), Accuracy>);
    CHECK(true);
}

TEST_CASE("run invariants on a small run") {
    ExperimentConfig c = fixture::small_experiment();
    c.buffer = "10";
    std::vector<StepTrace> trace;
    RunOptions opts;
    opts.observer = [&](const StepTrace& t) { trace.push_back(t); };
    const RunResult r = run_gcl(c, opts);
    const Dataset d = downstream_dataset(c);

    CHECK(r.stream_examples_consumed == d.train.size());
    CHECK(r.peak_buffer_size <= 10);
    CHECK(r.backbone_unchanged);
    CHECK(r.replay_examples_used > 0);
    CHECK(r.steps == trace.size());
    CHECK(r.config_hash == c.hash());
    CHECK(r.code_version == kCodeVersion);
    CHECK(r.metrics.matrix.sessions() == 3);
    CHECK(r.metrics.anytime.size() > 1);
    CHECK(r.metrics.a_auc >= 0.0);
    CHECK(r.metrics.a_auc <= 1.0);

    std::size_t stream_total = 0;
    for (const auto& t : trace) {
        stream_total += t.stream_labels.size();
        CHECK(t.buffer_size <= 10);
        for (std::size_t y : t.stream_labels) CHECK(t.applied_mask.test(y));
        for (std::size_t y : t.replay_labels) CHECK(t.applied_mask.test(y));
        CHECK(t.batch_mask.subset_of(t.session_mask));
        CHECK(t.session_mask.subset_of(t.seen_mask));
        CHECK(t.applied_mask.bits == t.batch_mask.bits);
    }
    CHECK(stream_total == d.train.size());

    const RunResult again = run_gcl(c);
    CHECK(results::record_line(again) == results::record_line(r));
    CHECK(again.step_log == r.step_log);
}

TEST_CASE("run errors") {
    ExperimentConfig c = fixture::small_experiment();
    c.isa_checkpoint = temp_file("missing.gclp").string();
    c.set("isa", "fam");
    CHECK_THROWS_AS(run_gcl(c), IoError);

    ExperimentConfig bad = fixture::small_experiment();
    const auto path = temp_file("wrongdim.csv");
    {
        std::ofstream out(path);
        for (int i = 0; i < 8; ++i) out << i % 4 << ",1,2,3\n";
    }
    bad.data_path = path.string();
    CHECK_THROWS_AS(run_gcl(bad), DimensionError);
    std::filesystem::remove(path);

    ExperimentConfig infeasible = fixture::small_experiment();
    infeasible.set("stream.sessions", "9");
    CHECK_THROWS_AS(run_gcl(infeasible), InfeasibleError);
}

TEST_CASE("sweep expansion isolates the ablated key") {
    ExperimentConfig base = fixture::small_experiment();
    base.repeat_seeds = {7};
    const auto grid = results::expand_sweep(base, results::Ablation::mask);
    REQUIRE(grid.size() == 4);
    std::set<MaskPolicy> masks;
    for (const auto& g : grid) {
        masks.insert(g.mask);
        CHECK(g.seed == 7);
        for (const auto& k : results::config_diff(grid[0], g)) {
            const bool allowed = k == "mask" || k == "label";
            CHECK_MESSAGE(allowed, k);
        }
    }
    CHECK(masks.size() == 4);

    base.repeat_seeds = {1, 2};
    CHECK(results::expand_sweep(base, results::Ablation::isa).size() == 8);
    CHECK(results::expand_sweep(base, results::Ablation::buffer).size() == 6);
    CHECK(results::expand_sweep(base, results::Ablation::none).size() == 2);
    CHECK_THROWS_AS(results::parse_ablation("depth"), ConfigError);
}

TEST_CASE("parallel sweep matches serial runs") {
    ExperimentConfig base = fixture::small_experiment();
    base.repeat_seeds = {1, 2};
    const auto grid = results::expand_sweep(base, results::Ablation::none);
    const auto par = results::run_sweep(grid, 2);
    REQUIRE(par.size() == 2);
    CHECK(par[0] == results::record_line(run_gcl(grid[0])));
    CHECK(par[1] == results::record_line(run_gcl(grid[1])));
}

TEST_CASE("report format") {
    CHECK(results::format_mean_std({0.5, 0.7}) == "60.00±14.14");
    CHECK(results::format_mean_std({0.25}) == "25.00±0.00");
    const std::vector<std::string> lines{
        R"({"label":"a","seed":1,"a_auc":0.5,"a_last":0.4,"f_last":0.1,"anytime":[[10,0.3],[20,0.5]],"session1_curve":[0.9,0.8]})",
        R"({"label":"a","seed":2,"a_auc":0.7,"a_last":0.6,"f_last":0.3,"anytime":[[10,0.4]],"session1_curve":[0.7]})",
        R"({"label":"","mask":"none","isa":"off","buffer":"0","seed":1,"a_auc":1,"a_last":1,"f_last":0,"anytime":[],"session1_curve":[]})"};
    const auto rep = results::build_report(lines);
    CHECK(rep.table.find("60.00±14.14") != std::string::npos);
    CHECK(rep.table.find("mask=none isa=off buffer=0") != std::string::npos);
    CHECK(rep.table.rfind("series", 0) == 0);
    CHECK(rep.curves_csv.rfind("step,accuracy,series,seed\n10,0.29999999999999999,a/anytime,1\n", 0) == 0);
    CHECK(rep.curves_csv.find("2,0.80000000000000004,a/session1,1\n") != std::string::npos);
    CHECK_THROWS_AS(results::build_report({"{not json"}), IoError);
}

}  // TEST_SUITE
