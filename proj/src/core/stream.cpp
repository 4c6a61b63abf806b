// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/stream.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"

namespace gcl::stream {

namespace {

std::size_t rounded_share(double ratio, std::size_t total) {
    return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(total)));
}

void check_ratio(double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
}

// Used when a class set is smaller than the session count: each class goes
// to its own randomly chosen session and the rest stay empty.
std::vector<std::vector<std::size_t>> scatter_sparse(std::vector<std::size_t> classes, std::size_t sessions,
                                                     std::uint64_t seed) {
    Rng rng = make_rng(seed, "scatter-sparse");
    std::vector<std::size_t> slots(sessions);
    for (std::size_t i = 0; i < sessions; ++i) slots[i] = i;
    shuffle(slots, rng);
    shuffle(classes, rng);
    std::vector<std::vector<std::size_t>> parts(sessions);
    for (std::size_t i = 0; i < classes.size(); ++i) parts[slots[i]].push_back(classes[i]);
    return parts;
}

}  // namespace

void StreamConfig::validate() const {
    check_ratio(disjoint_ratio, "disjoint class ratio m");
    check_ratio(blurry_ratio, "blurry sample ratio n");
    if (sessions < 1) throw ConfigError("session count must be >= 1");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
}

ClassSplit split_classes(std::vector<std::size_t> classes, double m, std::uint64_t seed) {
    check_ratio(m, "disjoint class ratio m");
    Rng rng = make_rng(seed, "split-classes");
    std::sort(classes.begin(), classes.end());
    shuffle(classes, rng);
    const std::size_t k = rounded_share(m, classes.size());
    ClassSplit split;
    split.disjoint.assign(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(k));
    split.blurry.assign(classes.begin() + static_cast<std::ptrdiff_t>(k), classes.end());
    std::sort(split.disjoint.begin(), split.disjoint.end());
    std::sort(split.blurry.begin(), split.blurry.end());
    return split;
}

std::vector<std::vector<std::size_t>> partition_nonuniform(std::vector<std::size_t> classes, std::size_t sessions,
                                                           std::uint64_t seed) {
    if (sessions == 0) throw InfeasibleError("cannot partition into zero sessions");
    if (classes.size() < sessions) {
        throw InfeasibleError("cannot split " + std::to_string(classes.size()) + " classes into " +
                              std::to_string(sessions) + " nonempty sessions");
    }
    Rng rng = make_rng(seed, "partition");
    shuffle(classes, rng);
    // Cut points are distinct positions in [1, |classes| - 1].
    std::vector<std::size_t> positions;
    for (std::size_t i = 1; i < classes.size(); ++i) positions.push_back(i);
    shuffle(positions, rng);
    std::vector<std::size_t> cuts(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(sessions - 1));
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(classes.size());
    std::vector<std::vector<std::size_t>> parts;
    std::size_t start = 0;
    for (std::size_t cut : cuts) {
        parts.emplace_back(classes.begin() + static_cast<std::ptrdiff_t>(start),
                           classes.begin() + static_cast<std::ptrdiff_t>(cut));
        std::sort(parts.back().begin(), parts.back().end());
        start = cut;
    }
    return parts;
}

BlurrySplit split_blurry_samples(std::vector<std::size_t> sample_ids, double n, std::uint64_t seed) {
    check_ratio(n, "blurry sample ratio n");
    Rng rng = make_rng(seed, "split-blurry");
    std::sort(sample_ids.begin(), sample_ids.end());
    shuffle(sample_ids, rng);
    const std::size_t k = rounded_share(n, sample_ids.size());
    BlurrySplit split;
    split.blurred.assign(sample_ids.begin(), sample_ids.begin() + static_cast<std::ptrdiff_t>(k));
    split.normal.assign(sample_ids.begin() + static_cast<std::ptrdiff_t>(k), sample_ids.end());
    std::sort(split.blurred.begin(), split.blurred.end());
    std::sort(split.normal.begin(), split.normal.end());
    return split;
}

Stream build_stream(const Dataset& dataset, const StreamConfig& config) {
    config.validate();
    const std::size_t T = config.sessions;
    const auto class_set = dataset.classes();
    std::vector<std::size_t> classes(class_set.begin(), class_set.end());
    if (classes.size() < T) {
        throw InfeasibleError("|C| = " + std::to_string(classes.size()) + " is smaller than T = " + std::to_string(T));
    }

    Stream stream;
    SessionPlan& plan = stream.plan;
    plan.class_split = split_classes(classes, config.disjoint_ratio, derive_seed(config.seed, "C"));
    auto partition = [&](const std::vector<std::size_t>& set, std::string_view tag) {
        const auto seed = derive_seed(config.seed, tag);
        return set.size() >= T ? partition_nonuniform(set, T, seed) : scatter_sparse(set, T, seed);
    };
    const auto disjoint_parts = partition(plan.class_split.disjoint, "CD");
    const auto blurry_parts = partition(plan.class_split.blurry, "CB");

    std::vector<std::size_t> class_home(dataset.num_classes, T);
    std::vector<bool> is_blurry(dataset.num_classes, false);
    plan.sessions.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        plan.sessions[t].disjoint_classes = disjoint_parts[t];
        plan.sessions[t].blurry_classes = blurry_parts[t];
        for (std::size_t c : disjoint_parts[t]) class_home[c] = t;
        for (std::size_t c : blurry_parts[t]) {
            class_home[c] = t;
            is_blurry[c] = true;
        }
    }

    const std::size_t n_train = dataset.train.size();
    plan.home_session.resize(n_train);
    std::vector<std::size_t> blurry_ids;
    for (std::size_t i = 0; i < n_train; ++i) {
        const std::size_t label = dataset.train[i].label;
        if (label >= dataset.num_classes || class_home[label] == T) {
            throw ConfigError("train example " + std::to_string(i) + " has an unknown label");
        }
        plan.home_session[i] = class_home[label];
        if (is_blurry[label]) blurry_ids.push_back(i);
    }
    const BlurrySplit bsplit = split_blurry_samples(blurry_ids, config.blurry_ratio, derive_seed(config.seed, "XB"));
    plan.blurry_sample_count = blurry_ids.size();
    plan.blurred_count = bsplit.blurred.size();

    std::vector<bool> blurred(n_train, false);
    for (std::size_t id : bsplit.blurred) blurred[id] = true;

    Rng assign_rng = make_rng(config.seed, "assign-blurred");
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAssignmentAttempts && !ok; ++attempt) {
        plan.emitted_session = plan.home_session;
        for (std::size_t id : bsplit.blurred) {
            if (T == 1) break;
            // Uniform over the T-1 sessions other than home.
            std::size_t s = uniform_index(assign_rng, T - 1);
            if (s >= plan.home_session[id]) ++s;
            plan.emitted_session[id] = s;
        }
        std::vector<std::size_t> counts(T, 0);
        for (std::size_t s : plan.emitted_session) counts[s]++;
        ok = std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
    }
    if (!ok) {
        throw InfeasibleError("a session stayed empty after " + std::to_string(kMaxAssignmentAttempts) +
                              " blurred-sample assignments");
    }

    Rng order_rng = make_rng(config.seed, "session-order");
    for (std::size_t t = 0; t < T; ++t) {
        auto& rec = plan.sessions[t];
        rec.example_ids.clear();
        for (std::size_t i = 0; i < n_train; ++i) {
            if (plan.emitted_session[i] != t) continue;
            rec.example_ids.push_back(i);
            if (blurred[i] && plan.home_session[i] != t) rec.blurred_in++;
        }
        shuffle(rec.example_ids, order_rng);
        std::set<std::size_t> present;
        for (std::size_t id : rec.example_ids) present.insert(dataset.train[id].label);
        rec.classes.assign(present.begin(), present.end());
    }

    std::size_t step = 0;
    for (std::size_t t = 0; t < T; ++t) {
        const auto& ids = plan.sessions[t].example_ids;
        for (std::size_t begin = 0; begin < ids.size(); begin += config.batch_size) {
            StreamBatch b;
            b.session = t;
            b.is_session_start = begin == 0;
            b.global_step = step++;
            const std::size_t end = std::min(ids.size(), begin + config.batch_size);
            for (std::size_t k = begin; k < end; ++k) {
                b.example_ids.push_back(ids[k]);
                b.examples.push_back(dataset.train[ids[k]]);
            }
            stream.batches.push_back(std::move(b));
        }
    }
    return stream;
}

std::string export_plan(const SessionPlan& plan) {
    std::ostringstream os;
    for (std::size_t t = 0; t < plan.sessions.size(); ++t) {
        const auto& s = plan.sessions[t];
        nlohmann::ordered_json rec;
        rec["session"] = t + 1;
        rec["disjoint_classes"] = s.disjoint_classes;
        rec["blurry_classes"] = s.blurry_classes;
        rec["classes"] = s.classes;
        rec["samples"] = s.example_ids.size();
        rec["blurred"] = s.blurred_in;
        os << rec.dump() << '\n';
    }
    return os.str();
}

}  // namespace gcl::stream
