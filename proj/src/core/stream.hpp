// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/data.hpp"
#include "core/rng.hpp"

namespace gcl::stream {

struct StreamConfig {
    double disjoint_ratio = 0.5;  // m
    double blurry_ratio = 0.1;    // n
    std::size_t sessions = 5;     // T
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    static constexpr std::size_t epochs = 1;  // one pass, always

    void validate() const;
};

struct ClassSplit {
    std::vector<std::size_t> disjoint;  // C^D
    std::vector<std::size_t> blurry;    // C^B
};

/// |C^D| = round(m |C|), chosen uniformly at random.
ClassSplit split_classes(std::vector<std::size_t> classes, double m, std::uint64_t seed);

/// Random composition into `sessions` nonempty parts: shuffle, then cut at
/// sessions-1 distinct positions drawn uniformly.
std::vector<std::vector<std::size_t>> partition_nonuniform(std::vector<std::size_t> classes, std::size_t sessions,
                                                           std::uint64_t seed);

struct BlurrySplit {
    std::vector<std::size_t> blurred;  // X~^B
    std::vector<std::size_t> normal;   // X-^B
};

/// |X~^B| = round(n |X^B|), uniform without replacement.
BlurrySplit split_blurry_samples(std::vector<std::size_t> sample_ids, double n, std::uint64_t seed);

struct SessionRecord {
    std::vector<std::size_t> disjoint_classes;  // C^D_t
    std::vector<std::size_t> blurry_classes;    // C^B_t
    std::vector<std::size_t> classes;           // every label present in X_t
    std::vector<std::size_t> example_ids;       // X_t in emission order (train indices)
    std::size_t blurred_in = 0;                 // |X~^B_t|
};

struct SessionPlan {
    ClassSplit class_split;
    std::vector<SessionRecord> sessions;
    std::vector<std::size_t> home_session;      // per train example
    std::vector<std::size_t> emitted_session;   // per train example
    std::size_t blurry_sample_count = 0;        // |X^B|
    std::size_t blurred_count = 0;              // |X~^B|
};

struct StreamBatch {
    Batch examples;
    std::vector<std::size_t> example_ids;
    std::size_t session = 0;
    bool is_session_start = false;
    std::size_t global_step = 0;
};

struct Stream {
    SessionPlan plan;
    std::vector<StreamBatch> batches;
};

inline constexpr int kMaxAssignmentAttempts = 10;

/// Materializes the Si-Blurry schedule and its one-pass batches. Blurred
/// samples move to a uniformly chosen session other than their home one.
Stream build_stream(const Dataset& dataset, const StreamConfig& config);

/// One JSON object per line, one line per session.
std::string export_plan(const SessionPlan& plan);

}  // namespace gcl::stream
