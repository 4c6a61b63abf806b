// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <set>
#include <vector>

namespace gcl {

struct Example {
    std::vector<double> features;
    std::size_t label = 0;
};

using Batch = std::vector<Example>;

/// Labelled examples with a per-class holdout split. Labels are dense
/// indices in [0, num_classes).
struct Dataset {
    std::vector<Example> train;
    std::vector<Example> test;
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;

    std::set<std::size_t> classes() const;
    // Throws unless every class has at least one train and one test example.
    void validate() const;
};

std::set<std::size_t> labels_of(const Batch& batch);

}  // namespace gcl
