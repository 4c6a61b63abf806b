// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/data.hpp"

#include "core/error.hpp"

namespace gcl {

std::set<std::size_t> Dataset::classes() const {
    std::set<std::size_t> out;
    for (const auto& e : train) out.insert(e.label);
    for (const auto& e : test) out.insert(e.label);
    return out;
}

void Dataset::validate() const {
    std::vector<std::size_t> n_train(num_classes, 0), n_test(num_classes, 0);
    for (const auto* split : {&train, &test}) {
        for (const auto& e : *split) {
            if (e.label >= num_classes) {
                throw ConfigError("label " + std::to_string(e.label) + " outside [0, " + std::to_string(num_classes) + ")");
            }
            if (e.features.size() != feature_dim) {
                throw DimensionError("example with " + std::to_string(e.features.size()) + " features, expected " +
                                     std::to_string(feature_dim));
            }
            (split == &train ? n_train : n_test)[e.label]++;
        }
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (n_train[c] == 0 || n_test[c] == 0) {
            throw ConfigError("class " + std::to_string(c) + " needs at least one train and one test example");
        }
    }
}

std::set<std::size_t> labels_of(const Batch& batch) {
    std::set<std::size_t> out;
    for (const auto& e : batch) out.insert(e.label);
    return out;
}

}  // namespace gcl
