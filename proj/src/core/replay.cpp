// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/replay.hpp"

#include <algorithm>

namespace gcl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(make_rng(seed, "reservoir")) {
    items_.reserve(capacity);
}

void ReplayBuffer::reservoir_update(const Example& example) {
    ++seen_;
    if (capacity_ == 0) return;
    if (items_.size() < capacity_) {
        items_.push_back(example);
    } else {
        const std::size_t u = uniform_index(rng_, seen_);
        if (u < capacity_) items_[u] = example;
    }
    peak_ = std::max(peak_, items_.size());
}

Batch ReplayBuffer::sample(std::size_t k, Rng& rng) const {
    std::vector<std::size_t> idx(items_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const std::size_t take = std::min(k, idx.size());
    // Partial Fisher-Yates: first `take` slots end up uniformly chosen.
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + uniform_index(rng, idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    Batch out;
    for (std::size_t i = 0; i < take; ++i) out.push_back(items_[idx[i]]);
    return out;
}

}  // namespace gcl
