// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "core/data.hpp"
#include "core/rng.hpp"

namespace gcl {

/// Fixed-capacity reservoir of past examples.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed);

    // Insert while under capacity; afterwards replace slot u ~ U{0..t-1} when u < capacity.
    void reservoir_update(const Example& example);
    // Up to k distinct stored examples, uniformly without replacement.
    Batch sample(std::size_t k, Rng& rng) const;

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    std::size_t seen() const { return seen_; }
    std::size_t peak_size() const { return peak_; }
    const std::vector<Example>& items() const { return items_; }

private:
    std::size_t capacity_;
    std::vector<Example> items_;
    std::size_t seen_ = 0;
    std::size_t peak_ = 0;
    Rng rng_;
};

}  // namespace gcl
