// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gcl {

enum class MaskPolicy { none, batch, session, seen };

std::string to_string(MaskPolicy policy);
MaskPolicy parse_mask_policy(const std::string& text);

/// Binary class mask over N logits.
struct MaskVector {
    std::vector<std::uint8_t> bits;
    MaskPolicy policy = MaskPolicy::none;

    static MaskVector full(std::size_t n, MaskPolicy policy = MaskPolicy::none) {
        return MaskVector{std::vector<std::uint8_t>(n, 1), policy};
    }

    std::size_t size() const { return bits.size(); }
    bool test(std::size_t i) const { return bits[i] != 0; }
    std::size_t count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }
    bool any() const { return count() > 0; }

    // Set bits of this mask are a subset of the other's.
    bool subset_of(const MaskVector& other) const {
        if (other.size() != size()) return false;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] && !other.bits[i]) return false;
        }
        return true;
    }

    std::vector<std::size_t> set_indices() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i]) out.push_back(i);
        }
        return out;
    }
};

}  // namespace gcl
