// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/tensor.hpp"

namespace gcl {

/// Gradient aligned with ParameterStore::flat_view(). The norm is computed
/// once at construction and cached.
class GradVector {
public:
    GradVector() = default;
    explicit GradVector(std::vector<double> values);

    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double l2_norm() const { return l2_norm_; }
    double operator[](std::size_t i) const { return values_[i]; }
    bool all_finite() const;

private:
    std::vector<double> values_;
    double l2_norm_ = 0.0;
};

double l2_norm(std::span<const double> v);

/// Named tensors split into frozen and trainable sets. Trainable entries are
/// addressable as one contiguous vector (in name order) so perturbation and
/// optimizer arithmetic can work on a single span.
class ParameterStore {
public:
    struct Entry {
        Tensor tensor;
        bool trainable = false;
        std::size_t offset = 0;  // into the flat view, trainable entries only
    };

    void add(std::string name, Tensor tensor, bool trainable);
    void remove(std::string_view name);
    bool contains(std::string_view name) const;

    const Tensor& get(std::string_view name) const;
    bool is_trainable(std::string_view name) const;
    // Offset into the flat view; nullopt for frozen entries.
    std::optional<std::size_t> flat_offset(std::string_view name) const;

    void set_trainable(std::string_view name, bool trainable);
    void freeze_all();
    // Overwrites a tensor in place; shape must match.
    void assign(std::string_view name, const Tensor& value);

    std::size_t flat_size() const { return flat_size_; }
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> flat);
    // theta += delta over trainable entries.
    void add_to_trainable(std::span<const double> delta);

    std::vector<std::string> names() const;
    std::vector<std::string> trainable_names() const;
    std::size_t total_size() const;

    // Byte-level fingerprint of the frozen (or all) entries, for invariance checks.
    std::uint64_t fingerprint(bool frozen_only) const;

private:
    void relayout();
    Entry& entry(std::string_view name);
    const Entry& entry(std::string_view name) const;

    std::map<std::string, Entry, std::less<>> entries_;
    std::size_t flat_size_ = 0;
};

}  // namespace gcl
