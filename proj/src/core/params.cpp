// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace gcl {

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

GradVector::GradVector(std::vector<double> values) : values_(std::move(values)), l2_norm_(gcl::l2_norm(values_)) {}

bool GradVector::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void ParameterStore::add(std::string name, Tensor tensor, bool trainable) {
    if (entries_.contains(name)) throw InvalidArgument("duplicate parameter '" + name + "'");
    entries_.emplace(std::move(name), Entry{std::move(tensor), trainable, 0});
    relayout();
}

void ParameterStore::remove(std::string_view name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
    entries_.erase(it);
    relayout();
}

bool ParameterStore::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

ParameterStore::Entry& ParameterStore::entry(std::string_view name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
    return it->second;
}

const ParameterStore::Entry& ParameterStore::entry(std::string_view name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
    return it->second;
}

const Tensor& ParameterStore::get(std::string_view name) const { return entry(name).tensor; }

bool ParameterStore::is_trainable(std::string_view name) const { return entry(name).trainable; }

std::optional<std::size_t> ParameterStore::flat_offset(std::string_view name) const {
    const auto& e = entry(name);
    if (!e.trainable) return std::nullopt;
    return e.offset;
}

void ParameterStore::set_trainable(std::string_view name, bool trainable) {
    entry(name).trainable = trainable;
    relayout();
}

void ParameterStore::freeze_all() {
    for (auto& [_, e] : entries_) e.trainable = false;
    relayout();
}

void ParameterStore::assign(std::string_view name, const Tensor& value) {
    auto& e = entry(name);
    if (e.tensor.shape() != value.shape()) {
        throw DimensionError("assign to '" + std::string(name) + "': expected " + to_string(e.tensor.shape()) +
                             ", got " + to_string(value.shape()));
    }
    e.tensor = value;
}

void ParameterStore::relayout() {
    flat_size_ = 0;
    for (auto& [_, e] : entries_) {
        if (!e.trainable) continue;
        e.offset = flat_size_;
        flat_size_ += e.tensor.size();
    }
}

std::vector<double> ParameterStore::flatten() const {
    std::vector<double> flat;
    flat.reserve(flat_size_);
    for (const auto& [_, e] : entries_) {
        if (e.trainable) flat.insert(flat.end(), e.tensor.values().begin(), e.tensor.values().end());
    }
    return flat;
}

void ParameterStore::unflatten(std::span<const double> flat) {
    if (flat.size() != flat_size_) {
        throw DimensionError("unflatten: expected " + std::to_string(flat_size_) + " values, got " +
                             std::to_string(flat.size()));
    }
    for (auto& [_, e] : entries_) {
        if (!e.trainable) continue;
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(e.offset), e.tensor.size(), e.tensor.data().begin());
    }
}

void ParameterStore::add_to_trainable(std::span<const double> delta) {
    if (delta.size() != flat_size_) {
        throw DimensionError("perturbation length " + std::to_string(delta.size()) + " != flat view " +
                             std::to_string(flat_size_));
    }
    for (auto& [_, e] : entries_) {
        if (!e.trainable) continue;
        auto dst = e.tensor.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += delta[e.offset + i];
    }
}

std::vector<std::string> ParameterStore::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : entries_) out.push_back(name);
    return out;
}

std::vector<std::string> ParameterStore::trainable_names() const {
    std::vector<std::string> out;
    for (const auto& [name, e] : entries_) {
        if (e.trainable) out.push_back(name);
    }
    return out;
}

std::size_t ParameterStore::total_size() const {
    std::size_t n = 0;
    for (const auto& [_, e] : entries_) n += e.tensor.size();
    return n;
}

std::uint64_t ParameterStore::fingerprint(bool frozen_only) const {
    std::uint64_t h = fnv1a64("params");
    for (const auto& [name, e] : entries_) {
        if (frozen_only && e.trainable) continue;
        h = fnv1a64(name, h);
        auto bytes = std::string_view(reinterpret_cast<const char*>(e.tensor.data().data()),
                                      e.tensor.size() * sizeof(double));
        h = fnv1a64(bytes, h);
    }
    return h;
}

}  // namespace gcl
