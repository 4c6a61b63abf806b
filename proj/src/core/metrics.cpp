// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/metrics.hpp"

#include <algorithm>
#include <string>

#include "core/error.hpp"

namespace gcl::metrics {

EvalMatrix::EvalMatrix(std::size_t sessions) : sessions_(sessions), cells_(sessions * sessions) {}

void EvalMatrix::set(std::size_t row, std::size_t col, double accuracy) {
    if (row >= sessions_ || col >= sessions_) throw InvalidArgument("evaluation cell outside the matrix");
    if (col > row) throw InvalidArgument("session " + std::to_string(col + 1) + " is evaluated before it happened");
    if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw InvalidArgument("accuracy must lie in [0, 1]");
    cells_[row * sessions_ + col] = accuracy;
}

std::optional<double> EvalMatrix::get(std::size_t row, std::size_t col) const {
    if (row >= sessions_ || col >= sessions_) return std::nullopt;
    return cells_[row * sessions_ + col];
}

bool EvalMatrix::column_active(std::size_t col) const {
    for (std::size_t i = 0; i < sessions_; ++i) {
        if (get(i, col)) return true;
    }
    return false;
}

std::vector<std::vector<std::optional<double>>> EvalMatrix::rows() const {
    std::vector<std::vector<std::optional<double>>> out(sessions_);
    for (std::size_t i = 0; i < sessions_; ++i) {
        for (std::size_t j = 0; j < sessions_; ++j) out[i].push_back(get(i, j));
    }
    return out;
}

void AnytimeLog::add(std::size_t samples_seen, double accuracy) {
    if (!points_.empty() && samples_seen <= points_.back().samples_seen) {
        throw InvalidArgument("anytime log timesteps must strictly increase");
    }
    points_.push_back({samples_seen, accuracy});
}

namespace {

std::vector<std::size_t> final_row_columns(const EvalMatrix& r) {
    if (r.sessions() == 0) throw InvalidArgument("empty evaluation matrix");
    const std::size_t last = r.sessions() - 1;
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < r.sessions(); ++j) {
        if (!r.column_active(j)) continue;
        if (!r.get(last, j)) throw InvalidArgument("final row is missing session " + std::to_string(j + 1));
        cols.push_back(j);
    }
    if (cols.empty()) throw InvalidArgument("final row is empty");
    return cols;
}

}  // namespace

double a_last(const EvalMatrix& r) {
    const auto cols = final_row_columns(r);
    double s = 0.0;
    for (std::size_t j : cols) s += *r.get(r.sessions() - 1, j);
    return s / static_cast<double>(cols.size());
}

double f_last(const EvalMatrix& r) {
    const auto cols = final_row_columns(r);
    double s = 0.0;
    for (std::size_t j : cols) {
        double best = 0.0;
        for (std::size_t i = 0; i < r.sessions(); ++i) {
            if (auto v = r.get(i, j)) best = std::max(best, *v);
        }
        s += best - *r.get(r.sessions() - 1, j);
    }
    return s / static_cast<double>(cols.size());
}

double a_auc(const AnytimeLog& log) {
    if (log.empty()) throw InvalidArgument("a_auc of an empty anytime log");
    double s = 0.0;
    for (const auto& p : log.points()) s += p.accuracy;
    return s / static_cast<double>(log.size());
}

std::vector<double> session1_curve(const EvalMatrix& r) {
    std::vector<double> out;
    for (std::size_t i = 0; i < r.sessions(); ++i) {
        if (auto v = r.get(i, 0)) out.push_back(*v);
    }
    return out;
}

}  // namespace gcl::metrics
