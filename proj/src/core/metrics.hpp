// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace gcl::metrics {

/// R[i][j]: accuracy after session i on the test data of session j. Cells
/// that were never evaluated stay absent; they are not zeros.
class EvalMatrix {
public:
    explicit EvalMatrix(std::size_t sessions = 0);

    std::size_t sessions() const { return sessions_; }
    void set(std::size_t row, std::size_t col, double accuracy);
    std::optional<double> get(std::size_t row, std::size_t col) const;
    // A column is active once any of its cells holds a value.
    bool column_active(std::size_t col) const;
    std::vector<std::vector<std::optional<double>>> rows() const;

private:
    std::size_t sessions_;
    std::vector<std::optional<double>> cells_;
};

struct AnytimePoint {
    std::size_t samples_seen = 0;
    double accuracy = 0.0;
};

class AnytimeLog {
public:
    // Sample counts must strictly increase.
    void add(std::size_t samples_seen, double accuracy);
    const std::vector<AnytimePoint>& points() const { return points_; }
    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }

private:
    std::vector<AnytimePoint> points_;
};

// Mean of the final row over active columns.
double a_last(const EvalMatrix& r);
// Mean over active columns of (column max - final-row entry).
double f_last(const EvalMatrix& r);
// Mean of the anytime accuracies.
double a_auc(const AnytimeLog& log);
// R[i][0] for every evaluated row i.
std::vector<double> session1_curve(const EvalMatrix& r);

}  // namespace gcl::metrics
