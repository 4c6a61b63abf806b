// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

// Linear-probe oracle: multinomial logistic regression fitted by full-batch
// gradient descent on standardized features. Self-contained on purpose.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

struct ProbeData {
    std::vector<std::vector<double>> x;
    std::vector<std::size_t> y;
};

struct ProbeResult {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

inline ProbeResult linear_probe(const ProbeData& train, const ProbeData& test, std::size_t classes,
                                int iterations = 400, double lr = 0.5) {
    const std::size_t d = train.x.at(0).size();
    std::vector<double> mu(d, 0.0), sd(d, 0.0);
    for (const auto& row : train.x)
        for (std::size_t j = 0; j < d; ++j) mu[j] += row[j];
    for (double& m : mu) m /= static_cast<double>(train.x.size());
    for (const auto& row : train.x)
        for (std::size_t j = 0; j < d; ++j) sd[j] += (row[j] - mu[j]) * (row[j] - mu[j]);
    for (double& s : sd) s = std::sqrt(s / static_cast<double>(train.x.size())) + 1e-12;
    auto standardize = [&](const std::vector<double>& row) {
        std::vector<double> z(d + 1, 1.0);  // trailing bias feature
        for (std::size_t j = 0; j < d; ++j) z[j] = (row[j] - mu[j]) / sd[j];
        return z;
    };
    std::vector<std::vector<double>> xs;
    for (const auto& row : train.x) xs.push_back(standardize(row));

    std::vector<std::vector<double>> w(classes, std::vector<double>(d + 1, 0.0));
    auto scores = [&](const std::vector<double>& z) {
        std::vector<double> s(classes, 0.0);
        for (std::size_t c = 0; c < classes; ++c)
            for (std::size_t j = 0; j <= d; ++j) s[c] += w[c][j] * z[j];
        return s;
    };
    const double n = static_cast<double>(xs.size());
    for (int it = 0; it < iterations; ++it) {
        std::vector<std::vector<double>> g(classes, std::vector<double>(d + 1, 0.0));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            auto s = scores(xs[i]);
            const double mx = *std::max_element(s.begin(), s.end());
            double zsum = 0.0;
            for (double& v : s) zsum += (v = std::exp(v - mx));
            for (std::size_t c = 0; c < classes; ++c) {
                const double r = s[c] / zsum - (c == train.y[i] ? 1.0 : 0.0);
                for (std::size_t j = 0; j <= d; ++j) g[c][j] += r * xs[i][j];
            }
        }
        for (std::size_t c = 0; c < classes; ++c)
            for (std::size_t j = 0; j <= d; ++j) w[c][j] -= lr * g[c][j] / n;
    }
    auto acc = [&](const ProbeData& data) {
        std::size_t hit = 0;
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            const auto s = scores(standardize(data.x[i]));
            hit += static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin()) == data.y[i];
        }
        return static_cast<double>(hit) / static_cast<double>(data.x.size());
    };
    return {acc(train), acc(test)};
}

}  // namespace oracle
