// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace gcl {

namespace {
double checked(double v, const char* where) {
    if (!std::isfinite(v)) throw OracleError(std::string("non-finite loss during finite differences (") + where + ")");
    return v;
}
}  // namespace

double finite_diff_check(const LossFn& loss_fn, ParameterStore& params, double step) {
    const std::size_t n = params.flat_size();
    if (n == 0) return 0.0;
    GradVector analytic;
    checked(loss_fn(params, &analytic), "base point");
    if (analytic.size() != n) throw DimensionError("loss function returned a misaligned gradient");

    const std::vector<double> origin = params.flatten();
    std::vector<double> probe = origin;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        probe[i] = origin[i] + step;
        params.unflatten(probe);
        const double up = checked(loss_fn(params, nullptr), "+step");
        probe[i] = origin[i] - step;
        params.unflatten(probe);
        const double down = checked(loss_fn(params, nullptr), "-step");
        probe[i] = origin[i];
        const double numeric = (up - down) / (2.0 * step);
        worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric)));
    }
    params.unflatten(origin);
    return worst;
}

}  // namespace gcl
