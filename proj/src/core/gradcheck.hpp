// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "core/params.hpp"

namespace gcl {

/// Scalar objective over a store. Fills `grad` (when non-null) with the
/// reverse-mode gradient over the store's flat view.
using LossFn = std::function<double(const ParameterStore&, GradVector* grad)>;

constexpr double kFiniteDiffStep = 1e-5;

/// Central differences on every trainable coordinate, compared against the
/// loss function's own gradient. Returns max |g_ad - g_fd| / max(1, |g_fd|).
/// The store is restored bit-exactly before returning.
double finite_diff_check(const LossFn& loss_fn, ParameterStore& params, double step = kFiniteDiffStep);

}  // namespace gcl
