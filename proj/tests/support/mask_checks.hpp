// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "core/autodiff.hpp"
#include "core/masking.hpp"
#include "core/rng.hpp"

namespace checks {

struct MaskedGradCase {
    double masked_autodiff = 0.0;  // max |d loss / d z_j| over masked j
    double masked_fd = 0.0;        // same, by central differences
    double kept_rel_error = 0.0;   // autodiff vs central differences on kept logits
};

// Random logits, random mask with the label kept; the logits are the only
// trainable parameter so the flat gradient is d loss / d z.
inline MaskedGradCase masked_logit_gradients(std::uint64_t seed, double h = 1e-6) {
    using namespace gcl;
    Rng rng = make_rng(seed, "masked-logit-case");
    const std::size_t n = 2 + uniform_index(rng, 12);
    std::vector<double> z(n);
    for (double& v : z) v = 3.0 * normal(rng);
    const std::size_t label = uniform_index(rng, n);
    MaskVector mask = MaskVector::full(n, MaskPolicy::batch);
    for (std::size_t i = 0; i < n; ++i) mask.bits[i] = uniform01(rng) < 0.5 ? 1 : 0;
    mask.bits[label] = 1;

    ParameterStore store;
    store.add("z", Tensor({1, n}, z), true);
    auto loss_at = [&](GradVector* grad) {
        ad::Tape tape(grad != nullptr);
        const ad::Var loss = masking::masked_loss(tape.parameter(store, "z"), label, mask);
        if (grad) *grad = tape.backward(loss);
        return loss.value()[0];
    };
    GradVector g;
    loss_at(&g);

    MaskedGradCase out;
    for (std::size_t j = 0; j < n; ++j) {
        Tensor t = store.get("z");
        const double orig = t[j];
        t[j] = orig + h;
        store.assign("z", t);
        const double up = loss_at(nullptr);
        t[j] = orig - h;
        store.assign("z", t);
        const double down = loss_at(nullptr);
        t[j] = orig;
        store.assign("z", t);
        const double fd = (up - down) / (2 * h);
        if (mask.test(j)) {
            const double denom = std::max({std::abs(fd), std::abs(g[j]), 1e-3});  // tiny softmax tails are all round-off
            out.kept_rel_error = std::max(out.kept_rel_error, std::abs(fd - g[j]) / denom);
        } else {
            out.masked_autodiff = std::max(out.masked_autodiff, std::abs(g[j]));
            out.masked_fd = std::max(out.masked_fd, std::abs(fd));
        }
    }
    return out;
}

}  // namespace checks
