// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "core/data.hpp"
#include "core/masking.hpp"
#include "core/model.hpp"

namespace gcl {

struct ObjectiveOptions {
    bool augment_prompts = false;
    masking::MaskSemantics semantics = masking::MaskSemantics::exclude;
};

/// Mean (masked) cross-entropy of the prompted model over a batch. A null
/// mask means the full label range. `grad` receives the gradient over the
/// store's flat view when non-null.
double batch_loss(const ParameterStore& store, const model::BackboneConfig& config, const Batch& batch,
                  const MaskVector* mask, GradVector* grad, const ObjectiveOptions& options = {});

/// Accuracy of argmax over `candidate_classes` on `examples`.
double accuracy(const ParameterStore& store, const model::BackboneConfig& config, std::span<const Example> examples,
                std::span<const std::size_t> candidate_classes);

}  // namespace gcl
