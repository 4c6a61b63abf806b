// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>

#include "core/autodiff.hpp"
#include "core/mask_vector.hpp"
#include "core/stream.hpp"

namespace gcl::masking {

inline constexpr double kMaskedLogit = -1e30;

/// bits[i] = 1 iff class i occurs in `labels`.
MaskVector mask_from_labels(std::span<const std::size_t> labels, std::size_t num_classes,
                            MaskPolicy policy = MaskPolicy::batch);

struct SessionMaskState {
    std::size_t num_classes = 0;
    std::set<std::size_t> session_classes;  // reset at every session start
    std::set<std::size_t> seen_classes;     // monotone over the stream
    std::optional<std::size_t> session;

    explicit SessionMaskState(std::size_t n = 0) : num_classes(n) {}
};

/// Accumulates the current session's labels (batch plus any replayed
/// labels), resetting on `is_session_start`.
MaskVector update_session_mask(SessionMaskState& state, const stream::StreamBatch& batch,
                               std::span<const std::size_t> replay_labels = {});

/// Union of every label observed so far.
MaskVector update_seen_mask(SessionMaskState& state, const stream::StreamBatch& batch,
                            std::span<const std::size_t> replay_labels = {});

/// Replaces masked-out logits by kMaskedLogit; kept entries pass through.
/// Training-loss use only.
Tensor apply_mask(const Tensor& logits, const MaskVector& mask);
ad::Var apply_mask(ad::Var logits, const MaskVector& mask);

enum class MaskSemantics {
    exclude,   // masked logits leave the softmax normalizer
    multiply,  // literal m * logits, masked logits stay in at value 0
};

ad::Var masked_loss(ad::Var logits, std::size_t label, const MaskVector& mask,
                    MaskSemantics semantics = MaskSemantics::exclude);

}  // namespace gcl::masking
