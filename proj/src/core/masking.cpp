// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/masking.hpp"

#include "core/error.hpp"

namespace gcl {

std::string to_string(MaskPolicy policy) {
    switch (policy) {
        case MaskPolicy::none: return "none";
        case MaskPolicy::batch: return "batch";
        case MaskPolicy::session: return "session";
        case MaskPolicy::seen: return "seen";
    }
    return "unknown";
}

MaskPolicy parse_mask_policy(const std::string& text) {
    if (text == "none") return MaskPolicy::none;
    if (text == "batch") return MaskPolicy::batch;
    if (text == "session") return MaskPolicy::session;
    if (text == "seen") return MaskPolicy::seen;
    throw ConfigError("unknown mask policy '" + text + "' (none|batch|session|seen)");
}

}  // namespace gcl

namespace gcl::masking {

namespace {

MaskVector from_set(const std::set<std::size_t>& classes, std::size_t n, MaskPolicy policy) {
    MaskVector m{std::vector<std::uint8_t>(n, 0), policy};
    for (std::size_t c : classes) {
        if (c >= n) throw InvalidArgument("label " + std::to_string(c) + " outside mask of size " + std::to_string(n));
        m.bits[c] = 1;
    }
    return m;
}

void check_mask(const MaskVector& mask, std::size_t n) {
    if (mask.size() != n) {
        throw DimensionError("mask of length " + std::to_string(mask.size()) + " applied to " + std::to_string(n) + " logits");
    }
    if (!mask.any()) throw InvalidArgument("all-zero mask");
}

}  // namespace

MaskVector mask_from_labels(std::span<const std::size_t> labels, std::size_t num_classes, MaskPolicy policy) {
    if (labels.empty()) throw InvalidArgument("mask_from_labels needs at least one label");
    return from_set(std::set<std::size_t>(labels.begin(), labels.end()), num_classes, policy);
}

MaskVector update_session_mask(SessionMaskState& state, const stream::StreamBatch& batch,
                               std::span<const std::size_t> replay_labels) {
    if (state.session) {
        const std::size_t current = *state.session;
        const bool advances = batch.session == current + 1 && batch.is_session_start;
        const bool continues = batch.session == current && !batch.is_session_start;
        if (!advances && !continues) {
            throw OrderingError("batch of session " + std::to_string(batch.session) + " (start=" +
                                std::to_string(batch.is_session_start) + ") after session " + std::to_string(current));
        }
    } else if (!batch.is_session_start) {
        throw OrderingError("stream must begin with a session start");
    }
    if (batch.is_session_start) state.session_classes.clear();
    state.session = batch.session;
    for (const auto& e : batch.examples) state.session_classes.insert(e.label);
    state.session_classes.insert(replay_labels.begin(), replay_labels.end());
    return from_set(state.session_classes, state.num_classes, MaskPolicy::session);
}

MaskVector update_seen_mask(SessionMaskState& state, const stream::StreamBatch& batch,
                            std::span<const std::size_t> replay_labels) {
    for (const auto& e : batch.examples) state.seen_classes.insert(e.label);
    state.seen_classes.insert(replay_labels.begin(), replay_labels.end());
    return from_set(state.seen_classes, state.num_classes, MaskPolicy::seen);
}

Tensor apply_mask(const Tensor& logits, const MaskVector& mask) {
    check_mask(mask, logits.size());
    Tensor out = logits;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!mask.test(i)) out[i] = kMaskedLogit;
    }
    return out;
}

ad::Var apply_mask(ad::Var logits, const MaskVector& mask) {
    Tensor out = apply_mask(logits.value(), mask);
    return logits.tape()->record(std::move(out), {logits}, [bits = mask.bits](const Tensor&, const Tensor& g, auto, auto grads) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (bits[i]) (*grads[0])[i] += g[i];
        }
    });
}

ad::Var masked_loss(ad::Var logits, std::size_t label, const MaskVector& mask, MaskSemantics semantics) {
    check_mask(mask, logits.value().size());
    if (semantics == MaskSemantics::exclude) return ad::masked_softmax_cross_entropy(logits, label, mask);
    if (label < mask.size() && !mask.test(label)) throw MaskedLabelError("label " + std::to_string(label) + " is masked out");
    Tensor factors(logits.shape());
    for (std::size_t i = 0; i < factors.size(); ++i) factors[i] = mask.test(i) ? 1.0 : 0.0;
    return ad::cross_entropy(ad::mul_const(logits, factors), label);
}

}  // namespace gcl::masking
