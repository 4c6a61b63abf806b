// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/objective.hpp"

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace gcl {

double batch_loss(const ParameterStore& store, const model::BackboneConfig& config, const Batch& batch,
                  const MaskVector* mask, GradVector* grad, const ObjectiveOptions& options) {
    if (batch.empty()) throw InvalidArgument("loss over an empty batch");
    const std::size_t n = batch.size();
    std::vector<double> losses(n);
    std::vector<GradVector> grads(grad ? n : 0);
    parallel_for(n, [&](std::size_t i) {
        ad::Tape tape(grad != nullptr);
        ad::Var logits = model::forward_with_prompts(tape, store, config, batch[i].features, options.augment_prompts);
        const MaskVector full = mask ? MaskVector{} : MaskVector::full(logits.value().size());
        ad::Var loss = masking::masked_loss(logits, batch[i].label, mask ? *mask : full, options.semantics);
        losses[i] = loss.value()[0];
        if (grad) grads[i] = tape.backward(loss);
    });
    const double inv = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (double l : losses) total += l;
    if (grad) {
        std::vector<double> sum(store.flat_size(), 0.0);
        for (const auto& g : grads) {
            for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += g[j];
        }
        for (double& v : sum) v *= inv;
        *grad = GradVector(std::move(sum));
    }
    return total * inv;
}

double accuracy(const ParameterStore& store, const model::BackboneConfig& config, std::span<const Example> examples,
                std::span<const std::size_t> candidate_classes) {
    if (examples.empty()) throw InvalidArgument("accuracy over no examples");
    std::vector<std::uint8_t> hit(examples.size(), 0);
    parallel_for(examples.size(), [&](std::size_t i) {
        hit[i] = model::predict(store, config, examples[i].features, candidate_classes) == examples[i].label;
    });
    std::size_t correct = 0;
    for (auto h : hit) correct += h;
    return static_cast<double>(correct) / static_cast<double>(examples.size());
}

}  // namespace gcl
