// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/data.hpp"
#include "core/model.hpp"
#include "core/optim.hpp"

namespace gcl::isa {

struct PretrainConfig {
    std::size_t epochs = 4;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double min_accuracy = 0.8;  // sanity gate on training accuracy
    std::uint64_t seed = 0;
};

/// Trains backbone + a temporary head with plain cross-entropy and Adam,
/// drops the head and freezes the backbone. Zero epochs skips training (and
/// the gate). Throws PretrainingError when the gate is missed.
model::Backbone pretrain_backbone(const Dataset& dataset, const model::BackboneConfig& config,
                                  const PretrainConfig& pretrain);

struct IsaConfig {
    optim::SharpnessMode mode = optim::SharpnessMode::fam;
    std::size_t epochs = 3;
    std::size_t batch_size = 32;
    std::size_t ood_batch_size = 32;
    double learning_rate = 1e-2;  // 1e-4 barely moves the prompts in a few hundred desk-scale steps
    double rho = 0.05;
    std::size_t ood_class_count = 1;
    double ood_pool_fraction = 0.1;
    double augment_strength = 0.1;
    bool augment_prompts = true;
    std::size_t prompt_len = 4;
    double head_init_std = 0.02;
    std::uint64_t seed = 0;
};

struct IdOodSplit {
    std::vector<std::size_t> id_classes;
    std::vector<std::size_t> ood_classes;
    std::vector<Example> id;
    std::vector<Example> ood;
};

/// Class-disjoint split of the training examples; the OOD pool holds
/// round(fraction * |C|) classes. Throws ConfigError when the pool would
/// swallow every class.
IdOodSplit split_id_ood(const Dataset& dataset, const IsaConfig& config);

/// Draws OOD sub-batches from `ood_class_count` classes at a time, moving to
/// a fresh random class subset once the current one is exhausted.
class OodSampler {
public:
    OodSampler(std::vector<Example> pool, std::size_t class_count, std::size_t batch_size, std::uint64_t seed);
    Batch next();
    std::size_t resamples() const { return resamples_; }
    const std::vector<std::size_t>& active_classes() const { return active_; }

private:
    void resample();

    std::vector<Example> pool_;
    std::vector<std::size_t> classes_;
    std::vector<std::size_t> active_;
    std::vector<std::size_t> queue_;  // indices into pool_
    std::size_t cursor_ = 0;
    std::size_t class_count_;
    std::size_t batch_size_;
    std::size_t resamples_ = 0;
    Rng rng_;
};

/// Jitter x -> u * x + strength * N(0, I), u ~ U[0.8, 1.2]; identity at strength 0.
Example augment_ood(Example example, double strength, Rng& rng);

struct IsaLogRow {
    std::size_t step = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double perturbation_norm = 0.0;
};

struct IsaArtifacts {
    model::PromptSet prompts;  // p_e' with the augmentation baked in
    std::vector<IsaLogRow> log;
    double final_train_accuracy = 0.0;
};

/// Warms up prompts on the frozen backbone with a throwaway head (and the
/// augmentation MLP). mode none = naive, sam = SAM on ID batches, fam = FAM
/// with OOD perturbations. Only the finalized prompts are kept.
IsaArtifacts isa_train(const model::Backbone& backbone, const Dataset& init_data, const IsaConfig& config);

model::Provenance provenance_for(optim::SharpnessMode mode);

std::string format_log_csv(const std::vector<IsaLogRow>& log);

}  // namespace gcl::isa
