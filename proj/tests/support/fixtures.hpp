// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "core/config.hpp"
#include "core/model.hpp"
#include "core/objective.hpp"
#include "core/params.hpp"
#include "core/rng.hpp"
#include "small_config.hpp"

namespace fixture {

inline gcl::model::BackboneConfig tiny_backbone() {
    gcl::model::BackboneConfig c;
    c.embed_dim = 8;
    c.depth = 1;
    c.heads = 2;
    c.token_len = 3;
    c.input_dim = 5;
    c.mlp_ratio = 2;
    return c;
}

inline std::vector<double> random_vector(std::size_t n, gcl::Rng& rng, double scale = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = scale * gcl::normal(rng);
    return v;
}

// Frozen tiny backbone, trainable prompts and head over `classes` classes.
struct PromptedModel {
    gcl::model::BackboneConfig config;
    gcl::ParameterStore store;
};

inline PromptedModel prompted_model(std::uint64_t seed, std::size_t classes = 6, std::size_t prompt_len = 2,
                                    bool backbone_trainable = false) {
    PromptedModel m;
    m.config = tiny_backbone();
    auto backbone = gcl::model::make_backbone(m.config, seed);
    if (backbone_trainable) {
        for (const auto& name : backbone.params.names()) m.store.add(name, backbone.params.get(name), true);
    } else {
        backbone.freeze();
        gcl::model::add_backbone(m.store, backbone);
    }
    gcl::Rng rng = gcl::make_rng(seed, "fixture");
    gcl::model::add_prompts(m.store, gcl::model::random_prompts(prompt_len, m.config.embed_dim, rng), true);
    gcl::model::add_head(m.store, m.config.embed_dim, classes, rng, 0.5);
    return m;
}

inline gcl::Batch random_batch(std::size_t n, std::size_t dim, std::size_t classes, gcl::Rng& rng) {
    gcl::Batch b;
    for (std::size_t i = 0; i < n; ++i) b.push_back({random_vector(dim, rng), gcl::uniform_index(rng, classes)});
    return b;
}

inline gcl::ExperimentConfig small_experiment() { return gcl::parse_config_text(kSmallConfigText); }

}  // namespace fixture
