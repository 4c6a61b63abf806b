// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "core/autodiff.hpp"
#include "core/data.hpp"
#include "core/params.hpp"
#include "core/rng.hpp"

namespace gcl::model {

struct BackboneConfig {
    std::size_t embed_dim = 32;
    std::size_t depth = 2;
    std::size_t heads = 4;
    std::size_t token_len = 16;
    std::size_t input_dim = 64;
    std::size_t mlp_ratio = 2;

    void validate() const;
    std::size_t head_dim() const { return embed_dim / heads; }
};

/// Frozen transformer encoder: a linear token embedding with positional
/// offsets followed by pre-norm self-attention blocks. Parameters live under
/// the "backbone." prefix.
struct Backbone {
    BackboneConfig config;
    ParameterStore params;
    bool frozen = false;

    void freeze();
    std::uint64_t fingerprint() const { return params.fingerprint(false); }
};

Backbone make_backbone(const BackboneConfig& config, std::uint64_t seed);

enum class Provenance : std::uint32_t { random = 0, isa_naive = 1, isa_sam = 2, isa_fam = 3 };
std::string to_string(Provenance p);
Provenance parse_provenance(const std::string& text);

struct PromptSet {
    Tensor prompts;  // [prompt_len x embed_dim]
    Provenance provenance = Provenance::random;

    std::size_t length() const { return prompts.size() == 0 ? 0 : prompts.rows(); }
    std::size_t dim() const { return prompts.size() == 0 ? 0 : prompts.cols(); }
};

// Uniform(-1, 1) initialization, the untrained baseline.
PromptSet random_prompts(std::size_t prompt_len, std::size_t embed_dim, Rng& rng);

std::size_t augment_hidden_width(std::size_t embed_dim);

// Parameter names used inside working stores.
inline constexpr const char* kPromptParam = "prompt";
inline constexpr const char* kHeadWeight = "head.w";
inline constexpr const char* kHeadBias = "head.b";
inline constexpr const char* kAugmentPrefix = "augment.";

/// Copies the backbone into `store` as frozen entries.
void add_backbone(ParameterStore& store, const Backbone& backbone);
void add_prompts(ParameterStore& store, const PromptSet& prompts, bool trainable = true);
void add_head(ParameterStore& store, std::size_t embed_dim, std::size_t num_classes, Rng& rng, double init_std,
              bool trainable = true);
// Residual bottleneck down -> layer norm -> relu -> up.
void add_augment_mlp(ParameterStore& store, std::size_t embed_dim, Rng& rng, bool trainable = true);

/// Token grid x_e = reshape(W x) + positional offsets, shape [token_len x embed_dim].
ad::Var embed(ad::Tape& tape, const ParameterStore& store, const BackboneConfig& config, std::span<const double> x);

// Runs the attention blocks over a token sequence of any length.
ad::Var encode(ad::Tape& tape, const ParameterStore& store, const BackboneConfig& config, ad::Var tokens);

// p_e + up(relu(norm(down(p_e)))) using the "augment." entries of the store.
ad::Var augment_prompts(ad::Tape& tape, const ParameterStore& store, ad::Var prompts);

/// Logits f_c(mean_pool(f_r([p_e; x_e]))). When `augment` is set the prompt
/// passes through the augmentation MLP first. A store without a "prompt"
/// entry, or with an empty one, runs the plain backbone.
ad::Var forward_with_prompts(ad::Tape& tape, const ParameterStore& store, const BackboneConfig& config,
                             std::span<const double> x, bool augment = false);

/// Finalized p_e' = p_e + f_MLP(p_e), computed without a tape.
PromptSet bake_augmented_prompts(const ParameterStore& store, Provenance provenance);

/// Argmax over the logits of `candidate_classes` only. Inference never sees
/// a mask or a session index.
std::size_t predict(const ParameterStore& store, const BackboneConfig& config, std::span<const double> x,
                    std::span<const std::size_t> candidate_classes);

// Checkpoint file: "GCLP" | u32 version | u32 prompt_len | u32 embed_dim |
// u32 provenance | prompt_len*embed_dim f64, all little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;
std::vector<std::uint8_t> encode_checkpoint(const PromptSet& prompts);
PromptSet decode_checkpoint(std::span<const std::uint8_t> bytes);
void write_checkpoint(const std::filesystem::path& path, const PromptSet& prompts);
PromptSet read_checkpoint(const std::filesystem::path& path);

}  // namespace gcl::model
