// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "core/isa.hpp"
#include "core/mask_vector.hpp"
#include "core/masking.hpp"
#include "core/model.hpp"
#include "core/stream.hpp"
#include "core/synthetic.hpp"

namespace gcl {

inline constexpr const char* kCodeVersion = "gcl-lab 0.1.0";

enum class IsaMode { off, naive, sam, fam };
std::string to_string(IsaMode mode);
IsaMode parse_isa_mode(const std::string& text);

/// Everything that determines a run. Serialized as flat `key = value` text;
/// the canonical form (sorted keys, normalized numbers) is what gets hashed.
struct ExperimentConfig {
    // Downstream data: synthetic unless `data.path` names a delimited file.
    data::SyntheticSpec data{20, 200, 64, 0.7, 4.0, 1, 0.8, 8, 0};
    std::string data_path;

    // Backbone pretraining data (also the ISA data, D_init).
    data::SyntheticSpec pretrain_data{20, 100, 64, 1.0, 4.0, 1000, 0.8, 8, 0};
    isa::PretrainConfig pretrain{};

    stream::StreamConfig stream{};
    model::BackboneConfig backbone{};
    std::size_t prompt_len = 4;
    double head_init_std = 0.02;

    MaskPolicy mask = MaskPolicy::batch;
    masking::MaskSemantics mask_semantics = masking::MaskSemantics::exclude;

    IsaMode isa_mode = IsaMode::off;
    isa::IsaConfig isa{};
    std::string isa_checkpoint;

    double learning_rate = 0.03;
    std::string buffer = "0";  // 0 | small | large | <capacity>
    std::size_t eval_period = 160;  // samples between anytime evaluations

    std::uint64_t seed = 1;
    std::vector<std::uint64_t> repeat_seeds{1, 2, 3, 4, 5};
    std::string label;  // free-form series name for reports

    std::size_t buffer_capacity() const;
    void validate() const;

    std::map<std::string, std::string> to_map() const;
    void set(const std::string& key, const std::string& value);
    static ExperimentConfig from_map(const std::map<std::string, std::string>& kv);

    // Canonical text: one `key = value` per line, keys sorted.
    std::string canonical_text() const;
    // Hash of the canonical text minus `seed`, `label` and `repeat_seeds`.
    std::string hash() const;
};

inline constexpr std::size_t kSmallBuffer = 50;
inline constexpr std::size_t kLargeBuffer = 200;

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::vector<std::string> config_keys();

}  // namespace gcl
