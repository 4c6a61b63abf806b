// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"

namespace gcl {

/// What the loop saw and did on one training step; handed to an optional
/// observer so invariants can be audited from outside.
struct StepTrace {
    std::size_t global_step = 0;
    std::size_t session = 0;
    std::vector<std::size_t> stream_labels;
    std::vector<std::size_t> replay_labels;
    MaskVector batch_mask;
    MaskVector session_mask;
    MaskVector seen_mask;
    MaskVector applied_mask;
    double loss = 0.0;
    std::size_t buffer_size = 0;
};

using StepObserver = std::function<void(const StepTrace&)>;

struct MetricRecord {
    double a_auc = 0.0;
    double a_last = 0.0;
    double f_last = 0.0;
    std::vector<double> session1_curve;
    metrics::AnytimeLog anytime;
    metrics::EvalMatrix matrix;
};

struct RunResult {
    std::string run_id;
    std::string label;
    std::string config_hash;
    std::string code_version = kCodeVersion;
    std::uint64_t seed = 0;
    model::Provenance provenance = model::Provenance::random;
    ExperimentConfig config;
    MetricRecord metrics;
    std::size_t steps = 0;
    std::size_t stream_examples_consumed = 0;
    std::size_t replay_examples_used = 0;
    std::size_t peak_buffer_size = 0;
    bool backbone_unchanged = false;
    double wall_clock_seconds = 0.0;
    std::string step_log;  // CSV, one line per step
};

struct RunOptions {
    std::optional<model::PromptSet> prompts;  // overrides ISA / random init
    StepObserver observer;
};

/// Backbone for the config's pretraining section. Cached per process, keyed
/// by the pretraining-relevant keys.
const model::Backbone& pretrained_backbone(const ExperimentConfig& config);

Dataset downstream_dataset(const ExperimentConfig& config);
Dataset pretraining_dataset(const ExperimentConfig& config);

/// ISA on the pretraining data for the config's isa mode (naive/sam/fam),
/// seeded by the run seed.
isa::IsaArtifacts produce_isa_prompts(const ExperimentConfig& config);

/// Prompts the run will start from: explicit option, checkpoint file, ISA,
/// or uniform random init when isa = off.
model::PromptSet initial_prompts(const ExperimentConfig& config, const RunOptions& options);

/// One online pass over the Si-Blurry stream with masked loss, replay and
/// anytime evaluation.
RunResult run_gcl(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace gcl
