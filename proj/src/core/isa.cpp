// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/isa.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include "core/diag.hpp"
#include "core/error.hpp"
#include "core/objective.hpp"

namespace gcl::isa {

namespace {

std::vector<std::size_t> all_classes(const Dataset& ds) {
    std::vector<std::size_t> out(ds.num_classes);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = c;
    return out;
}

}  // namespace

model::Backbone pretrain_backbone(const Dataset& dataset, const model::BackboneConfig& config,
                                  const PretrainConfig& pretrain) {
    if (dataset.classes().size() < 2) throw ConfigError("pretraining needs at least two classes");
    if (dataset.feature_dim != config.input_dim) {
        throw DimensionError("pretraining data has " + std::to_string(dataset.feature_dim) + " features, backbone expects " +
                             std::to_string(config.input_dim));
    }
    model::Backbone backbone = model::make_backbone(config, pretrain.seed);
    if (pretrain.epochs == 0) {
        backbone.freeze();
        return backbone;
    }

    ParameterStore store;
    for (const auto& name : backbone.params.names()) store.add(name, backbone.params.get(name), true);
    Rng rng = make_rng(pretrain.seed, "pretrain");
    model::add_head(store, config.embed_dim, dataset.num_classes, rng, 0.02);

    optim::BaseOptimizer opt(optim::OptimizerKind::adam, pretrain.learning_rate);
    const optim::BatchLossFn loss = [&](const ParameterStore& p, const Batch& b, GradVector* g) {
        return batch_loss(p, config, b, nullptr, g);
    };
    const auto classes = all_classes(dataset);
    std::vector<double> curve;
    std::vector<std::size_t> order(dataset.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t epoch = 0; epoch < pretrain.epochs; ++epoch) {
        shuffle(order, rng);
        for (std::size_t begin = 0; begin < order.size(); begin += pretrain.batch_size) {
            Batch batch;
            for (std::size_t k = begin; k < std::min(order.size(), begin + pretrain.batch_size); ++k) {
                batch.push_back(dataset.train[order[k]]);
            }
            const auto report = optim::base_step(store, batch, loss, opt);
            if (!std::isfinite(report.loss)) throw DivergenceError("pretraining loss diverged");
        }
        curve.push_back(accuracy(store, config, dataset.train, classes));
    }
    if (curve.back() < pretrain.min_accuracy) {
        std::ostringstream os;
        os << "backbone pretraining reached " << curve.back() << " training accuracy, below the " << pretrain.min_accuracy
           << " gate";
        throw PretrainingError(os.str(), curve);
    }
    for (const auto& name : backbone.params.names()) backbone.params.assign(name, store.get(name));
    backbone.freeze();
    return backbone;
}

IdOodSplit split_id_ood(const Dataset& dataset, const IsaConfig& config) {
    if (!(config.ood_pool_fraction >= 0.0 && config.ood_pool_fraction <= 1.0)) {
        throw ConfigError("ood_pool_fraction must lie in [0, 1]");
    }
    const auto class_set = dataset.classes();
    std::vector<std::size_t> classes(class_set.begin(), class_set.end());
    const auto n_ood = static_cast<std::size_t>(std::llround(config.ood_pool_fraction * static_cast<double>(classes.size())));
    if (n_ood >= classes.size()) throw ConfigError("OOD pool would leave no in-distribution classes");
    Rng rng = make_rng(config.seed, "id-ood");
    shuffle(classes, rng);
    IdOodSplit split;
    split.ood_classes.assign(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(n_ood));
    split.id_classes.assign(classes.begin() + static_cast<std::ptrdiff_t>(n_ood), classes.end());
    std::sort(split.ood_classes.begin(), split.ood_classes.end());
    std::sort(split.id_classes.begin(), split.id_classes.end());
    const std::set<std::size_t> ood(split.ood_classes.begin(), split.ood_classes.end());
    for (const auto& e : dataset.train) (ood.contains(e.label) ? split.ood : split.id).push_back(e);
    return split;
}

OodSampler::OodSampler(std::vector<Example> pool, std::size_t class_count, std::size_t batch_size, std::uint64_t seed)
    : pool_(std::move(pool)), class_count_(std::max<std::size_t>(1, class_count)), batch_size_(batch_size),
      rng_(make_rng(seed, "ood-sampler")) {
    if (pool_.empty()) throw ConfigError("empty OOD pool");
    if (batch_size_ == 0) throw ConfigError("OOD batch size must be >= 1");
    std::set<std::size_t> labels;
    for (const auto& e : pool_) labels.insert(e.label);
    classes_.assign(labels.begin(), labels.end());
    class_count_ = std::min(class_count_, classes_.size());
    resample();
    resamples_ = 0;
}

void OodSampler::resample() {
    // Prefer classes outside the current subset so consecutive subsets rotate.
    std::vector<std::size_t> fresh, stale;
    for (std::size_t c : classes_) {
        (std::find(active_.begin(), active_.end(), c) == active_.end() ? fresh : stale).push_back(c);
    }
    shuffle(fresh, rng_);
    shuffle(stale, rng_);
    fresh.insert(fresh.end(), stale.begin(), stale.end());
    active_.assign(fresh.begin(), fresh.begin() + static_cast<std::ptrdiff_t>(class_count_));
    std::sort(active_.begin(), active_.end());
    queue_.clear();
    for (std::size_t i = 0; i < pool_.size(); ++i) {
        if (std::binary_search(active_.begin(), active_.end(), pool_[i].label)) queue_.push_back(i);
    }
    shuffle(queue_, rng_);
    cursor_ = 0;
    ++resamples_;
}

Batch OodSampler::next() {
    if (cursor_ >= queue_.size()) resample();
    Batch out;
    const std::size_t end = std::min(queue_.size(), cursor_ + batch_size_);
    for (; cursor_ < end; ++cursor_) out.push_back(pool_[queue_[cursor_]]);
    return out;
}

Example augment_ood(Example example, double strength, Rng& rng) {
    if (strength == 0.0) return example;
    const double u = uniform(rng, 0.8, 1.2);
    for (double& v : example.features) v = u * v + normal(rng, 0.0, strength);
    return example;
}

model::Provenance provenance_for(optim::SharpnessMode mode) {
    switch (mode) {
        case optim::SharpnessMode::none: return model::Provenance::isa_naive;
        case optim::SharpnessMode::sam: return model::Provenance::isa_sam;
        case optim::SharpnessMode::fam: return model::Provenance::isa_fam;
    }
    return model::Provenance::random;
}

IsaArtifacts isa_train(const model::Backbone& backbone, const Dataset& init_data, const IsaConfig& config) {
    if (!backbone.frozen) throw PreconditionError("ISA requires a frozen backbone");
    if (config.batch_size == 0) throw ConfigError("ISA batch size must be >= 1");
    if (config.rho < 0.0) throw ConfigError("rho must be >= 0");
    const auto& bcfg = backbone.config;
    IdOodSplit split = split_id_ood(init_data, config);

    optim::SharpnessMode mode = config.mode;
    if (mode == optim::SharpnessMode::fam && split.ood.empty()) {
        diag::warn("ISA: empty OOD pool makes FAM infeasible; falling back to SAM");
        mode = optim::SharpnessMode::sam;
    }

    Rng rng = make_rng(config.seed, "isa");
    ParameterStore store;
    model::add_backbone(store, backbone);
    model::add_prompts(store, model::random_prompts(config.prompt_len, bcfg.embed_dim, rng));
    if (config.augment_prompts) model::add_augment_mlp(store, bcfg.embed_dim, rng);
    model::add_head(store, bcfg.embed_dim, init_data.num_classes, rng, config.head_init_std);

    optim::BaseOptimizer opt(optim::OptimizerKind::adam, config.learning_rate);
    const ObjectiveOptions objective{config.augment_prompts, masking::MaskSemantics::exclude};
    const optim::BatchLossFn loss = [&](const ParameterStore& p, const Batch& b, GradVector* g) {
        return batch_loss(p, bcfg, b, nullptr, g, objective);
    };

    std::optional<OodSampler> ood;
    if (mode == optim::SharpnessMode::fam) {
        ood.emplace(split.ood, config.ood_class_count, config.ood_batch_size, derive_seed(config.seed, "ood"));
    }

    IsaArtifacts out;
    Rng aug_rng = make_rng(config.seed, "isa-augment");
    std::vector<std::size_t> order(split.id.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, rng);
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            Batch id_batch;
            for (std::size_t k = begin; k < std::min(order.size(), begin + config.batch_size); ++k) {
                id_batch.push_back(augment_ood(split.id[order[k]], config.augment_strength, aug_rng));
            }
            optim::StepReport report;
            switch (mode) {
                case optim::SharpnessMode::none:
                    report = optim::base_step(store, id_batch, loss, opt);
                    break;
                case optim::SharpnessMode::sam:
                    report = optim::sam_step(store, id_batch, loss, config.rho, opt);
                    break;
                case optim::SharpnessMode::fam: {
                    Batch ood_batch = ood->next();
                    for (auto& e : ood_batch) {
                        e = augment_ood(augment_ood(std::move(e), config.augment_strength, aug_rng),
                                        config.augment_strength, aug_rng);
                    }
                    report = optim::fam_step(store, id_batch, ood_batch, loss, config.rho, opt);
                    break;
                }
            }
            if (!std::isfinite(report.perturbed_loss)) {
                throw DivergenceError("ISA loss diverged at step " + std::to_string(step) + "\n" + format_log_csv(out.log));
            }
            out.log.push_back({step++, report.perturbed_loss, report.grad_norm, report.perturbation_norm});
        }
    }

    const auto provenance = provenance_for(mode);
    out.prompts = config.augment_prompts ? model::bake_augmented_prompts(store, provenance)
                                         : model::PromptSet{store.get(model::kPromptParam), provenance};

    ParameterStore baked;
    model::add_backbone(baked, backbone);
    model::add_prompts(baked, out.prompts, false);
    baked.add(model::kHeadWeight, store.get(model::kHeadWeight), false);
    baked.add(model::kHeadBias, store.get(model::kHeadBias), false);
    if (!split.id.empty()) out.final_train_accuracy = accuracy(baked, bcfg, split.id, split.id_classes);
    return out;
}

std::string format_log_csv(const std::vector<IsaLogRow>& log) {
    std::ostringstream os;
    os.precision(17);
    os << "step,loss,grad_norm,perturbation_norm\n";
    for (const auto& r : log) os << r.step << ',' << r.loss << ',' << r.grad_norm << ',' << r.perturbation_norm << '\n';
    return os.str();
}

}  // namespace gcl::isa
