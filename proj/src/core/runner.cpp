// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/runner.hpp"

#include <chrono>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>

#include "core/diag.hpp"
#include "core/error.hpp"
#include "core/objective.hpp"
#include "core/optim.hpp"
#include "core/replay.hpp"

namespace gcl {

namespace {

template <typename T>
class OnceCache {
public:
    template <typename Make>
    std::shared_ptr<const T> get(const std::string& key, Make make) {
        std::shared_future<std::shared_ptr<const T>> fut;
        std::promise<std::shared_ptr<const T>> promise;
        bool owner = false;
        {
            std::lock_guard lock(mu_);
            auto it = entries_.find(key);
            if (it == entries_.end()) {
                fut = promise.get_future().share();
                entries_.emplace(key, fut);
                owner = true;
            } else {
                fut = it->second;
            }
        }
        if (owner) {
            try {
                promise.set_value(std::make_shared<const T>(make()));
            } catch (...) {
                {
                    std::lock_guard lock(mu_);
                    entries_.erase(key);
                }
                promise.set_exception(std::current_exception());
            }
        }
        return fut.get();
    }

private:
    std::mutex mu_;
    std::map<std::string, std::shared_future<std::shared_ptr<const T>>> entries_;
};

std::string keys_with_prefix(const ExperimentConfig& config, std::initializer_list<const char*> prefixes) {
    std::string out;
    for (const auto& [k, v] : config.to_map()) {
        for (const char* p : prefixes) {
            if (k.rfind(p, 0) == 0) {
                out += k + "=" + v + "\n";
                break;
            }
        }
    }
    return out;
}

model::BackboneConfig backbone_config(const ExperimentConfig& config) {
    model::BackboneConfig b = config.backbone;
    b.input_dim = config.data.dim;
    return b;
}

isa::IsaConfig isa_config(const ExperimentConfig& config) {
    isa::IsaConfig ic = config.isa;
    switch (config.isa_mode) {
        case IsaMode::naive: ic.mode = optim::SharpnessMode::none; break;
        case IsaMode::sam: ic.mode = optim::SharpnessMode::sam; break;
        case IsaMode::fam: ic.mode = optim::SharpnessMode::fam; break;
        case IsaMode::off: throw ConfigError("ISA requested while isa = off");
    }
    ic.seed = derive_seed(config.seed, "isa");
    ic.prompt_len = config.prompt_len;
    ic.head_init_std = config.head_init_std;
    return ic;
}

OnceCache<model::Backbone>& backbone_cache() {
    static OnceCache<model::Backbone> cache;
    return cache;
}

OnceCache<isa::IsaArtifacts>& isa_cache() {
    static OnceCache<isa::IsaArtifacts> cache;
    return cache;
}

}  // namespace

Dataset downstream_dataset(const ExperimentConfig& config) {
    if (!config.data_path.empty()) return data::load_delimited(config.data_path, config.data.train_fraction, config.data.seed);
    return data::generate_synthetic(config.data);
}

Dataset pretraining_dataset(const ExperimentConfig& config) {
    data::SyntheticSpec spec = config.pretrain_data;
    spec.dim = config.data.dim;
    return data::generate_synthetic(spec);
}

const model::Backbone& pretrained_backbone(const ExperimentConfig& config) {
    const std::string key = keys_with_prefix(config, {"pretrain.", "model.", "data.dim", "data.latent_dim", "data.basis_seed"});
    // Cached entries live for the whole process, so the reference stays valid.
    static std::mutex pin_mu;
    static std::vector<std::shared_ptr<const model::Backbone>> pinned;
    auto ptr = backbone_cache().get(key, [&] {
        return isa::pretrain_backbone(pretraining_dataset(config), backbone_config(config), config.pretrain);
    });
    std::lock_guard lock(pin_mu);
    pinned.push_back(ptr);
    return *ptr;
}

isa::IsaArtifacts produce_isa_prompts(const ExperimentConfig& config) {
    const isa::IsaConfig ic = isa_config(config);
    const std::string key = keys_with_prefix(config, {"pretrain.", "model.", "data.dim", "data.latent_dim", "data.basis_seed", "isa"}) + "seed=" +
                            std::to_string(config.seed);
    auto ptr = isa_cache().get(key, [&] {
        return isa::isa_train(pretrained_backbone(config), pretraining_dataset(config), ic);
    });
    return *ptr;
}

model::PromptSet initial_prompts(const ExperimentConfig& config, const RunOptions& options) {
    if (options.prompts) return *options.prompts;
    if (config.isa_mode == IsaMode::off) {
        Rng rng = make_rng(config.seed, "prompt-init");
        return model::random_prompts(config.prompt_len, config.backbone.embed_dim, rng);
    }
    if (!config.isa_checkpoint.empty()) {
        auto prompts = model::read_checkpoint(config.isa_checkpoint);
        const auto expected = isa::provenance_for(isa_config(config).mode);
        if (prompts.provenance != expected) {
            diag::warn("checkpoint provenance " + model::to_string(prompts.provenance) + " differs from isa = " +
                       to_string(config.isa_mode));
        }
        return prompts;
    }
    return produce_isa_prompts(config).prompts;
}

RunResult run_gcl(const ExperimentConfig& config, const RunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    const Dataset ds = downstream_dataset(config);
    const model::BackboneConfig bcfg = backbone_config(config);
    if (ds.feature_dim != bcfg.input_dim) {
        throw DimensionError("dataset has " + std::to_string(ds.feature_dim) + " features, backbone expects " +
                             std::to_string(bcfg.input_dim));
    }
    const model::Backbone& backbone = pretrained_backbone(config);
    const model::PromptSet prompts = initial_prompts(config, options);
    if (prompts.length() > 0 && prompts.dim() != bcfg.embed_dim) {
        throw DimensionError("prompts of width " + std::to_string(prompts.dim()) + " for embed_dim " +
                             std::to_string(bcfg.embed_dim));
    }

    stream::StreamConfig scfg = config.stream;
    scfg.seed = config.seed;
    const stream::Stream stream = stream::build_stream(ds, scfg);
    const std::size_t T = scfg.sessions;
    const std::size_t N = ds.num_classes;

    ParameterStore store;
    model::add_backbone(store, backbone);
    model::add_prompts(store, prompts, true);
    Rng head_rng = make_rng(config.seed, "head-init");
    model::add_head(store, bcfg.embed_dim, N, head_rng, config.head_init_std);
    const std::uint64_t frozen_before = store.fingerprint(true);

    optim::BaseOptimizer opt(optim::OptimizerKind::adam, config.learning_rate);
    ReplayBuffer buffer(config.buffer_capacity(), derive_seed(config.seed, "buffer"));
    Rng replay_rng = make_rng(config.seed, "replay");
    masking::SessionMaskState mask_state(N);
    const ObjectiveOptions objective{false, config.mask_semantics};

    // Session-j test data: holdout examples of classes first seen in session j.
    std::vector<std::size_t> first_session(N, T);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t c : stream.plan.sessions[t].classes) first_session[c] = std::min(first_session[c], t);
    }
    std::vector<std::vector<Example>> session_tests(T);
    for (const auto& e : ds.test) {
        if (first_session[e.label] < T) session_tests[first_session[e.label]].push_back(e);
    }

    RunResult result;
    result.config = config;
    result.seed = config.seed;
    result.label = config.label;
    result.config_hash = config.hash();
    result.run_id = result.config_hash + "-s" + std::to_string(config.seed);
    result.provenance = prompts.provenance;
    result.metrics.matrix = metrics::EvalMatrix(T);

    std::set<std::size_t> observed;
    auto observed_test = [&] {
        std::vector<Example> out;
        for (const auto& e : ds.test) {
            if (observed.contains(e.label)) out.push_back(e);
        }
        return out;
    };
    auto candidates = [&] { return std::vector<std::size_t>(observed.begin(), observed.end()); };

    std::ostringstream steplog;
    steplog.precision(17);
    steplog << "step,session,loss,stream_examples,replay_examples,mask_bits\n";

    std::size_t samples_seen = 0;
    std::size_t next_eval = config.eval_period;
    const std::size_t replay_k = std::max<std::size_t>(1, scfg.batch_size / 2);
    for (std::size_t b = 0; b < stream.batches.size(); ++b) {
        const auto& sb = stream.batches[b];
        const Batch replay = buffer.empty() ? Batch{} : buffer.sample(replay_k, replay_rng);
        Batch train = sb.examples;
        train.insert(train.end(), replay.begin(), replay.end());

        StepTrace trace;
        trace.global_step = sb.global_step;
        trace.session = sb.session;
        for (const auto& e : sb.examples) trace.stream_labels.push_back(e.label);
        for (const auto& e : replay) trace.replay_labels.push_back(e.label);
        std::vector<std::size_t> all_labels = trace.stream_labels;
        all_labels.insert(all_labels.end(), trace.replay_labels.begin(), trace.replay_labels.end());
        trace.batch_mask = masking::mask_from_labels(all_labels, N, MaskPolicy::batch);
        trace.session_mask = masking::update_session_mask(mask_state, sb, trace.replay_labels);
        trace.seen_mask = masking::update_seen_mask(mask_state, sb, trace.replay_labels);
        switch (config.mask) {
            case MaskPolicy::none: trace.applied_mask = MaskVector::full(N); break;
            case MaskPolicy::batch: trace.applied_mask = trace.batch_mask; break;
            case MaskPolicy::session: trace.applied_mask = trace.session_mask; break;
            case MaskPolicy::seen: trace.applied_mask = trace.seen_mask; break;
        }
        for (std::size_t label : all_labels) {
            if (!trace.applied_mask.test(label)) {
                throw MaskedLabelError("step " + std::to_string(sb.global_step) + ": label " + std::to_string(label) +
                                       " missing from the " + to_string(config.mask) + " mask");
            }
        }

        const MaskVector& mask = trace.applied_mask;
        const optim::BatchLossFn loss = [&](const ParameterStore& p, const Batch& batch, GradVector* g) {
            return batch_loss(p, bcfg, batch, &mask, g, objective);
        };
        const auto report = optim::base_step(store, train, loss, opt);
        if (!std::isfinite(report.loss)) throw DivergenceError("loss diverged at step " + std::to_string(sb.global_step));
        trace.loss = report.loss;

        for (const auto& e : sb.examples) buffer.reservoir_update(e);
        trace.buffer_size = buffer.size();
        for (std::size_t label : trace.stream_labels) observed.insert(label);
        samples_seen += sb.examples.size();
        result.stream_examples_consumed += sb.examples.size();
        result.replay_examples_used += replay.size();
        ++result.steps;
        steplog << sb.global_step << ',' << sb.session + 1 << ',' << report.loss << ',' << sb.examples.size() << ','
                << replay.size() << ',' << mask.count() << '\n';
        if (options.observer) options.observer(trace);

        if (samples_seen >= next_eval) {
            result.metrics.anytime.add(samples_seen, accuracy(store, bcfg, observed_test(), candidates()));
            while (next_eval <= samples_seen) next_eval += config.eval_period;
        }
        const bool session_end = b + 1 == stream.batches.size() || stream.batches[b + 1].session != sb.session;
        if (session_end) {
            const auto cands = candidates();
            for (std::size_t j = 0; j <= sb.session; ++j) {
                if (session_tests[j].empty()) continue;
                result.metrics.matrix.set(sb.session, j, accuracy(store, bcfg, session_tests[j], cands));
            }
        }
    }
    if (result.metrics.anytime.empty()) {
        result.metrics.anytime.add(samples_seen, accuracy(store, bcfg, observed_test(), candidates()));
    }

    result.backbone_unchanged = store.fingerprint(true) == frozen_before;
    if (!result.backbone_unchanged) throw Error(ErrorCode::precondition, "frozen backbone changed during the run");
    result.peak_buffer_size = buffer.peak_size();
    result.metrics.a_auc = metrics::a_auc(result.metrics.anytime);
    result.metrics.a_last = metrics::a_last(result.metrics.matrix);
    result.metrics.f_last = metrics::f_last(result.metrics.matrix);
    result.metrics.session1_curve = metrics::session1_curve(result.metrics.matrix);
    result.step_log = steplog.str();
    result.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace gcl
