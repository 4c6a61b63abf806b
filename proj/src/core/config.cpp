// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace gcl {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw ConfigError("cannot format number");
    return std::string(buf, end);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

struct Field {
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

template <typename T>
Field size_field(T ExperimentConfig::*outer, std::size_t T::*inner) {
    return {[=](const ExperimentConfig& c) { return std::to_string((c.*outer).*inner); },
            [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
                (c.*outer).*inner = static_cast<std::size_t>(parse_uint(k, v));
            }};
}

template <typename T>
Field double_field(T ExperimentConfig::*outer, double T::*inner) {
    return {[=](const ExperimentConfig& c) { return fmt_double((c.*outer).*inner); },
            [=](ExperimentConfig& c, const std::string& k, const std::string& v) { (c.*outer).*inner = parse_double(k, v); }};
}

template <typename T>
Field seed_field(T ExperimentConfig::*outer, std::uint64_t T::*inner) {
    return {[=](const ExperimentConfig& c) { return std::to_string((c.*outer).*inner); },
            [=](ExperimentConfig& c, const std::string& k, const std::string& v) { (c.*outer).*inner = parse_uint(k, v); }};
}

const std::map<std::string, Field>& fields() {
    using C = ExperimentConfig;
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        t["data.path"] = {[](const C& c) { return c.data_path; },
                          [](C& c, const std::string&, const std::string& v) { c.data_path = v; }};
        t["data.classes"] = size_field(&C::data, &data::SyntheticSpec::classes);
        t["data.per_class"] = size_field(&C::data, &data::SyntheticSpec::per_class);
        t["data.dim"] = size_field(&C::data, &data::SyntheticSpec::dim);
        t["data.spread"] = double_field(&C::data, &data::SyntheticSpec::spread);
        t["data.margin"] = double_field(&C::data, &data::SyntheticSpec::margin);
        t["data.seed"] = seed_field(&C::data, &data::SyntheticSpec::seed);
        t["data.train_fraction"] = double_field(&C::data, &data::SyntheticSpec::train_fraction);
        t["data.latent_dim"] = size_field(&C::data, &data::SyntheticSpec::latent_dim);
        t["data.basis_seed"] = seed_field(&C::data, &data::SyntheticSpec::basis_seed);

        t["pretrain.classes"] = size_field(&C::pretrain_data, &data::SyntheticSpec::classes);
        t["pretrain.per_class"] = size_field(&C::pretrain_data, &data::SyntheticSpec::per_class);
        t["pretrain.spread"] = double_field(&C::pretrain_data, &data::SyntheticSpec::spread);
        t["pretrain.margin"] = double_field(&C::pretrain_data, &data::SyntheticSpec::margin);
        t["pretrain.data_seed"] = seed_field(&C::pretrain_data, &data::SyntheticSpec::seed);
        t["pretrain.seed"] = seed_field(&C::pretrain, &isa::PretrainConfig::seed);
        t["pretrain.epochs"] = size_field(&C::pretrain, &isa::PretrainConfig::epochs);
        t["pretrain.batch_size"] = size_field(&C::pretrain, &isa::PretrainConfig::batch_size);
        t["pretrain.lr"] = double_field(&C::pretrain, &isa::PretrainConfig::learning_rate);
        t["pretrain.min_accuracy"] = double_field(&C::pretrain, &isa::PretrainConfig::min_accuracy);

        t["stream.m"] = double_field(&C::stream, &stream::StreamConfig::disjoint_ratio);
        t["stream.n"] = double_field(&C::stream, &stream::StreamConfig::blurry_ratio);
        t["stream.sessions"] = size_field(&C::stream, &stream::StreamConfig::sessions);
        t["stream.batch_size"] = size_field(&C::stream, &stream::StreamConfig::batch_size);

        t["model.embed_dim"] = size_field(&C::backbone, &model::BackboneConfig::embed_dim);
        t["model.depth"] = size_field(&C::backbone, &model::BackboneConfig::depth);
        t["model.heads"] = size_field(&C::backbone, &model::BackboneConfig::heads);
        t["model.token_len"] = size_field(&C::backbone, &model::BackboneConfig::token_len);
        t["model.mlp_ratio"] = size_field(&C::backbone, &model::BackboneConfig::mlp_ratio);
        t["model.prompt_len"] = {[](const C& c) { return std::to_string(c.prompt_len); },
                                 [](C& c, const std::string& k, const std::string& v) { c.prompt_len = parse_uint(k, v); }};
        t["model.head_init_std"] = {[](const C& c) { return fmt_double(c.head_init_std); },
                                    [](C& c, const std::string& k, const std::string& v) { c.head_init_std = parse_double(k, v); }};

        t["mask"] = {[](const C& c) { return to_string(c.mask); },
                     [](C& c, const std::string&, const std::string& v) { c.mask = parse_mask_policy(v); }};
        t["mask.semantics"] = {
            [](const C& c) { return c.mask_semantics == masking::MaskSemantics::exclude ? "exclude" : "multiply"; },
            [](C& c, const std::string& k, const std::string& v) {
                if (v == "exclude") c.mask_semantics = masking::MaskSemantics::exclude;
                else if (v == "multiply") c.mask_semantics = masking::MaskSemantics::multiply;
                else throw ConfigError(k + ": expected exclude or multiply");
            }};

        t["isa"] = {[](const C& c) { return to_string(c.isa_mode); },
                    [](C& c, const std::string&, const std::string& v) { c.isa_mode = parse_isa_mode(v); }};
        t["isa.epochs"] = size_field(&C::isa, &isa::IsaConfig::epochs);
        t["isa.batch_size"] = size_field(&C::isa, &isa::IsaConfig::batch_size);
        t["isa.ood_batch_size"] = size_field(&C::isa, &isa::IsaConfig::ood_batch_size);
        t["isa.lr"] = double_field(&C::isa, &isa::IsaConfig::learning_rate);
        t["isa.rho"] = double_field(&C::isa, &isa::IsaConfig::rho);
        t["isa.ood_class_count"] = size_field(&C::isa, &isa::IsaConfig::ood_class_count);
        t["isa.ood_pool_fraction"] = double_field(&C::isa, &isa::IsaConfig::ood_pool_fraction);
        t["isa.aug_strength"] = double_field(&C::isa, &isa::IsaConfig::augment_strength);
        t["isa.augment_prompts"] = {[](const C& c) { return std::string(c.isa.augment_prompts ? "true" : "false"); },
                                    [](C& c, const std::string& k, const std::string& v) { c.isa.augment_prompts = parse_bool(k, v); }};
        t["isa.checkpoint"] = {[](const C& c) { return c.isa_checkpoint; },
                               [](C& c, const std::string&, const std::string& v) { c.isa_checkpoint = v; }};

        t["gcl.lr"] = {[](const C& c) { return fmt_double(c.learning_rate); },
                       [](C& c, const std::string& k, const std::string& v) { c.learning_rate = parse_double(k, v); }};
        t["buffer"] = {[](const C& c) { return c.buffer; },
                       [](C& c, const std::string& k, const std::string& v) {
                           if (v != "small" && v != "large") parse_uint(k, v);
                           c.buffer = v;
                       }};
        t["eval_period"] = {[](const C& c) { return std::to_string(c.eval_period); },
                            [](C& c, const std::string& k, const std::string& v) { c.eval_period = parse_uint(k, v); }};
        t["seed"] = {[](const C& c) { return std::to_string(c.seed); },
                     [](C& c, const std::string& k, const std::string& v) { c.seed = parse_uint(k, v); }};
        t["repeat_seeds"] = {[](const C& c) {
                                 std::string s;
                                 for (std::size_t i = 0; i < c.repeat_seeds.size(); ++i) {
                                     if (i) s += ',';
                                     s += std::to_string(c.repeat_seeds[i]);
                                 }
                                 return s;
                             },
                             [](C& c, const std::string& k, const std::string& v) {
                                 c.repeat_seeds.clear();
                                 std::istringstream is(v);
                                 std::string item;
                                 while (std::getline(is, item, ',')) c.repeat_seeds.push_back(parse_uint(k, trim(item)));
                                 if (c.repeat_seeds.empty()) throw ConfigError(k + ": needs at least one seed");
                             }};
        t["label"] = {[](const C& c) { return c.label; },
                      [](C& c, const std::string&, const std::string& v) { c.label = v; }};
        return t;
    }();
    return table;
}

}  // namespace

std::string to_string(IsaMode mode) {
    switch (mode) {
        case IsaMode::off: return "off";
        case IsaMode::naive: return "naive";
        case IsaMode::sam: return "sam";
        case IsaMode::fam: return "fam";
    }
    return "unknown";
}

IsaMode parse_isa_mode(const std::string& text) {
    if (text == "off") return IsaMode::off;
    if (text == "naive") return IsaMode::naive;
    if (text == "sam") return IsaMode::sam;
    if (text == "fam") return IsaMode::fam;
    throw ConfigError("unknown isa mode '" + text + "' (off|naive|sam|fam)");
}

std::size_t ExperimentConfig::buffer_capacity() const {
    if (buffer == "small") return kSmallBuffer;
    if (buffer == "large") return kLargeBuffer;
    return static_cast<std::size_t>(parse_uint("buffer", buffer));
}

void ExperimentConfig::validate() const {
    stream.validate();
    model::BackboneConfig b = backbone;
    b.input_dim = data.dim;
    b.validate();
    if (data.dim != pretrain_data.dim) throw ConfigError("downstream and pretraining feature dims differ");
    if (eval_period == 0) throw ConfigError("eval_period must be >= 1");
    if (!(learning_rate >= 0.0)) throw ConfigError("gcl.lr must be >= 0");
    if (isa.rho < 0.0) throw ConfigError("isa.rho must be >= 0");
    buffer_capacity();
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
    std::map<std::string, std::string> out;
    for (const auto& [key, f] : fields()) out[key] = f.get(*this);
    return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(*this, key, value);
    if (key == "data.dim") {
        pretrain_data.dim = data.dim;
        backbone.input_dim = data.dim;
    }
    // The pretraining data lives in the same latent subspace as the downstream data.
    if (key == "data.latent_dim") pretrain_data.latent_dim = data.latent_dim;
    if (key == "data.basis_seed") pretrain_data.basis_seed = data.basis_seed;
    if (key == "model.prompt_len") isa.prompt_len = prompt_len;
    if (key == "model.head_init_std") isa.head_init_std = head_init_std;
}

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, std::string>& kv) {
    ExperimentConfig c;
    for (const auto& [k, v] : kv) c.set(k, v);
    return c;
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream os;
    for (const auto& [k, v] : to_map()) os << k << " = " << v << '\n';
    return os.str();
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = fnv1a64(kCodeVersion);
    for (const auto& [k, v] : to_map()) {
        if (k == "seed" || k == "label" || k == "repeat_seeds") continue;
        h = fnv1a64(k + "=" + v + "\n", h);
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : fields()) out.push_back(k);
    return out;
}

}  // namespace gcl
