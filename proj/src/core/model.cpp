// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "core/error.hpp"

namespace gcl::model {

namespace {

std::string layer_name(std::size_t layer, const char* leaf) {
    return "backbone.l" + std::to_string(layer) + "." + leaf;
}

Tensor normal_tensor(Shape shape, double stddev, Rng& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = normal(rng, 0.0, stddev);
    return t;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
    return v;
}

double get_f64(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
    return std::bit_cast<double>(v);
}

}  // namespace

void BackboneConfig::validate() const {
    if (embed_dim == 0 || heads == 0 || input_dim == 0 || mlp_ratio == 0) {
        throw ConfigError("backbone dimensions must be positive");
    }
    if (embed_dim % heads != 0) {
        throw ConfigError("embed_dim " + std::to_string(embed_dim) + " not divisible by heads " + std::to_string(heads));
    }
    if (token_len < 1) throw ConfigError("token_len must be >= 1");
}

void Backbone::freeze() {
    params.freeze_all();
    frozen = true;
}

Backbone make_backbone(const BackboneConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng = make_rng(seed, "backbone-init");
    const std::size_t d = config.embed_dim, l = config.token_len, in = config.input_dim;
    const std::size_t hidden = config.mlp_ratio * d;
    const double wd = 1.0 / std::sqrt(static_cast<double>(d));
    Backbone b;
    b.config = config;
    auto& p = b.params;
    p.add("backbone.embed.w", normal_tensor({l * d, in}, 1.0 / std::sqrt(static_cast<double>(in)), rng), true);
    p.add("backbone.embed.pos", normal_tensor({l, d}, 0.02, rng), true);
    for (std::size_t i = 0; i < config.depth; ++i) {
        p.add(layer_name(i, "ln1.g"), Tensor::filled({d}, 1.0), true);
        p.add(layer_name(i, "ln1.b"), Tensor({d}), true);
        p.add(layer_name(i, "attn.q"), normal_tensor({d, d}, wd, rng), true);
        p.add(layer_name(i, "attn.k"), normal_tensor({d, d}, wd, rng), true);
        p.add(layer_name(i, "attn.v"), normal_tensor({d, d}, wd, rng), true);
        p.add(layer_name(i, "attn.o"), normal_tensor({d, d}, wd, rng), true);
        p.add(layer_name(i, "attn.o.b"), Tensor({d}), true);
        p.add(layer_name(i, "ln2.g"), Tensor::filled({d}, 1.0), true);
        p.add(layer_name(i, "ln2.b"), Tensor({d}), true);
        p.add(layer_name(i, "mlp.fc1"), normal_tensor({hidden, d}, wd, rng), true);
        p.add(layer_name(i, "mlp.fc1.b"), Tensor({hidden}), true);
        p.add(layer_name(i, "mlp.fc2"), normal_tensor({d, hidden}, 1.0 / std::sqrt(static_cast<double>(hidden)), rng), true);
        p.add(layer_name(i, "mlp.fc2.b"), Tensor({d}), true);
    }
    if (config.depth > 0) {
        p.add("backbone.norm.g", Tensor::filled({d}, 1.0), true);
        p.add("backbone.norm.b", Tensor({d}), true);
    }
    return b;
}

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::random: return "random";
        case Provenance::isa_naive: return "isa_naive";
        case Provenance::isa_sam: return "isa_sam";
        case Provenance::isa_fam: return "isa_fam";
    }
    return "unknown";
}

Provenance parse_provenance(const std::string& text) {
    if (text == "random") return Provenance::random;
    if (text == "isa_naive") return Provenance::isa_naive;
    if (text == "isa_sam") return Provenance::isa_sam;
    if (text == "isa_fam") return Provenance::isa_fam;
    throw ConfigError("unknown prompt provenance '" + text + "'");
}

PromptSet random_prompts(std::size_t prompt_len, std::size_t embed_dim, Rng& rng) {
    PromptSet p;
    p.prompts = Tensor({prompt_len, embed_dim});
    for (double& v : p.prompts.data()) v = uniform(rng, -1.0, 1.0);
    p.provenance = Provenance::random;
    return p;
}

// A one-unit layer norm always outputs zero, which would turn the MLP into a
// constant offset; small dims keep two units.
std::size_t augment_hidden_width(std::size_t embed_dim) { return std::max<std::size_t>(2, embed_dim / 8); }

void add_backbone(ParameterStore& store, const Backbone& backbone) {
    for (const auto& name : backbone.params.names()) store.add(name, backbone.params.get(name), false);
}

void add_prompts(ParameterStore& store, const PromptSet& prompts, bool trainable) {
    store.add(kPromptParam, prompts.prompts, trainable);
}

void add_head(ParameterStore& store, std::size_t embed_dim, std::size_t num_classes, Rng& rng, double init_std,
              bool trainable) {
    store.add(kHeadWeight, normal_tensor({num_classes, embed_dim}, init_std, rng), trainable);
    store.add(kHeadBias, Tensor({num_classes}), trainable);
}

void add_augment_mlp(ParameterStore& store, std::size_t embed_dim, Rng& rng, bool trainable) {
    const std::size_t h = augment_hidden_width(embed_dim);
    store.add("augment.down.w", normal_tensor({h, embed_dim}, 1.0 / std::sqrt(static_cast<double>(embed_dim)), rng), trainable);
    store.add("augment.down.b", Tensor({h}), trainable);
    store.add("augment.norm.g", Tensor::filled({h}, 1.0), trainable);
    store.add("augment.norm.b", Tensor({h}), trainable);
    store.add("augment.up.w", normal_tensor({embed_dim, h}, 0.02, rng), trainable);
    store.add("augment.up.b", Tensor({embed_dim}), trainable);
}

ad::Var embed(ad::Tape& tape, const ParameterStore& store, const BackboneConfig& config, std::span<const double> x) {
    if (x.size() != config.input_dim) {
        throw DimensionError("input has " + std::to_string(x.size()) + " features, backbone expects " +
                             std::to_string(config.input_dim));
    }
    ad::Var input = tape.constant(Tensor({1, x.size()}, std::vector<double>(x.begin(), x.end())));
    ad::Var flat = ad::linear(input, tape.parameter(store, "backbone.embed.w"));
    ad::Var grid = ad::reshape(flat, {config.token_len, config.embed_dim});
    return ad::add(grid, tape.parameter(store, "backbone.embed.pos"));
}

ad::Var encode(ad::Tape& tape, const ParameterStore& store, const BackboneConfig& config, ad::Var tokens) {
    const std::size_t dh = config.head_dim();
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
    ad::Var h = tokens;
    for (std::size_t i = 0; i < config.depth; ++i) {
        auto p = [&](const char* leaf) { return tape.parameter(store, layer_name(i, leaf)); };
        ad::Var x = ad::affine_cols(ad::layer_norm(h), p("ln1.g"), p("ln1.b"));
        ad::Var q = ad::linear(x, p("attn.q"));
        ad::Var k = ad::linear(x, p("attn.k"));
        ad::Var v = ad::linear(x, p("attn.v"));
        std::vector<ad::Var> heads;
        heads.reserve(config.heads);
        for (std::size_t hd = 0; hd < config.heads; ++hd) {
            ad::Var qh = ad::slice_cols(q, hd * dh, dh);
            ad::Var kh = ad::slice_cols(k, hd * dh, dh);
            ad::Var vh = ad::slice_cols(v, hd * dh, dh);
            ad::Var scores = ad::scale(ad::linear(qh, kh), att_scale);
            heads.push_back(ad::matmul(ad::softmax_rows(scores), vh));
        }
        ad::Var attn = ad::linear(ad::concat_cols(heads), p("attn.o"), p("attn.o.b"));
        h = ad::add(h, attn);
        ad::Var y = ad::affine_cols(ad::layer_norm(h), p("ln2.g"), p("ln2.b"));
        y = ad::linear(ad::relu(ad::linear(y, p("mlp.fc1"), p("mlp.fc1.b"))), p("mlp.fc2"), p("mlp.fc2.b"));
        h = ad::add(h, y);
    }
    // The closing norm belongs to the block stack; zero blocks is the identity.
    if (config.depth == 0) return h;
    return ad::affine_cols(ad::layer_norm(h), tape.parameter(store, "backbone.norm.g"),
                           tape.parameter(store, "backbone.norm.b"));
}

ad::Var augment_prompts(ad::Tape& tape, const ParameterStore& store, ad::Var prompts) {
    auto p = [&](const char* name) { return tape.parameter(store, name); };
    ad::Var hidden = ad::linear(prompts, p("augment.down.w"), p("augment.down.b"));
    hidden = ad::relu(ad::affine_cols(ad::layer_norm(hidden), p("augment.norm.g"), p("augment.norm.b")));
    return ad::add(prompts, ad::linear(hidden, p("augment.up.w"), p("augment.up.b")));
}

ad::Var forward_with_prompts(ad::Tape& tape, const ParameterStore& store, const BackboneConfig& config,
                             std::span<const double> x, bool augment) {
    ad::Var tokens = embed(tape, store, config, x);
    if (store.contains(kPromptParam) && store.get(kPromptParam).size() > 0) {
        ad::Var prompts = tape.parameter(store, kPromptParam);
        if (prompts.value().cols() != config.embed_dim) {
            throw DimensionError("prompt shape " + gcl::to_string(prompts.shape()) + " does not match embed_dim " +
                                 std::to_string(config.embed_dim));
        }
        if (augment) prompts = augment_prompts(tape, store, prompts);
        tokens = ad::concat_tokens(prompts, tokens);
    }
    ad::Var pooled = ad::mean_pool(encode(tape, store, config, tokens));
    return ad::linear(pooled, tape.parameter(store, kHeadWeight), tape.parameter(store, kHeadBias));
}

PromptSet bake_augmented_prompts(const ParameterStore& store, Provenance provenance) {
    ad::Tape tape(false);
    ad::Var out = augment_prompts(tape, store, tape.parameter(store, kPromptParam));
    PromptSet p;
    p.prompts = out.value();
    p.provenance = provenance;
    return p;
}

std::size_t predict(const ParameterStore& store, const BackboneConfig& config, std::span<const double> x,
                    std::span<const std::size_t> candidate_classes) {
    if (candidate_classes.empty()) throw InvalidArgument("predict needs at least one candidate class");
    ad::Tape tape(false);
    const Tensor& logits = forward_with_prompts(tape, store, config, x).value();
    std::size_t best = candidate_classes.front();
    for (std::size_t c : candidate_classes) {
        if (c >= logits.size()) throw InvalidArgument("candidate class outside the head");
        if (logits[c] > logits[best]) best = c;
    }
    return best;
}

std::vector<std::uint8_t> encode_checkpoint(const PromptSet& prompts) {
    std::vector<std::uint8_t> out{'G', 'C', 'L', 'P'};
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(prompts.length()));
    put_u32(out, static_cast<std::uint32_t>(prompts.dim()));
    put_u32(out, static_cast<std::uint32_t>(prompts.provenance));
    for (double v : prompts.prompts.values()) put_f64(out, v);
    return out;
}

PromptSet decode_checkpoint(std::span<const std::uint8_t> bytes) {
    constexpr std::size_t header = 20;
    if (bytes.size() < header || std::memcmp(bytes.data(), "GCLP", 4) != 0) {
        throw IoError("not a prompt checkpoint (bad magic)");
    }
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
    const std::size_t len = get_u32(bytes, 8), dim = get_u32(bytes, 12);
    const std::uint32_t tag = get_u32(bytes, 16);
    if (tag > static_cast<std::uint32_t>(Provenance::isa_fam)) throw IoError("unknown provenance tag " + std::to_string(tag));
    if (bytes.size() != header + len * dim * 8) {
        throw IoError("checkpoint payload size mismatch for " + std::to_string(len) + "x" + std::to_string(dim));
    }
    std::vector<double> values(len * dim);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = get_f64(bytes, header + 8 * i);
    PromptSet p;
    p.prompts = Tensor({len, dim}, std::move(values));
    p.provenance = static_cast<Provenance>(tag);
    return p;
}

void write_checkpoint(const std::filesystem::path& path, const PromptSet& prompts) {
    const auto bytes = encode_checkpoint(prompts);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

PromptSet read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace gcl::model
