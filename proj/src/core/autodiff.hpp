// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/mask_vector.hpp"
#include "core/params.hpp"
#include "core/tensor.hpp"

namespace gcl::ad {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;
    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Define-by-run reverse-mode tape. A fresh tape is built for every forward
/// pass; parameters enter as leaves bound to a ParameterStore, and only the
/// store's trainable entries receive gradients.
class Tape {
public:
    // (output value, output grad, input values, input grads); an input grad
    // pointer is null when that input does not require a gradient.
    using Backward = std::function<void(const Tensor&, const Tensor&, std::span<const Tensor* const>,
                                        std::span<Tensor* const>)>;

    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    // Leaf for a named parameter; recorded once per tape and reused afterwards.
    Var parameter(const ParameterStore& store, std::string_view name);
    Var record(Tensor value, std::initializer_list<Var> inputs, Backward backward);
    Var record(Tensor value, const std::vector<Var>& inputs, Backward backward);

    const Tensor& value(Var v) const { return nodes_[v.id()].value; }
    bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
    bool grad_enabled() const { return grad_enabled_; }
    std::size_t size() const { return nodes_.size(); }

    /// Reverse pass from a scalar loss. Returns the gradient over the bound
    /// store's flat view; calling it again on the same tape gives the same
    /// result. A loss that does not depend on any trainable entry yields a
    /// zero vector and a warning.
    GradVector backward(Var loss);

    // Gradient of the last backward() w.r.t. any node that required one.
    const Tensor& grad(Var v) const { return nodes_[v.id()].grad; }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<std::size_t> inputs;
        Backward backward;
        bool requires_grad = false;
        std::string param;  // non-empty for parameter leaves
    };

    Var push(Node node);

    bool grad_enabled_;
    std::vector<Node> nodes_;
    std::map<std::string, std::size_t, std::less<>> param_ids_;
    const ParameterStore* store_ = nullptr;
};

// Differentiable primitives. Matrices are rank 2; rank-1 inputs count as one row.
Var matmul(Var a, Var b);
Var transpose(Var a);
// x * W^T + b with W stored [out x in]; bias may be omitted (default Var).
Var linear(Var x, Var weight, Var bias = {});
Var add(Var a, Var b);
// Adds a row vector to every row of x.
Var add_row(Var x, Var row);
Var scale(Var a, double s);
Var mul_const(Var a, const Tensor& factors);
Var relu(Var a);
constexpr double kLayerNormEps = 1e-5;
Var layer_norm(Var x, double eps = kLayerNormEps);
// Column-wise x * gain + bias.
Var affine_cols(Var x, Var gain, Var bias);
Var softmax_rows(Var x);
Var slice_cols(Var x, std::size_t begin, std::size_t count);
Var concat_cols(const std::vector<Var>& parts);
// Stacks along the token (row) axis: [a; b].
Var concat_tokens(Var a, Var b);
Var mean_pool(Var x);
Var reshape(Var x, Shape shape);
Var sum(const std::vector<Var>& scalars);
Var mean(const std::vector<Var>& scalars);

/// Cross-entropy of the softmax restricted to unmasked logits; masked
/// entries are dropped from the normalizer and get an exact zero gradient.
Var masked_softmax_cross_entropy(Var logits, std::size_t label, const MaskVector& mask);
Var cross_entropy(Var logits, std::size_t label);

// Plain (non-differentiable) helper used by oracles and inference.
Tensor matmul(const Tensor& a, const Tensor& b);

}  // namespace gcl::ad
