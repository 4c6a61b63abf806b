// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/optim.hpp"

#include <cmath>

#include "core/diag.hpp"
#include "core/error.hpp"

namespace gcl::optim {

namespace {

std::vector<double> normalized_scaled(const GradVector& grad, double factor, const char* what) {
    std::vector<double> out(grad.size(), 0.0);
    const double norm = grad.l2_norm();
    if (norm == 0.0) {
        if (factor != 0.0) diag::warn(std::string(what) + ": zero gradient, skipping perturbation");
        return out;
    }
    const double s = factor / norm;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * grad[i];
    return out;
}

double eval_grad(const BatchLossFn& loss, const ParameterStore& params, const Batch& batch, GradVector& out) {
    const double value = loss(params, batch, &out);
    if (out.size() != params.flat_size()) throw DimensionError("loss returned a gradient misaligned with the flat view");
    return value;
}

}  // namespace

BaseOptimizer::BaseOptimizer(OptimizerKind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be finite and >= 0");
}

void BaseOptimizer::step(ParameterStore& params, const GradVector& grad) {
    if (grad.size() != params.flat_size()) {
        throw DimensionError("gradient length " + std::to_string(grad.size()) + " != flat view " +
                             std::to_string(params.flat_size()));
    }
    if (!grad.all_finite()) throw DivergenceError("non-finite gradient; step rejected");
    std::vector<double> delta(grad.size());
    if (kind_ == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = -lr_ * grad[i];
    } else {
        if (m_.size() != grad.size()) {
            m_.assign(grad.size(), 0.0);
            v_.assign(grad.size(), 0.0);
            t_ = 0;
        }
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_ + 1));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_ + 1));
        for (std::size_t i = 0; i < delta.size(); ++i) {
            m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
            v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
            delta[i] = -lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
        }
    }
    ++t_;
    params.add_to_trainable(delta);
}

std::string to_string(SharpnessMode mode) {
    switch (mode) {
        case SharpnessMode::none: return "none";
        case SharpnessMode::sam: return "sam";
        case SharpnessMode::fam: return "fam";
    }
    return "unknown";
}

std::vector<double> sam_perturbation(const GradVector& grad, double rho) {
    if (rho < 0.0) throw ConfigError("rho must be >= 0");
    return normalized_scaled(grad, rho, "sam");
}

std::vector<double> fam_perturbation(const GradVector& ood_grad, double rho) {
    if (rho < 0.0) throw ConfigError("rho must be >= 0");
    return normalized_scaled(ood_grad, -rho, "fam");
}

StepReport base_step(ParameterStore& params, const Batch& batch, const BatchLossFn& loss, BaseOptimizer& opt) {
    StepReport r;
    GradVector g;
    r.loss = eval_grad(loss, params, batch, g);
    r.backward_passes = 1;
    r.perturbed_loss = r.loss;
    r.grad_norm = g.l2_norm();
    r.perturbation.assign(g.size(), 0.0);
    opt.step(params, g);
    r.applied_grad = std::move(g);
    return r;
}

StepReport sam_step(ParameterStore& params, const Batch& batch, const BatchLossFn& loss, double rho,
                    BaseOptimizer& opt) {
    if (batch.empty()) throw PreconditionError("sam_step on an empty batch");
    StepReport r;
    GradVector g;
    r.loss = eval_grad(loss, params, batch, g);
    r.grad_norm = g.l2_norm();
    r.perturbation = sam_perturbation(g, rho);
    r.perturbation_norm = l2_norm(r.perturbation);

    const std::vector<double> origin = params.flatten();
    params.add_to_trainable(r.perturbation);
    GradVector g2;
    r.perturbed_loss = eval_grad(loss, params, batch, g2);
    params.unflatten(origin);
    r.backward_passes = 2;

    opt.step(params, g2);
    r.applied_grad = std::move(g2);
    return r;
}

StepReport fam_step(ParameterStore& params, const Batch& id_batch, const Batch& ood_batch, const BatchLossFn& loss,
                    double rho, BaseOptimizer& opt, FamOptions options) {
    if (id_batch.empty() || ood_batch.empty()) throw PreconditionError("fam_step needs nonempty ID and OOD batches");
    if (options.require_label_disjoint) {
        const auto id_labels = labels_of(id_batch);
        for (const auto& e : ood_batch) {
            if (id_labels.contains(e.label)) {
                throw PreconditionError("ID and OOD batches share label " + std::to_string(e.label));
            }
        }
    }
    StepReport r;
    GradVector g_ood;
    r.loss = eval_grad(loss, params, ood_batch, g_ood);
    r.grad_norm = g_ood.l2_norm();
    r.perturbation = fam_perturbation(g_ood, rho);
    r.perturbation_norm = l2_norm(r.perturbation);

    const std::vector<double> origin = params.flatten();
    params.add_to_trainable(r.perturbation);
    GradVector g;
    r.perturbed_loss = eval_grad(loss, params, id_batch, g);
    params.unflatten(origin);
    r.backward_passes = 2;

    opt.step(params, g);
    r.applied_grad = std::move(g);
    return r;
}

}  // namespace gcl::optim
