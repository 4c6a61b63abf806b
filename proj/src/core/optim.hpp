// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/data.hpp"
#include "core/params.hpp"

namespace gcl::optim {

enum class OptimizerKind { sgd, adam };

/// SGD or Adam over a store's flat trainable view. Frozen entries are never
/// touched since they are not part of the view.
class BaseOptimizer {
public:
    BaseOptimizer(OptimizerKind kind, double learning_rate);

    OptimizerKind kind() const { return kind_; }
    double learning_rate() const { return lr_; }
    std::size_t steps() const { return t_; }

    // Rejects non-finite gradients without touching the parameters.
    void step(ParameterStore& params, const GradVector& grad);

    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double eps = 1e-8;

private:
    OptimizerKind kind_;
    double lr_;
    std::size_t t_ = 0;
    std::vector<double> m_, v_;
};

enum class SharpnessMode { none, sam, fam };
std::string to_string(SharpnessMode mode);

struct SharpnessConfig {
    double rho = 0.05;
    SharpnessMode mode = SharpnessMode::fam;
};

/// Loss (and optionally gradient) of the current parameters on one batch.
using BatchLossFn = std::function<double(const ParameterStore&, const Batch&, GradVector*)>;

struct StepReport {
    double loss = 0.0;                // first pass, unperturbed point
    double perturbed_loss = 0.0;      // second pass (equals loss for base_step)
    double grad_norm = 0.0;           // of the first-pass gradient
    double perturbation_norm = 0.0;   // ||eps*|| or ||delta||
    std::size_t backward_passes = 0;
    std::vector<double> perturbation;  // eps* or delta over the flat view
    GradVector applied_grad;           // gradient handed to the base step
};

/// eps* = rho g / ||g||.
std::vector<double> sam_perturbation(const GradVector& grad, double rho);
/// delta = -rho g_ood / ||g_ood||.
std::vector<double> fam_perturbation(const GradVector& ood_grad, double rho);

StepReport base_step(ParameterStore& params, const Batch& batch, const BatchLossFn& loss, BaseOptimizer& opt);

/// Two passes: gradient at theta, gradient at theta + eps*, exact restore of
/// theta, then the base update with the perturbed-point gradient.
StepReport sam_step(ParameterStore& params, const Batch& batch, const BatchLossFn& loss, double rho,
                    BaseOptimizer& opt);

struct FamOptions {
    bool require_label_disjoint = true;
};

/// Two passes: OOD gradient at theta gives delta; ID gradient at theta + delta
/// drives the base update after theta is restored exactly.
StepReport fam_step(ParameterStore& params, const Batch& id_batch, const Batch& ood_batch, const BatchLossFn& loss,
                    double rho, BaseOptimizer& opt, FamOptions options = {});

}  // namespace gcl::optim
