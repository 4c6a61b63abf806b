// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gcl {

enum class ErrorCode {
    invalid_argument = 1,
    dimension,
    masked_label,
    ordering,
    config,
    io,
    infeasible,
    divergence,
    pretraining,
    oracle,
    precondition,
};

/// Base of every error raised by the core. The C API maps `code()` onto its
/// status enum one to one.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

#define GCL_DEFINE_ERROR(Name, Code)                                              \
    class Name : public Error {                                                   \
    public:                                                                       \
        explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
    };

GCL_DEFINE_ERROR(InvalidArgument, invalid_argument)
GCL_DEFINE_ERROR(DimensionError, dimension)
GCL_DEFINE_ERROR(MaskedLabelError, masked_label)
GCL_DEFINE_ERROR(OrderingError, ordering)
GCL_DEFINE_ERROR(ConfigError, config)
GCL_DEFINE_ERROR(IoError, io)
GCL_DEFINE_ERROR(InfeasibleError, infeasible)
GCL_DEFINE_ERROR(DivergenceError, divergence)
GCL_DEFINE_ERROR(OracleError, oracle)
GCL_DEFINE_ERROR(PreconditionError, precondition)

#undef GCL_DEFINE_ERROR

/// Raised when backbone pretraining misses its accuracy gate; carries the
/// per-epoch training accuracy so the caller can inspect the curve.
class PretrainingError : public Error {
public:
    PretrainingError(const std::string& what, std::vector<double> curve)
        : Error(ErrorCode::pretraining, what), curve_(std::move(curve)) {}
    const std::vector<double>& learning_curve() const noexcept { return curve_; }

private:
    std::vector<double> curve_;
};

}  // namespace gcl
