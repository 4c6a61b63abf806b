// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/diag.hpp"

#include <atomic>
#include <iostream>

namespace gcl::diag {

namespace {
thread_local WarningSink t_sink;
std::atomic<bool> g_quiet{false};
}

void warn(std::string_view message) {
    if (t_sink) {
        t_sink(message);
        return;
    }
    if (g_quiet) return;
    std::cerr << "gcl: warning: " << message << '\n';
}

void set_quiet(bool quiet) { g_quiet = quiet; }

WarningSink set_warning_sink(WarningSink sink) {
    auto previous = std::move(t_sink);
    t_sink = std::move(sink);
    return previous;
}

WarningCapture::WarningCapture() {
    previous_ = set_warning_sink([this](std::string_view m) { messages_.emplace_back(m); });
}

WarningCapture::~WarningCapture() { set_warning_sink(std::move(previous_)); }

}  // namespace gcl::diag
