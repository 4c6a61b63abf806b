// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace gcl::diag {

using WarningSink = std::function<void(std::string_view)>;

// Warnings go to stderr unless a sink is installed on the calling thread.
void warn(std::string_view message);

/// Installs a thread-local sink for the lifetime of the object and records
/// every warning emitted meanwhile.
class WarningCapture {
public:
    WarningCapture();
    ~WarningCapture();
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    const std::vector<std::string>& messages() const { return messages_; }
    std::size_t count() const { return messages_.size(); }

private:
    std::vector<std::string> messages_;
    WarningSink previous_;
};

// Drops stderr output for threads without a sink.
void set_quiet(bool quiet);

// Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace gcl::diag
