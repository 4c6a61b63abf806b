// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/runner.hpp"

namespace gcl::results {

/// One result row as a single line of JSON. Wall-clock time is left out so
/// that reruns of one seed produce identical rows.
std::string record_line(const RunResult& result);

/// Appends lines to a record file. One writer per file.
void append_records(const std::filesystem::path& path, const std::vector<std::string>& lines);

enum class Ablation { none, mask, isa, buffer };
std::string to_string(Ablation a);
Ablation parse_ablation(const std::string& text);

/// Config grid: each ablation value crossed with the repeat seeds. Runs of
/// one seed share the stream seed.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base, Ablation ablation);

/// Keys whose values differ between two configs.
std::vector<std::string> config_diff(const ExperimentConfig& a, const ExperimentConfig& b);

/// Runs every config (up to `jobs` at a time) and returns record lines in
/// grid order.
std::vector<std::string> run_sweep(const std::vector<ExperimentConfig>& grid, std::size_t jobs);

struct Report {
    std::string table;  // mean±std per series, in percent
    std::string curves_csv;  // step,accuracy,series,seed
};

Report build_report(const std::vector<std::string>& record_lines);
std::vector<std::string> read_record_lines(const std::filesystem::path& path);

// "mean±std" in percent with two decimals; sample std, 0 for one value.
std::string format_mean_std(const std::vector<double>& values);

}  // namespace gcl::results
