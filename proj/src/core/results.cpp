// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/results.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "core/error.hpp"

namespace gcl::results {

using nlohmann::ordered_json;

std::string record_line(const RunResult& r) {
    ordered_json rec;
    rec["run_id"] = r.run_id;
    rec["label"] = r.label;
    rec["seed"] = r.seed;
    rec["config_hash"] = r.config_hash;
    rec["code_version"] = r.code_version;
    rec["provenance"] = model::to_string(r.provenance);
    rec["mask"] = to_string(r.config.mask);
    rec["isa"] = to_string(r.config.isa_mode);
    rec["buffer"] = r.config.buffer;
    rec["batch_size"] = r.config.stream.batch_size;
    rec["a_auc"] = r.metrics.a_auc;
    rec["a_last"] = r.metrics.a_last;
    rec["f_last"] = r.metrics.f_last;
    rec["session1_curve"] = r.metrics.session1_curve;
    ordered_json anytime = ordered_json::array();
    for (const auto& p : r.metrics.anytime.points()) anytime.push_back({p.samples_seen, p.accuracy});
    rec["anytime"] = anytime;
    ordered_json matrix = ordered_json::array();
    for (const auto& row : r.metrics.matrix.rows()) {
        ordered_json jr = ordered_json::array();
        for (const auto& cell : row) jr.push_back(cell ? ordered_json(*cell) : ordered_json(nullptr));
        matrix.push_back(jr);
    }
    rec["eval_matrix"] = matrix;
    rec["steps"] = r.steps;
    rec["stream_examples"] = r.stream_examples_consumed;
    rec["replay_examples"] = r.replay_examples_used;
    rec["peak_buffer"] = r.peak_buffer_size;
    return rec.dump();
}

void append_records(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for append");
    for (const auto& line : lines) out << line << '\n';
    if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::none: return "none";
        case Ablation::mask: return "mask";
        case Ablation::isa: return "isa";
        case Ablation::buffer: return "buffer";
    }
    return "?";
}

Ablation parse_ablation(const std::string& text) {
    if (text.empty() || text == "none") return Ablation::none;
    if (text == "mask") return Ablation::mask;
    if (text == "isa") return Ablation::isa;
    if (text == "buffer") return Ablation::buffer;
    throw ConfigError("unknown ablation '" + text + "' (expected mask, isa or buffer)");
}

std::vector<std::string> config_diff(const ExperimentConfig& a, const ExperimentConfig& b) {
    const auto ma = a.to_map();
    const auto mb = b.to_map();
    std::vector<std::string> out;
    for (const auto& [k, v] : ma) {
        auto it = mb.find(k);
        if (it == mb.end() || it->second != v) out.push_back(k);
    }
    return out;
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base, Ablation ablation) {
    std::vector<std::string> values;
    std::string key;
    switch (ablation) {
        case Ablation::none: break;
        case Ablation::mask: key = "mask"; values = {"none", "batch", "session", "seen"}; break;
        case Ablation::isa: key = "isa"; values = {"off", "naive", "sam", "fam"}; break;
        case Ablation::buffer: key = "buffer"; values = {"0", "small", "large"}; break;
    }
    if (values.empty()) values.push_back("");
    if (base.repeat_seeds.empty()) throw ConfigError("repeat_seeds is empty");

    std::vector<ExperimentConfig> grid;
    for (const auto& value : values) {
        for (std::uint64_t seed : base.repeat_seeds) {
            ExperimentConfig c = base;
            if (!key.empty()) c.set(key, value);
            c.seed = seed;
            if (c.label.empty() && !key.empty()) c.label = key + "=" + value;
            grid.push_back(std::move(c));
        }
    }
    // Runs of one seed may differ only in the ablated key.
    for (const auto& c : grid) {
        ExperimentConfig ref = base;
        ref.seed = c.seed;
        ref.label = c.label;
        for (const auto& k : config_diff(ref, c)) {
            if (k != key) throw Error(ErrorCode::config, "sweep grid changed '" + k + "' besides '" + key + "'");
        }
    }
    return grid;
}

std::vector<std::string> run_sweep(const std::vector<ExperimentConfig>& grid, std::size_t jobs) {
    std::vector<std::string> lines(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                lines[i] = record_line(run_gcl(grid[i]));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(jobs, grid.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return lines;
}

std::string format_mean_std(const std::vector<double>& values) {
    if (values.empty()) return "n/a";
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f±%.2f", 100.0 * mean, 100.0 * sd);
    return buf;
}

std::vector<std::string> read_record_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

Report build_report(const std::vector<std::string>& record_lines) {
    struct Series {
        std::vector<double> a_auc, a_last, f_last;
    };
    std::vector<std::string> order;
    std::map<std::string, Series> series;
    std::ostringstream csv;
    csv.precision(17);
    csv << "step,accuracy,series,seed\n";
    for (std::size_t i = 0; i < record_lines.size(); ++i) {
        ordered_json rec;
        try {
            rec = ordered_json::parse(record_lines[i]);
        } catch (const std::exception& e) {
            throw IoError("record " + std::to_string(i + 1) + " is not valid JSON: " + e.what());
        }
        std::string name = rec.value("label", std::string{});
        if (name.empty()) {
            name = "mask=" + rec.at("mask").get<std::string>() + " isa=" + rec.at("isa").get<std::string>() +
                   " buffer=" + rec.at("buffer").get<std::string>();
        }
        if (!series.contains(name)) order.push_back(name);
        auto& s = series[name];
        s.a_auc.push_back(rec.at("a_auc").get<double>());
        s.a_last.push_back(rec.at("a_last").get<double>());
        s.f_last.push_back(rec.at("f_last").get<double>());
        const auto seed = rec.at("seed").get<std::uint64_t>();
        for (const auto& p : rec.at("anytime")) {
            csv << p.at(0).get<std::size_t>() << ',' << p.at(1).get<double>() << ',' << name << "/anytime," << seed
                << '\n';
        }
        const auto& curve = rec.at("session1_curve");
        for (std::size_t s1 = 0; s1 < curve.size(); ++s1) {
            csv << s1 + 1 << ',' << curve.at(s1).get<double>() << ',' << name << "/session1," << seed << '\n';
        }
    }
    std::size_t width = 6;
    for (const auto& n : order) width = std::max(width, n.size());
    std::ostringstream table;
    auto pad = [&](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
    table << pad("series", width) << "  runs  " << pad("A_AUC", 14) << pad("A_Last", 14) << "F_Last\n";
    for (const auto& n : order) {
        const auto& s = series[n];
        table << pad(n, width) << "  " << pad(std::to_string(s.a_auc.size()), 4) << "  "
              << pad(format_mean_std(s.a_auc), 14) << pad(format_mean_std(s.a_last), 14) << format_mean_std(s.f_last)
              << '\n';
    }
    return {table.str(), csv.str()};
}

}  // namespace gcl::results
