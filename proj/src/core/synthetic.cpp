// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "core/error.hpp"
#include "core/params.hpp"
#include "core/rng.hpp"

namespace gcl::data {

namespace {

constexpr int kCentroidAttempts = 2000;

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Splits each class's examples by train_fraction, keeping at least one on each side.
void split_per_class(std::vector<std::vector<std::vector<double>>> by_class, double train_fraction, Rng& rng,
                     Dataset& out) {
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& xs = by_class[c];
        shuffle(xs, rng);
        auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(xs.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, xs.size() - 1);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            (i < n_train ? out.train : out.test).push_back(Example{std::move(xs[i]), c});
        }
    }
}

// Gram-Schmidt over Gaussian vectors; k rows of length dim.
std::vector<std::vector<double>> orthonormal_basis(const SyntheticSpec& spec, std::size_t k) {
    Rng rng = make_rng(spec.basis_seed, "synthetic-basis");
    std::vector<std::vector<double>> rows;
    while (rows.size() < k) {
        std::vector<double> v(spec.dim);
        for (double& x : v) x = normal(rng);
        for (const auto& r : rows) {
            double dot = 0.0;
            for (std::size_t d = 0; d < spec.dim; ++d) dot += v[d] * r[d];
            for (std::size_t d = 0; d < spec.dim; ++d) v[d] -= dot * r[d];
        }
        const double n = l2_norm(v);
        if (n < 1e-8) continue;
        for (double& x : v) x /= n;
        rows.push_back(std::move(v));
    }
    return rows;
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.classes < 1 || spec.dim < 1) throw ConfigError("synthetic spec needs >= 1 class and >= 1 feature");
    if (spec.per_class < 2) throw ConfigError("synthetic spec needs >= 2 samples per class for a train/test split");
    if (spec.spread < 0.0 || spec.margin < 0.0) throw ConfigError("spread and margin must be >= 0");
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");

    if (spec.latent_dim > spec.dim) throw ConfigError("latent_dim exceeds the feature dim");
    const std::size_t k = spec.latent_dim == 0 ? spec.dim : spec.latent_dim;
    const auto basis = spec.latent_dim == 0 ? std::vector<std::vector<double>>{} : orthonormal_basis(spec, k);

    Rng rng = make_rng(spec.seed, "synthetic-centroids");
    std::vector<std::vector<double>> centroids;
    for (std::size_t c = 0; c < spec.classes; ++c) {
        bool placed = false;
        for (int attempt = 0; attempt < kCentroidAttempts && !placed; ++attempt) {
            std::vector<double> u(k);
            for (double& v : u) v = normal(rng);
            const double norm = l2_norm(u);
            if (norm == 0.0) continue;
            for (double& v : u) v *= spec.margin / norm;
            if (!basis.empty()) {
                std::vector<double> x(spec.dim, 0.0);
                for (std::size_t j = 0; j < k; ++j) {
                    for (std::size_t d = 0; d < spec.dim; ++d) x[d] += u[j] * basis[j][d];
                }
                u = std::move(x);
            }
            placed = std::all_of(centroids.begin(), centroids.end(),
                                 [&](const auto& other) { return distance(u, other) >= spec.margin; });
            if (placed) centroids.push_back(std::move(u));
        }
        if (!placed) {
            throw ConfigError("cannot place " + std::to_string(spec.classes) + " centroids " +
                              std::to_string(spec.margin) + " apart in " + std::to_string(spec.dim) + " dimensions");
        }
    }

    Rng sample_rng = make_rng(spec.seed, "synthetic-samples");
    std::vector<std::vector<std::vector<double>>> by_class(spec.classes);
    for (std::size_t c = 0; c < spec.classes; ++c) {
        for (std::size_t k = 0; k < spec.per_class; ++k) {
            std::vector<double> x = centroids[c];
            for (double& v : x) v += spec.spread * normal(sample_rng);
            by_class[c].push_back(std::move(x));
        }
    }
    Dataset ds;
    ds.num_classes = spec.classes;
    ds.feature_dim = spec.dim;
    Rng split_rng = make_rng(spec.seed, "synthetic-split");
    split_per_class(std::move(by_class), spec.train_fraction, split_rng, ds);
    ds.validate();
    return ds;
}

Dataset load_delimited(const std::filesystem::path& path, double train_fraction, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
    std::map<long long, std::vector<std::vector<double>>> raw;
    std::size_t dim = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string cell;
        std::vector<double> values;
        long long label = 0;
        bool first = true;
        while (std::getline(fields, cell, ',')) {
            try {
                if (first) {
                    label = std::stoll(cell);
                } else {
                    values.push_back(std::stod(cell));
                }
            } catch (const std::exception&) {
                throw IoError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
            }
            first = false;
        }
        if (values.empty()) throw IoError(path.string() + ":" + std::to_string(line_no) + ": no features");
        if (dim == 0) dim = values.size();
        if (values.size() != dim) {
            throw DimensionError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                                 " features, got " + std::to_string(values.size()));
        }
        raw[label].push_back(std::move(values));
    }
    if (raw.empty()) throw IoError("dataset '" + path.string() + "' is empty");
    std::vector<std::vector<std::vector<double>>> by_class;
    for (auto& [_, xs] : raw) {
        if (xs.size() < 2) throw ConfigError("every class needs >= 2 examples for a train/test split");
        by_class.push_back(std::move(xs));
    }
    Dataset ds;
    ds.num_classes = by_class.size();
    ds.feature_dim = dim;
    Rng rng = make_rng(seed, "delimited-split");
    split_per_class(std::move(by_class), train_fraction, rng, ds);
    ds.validate();
    return ds;
}

}  // namespace gcl::data
