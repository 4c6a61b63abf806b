// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>

#include "core/data.hpp"

namespace gcl::data {

struct SyntheticSpec {
    std::size_t classes = 20;
    std::size_t per_class = 60;
    std::size_t dim = 64;
    double spread = 1.0;
    double margin = 4.0;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    // Centroids live in a latent_dim subspace spanned by a basis drawn from
    // basis_seed; 0 uses the full feature space. Datasets that share the
    // basis share that subspace.
    std::size_t latent_dim = 0;
    std::uint64_t basis_seed = 0;
};

/// Gaussian clusters around centroids on a sphere of radius `margin`, drawn
/// so that every centroid pair is at least `margin` apart. Noise is isotropic
/// in the full feature space. Split per class
/// into train/test by `train_fraction`.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Reads "label,f1,...,fd" lines. Labels are remapped to dense indices in
/// ascending order; the per-class split is seeded.
Dataset load_delimited(const std::filesystem::path& path, double train_fraction, std::uint64_t seed);

}  // namespace gcl::data
