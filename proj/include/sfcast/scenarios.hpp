#pragma once

#include "sfcast/metadata.hpp"
#include "sfcast/model.hpp"
#include "sfcast/profile_matrix.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sfcast {

// A training view of the data plus the cells to score. Scored cells are
// always hidden from training and were observed in the source matrix.
struct Scenario {
    ProfileMatrix train;
    Mask eval_mask;
    std::vector<std::string> warnings;
};

// Hides round(fraction * |observed|) observed cells, chosen uniformly.
ProfileMatrix mask_uniform(const ProfileMatrix& pm, double fraction, std::uint64_t seed);

// Hides and scores the last year-column of every series with at least two years.
Scenario split_long_range(const ProfileMatrix& pm);

struct SeriesSplit {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids; // both keep input order
};

// Holds out round(holdout_fraction * n) whole series.
SeriesSplit split_cold_start(std::span<const std::string> series_ids, double holdout_fraction, std::uint64_t seed);
SeriesSplit split_cold_start(std::span<const RawSeries> series, double holdout_fraction, std::uint64_t seed);

// Every column of a held-out series is hidden and scored.
Scenario cold_start_scenario(const ProfileMatrix& pm, const SeriesSplit& split);

// Cold-start, except the first `prefix` rows of every held-out column stay
// in training; the remaining rows are scored. prefix = 0 is cold-start.
Scenario split_warm_start(const ProfileMatrix& pm, const SeriesSplit& split, std::size_t prefix);

// One chunk per column: uniform start, geometric length with mean
// `mean_len` (>= 1 sample), clipped at the column end.
Scenario mask_contiguous(const ProfileMatrix& pm, double mean_len, std::uint64_t seed);
std::size_t sample_chunk_length(double mean_len, std::mt19937_64& rng);

struct SyntheticDims {
    std::size_t T = 30;
    std::size_t N = 100; // year-columns
    std::size_t m = 50;
    std::size_t k = 4;       // regression rank
    std::size_t mf_rank = 3; // k'
};

struct SyntheticOptions {
    RegressionVariant variant = RegressionVariant::low_rank;
    bool mf_enabled = false;
    bool smooth = false;            // H and L drawn as random B-spline curves
    std::size_t years_per_series = 1;
    double density = 0.2;           // probability a metadata entry is nonzero
    std::size_t knots = 6;          // functional / smooth basis spans
    double mf_scale = 1.0;          // multiplies the L R term
    double bias_scale = 0.5;
};

struct SyntheticDataset {
    std::vector<RawSeries> series;
    MetadataMatrix series_meta; // one column per series
    MetadataMatrix meta;        // replicated per year-column
    ProfileMatrix profiles;
    ModelSpec spec;
    ModelParams truth;
};

// Samples Y_i = f(phi_i) + L R_i + b + Normal(0, noise_std^2) with known
// parameters; noise_std = 0 makes the data an exact function of `truth`.
SyntheticDataset generate_synthetic(const SyntheticDims& dims, double noise_std, std::uint64_t seed,
                                    const SyntheticOptions& options = {});

} // namespace sfcast
