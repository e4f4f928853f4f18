#pragma once
// Random instances shared by the unit and acceptance tests.

#include "sfcast/metadata.hpp"
#include "sfcast/model.hpp"
#include "sfcast/profile_matrix.hpp"
#include "sfcast/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using namespace sfcast;

// N single-year series laid side by side; each cell is missing with probability `missing`.
inline ProfileMatrix random_profile(std::size_t T, std::size_t N, double missing, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution drop(missing);
    ProfileMatrix pm;
    pm.period = T;
    pm.data = Matrix::Zero(T, N);
    pm.mask = Mask::Constant(T, N, true);
    std::vector<SeriesBlock> blocks;
    for (std::size_t c = 0; c < N; ++c) {
        blocks.push_back({"c" + std::to_string(c), c, 1, 0, T});
        for (std::size_t j = 0; j < T; ++j) {
            if (drop(rng)) {
                pm.mask(j, c) = false;
            } else {
                pm.data(j, c) = normal(rng);
            }
        }
    }
    if (pm.mask.count() == 0) pm.mask(0, 0) = true;
    pm.index = SeriesYearIndex(std::move(blocks));
    return pm;
}

// Nonnegative sparse features, at least one nonzero per column.
inline MetadataMatrix random_meta(std::size_t m, std::size_t N, double density, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> value(0.1, 2.0);
    std::bernoulli_distribution keep(density);
    std::uniform_int_distribution<std::size_t> any_row(0, m - 1);
    std::vector<Eigen::Triplet<double>> trip;
    MetadataMatrix meta;
    for (std::size_t c = 0; c < N; ++c) {
        bool any = false;
        for (std::size_t r = 0; r < m; ++r)
            if (keep(rng)) {
                trip.emplace_back(static_cast<int>(r), static_cast<int>(c), value(rng));
                any = true;
            }
        if (!any) trip.emplace_back(static_cast<int>(any_row(rng)), static_cast<int>(c), value(rng));
        meta.column_ids.push_back("c" + std::to_string(c));
    }
    meta.features.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(N));
    meta.features.setFromTriplets(trip.begin(), trip.end());
    for (std::size_t r = 0; r < m; ++r) meta.vocab.push_back("w" + std::to_string(r));
    return meta;
}

// init_params shapes with every learned entry redrawn at unit-ish scale.
inline ModelParams random_params(const ModelSpec& spec, const ModelDims& dims, std::mt19937_64& rng, double scale = 0.5) {
    ModelParams p = init_params(spec, dims, rng());
    std::normal_distribution<double> normal(0.0, scale);
    for (auto& [name, block] : p.learned_blocks())
        for (Eigen::Index i = 0; i < block.size(); ++i) block[i] = normal(rng);
    return p;
}

inline std::vector<std::size_t> all_columns(std::size_t N) {
    std::vector<std::size_t> cols(N);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    return cols;
}

// Norm-wise relative difference between the analytic gradient and central differences.
inline double gradient_fd_error(ModelParams p, const ProfileMatrix& pm, const MetadataMatrix& meta,
                                const TrainConfig& cfg, double h = 1e-5) {
    auto cols = all_columns(static_cast<std::size_t>(pm.cols()));
    ModelParams g = gradient(p, pm, meta, cfg, cols);
    auto gb = g.learned_blocks();
    auto pb = p.learned_blocks();
    double diff = 0, na = 0, nf = 0;
    for (std::size_t b = 0; b < pb.size(); ++b) {
        auto& x = pb[b].second;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double saved = x[i];
            x[i] = saved + h;
            double up = loss(p, pm, meta, cfg);
            x[i] = saved - h;
            double down = loss(p, pm, meta, cfg);
            x[i] = saved;
            double fd = (up - down) / (2 * h);
            double an = gb[b].second[i];
            diff += (fd - an) * (fd - an);
            na += an * an;
            nf += fd * fd;
        }
    }
    double denom = std::max({std::sqrt(na), std::sqrt(nf), 1e-300});
    return std::sqrt(diff) / denom;
}

inline std::vector<ModelSpec> all_specs(std::size_t k, std::size_t K, std::size_t hidden) {
    std::vector<ModelSpec> specs;
    for (auto v : {RegressionVariant::full, RegressionVariant::low_rank, RegressionVariant::functional,
                   RegressionVariant::neural, RegressionVariant::none})
        for (bool mf : {true, false}) {
            if (v == RegressionVariant::none && !mf) continue;
            ModelSpec s;
            s.variant = v;
            s.regression_rank = k;
            s.mf_rank = k;
            s.knots = K;
            s.hidden_units = hidden;
            s.mf_enabled = mf;
            specs.push_back(s);
        }
    return specs;
}

// Error code thrown by `f`, or nullopt when it returns normally.
template <class F>
std::optional<sfcast::ErrorCode> code_of(F&& f) {
    try {
        f();
    } catch (const sfcast::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

} // namespace fixtures
