#include "sfcast/scenarios.hpp"

#include "sfcast/basis.hpp"
#include "sfcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

namespace sfcast {

namespace {

Mask empty_mask(const ProfileMatrix& pm) { return Mask::Constant(pm.rows(), pm.cols(), false); }

// Hide and score every observed cell of column c in rows [from, T).
void hide_column(const ProfileMatrix& pm, Eigen::Index c, Eigen::Index from, Mask& train, Mask& eval) {
    for (Eigen::Index j = from; j < pm.rows(); ++j)
        if (pm.mask(j, c)) {
            train(j, c) = false;
            eval(j, c) = true;
        }
}

} // namespace

ProfileMatrix mask_uniform(const ProfileMatrix& pm, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw Error(ErrorCode::invalid_argument, "fraction must be in [0, 1)");
    std::vector<Eigen::Index> observed;
    for (Eigen::Index c = 0; c < pm.cols(); ++c)
        for (Eigen::Index j = 0; j < pm.rows(); ++j)
            if (pm.mask(j, c)) observed.push_back(c * pm.rows() + j);
    auto remove = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(observed.size())));

    std::mt19937_64 rng(seed);
    Mask mask = pm.mask;
    for (std::size_t n = 0; n < remove; ++n) {
        std::uniform_int_distribution<std::size_t> pick(n, observed.size() - 1);
        std::swap(observed[n], observed[pick(rng)]);
        mask(observed[n] % pm.rows(), observed[n] / pm.rows()) = false;
    }
    return pm.with_mask(std::move(mask));
}

Scenario split_long_range(const ProfileMatrix& pm) {
    Scenario s{pm, empty_mask(pm), {}};
    for (const auto& blk : pm.index.blocks()) {
        if (blk.years < 2) {
            s.warnings.push_back("series '" + blk.id + "' has a single year and is excluded from the long-range test");
            continue;
        }
        hide_column(pm, static_cast<Eigen::Index>(blk.first_column + blk.years - 1), 0, s.train.mask, s.eval_mask);
    }
    return s;
}

SeriesSplit split_cold_start(std::span<const std::string> series_ids, double holdout_fraction, std::uint64_t seed) {
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
        throw Error(ErrorCode::invalid_argument, "holdout fraction must be in [0, 1)");
    const std::size_t n = series_ids.size();
    auto held = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < held; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    std::vector<bool> is_test(n, false);
    for (std::size_t i = 0; i < held; ++i) is_test[order[i]] = true;
    SeriesSplit split;
    for (std::size_t i = 0; i < n; ++i) (is_test[i] ? split.test_ids : split.train_ids).push_back(series_ids[i]);
    return split;
}

SeriesSplit split_cold_start(std::span<const RawSeries> series, double holdout_fraction, std::uint64_t seed) {
    std::vector<std::string> ids;
    ids.reserve(series.size());
    for (const auto& s : series) ids.push_back(s.id);
    return split_cold_start(ids, holdout_fraction, seed);
}

Scenario cold_start_scenario(const ProfileMatrix& pm, const SeriesSplit& split) {
    return split_warm_start(pm, split, 0);
}

Scenario split_warm_start(const ProfileMatrix& pm, const SeriesSplit& split, std::size_t prefix) {
    if (prefix >= static_cast<std::size_t>(pm.rows()))
        throw Error(ErrorCode::no_evaluable_entries, "prefix covers the whole period; nothing left to evaluate");
    Scenario s{pm, empty_mask(pm), {}};
    for (const auto& id : split.test_ids) {
        const auto& blk = pm.index.block(id);
        for (std::size_t u = 0; u < blk.years; ++u)
            hide_column(pm, static_cast<Eigen::Index>(blk.first_column + u), static_cast<Eigen::Index>(prefix),
                        s.train.mask, s.eval_mask);
    }
    return s;
}

std::size_t sample_chunk_length(double mean_len, std::mt19937_64& rng) {
    if (!(mean_len > 0.0)) throw Error(ErrorCode::invalid_argument, "mean chunk length must be > 0");
    // Support {1, 2, ...} with success probability p has mean 1/p.
    double p = std::min(1.0, 1.0 / mean_len);
    std::geometric_distribution<std::size_t> geom(p);
    return 1 + geom(rng);
}

Scenario mask_contiguous(const ProfileMatrix& pm, double mean_len, std::uint64_t seed) {
    if (!(mean_len > 0.0)) throw Error(ErrorCode::invalid_argument, "mean chunk length must be > 0");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> start_dist(0, pm.rows() - 1);
    Scenario s{pm, empty_mask(pm), {}};
    for (Eigen::Index c = 0; c < pm.cols(); ++c) {
        Eigen::Index start = start_dist(rng);
        auto len = static_cast<Eigen::Index>(std::min<std::size_t>(sample_chunk_length(mean_len, rng),
                                                                   static_cast<std::size_t>(pm.rows())));
        Eigen::Index end = std::min(pm.rows(), start + len);
        for (Eigen::Index j = start; j < end; ++j)
            if (pm.mask(j, c)) {
                s.train.mask(j, c) = false;
                s.eval_mask(j, c) = true;
            }
    }
    return s;
}

SyntheticDataset generate_synthetic(const SyntheticDims& dims, double noise_std, std::uint64_t seed,
                                    const SyntheticOptions& opt) {
    if (dims.T < 4 || dims.N < 1 || dims.m < 1) throw Error(ErrorCode::invalid_argument, "synthetic dims too small");
    if (opt.years_per_series < 1) throw Error(ErrorCode::invalid_argument, "years_per_series must be >= 1");
    if (!(noise_std >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise_std must be >= 0");
    if (!(opt.density > 0.0 && opt.density <= 1.0)) throw Error(ErrorCode::invalid_argument, "density must be in (0, 1]");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> slab(0.5, 1.5);
    std::bernoulli_distribution spike(opt.density);
    auto gaussian = [&](std::size_t r, std::size_t c, double scale) {
        Matrix M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = scale * normal(rng);
        return M;
    };

    SyntheticDataset ds;
    ds.spec.variant = opt.variant;
    ds.spec.regression_rank = dims.k;
    ds.spec.knots = opt.knots;
    ds.spec.mf_enabled = opt.mf_enabled;
    ds.spec.mf_rank = dims.mf_rank;
    ds.spec.noise_variance = noise_std * noise_std;
    ds.spec.validate();

    const std::size_t n_series = (dims.N + opt.years_per_series - 1) / opt.years_per_series;
    const double phi_scale = 1.0 / std::sqrt(std::max(1.0, opt.density * static_cast<double>(dims.m)));
    const Matrix smooth_basis = bspline_basis(dims.T, std::min(dims.T, opt.knots)).B;
    auto temporal_factors = [&](std::size_t rank, double scale) -> Matrix {
        if (!opt.smooth) return gaussian(dims.T, rank, scale);
        return smooth_basis * gaussian(static_cast<std::size_t>(smooth_basis.cols()), rank, scale);
    };

    ModelParams& p = ds.truth;
    p.spec = ds.spec;
    p.dims = {dims.T, dims.N, dims.m};
    switch (opt.variant) {
    case RegressionVariant::full: p.W = gaussian(dims.T, dims.m, phi_scale); break;
    case RegressionVariant::low_rank:
        p.H = temporal_factors(dims.k, 1.0 / std::sqrt(static_cast<double>(dims.k)));
        p.U = gaussian(dims.k, dims.m, phi_scale);
        break;
    case RegressionVariant::functional:
        p.B = bspline_basis(dims.T, opt.knots).B;
        p.Q = gaussian(opt.knots + 3, dims.m, phi_scale);
        break;
    case RegressionVariant::neural: {
        const std::size_t h = ds.spec.hidden_units;
        p.W1 = gaussian(h, dims.m, phi_scale);
        p.b1 = gaussian(h, 1, 0.1).col(0);
        p.W2 = gaussian(dims.T, h, std::sqrt(2.0 / static_cast<double>(h)));
        p.b2 = gaussian(dims.T, 1, 0.1).col(0);
        p.W3 = gaussian(dims.T, dims.T, std::sqrt(2.0 / static_cast<double>(dims.T)));
        p.b3 = gaussian(dims.T, 1, 0.1).col(0);
        break;
    }
    case RegressionVariant::none: break;
    }
    if (opt.mf_enabled) {
        p.L = temporal_factors(dims.mf_rank, opt.mf_scale);
        p.R = gaussian(dims.mf_rank, dims.N, 1.0 / std::sqrt(static_cast<double>(dims.mf_rank)));
    }
    p.b = gaussian(dims.T, 1, opt.bias_scale).col(0);

    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t s = 0; s < n_series; ++s) {
        char id[32];
        std::snprintf(id, sizeof(id), "s%05zu", s);
        ds.series_meta.column_ids.emplace_back(id);
        bool any = false;
        for (std::size_t f = 0; f < dims.m; ++f)
            if (spike(rng)) {
                triplets.emplace_back(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(s), slab(rng));
                any = true;
            }
        if (!any) {
            std::uniform_int_distribution<std::size_t> pick(0, dims.m - 1);
            triplets.emplace_back(static_cast<Eigen::Index>(pick(rng)), static_cast<Eigen::Index>(s), slab(rng));
        }
    }
    ds.series_meta.features.resize(static_cast<Eigen::Index>(dims.m), static_cast<Eigen::Index>(n_series));
    ds.series_meta.features.setFromTriplets(triplets.begin(), triplets.end());
    ds.series_meta.features.makeCompressed();
    for (std::size_t f = 0; f < dims.m; ++f) ds.series_meta.vocab.push_back("f" + std::to_string(f));

    std::size_t column = 0;
    for (std::size_t s = 0; s < n_series; ++s) {
        RawSeries series;
        series.id = ds.series_meta.column_ids[s];
        SparseVector phi = ds.series_meta.column(static_cast<Eigen::Index>(s));
        const Vector mean_f = eval_regression(p, phi) + p.b;
        for (std::size_t u = 0; u < opt.years_per_series && column < dims.N; ++u, ++column) {
            Vector y = mean_f;
            if (opt.mf_enabled) y.noalias() += p.L * p.R.col(static_cast<Eigen::Index>(column));
            for (Eigen::Index j = 0; j < y.size(); ++j) series.values.push_back(y[j] + noise_std * normal(rng));
        }
        ds.series.push_back(std::move(series));
    }
    ds.profiles = reorganize(ds.series, dims.T);
    ds.meta = replicate_for_years(ds.series_meta, ds.profiles.index);
    return ds;
}

} // namespace sfcast
