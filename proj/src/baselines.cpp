#include "sfcast/baselines.hpp"

#include "sfcast/error.hpp"

#include <algorithm>
#include <numeric>

namespace sfcast {

ProfileEstimate avg_py(const ProfileMatrix& pm, std::string_view series_id) {
    const auto& blk = pm.index.block(series_id);
    const Eigen::Index T = pm.rows();
    ProfileEstimate out{Vector::Zero(T), std::vector<bool>(static_cast<std::size_t>(T), true)};
    std::vector<std::size_t> counts(static_cast<std::size_t>(T), 0);
    for (std::size_t u = 0; u < blk.years; ++u) {
        auto c = static_cast<Eigen::Index>(blk.first_column + u);
        for (Eigen::Index j = 0; j < T; ++j)
            if (pm.mask(j, c)) {
                out.values[j] += pm.data(j, c);
                ++counts[static_cast<std::size_t>(j)];
            }
    }
    std::size_t total = 0;
    for (Eigen::Index j = 0; j < T; ++j) {
        auto n = counts[static_cast<std::size_t>(j)];
        total += n;
        if (n > 0) {
            out.values[j] /= static_cast<double>(n);
            out.missing[static_cast<std::size_t>(j)] = false;
        }
    }
    if (total == 0) throw Error(ErrorCode::no_observations, "series '" + std::string(series_id) + "' has no training data");
    return out;
}

ProfileEstimate knn_forecast(const SparseVector& query, const MetadataMatrix& train_meta,
                             const ProfileMatrix& train_profiles, std::size_t k, KnnWeighting weighting,
                             std::string_view exclude_id) {
    if (query.size() != train_meta.dim()) throw Error(ErrorCode::shape_error, "query dimension differs from metadata");
    if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be >= 1");

    struct Candidate {
        double distance;
        std::size_t order;
        ProfileEstimate profile;
    };
    std::vector<Candidate> candidates;
    for (Eigen::Index c = 0; c < train_meta.cols(); ++c) {
        const auto& id = train_meta.column_ids[static_cast<std::size_t>(c)];
        if (!exclude_id.empty() && id == exclude_id) continue;
        const auto* blk = train_profiles.index.find(id);
        if (!blk) continue;
        bool observed = false;
        for (std::size_t u = 0; u < blk->years && !observed; ++u)
            observed = train_profiles.mask.col(static_cast<Eigen::Index>(blk->first_column + u)).any();
        if (!observed) continue;
        SparseVector diff = query - train_meta.column(c);
        candidates.push_back({diff.norm(), static_cast<std::size_t>(c), avg_py(train_profiles, id)});
    }
    if (k > candidates.size())
        throw Error(ErrorCode::invalid_argument, "k = " + std::to_string(k) + " exceeds the " +
                                                     std::to_string(candidates.size()) + " usable training series");
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; });

    const Eigen::Index T = train_profiles.rows();
    std::vector<double> weights(k);
    for (std::size_t n = 0; n < k; ++n)
        weights[n] = weighting == KnnWeighting::uniform ? 1.0 : 1.0 / (candidates[n].distance + 1e-9);

    ProfileEstimate out{Vector::Zero(T), std::vector<bool>(static_cast<std::size_t>(T), true)};
    for (Eigen::Index j = 0; j < T; ++j) {
        auto row = static_cast<std::size_t>(j);
        double total = 0.0;
        for (std::size_t n = 0; n < k; ++n)
            if (!candidates[n].profile.missing[row]) total += weights[n];
        if (total == 0.0) continue;
        // Normalize before accumulating so a lone neighbor is reproduced bit-exactly.
        for (std::size_t n = 0; n < k; ++n)
            if (!candidates[n].profile.missing[row]) out.values[j] += (weights[n] / total) * candidates[n].profile.values[j];
        out.missing[row] = false;
    }
    return out;
}

ModelSpec mf_alone_spec(std::size_t mf_rank) {
    ModelSpec spec;
    spec.variant = RegressionVariant::none;
    spec.mf_enabled = true;
    spec.mf_rank = mf_rank;
    return spec;
}

} // namespace sfcast
