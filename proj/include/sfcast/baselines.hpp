#pragma once

#include "sfcast/metadata.hpp"
#include "sfcast/model.hpp"
#include "sfcast/profile_matrix.hpp"

#include <string_view>
#include <vector>

namespace sfcast {

struct ProfileEstimate {
    Vector values;
    std::vector<bool> missing; // true where no source value existed (value is 0)
};

// Per-row mean of the series' observed training cells.
ProfileEstimate avg_py(const ProfileMatrix& pm, std::string_view series_id);

enum class KnnWeighting { inverse_distance, uniform };

// Weighted average of the avg_py profiles of the k nearest training series
// (Euclidean distance between per-series metadata vectors). Weights are
// 1/(d + 1e-9), or all 1 in uniform mode. Rows a neighbor never observed
// are averaged over the remaining neighbors. `exclude_id` drops one series
// (typically the query itself) from the candidate pool.
ProfileEstimate knn_forecast(const SparseVector& query, const MetadataMatrix& train_meta,
                             const ProfileMatrix& train_profiles, std::size_t k = 10,
                             KnnWeighting weighting = KnnWeighting::inverse_distance,
                             std::string_view exclude_id = {});

// Regression off, MF on.
ModelSpec mf_alone_spec(std::size_t mf_rank = 5);

} // namespace sfcast
