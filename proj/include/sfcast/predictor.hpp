#pragma once

#include "sfcast/metadata.hpp"
#include "sfcast/model.hpp"
#include "sfcast/profile_matrix.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sfcast {

// Metadata plus a short observed prefix (or any subset) of one new profile.
struct WarmObservations {
    SparseVector phi;
    std::vector<std::pair<std::size_t, double>> observed; // (row j, value)
};

// Cold-start applies only when a regression component exists; for MF alone
// the cold forecast degenerates to the bias.
bool cold_start_applicable(const ModelSpec& spec);

// f(phi) + b.
Vector forecast_cold(const ModelParams& params, const SparseVector& phi);

// Ridge solve of the latent factor with f, L and b frozen:
//   argmin_r sum_obs (v - f(phi)_j - L_j r - b_j)^2 + lambda2 |r|^2.
Vector estimate_latent(const ModelParams& params, const WarmObservations& warm, double lambda2);

struct WarmForecast {
    Vector values;
    Vector latent;     // empty when the cold fallback was used
    bool fell_back_to_cold = false;
};

// f(phi) + L r + b with r from estimate_latent. With no observations, or for a
// model without MF, this is the cold forecast.
WarmForecast forecast_warm(const ModelParams& params, const WarmObservations& warm, double lambda2);

// Model mean for every column of the training layout, using the learned R.
Matrix impute(const ModelParams& params, const ProfileMatrix& pm, const MetadataMatrix& meta);

// Cold forecast for every column.
Matrix forecast_cold_all(const ModelParams& params, const MetadataMatrix& meta);

// Per-column warm forecasts from the observed cells of `observed`.
struct WarmBatch {
    Matrix values;
    std::size_t cold_fallbacks = 0;
};
WarmBatch forecast_warm_all(const ModelParams& params, const ProfileMatrix& observed, const MetadataMatrix& meta,
                            double lambda2);

} // namespace sfcast
