#pragma once

#include "sfcast/profile_matrix.hpp"

#include <limits>
#include <string>
#include <string_view>

namespace sfcast {

enum class MetricKind { mse, mae };

std::string_view to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view name);

struct MetricConfig {
    double rho = std::numeric_limits<double>::infinity();
    MetricKind kind = MetricKind::mse;
    Mask eval_mask; // cells to score; empty means every cell
};

struct MetricResult {
    double value = 0.0;
    std::size_t series_scored = 0;
};

// Average per-series thresholded error. Within each column only cells in the
// eval mask with |truth| <= rho count; columns with no counted cell are
// skipped and the outer mean runs over the scored columns.
MetricResult apst_detailed(const Matrix& truth, const Matrix& prediction, const MetricConfig& cfg);
double apst(const Matrix& truth, const Matrix& prediction, const MetricConfig& cfg);

// {"metric": ..., "rho": ..., "n_series_scored": ..., "value": ...}
std::string metric_report_json(const MetricConfig& cfg, const MetricResult& result);

} // namespace sfcast
