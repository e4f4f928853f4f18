#include "sfcast/metrics.hpp"

#include "sfcast/error.hpp"

#include "json.hpp"

#include <cmath>

namespace sfcast {

std::string_view to_string(MetricKind kind) { return kind == MetricKind::mse ? "APST_MSE" : "APST_MAE"; }

MetricKind parse_metric_kind(std::string_view name) {
    if (name == "mse" || name == "MSE" || name == "APST_MSE") return MetricKind::mse;
    if (name == "mae" || name == "MAE" || name == "APST_MAE") return MetricKind::mae;
    throw Error(ErrorCode::invalid_argument, "unknown metric '" + std::string(name) + "'");
}

MetricResult apst_detailed(const Matrix& truth, const Matrix& prediction, const MetricConfig& cfg) {
    if (truth.rows() != prediction.rows() || truth.cols() != prediction.cols())
        throw Error(ErrorCode::shape_error, "truth and prediction shapes differ");
    const bool masked = cfg.eval_mask.size() > 0;
    if (masked && (cfg.eval_mask.rows() != truth.rows() || cfg.eval_mask.cols() != truth.cols()))
        throw Error(ErrorCode::shape_error, "eval mask shape differs from truth");
    if (!(cfg.rho > 0.0)) throw Error(ErrorCode::invalid_argument, "rho must be positive");

    double total = 0.0;
    std::size_t scored = 0;
    for (Eigen::Index i = 0; i < truth.cols(); ++i) {
        double err = 0.0;
        std::size_t count = 0;
        for (Eigen::Index j = 0; j < truth.rows(); ++j) {
            if (masked && !cfg.eval_mask(j, i)) continue;
            double y = truth(j, i);
            if (!(std::abs(y) <= cfg.rho)) continue;
            double d = y - prediction(j, i);
            err += cfg.kind == MetricKind::mse ? d * d : std::abs(d);
            ++count;
        }
        if (count == 0) continue;
        total += err / static_cast<double>(count);
        ++scored;
    }
    if (scored == 0) throw Error(ErrorCode::no_evaluable_entries, "no column has an evaluable entry");
    return {total / static_cast<double>(scored), scored};
}

double apst(const Matrix& truth, const Matrix& prediction, const MetricConfig& cfg) {
    return apst_detailed(truth, prediction, cfg).value;
}

std::string metric_report_json(const MetricConfig& cfg, const MetricResult& result) {
    nlohmann::ordered_json j;
    j["metric"] = to_string(cfg.kind);
    if (std::isinf(cfg.rho))
        j["rho"] = "inf";
    else
        j["rho"] = cfg.rho;
    j["n_series_scored"] = result.series_scored;
    j["value"] = result.value;
    return j.dump(2) + "\n";
}

} // namespace sfcast
