#include "sfcast/predictor.hpp"

#include "sfcast/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>

namespace sfcast {

bool cold_start_applicable(const ModelSpec& spec) { return spec.has_regression(); }

Vector forecast_cold(const ModelParams& params, const SparseVector& phi) {
    return eval_regression(params, phi) + params.b;
}

Vector estimate_latent(const ModelParams& params, const WarmObservations& warm, double lambda2) {
    if (!params.spec.mf_enabled) throw Error(ErrorCode::invalid_argument, "latent estimation needs an MF model");
    if (warm.observed.empty()) throw Error(ErrorCode::no_observations, "latent estimation needs observations");
    if (!(lambda2 >= 0.0)) throw Error(ErrorCode::invalid_argument, "lambda2 must be >= 0");

    const Vector base = forecast_cold(params, warm.phi);
    const auto k = params.L.cols();
    Matrix gram = Matrix::Zero(k, k);
    Vector rhs = Vector::Zero(k);
    std::vector<bool> seen(params.dims.T, false);
    for (const auto& [j, v] : warm.observed) {
        if (j >= params.dims.T) throw Error(ErrorCode::shape_error, "observation row out of range");
        if (seen[j]) throw Error(ErrorCode::invalid_argument, "duplicate observation row");
        if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "non-finite observation");
        seen[j] = true;
        auto row = params.L.row(static_cast<Eigen::Index>(j)).transpose();
        gram.noalias() += row * row.transpose();
        rhs += (v - base[static_cast<Eigen::Index>(j)]) * row;
    }
    gram.diagonal().array() += lambda2;

    if (lambda2 > 0.0) return gram.llt().solve(rhs);
    Eigen::FullPivLU<Matrix> lu(gram);
    if (lu.rank() < k)
        throw Error(ErrorCode::underdetermined, "singular latent system; pass lambda2 > 0");
    return lu.solve(rhs);
}

WarmForecast forecast_warm(const ModelParams& params, const WarmObservations& warm, double lambda2) {
    WarmForecast out;
    if (!params.spec.mf_enabled || warm.observed.empty()) {
        out.values = forecast_cold(params, warm.phi);
        out.fell_back_to_cold = params.spec.mf_enabled;
        return out;
    }
    out.latent = estimate_latent(params, warm, lambda2);
    out.values = forecast_cold(params, warm.phi) + params.L * out.latent;
    return out;
}

Matrix impute(const ModelParams& params, const ProfileMatrix& pm, const MetadataMatrix& meta) {
    if (meta.cols() != pm.cols()) throw Error(ErrorCode::shape_error, "metadata columns differ from profile columns");
    if (params.spec.mf_enabled && params.R.cols() != pm.cols())
        throw Error(ErrorCode::shape_error, "model latent factors do not match the profile columns");
    if (pm.rows() != static_cast<Eigen::Index>(params.dims.T))
        throw Error(ErrorCode::shape_error, "profile period differs from model T");
    Matrix out(pm.rows(), pm.cols());
    for (Eigen::Index i = 0; i < pm.cols(); ++i) {
        if (params.spec.mf_enabled) {
            Vector r = params.R.col(i);
            out.col(i) = eval_column(params, meta.column(i), &r);
        } else {
            out.col(i) = eval_column(params, meta.column(i), nullptr);
        }
    }
    return out;
}

Matrix forecast_cold_all(const ModelParams& params, const MetadataMatrix& meta) {
    Matrix out(static_cast<Eigen::Index>(params.dims.T), meta.cols());
    for (Eigen::Index i = 0; i < meta.cols(); ++i) out.col(i) = forecast_cold(params, meta.column(i));
    return out;
}

WarmBatch forecast_warm_all(const ModelParams& params, const ProfileMatrix& observed, const MetadataMatrix& meta,
                            double lambda2) {
    if (meta.cols() != observed.cols()) throw Error(ErrorCode::shape_error, "metadata columns differ from profile columns");
    WarmBatch out;
    out.values.resize(observed.rows(), observed.cols());
    for (Eigen::Index i = 0; i < observed.cols(); ++i) {
        WarmObservations warm{meta.column(i), {}};
        for (Eigen::Index j = 0; j < observed.rows(); ++j)
            if (observed.mask(j, i)) warm.observed.emplace_back(static_cast<std::size_t>(j), observed.data(j, i));
        auto f = forecast_warm(params, warm, lambda2);
        out.values.col(i) = f.values;
        out.cold_fallbacks += f.fell_back_to_cold;
    }
    return out;
}

} // namespace sfcast
