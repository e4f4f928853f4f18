#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "sfcast/metrics.hpp"

using namespace sfcast;
using fixtures::code_of;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("perfect prediction scores zero") {
    Matrix Y = Matrix::Random(6, 3);
    CHECK(apst(Y, Y, {kInf, MetricKind::mse, {}}) == 0.0);
    CHECK(apst(Y, Y, {0.5, MetricKind::mae, {}}) == 0.0);
}

TEST_CASE("threshold by hand") {
    Matrix Y{{1.0}, {3.0}};
    Matrix Yh = Matrix::Zero(2, 1);
    CHECK(apst(Y, Yh, {2.0, MetricKind::mse, {}}) == 1.0);
    CHECK(apst(Y, Yh, {kInf, MetricKind::mse, {}}) == 5.0);
    CHECK(apst(Y, Yh, {kInf, MetricKind::mae, {}}) == 2.0);
}

TEST_CASE("matches the brute-force oracle") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.5);
    std::bernoulli_distribution keep(0.7);
    for (int inst = 0; inst < 200; ++inst) {
        Matrix Y(5, 4), Yh(5, 4);
        Mask mask(5, 4);
        for (Eigen::Index i = 0; i < Y.size(); ++i) {
            Y(i) = normal(rng);
            Yh(i) = normal(rng);
            mask(i) = keep(rng);
        }
        const bool masked = inst % 2 == 1;
        for (double rho : {0.5, 2.0, kInf})
            for (auto kind : {MetricKind::mse, MetricKind::mae}) {
                double want = oracle::apst(Y, Yh, rho, kind == MetricKind::mae, masked ? &mask : nullptr);
                MetricConfig cfg{rho, kind, masked ? mask : Mask()};
                if (std::isnan(want)) {
                    CHECK(code_of([&] { apst(Y, Yh, cfg); }) == ErrorCode::no_evaluable_entries);
                } else {
                    CHECK(std::fabs(apst(Y, Yh, cfg) - want) <= 1e-12);
                }
            }
    }
}

TEST_CASE("infinite threshold reduces to the plain mean on full columns") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    Matrix Y(5, 4), Yh(5, 4);
    for (Eigen::Index i = 0; i < Y.size(); ++i) {
        Y(i) = normal(rng);
        Yh(i) = normal(rng);
    }
    Eigen::ArrayXXd e = (Y - Yh).array();
    CHECK(apst(Y, Yh, {kInf, MetricKind::mse, {}}) == doctest::Approx(e.square().mean()).epsilon(1e-14));
    CHECK(apst(Y, Yh, {kInf, MetricKind::mae, {}}) == doctest::Approx(e.abs().mean()).epsilon(1e-14));
}

TEST_CASE("columns without counted entries are skipped") {
    Matrix Y{{1.0, 10.0}, {1.0, 10.0}};
    Matrix Yh = Matrix::Zero(2, 2);
    auto r = apst_detailed(Y, Yh, {2.0, MetricKind::mse, {}});
    CHECK(r.series_scored == 1);
    CHECK(r.value == 1.0);
    Mask none = Mask::Constant(2, 2, false);
    CHECK(code_of([&] { apst(Y, Yh, {kInf, MetricKind::mse, none}); }) == ErrorCode::no_evaluable_entries);
}

TEST_CASE("column order does not matter") {
    Matrix Y = Matrix::Random(7, 5), Yh = Matrix::Random(7, 5);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
    perm.indices() << 3, 0, 4, 1, 2;
    double a = apst(Y, Yh, {0.6, MetricKind::mae, {}});
    double b = apst(Y * perm, Yh * perm, {0.6, MetricKind::mae, {}});
    CHECK(a == doctest::Approx(b).epsilon(1e-14));
    CHECK(a >= 0.0);
}

TEST_CASE("input checks") {
    Matrix Y = Matrix::Zero(2, 2);
    CHECK(code_of([&] { apst(Y, Matrix::Zero(2, 3), {}); }) == ErrorCode::shape_error);
    CHECK(code_of([&] { apst(Y, Y, {0.0, MetricKind::mse, {}}); }) == ErrorCode::invalid_argument);
    CHECK(code_of([&] { apst(Y, Y, {1.0, MetricKind::mse, Mask::Constant(3, 2, true)}); }) == ErrorCode::shape_error);
    CHECK(parse_metric_kind("mae") == MetricKind::mae);
    CHECK(parse_metric_kind("APST_MSE") == MetricKind::mse);
    CHECK(code_of([] { parse_metric_kind("rmse"); }) == ErrorCode::invalid_argument);
}

TEST_CASE("json report") {
    MetricConfig cfg{kInf, MetricKind::mse, {}};
    CHECK(metric_report_json(cfg, {0.25, 3}) ==
          "{\n  \"metric\": \"APST_MSE\",\n  \"rho\": \"inf\",\n  \"n_series_scored\": 3,\n  \"value\": 0.25\n}\n");
    cfg.rho = 2.0;
    cfg.kind = MetricKind::mae;
    auto text = metric_report_json(cfg, {1.5, 1});
    CHECK(text.find("\"APST_MAE\"") != std::string::npos);
    CHECK(text.find("\"rho\": 2.0") != std::string::npos);
}
