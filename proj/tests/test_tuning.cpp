#include "doctest.h"
#include "fixtures.hpp"

#include "sfcast/scenarios.hpp"
#include "sfcast/tuning.hpp"

#include <set>
#include <sstream>

using namespace sfcast;
using fixtures::code_of;

namespace {

TrainConfig quick_cfg() {
    TrainConfig cfg;
    cfg.mode = TrainMode::full_batch;
    cfg.iterations = 150;
    cfg.step_size = 0.1;
    return cfg;
}

} // namespace

TEST_CASE("log grid") {
    auto g = log_grid(1, 100, 3);
    REQUIRE(g.size() == 3);
    CHECK(g[0] == 1.0);
    CHECK(g[1] == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(g[2] == 100.0);
    auto flu = log_grid(0.1, 1000, 10);
    CHECK(flu.front() == 0.1);
    CHECK(flu.back() == 1000.0);
    for (std::size_t i = 1; i < flu.size(); ++i) CHECK(flu[i] / flu[i - 1] == doctest::Approx(std::pow(1e4, 1.0 / 9)));
    CHECK(code_of([] { log_grid(0.0, 1.0, 3); }) == ErrorCode::invalid_range);
    CHECK(code_of([] { log_grid(2.0, 1.0, 3); }) == ErrorCode::invalid_range);
    CHECK(code_of([] { log_grid(1.0, 2.0, 1); }) == ErrorCode::invalid_range);
}

TEST_CASE("k-fold assignment") {
    auto folds = kfold_columns(10, 5, 3);
    std::vector<int> sizes(5, 0);
    for (auto f : folds) ++sizes[f];
    CHECK(sizes == std::vector<int>{2, 2, 2, 2, 2});
    CHECK(kfold_columns(10, 5, 3) == folds);
    CHECK(kfold_columns(10, 5, 4) != folds);
    CHECK(folds.size() == 10);
    auto uneven = kfold_columns(11, 3, 0);
    std::vector<int> us(3, 0);
    for (auto f : uneven) ++us[f];
    CHECK(*std::max_element(us.begin(), us.end()) - *std::min_element(us.begin(), us.end()) <= 1);
    CHECK(code_of([] { kfold_columns(3, 4, 0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("grid validation") {
    Grid g{{1.0, -1.0}, {}, {}};
    CHECK(code_of([&] { g.validate(); }) == ErrorCode::invalid_range);
    g = {{1.0}, {0.0}, {}};
    CHECK(code_of([&] { g.validate(); }) == ErrorCode::invalid_range);
    g = {{1.0}, {1.0}, {0}};
    CHECK(code_of([&] { g.validate(); }) == ErrorCode::invalid_range);
}

TEST_CASE("stage two is skipped without MF") {
    auto ds = generate_synthetic({12, 30, 10, 2, 2}, 0.1, 1, {});
    ModelSpec spec;
    spec.regression_rank = 2;
    spec.mf_enabled = false;
    auto res = two_stage_cv(spec, ds.profiles, ds.meta, {{0.1, 1.0}, {5.0}, {}}, quick_cfg(), {3, 0, false});
    CHECK_FALSE(res.lambda2.has_value());
    CHECK(res.candidates.size() == 2);
    for (const auto& c : res.candidates) {
        CHECK(c.stage == 1);
        CHECK(c.fold_metrics.size() == 3);
    }
}

TEST_CASE("single candidates are chosen") {
    SyntheticOptions opt;
    opt.mf_enabled = true;
    auto ds = generate_synthetic({12, 30, 10, 2, 2}, 0.1, 2, opt);
    ModelSpec spec;
    spec.regression_rank = 2;
    spec.mf_rank = 2;
    auto res = two_stage_cv(spec, ds.profiles, ds.meta, {{0.7}, {0.3}, {}}, quick_cfg(), {3, 0, true});
    CHECK(res.lambda1 == 0.7);
    REQUIRE(res.lambda2.has_value());
    CHECK(*res.lambda2 == 0.3);
    REQUIRE(res.candidates.size() == 2);
    CHECK(res.candidates[1].stage == 2);
    CHECK(res.candidates[0].fold_metrics.size() == 1);
}

TEST_CASE("the chosen lambda1 has the lowest validation error") {
    // m > N*T invites overfitting, so lambda1 matters.
    SyntheticOptions opt;
    opt.variant = RegressionVariant::full;
    auto ds = generate_synthetic({8, 24, 250, 2, 2}, 0.3, 3, opt);
    ModelSpec spec;
    spec.variant = RegressionVariant::full;
    spec.mf_enabled = false;
    Grid grid{log_grid(0.01, 100, 5), {}, {}};
    auto res = two_stage_cv(spec, ds.profiles, ds.meta, grid, quick_cfg(), {4, 1, false});
    REQUIRE(res.candidates.size() == 5);
    const CvCandidate* chosen = nullptr;
    for (const auto& c : res.candidates)
        if (c.lambda1 == res.lambda1) chosen = &c;
    REQUIRE(chosen != nullptr);
    for (const auto& c : res.candidates) {
        CHECK_FALSE(c.failed);
        CHECK(chosen->mean <= c.mean);
    }
    double spread = 0;
    for (const auto& c : res.candidates) spread = std::max(spread, std::fabs(c.mean - chosen->mean));
    CHECK(spread > 0.0);
}

TEST_CASE("functional tuning searches knots and the report lists every fold") {
    SyntheticOptions opt;
    opt.variant = RegressionVariant::functional;
    opt.smooth = true;
    auto ds = generate_synthetic({20, 24, 10, 2, 2}, 0.05, 4, opt);
    ModelSpec spec;
    spec.variant = RegressionVariant::functional;
    spec.mf_enabled = false;
    auto res = two_stage_cv(spec, ds.profiles, ds.meta, {{1.0, 0.1}, {}, {6, 4}}, quick_cfg(), {2, 0, false});
    REQUIRE(res.candidates.size() == 4);
    CHECK(res.candidates[0].lambda1 == 0.1);
    CHECK(*res.candidates[0].knots == 4);
    CHECK(*res.candidates[1].knots == 6);
    CHECK(res.knots.has_value());

    std::ostringstream out;
    write_cv_report(res, out);
    std::string text = out.str();
    CHECK(text.rfind("stage,candidate,lambda1,lambda2,knots,fold,metric,mean\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 4 * 2);
}

TEST_CASE("all candidates failing is reported") {
    auto ds = generate_synthetic({12, 20, 10, 2, 2}, 0.1, 5, {});
    ModelSpec spec;
    spec.mf_enabled = false;
    TrainConfig cfg = quick_cfg();
    cfg.step_size = 1e5;
    CHECK(code_of([&] { two_stage_cv(spec, ds.profiles, ds.meta, {{1.0}, {}, {}}, cfg, {2, 0, false}); }) ==
          ErrorCode::divergence);
}
