#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "sfcast/trainer.hpp"

#include <set>
#include <sstream>

using namespace sfcast;
using fixtures::code_of;

namespace {

ModelSpec small_spec(RegressionVariant v, bool mf) {
    ModelSpec s;
    s.variant = v;
    s.mf_enabled = mf;
    s.regression_rank = 2;
    s.mf_rank = 2;
    s.knots = 3;
    s.hidden_units = 6;
    return s;
}

// The model's own predictions as fully observed data: every residual is zero.
ProfileMatrix exact_data(const ModelParams& p, const MetadataMatrix& meta, std::mt19937_64& rng) {
    auto pm = fixtures::random_profile(p.dims.T, p.dims.N, 0.2, rng);
    for (Eigen::Index c = 0; c < pm.cols(); ++c) {
        Vector r = p.spec.mf_enabled ? Vector(p.R.col(c)) : Vector();
        pm.data.col(c) = eval_column(p, meta.column(c), p.spec.mf_enabled ? &r : nullptr);
    }
    return pm;
}

double max_abs(const ModelParams& g) {
    double m = 0;
    for (const auto& [name, block] : g.learned_blocks()) m = std::max(m, block.cwiseAbs().maxCoeff());
    return m;
}

} // namespace

TEST_CASE("zero model on zero data has zero loss") {
    std::mt19937_64 rng(1);
    auto pm = fixtures::random_profile(6, 5, 0.3, rng);
    pm.data.setZero();
    auto meta = fixtures::random_meta(4, 5, 0.5, rng);
    auto p = init_params(small_spec(RegressionVariant::full, true), {6, 5, 4}, 0).zeros_like();
    CHECK(loss(p, pm, meta, TrainConfig{}) == 0.0);
}

TEST_CASE("single entry loss by hand") {
    ProfileMatrix pm;
    pm.period = 1;
    pm.data = Matrix::Constant(1, 1, 2.0);
    pm.mask = Mask::Constant(1, 1, true);
    pm.index = SeriesYearIndex({{"s", 0, 1, 0, 1}});
    MetadataMatrix meta;
    meta.features.resize(1, 1);
    meta.features.insert(0, 0) = 1.0;
    meta.column_ids = {"s"};
    ModelSpec spec = small_spec(RegressionVariant::full, true);
    spec.mf_rank = 1;
    auto p = init_params(spec, {1, 1, 1}, 0);
    p.W(0, 0) = 1.0;
    p.L(0, 0) = 1.0;
    p.R(0, 0) = 0.5;
    p.b.setZero();
    TrainConfig cfg;
    cfg.lambda1 = cfg.lambda2 = 0.0;
    CHECK(loss(p, pm, meta, cfg) == doctest::Approx(0.125));
}

TEST_CASE("loss matches the dense oracle on random 6x5 instances") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 3; ++rep)
        for (const auto& spec : fixtures::all_specs(2, 3, 5)) {
            auto pm = fixtures::random_profile(6, 5, 0.3, rng);
            auto meta = fixtures::random_meta(4, 5, 0.4, rng);
            auto p = fixtures::random_params(spec, {6, 5, 4}, rng);
            TrainConfig cfg;
            cfg.lambda1 = 0.4;
            cfg.lambda2 = 1.3;
            double want = oracle::loss(p, pm, meta, cfg.lambda1, cfg.lambda2);
            CHECK(std::fabs(loss(p, pm, meta, cfg) - want) <= 1e-12 * std::max(1.0, want));
        }
}

TEST_CASE("loss input checks") {
    std::mt19937_64 rng(3);
    auto pm = fixtures::random_profile(6, 5, 0.0, rng);
    auto meta = fixtures::random_meta(4, 5, 0.5, rng);
    auto p = init_params(small_spec(RegressionVariant::low_rank, true), {6, 5, 4}, 0);
    auto empty = pm.with_mask(Mask::Constant(6, 5, false));
    CHECK(code_of([&] { loss(p, empty, meta, TrainConfig{}); }) == ErrorCode::no_observations);
    auto wrong_meta = fixtures::random_meta(3, 5, 0.5, rng);
    CHECK(code_of([&] { loss(p, pm, wrong_meta, TrainConfig{}); }) == ErrorCode::shape_error);
}

TEST_CASE("zero residuals without regularization give a zero gradient") {
    std::mt19937_64 rng(4);
    for (const auto& spec : fixtures::all_specs(2, 3, 5)) {
        auto meta = fixtures::random_meta(4, 6, 0.5, rng);
        auto p = fixtures::random_params(spec, {7, 6, 4}, rng);
        auto pm = exact_data(p, meta, rng);
        TrainConfig cfg;
        cfg.lambda1 = cfg.lambda2 = 0.0;
        CHECK(max_abs(gradient(p, pm, meta, cfg, fixtures::all_columns(6))) < 1e-12);
    }
}

TEST_CASE("analytic gradient matches central differences for every variant") {
    std::mt19937_64 rng(5);
    for (const auto& spec : fixtures::all_specs(2, 4, 12)) {
        CAPTURE(to_string(spec.variant));
        CAPTURE(spec.mf_enabled);
        auto pm = fixtures::random_profile(10, 8, 0.25, rng);
        auto meta = fixtures::random_meta(6, 8, 0.5, rng);
        auto p = fixtures::random_params(spec, {10, 8, 6}, rng);
        TrainConfig cfg;
        cfg.lambda1 = 0.5;
        cfg.lambda2 = 0.25;
        CHECK(fixtures::gradient_fd_error(p, pm, meta, cfg) < 1e-5);
    }
}

TEST_CASE("batch gradients add up column by column") {
    std::mt19937_64 rng(6);
    auto spec = small_spec(RegressionVariant::low_rank, true);
    auto pm = fixtures::random_profile(5, 4, 0.2, rng);
    auto meta = fixtures::random_meta(3, 4, 0.6, rng);
    auto p = fixtures::random_params(spec, {5, 4, 3}, rng);
    TrainConfig cfg;
    std::vector<std::size_t> c0{0}, c1{1}, c00{0, 0}, c01{0, 1};
    auto g0 = gradient(p, pm, meta, cfg, c0);
    auto g1 = gradient(p, pm, meta, cfg, c1);
    auto g00 = gradient(p, pm, meta, cfg, c00);
    auto g01 = gradient(p, pm, meta, cfg, c01);
    auto b0 = g0.learned_blocks(), b1 = g1.learned_blocks(), b00 = g00.learned_blocks(), b01 = g01.learned_blocks();
    for (std::size_t k = 0; k < b0.size(); ++k) {
        // Both sides isolate column 0's residual contribution.
        CHECK(((b00[k].second - b0[k].second) - (b01[k].second - b1[k].second)).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(code_of([&] { gradient(p, pm, meta, cfg, {}); }) == ErrorCode::invalid_argument);
    std::vector<std::size_t> bad{9};
    CHECK(code_of([&] { gradient(p, pm, meta, cfg, bad); }) == ErrorCode::shape_error);
}

TEST_CASE("full batch fits a noiseless rank-1 matrix") {
    ProfileMatrix pm;
    pm.period = 6;
    Vector u{{1.0, -0.5, 2.0, 0.3, -1.2, 0.8}};
    Vector v{{0.7, -1.1, 0.4, 1.5, -0.6}};
    pm.data = u * v.transpose();
    pm.mask = Mask::Constant(6, 5, true);
    std::vector<SeriesBlock> blocks;
    for (std::size_t c = 0; c < 5; ++c) blocks.push_back({"c" + std::to_string(c), c, 1, 0, 6});
    pm.index = SeriesYearIndex(blocks);
    std::mt19937_64 rng(7);
    auto meta = fixtures::random_meta(2, 5, 0.5, rng);
    ModelSpec spec;
    spec.variant = RegressionVariant::none;
    spec.mf_rank = 1;
    TrainConfig cfg;
    cfg.mode = TrainMode::full_batch;
    cfg.lambda2 = 0.0;
    cfg.step_size = 0.5;
    cfg.iterations = 5000;
    auto result = fit(spec, pm, meta, cfg);
    CHECK(result.report.final_loss < 1e-6);
}

TEST_CASE("restarts report every loss and keep the best") {
    std::mt19937_64 rng(8);
    auto pm = fixtures::random_profile(6, 10, 0.2, rng);
    auto meta = fixtures::random_meta(5, 10, 0.4, rng);
    TrainConfig cfg;
    cfg.restarts = 3;
    cfg.iterations = 50;
    cfg.minibatch = 4;
    cfg.seed = 11;
    auto result = fit(small_spec(RegressionVariant::low_rank, true), pm, meta, cfg);
    REQUIRE(result.report.restart_losses.size() == 3);
    double best = *std::min_element(result.report.restart_losses.begin(), result.report.restart_losses.end());
    CHECK(result.report.final_loss == best);
    CHECK(result.report.restart_losses[result.report.best_restart] == best);
    CHECK(loss(result.params, pm, meta, cfg) == best);
    CHECK(result.report.loss_trace.front().first == 0);
    CHECK(result.report.loss_trace.back().first == 50);
}

TEST_CASE("training is deterministic given the seed") {
    std::mt19937_64 rng(9);
    auto pm = fixtures::random_profile(6, 10, 0.2, rng);
    auto meta = fixtures::random_meta(5, 10, 0.4, rng);
    for (auto mode : {TrainMode::full_batch, TrainMode::stochastic}) {
        TrainConfig cfg;
        cfg.mode = mode;
        cfg.iterations = 40;
        cfg.minibatch = 3;
        cfg.restarts = 2;
        cfg.seed = 5;
        auto a = fit(small_spec(RegressionVariant::full, true), pm, meta, cfg);
        auto b = fit(small_spec(RegressionVariant::full, true), pm, meta, cfg);
        CHECK(encode_model(a.params) == encode_model(b.params));
        cfg.seed = 6;
        auto c = fit(small_spec(RegressionVariant::full, true), pm, meta, cfg);
        CHECK(encode_model(a.params) != encode_model(c.params));
    }
}

TEST_CASE("a huge step size diverges") {
    std::mt19937_64 rng(10);
    auto pm = fixtures::random_profile(6, 10, 0.0, rng);
    auto meta = fixtures::random_meta(5, 10, 0.4, rng);
    TrainConfig cfg;
    cfg.mode = TrainMode::full_batch;
    cfg.step_size = 1e4;
    cfg.iterations = 200;
    cfg.restarts = 2;
    try {
        fit(small_spec(RegressionVariant::full, true), pm, meta, cfg);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.code() == ErrorCode::divergence);
        REQUIRE(e.report().restart_losses.size() == 2);
        CHECK(std::isinf(e.report().restart_losses[0]));
        CHECK_FALSE(e.report().loss_trace.empty());
    }
}

TEST_CASE("config validation and helpers") {
    TrainConfig cfg;
    cfg.step_size = 0.0;
    CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::invalid_argument);
    cfg = {};
    cfg.lambda1 = -1;
    CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::invalid_argument);
    cfg = {};
    cfg.restarts = 0;
    CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::invalid_argument);
    CHECK(parse_train_mode("full_batch") == TrainMode::full_batch);
    CHECK(code_of([] { parse_train_mode("adam"); }) == ErrorCode::invalid_argument);

    std::set<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 100; ++s) seeds.insert(derive_seed(7, s));
    CHECK(seeds.size() == 100);
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));

    FitReport rep;
    rep.loss_trace = {{0, 2.5}, {10, 1.0}};
    std::ostringstream out;
    write_loss_trace(rep, out);
    CHECK(out.str() == "iteration,loss\n0,2.5\n10,1\n");
}
