#include "sfcast/trainer.hpp"

#include "sfcast/parallel.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace sfcast {

namespace {

constexpr double kDivergenceThreshold = 1e12;

void check_shapes(const ModelParams& p, const ProfileMatrix& pm, const MetadataMatrix& meta) {
    if (pm.rows() != static_cast<Eigen::Index>(p.dims.T))
        throw Error(ErrorCode::shape_error, "profile period differs from model T");
    if (meta.cols() != pm.cols()) throw Error(ErrorCode::shape_error, "metadata columns differ from profile columns");
    if (meta.dim() != static_cast<Eigen::Index>(p.dims.m))
        throw Error(ErrorCode::shape_error, "metadata dimension differs from model m");
    if (p.spec.mf_enabled && p.R.cols() != pm.cols())
        throw Error(ErrorCode::shape_error, "latent factors do not cover the profile columns");
}

double regression_penalty(const ModelParams& p) {
    switch (p.spec.variant) {
    case RegressionVariant::full: return p.W.squaredNorm();
    case RegressionVariant::low_rank: return p.H.squaredNorm() + p.U.squaredNorm();
    case RegressionVariant::functional: return p.Q.squaredNorm();
    case RegressionVariant::neural:
    case RegressionVariant::none: return 0.0;
    }
    return 0.0;
}

Vector predict_column(const ModelParams& p, const MetadataMatrix& meta, Eigen::Index i, NeuralActivations* cache) {
    SparseVector phi = meta.column(i);
    Vector y = eval_regression(p, phi, cache) + p.b;
    if (p.spec.mf_enabled) y.noalias() += p.L * p.R.col(i);
    return y;
}

// d(loss)/d(prediction) for column i: -(1/N) * residual on observed rows.
bool column_output_gradient(const ProfileMatrix& pm, Eigen::Index i, const Vector& pred, double inv_n, Vector& g) {
    g.setZero(pm.rows());
    bool any = false;
    for (Eigen::Index j = 0; j < pm.rows(); ++j)
        if (pm.mask(j, i)) {
            g[j] = -(pm.data(j, i) - pred[j]) * inv_n;
            any = true;
        }
    return any;
}

} // namespace

std::string_view to_string(TrainMode mode) { return mode == TrainMode::stochastic ? "stochastic" : "full_batch"; }

TrainMode parse_train_mode(std::string_view name) {
    if (name == "stochastic") return TrainMode::stochastic;
    if (name == "full_batch") return TrainMode::full_batch;
    throw Error(ErrorCode::invalid_argument, "unknown train mode '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
    auto bad = [](const char* what) { throw Error(ErrorCode::invalid_argument, what); };
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) bad("regularization weights must be >= 0");
    if (minibatch < 1) bad("minibatch must be >= 1");
    if (iterations < 1) bad("iterations must be >= 1");
    if (!(step_size > 0.0)) bad("step size must be > 0");
    if (restarts < 1) bad("restarts must be >= 1");
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double loss(const ModelParams& p, const ProfileMatrix& pm, const MetadataMatrix& meta, const TrainConfig& cfg) {
    check_shapes(p, pm, meta);
    if (pm.observed_count() == 0) throw Error(ErrorCode::no_observations, "no observed entries");
    const double n = static_cast<double>(pm.cols());
    double sse = 0.0;
    for (Eigen::Index i = 0; i < pm.cols(); ++i) {
        if (!pm.mask.col(i).any()) continue;
        Vector pred = predict_column(p, meta, i, nullptr);
        for (Eigen::Index j = 0; j < pm.rows(); ++j)
            if (pm.mask(j, i)) {
                double r = pm.data(j, i) - pred[j];
                sse += r * r;
            }
    }
    double value = sse / (2.0 * n) + cfg.lambda1 / (2.0 * n) * regression_penalty(p);
    if (p.spec.mf_enabled) value += cfg.lambda2 / (2.0 * n) * (p.L.squaredNorm() + p.R.squaredNorm());
    return value;
}

ModelParams gradient(const ModelParams& p, const ProfileMatrix& pm, const MetadataMatrix& meta, const TrainConfig& cfg,
                     std::span<const std::size_t> batch) {
    check_shapes(p, pm, meta);
    if (batch.empty()) throw Error(ErrorCode::invalid_argument, "empty batch");
    const double n = static_cast<double>(pm.cols());
    const double inv_n = 1.0 / n;
    ModelParams grad = p.zeros_like();
    Vector g;
    NeuralActivations act;

    for (std::size_t col : batch) {
        if (col >= static_cast<std::size_t>(pm.cols())) throw Error(ErrorCode::shape_error, "batch column out of range");
        auto i = static_cast<Eigen::Index>(col);
        if (!pm.mask.col(i).any()) continue;
        SparseVector phi = meta.column(i);
        Vector pred = eval_regression(p, phi, &act) + p.b;
        if (p.spec.mf_enabled) pred.noalias() += p.L * p.R.col(i);
        if (!column_output_gradient(pm, i, pred, inv_n, g)) continue;

        grad.b += g;
        if (p.spec.mf_enabled) {
            grad.L.noalias() += g * p.R.col(i).transpose();
            grad.R.col(i).noalias() += p.L.transpose() * g;
        }
        switch (p.spec.variant) {
        case RegressionVariant::full:
            for (SparseVector::InnerIterator it(phi); it; ++it) grad.W.col(it.index()) += it.value() * g;
            break;
        case RegressionVariant::low_rank: {
            Vector z = sparse_product(p.U, phi);
            grad.H.noalias() += g * z.transpose();
            Vector hg = p.H.transpose() * g;
            for (SparseVector::InnerIterator it(phi); it; ++it) grad.U.col(it.index()) += it.value() * hg;
            break;
        }
        case RegressionVariant::functional: {
            Vector bg = p.B.transpose() * g;
            for (SparseVector::InnerIterator it(phi); it; ++it) grad.Q.col(it.index()) += it.value() * bg;
            break;
        }
        case RegressionVariant::neural: {
            grad.W3.noalias() += g * act.h2.transpose();
            grad.b3 += g;
            Vector d2 = (p.W3.transpose() * g).cwiseProduct((act.a2.array() > 0.0).cast<double>().matrix());
            grad.W2.noalias() += d2 * act.h1.transpose();
            grad.b2 += d2;
            Vector d1 = (p.W2.transpose() * d2).cwiseProduct((act.a1.array() > 0.0).cast<double>().matrix());
            for (SparseVector::InnerIterator it(phi); it; ++it) grad.W1.col(it.index()) += it.value() * d1;
            grad.b1 += d1;
            break;
        }
        case RegressionVariant::none: break;
        }
    }

    const double r1 = cfg.lambda1 * inv_n;
    switch (p.spec.variant) {
    case RegressionVariant::full: grad.W += r1 * p.W; break;
    case RegressionVariant::low_rank:
        grad.H += r1 * p.H;
        grad.U += r1 * p.U;
        break;
    case RegressionVariant::functional: grad.Q += r1 * p.Q; break;
    case RegressionVariant::neural:
    case RegressionVariant::none: break;
    }
    if (p.spec.mf_enabled) {
        const double r2 = cfg.lambda2 * inv_n;
        grad.L += r2 * p.L;
        grad.R += r2 * p.R;
    }
    return grad;
}

FitResult fit(const ModelSpec& spec, const ProfileMatrix& pm, const MetadataMatrix& meta, const TrainConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (pm.observed_count() == 0) throw Error(ErrorCode::no_observations, "no observed entries");
    const auto start = std::chrono::steady_clock::now();
    const ModelDims dims{static_cast<std::size_t>(pm.rows()), static_cast<std::size_t>(pm.cols()),
                         static_cast<std::size_t>(meta.dim())};
    const std::size_t trace_every = cfg.trace_every > 0 ? cfg.trace_every : std::max<std::size_t>(1, cfg.iterations / 100);

    struct RestartOutcome {
        ModelParams params;
        std::vector<std::pair<std::size_t, double>> trace;
        double final_loss = std::numeric_limits<double>::infinity();
        bool diverged = false;
    };
    std::vector<RestartOutcome> outcomes(cfg.restarts);

    parallel_for(cfg.restarts, [&](std::size_t r) {
        RestartOutcome& out = outcomes[r];
        const std::uint64_t seed = derive_seed(cfg.seed, r);
        out.params = init_params(spec, dims, seed);
        std::mt19937_64 batch_rng(derive_seed(seed, 0xba7c4));
        std::uniform_int_distribution<std::size_t> pick(0, dims.N - 1);

        std::vector<std::size_t> batch;
        if (cfg.mode == TrainMode::full_batch) {
            batch.resize(dims.N);
            std::iota(batch.begin(), batch.end(), std::size_t{0});
        } else {
            batch.resize(cfg.minibatch);
        }
        auto diverging = [](double value) { return !std::isfinite(value) || value > kDivergenceThreshold; };

        double current = loss(out.params, pm, meta, cfg);
        out.trace.emplace_back(0, current);
        for (std::size_t it = 1; it <= cfg.iterations; ++it) {
            if (cfg.mode == TrainMode::stochastic)
                for (auto& c : batch) c = pick(batch_rng);
            ModelParams grad = gradient(out.params, pm, meta, cfg, batch);
            auto blocks = out.params.learned_blocks();
            auto gblocks = grad.learned_blocks();
            bool finite = true;
            for (std::size_t k = 0; k < blocks.size(); ++k) {
                blocks[k].second -= cfg.step_size * gblocks[k].second;
                finite = finite && blocks[k].second.allFinite();
            }
            if (!finite) {
                out.diverged = true;
                out.trace.emplace_back(it, std::numeric_limits<double>::infinity());
                return;
            }
            if (it % trace_every == 0 || it == cfg.iterations) {
                current = loss(out.params, pm, meta, cfg);
                out.trace.emplace_back(it, current);
                if (diverging(current)) {
                    out.diverged = true;
                    return;
                }
            }
        }
        out.final_loss = current;
    });

    FitReport report;
    std::size_t best = cfg.restarts;
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        report.restart_losses.push_back(outcomes[r].diverged ? std::numeric_limits<double>::infinity()
                                                             : outcomes[r].final_loss);
        if (!outcomes[r].diverged && (best == cfg.restarts || outcomes[r].final_loss < outcomes[best].final_loss))
            best = r;
    }
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (best == cfg.restarts) {
        report.final_loss = std::numeric_limits<double>::infinity();
        report.loss_trace = outcomes.front().trace;
        throw DivergenceError("all restarts diverged at step size " + std::to_string(cfg.step_size), std::move(report));
    }
    report.best_restart = best;
    report.final_loss = outcomes[best].final_loss;
    report.loss_trace = std::move(outcomes[best].trace);
    return {std::move(outcomes[best].params), std::move(report)};
}

void write_loss_trace(const FitReport& report, std::ostream& out) {
    out << "iteration,loss\n";
    out.precision(17);
    for (const auto& [it, value] : report.loss_trace) out << it << ',' << value << '\n';
}

} // namespace sfcast
