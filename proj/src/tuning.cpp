#include "sfcast/tuning.hpp"

#include "sfcast/error.hpp"
#include "sfcast/metrics.hpp"
#include "sfcast/parallel.hpp"
#include "sfcast/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace sfcast {

namespace {

bool tunes_lambda1(RegressionVariant v) {
    return v == RegressionVariant::full || v == RegressionVariant::low_rank || v == RegressionVariant::functional;
}

// Fills candidate.fold_metrics/mean for every requested fold.
void evaluate_candidates(std::vector<CvCandidate>& candidates, const ModelSpec& base_spec, const ProfileMatrix& pm,
                         const MetadataMatrix& meta, const TrainConfig& base_cfg, const CvOptions& options,
                         const std::vector<std::size_t>& fold_of) {
    const std::size_t n_folds = options.single_holdout ? 1 : options.folds;
    const std::size_t jobs = candidates.size() * n_folds;
    std::vector<double> metric(jobs, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> failure(jobs);

    parallel_for(jobs, [&](std::size_t job) {
        const auto& cand = candidates[job / n_folds];
        const std::size_t fold = job % n_folds;
        ModelSpec spec = base_spec;
        if (cand.knots) spec.knots = *cand.knots;
        TrainConfig cfg = base_cfg;
        cfg.lambda1 = cand.lambda1;
        if (cand.lambda2) cfg.lambda2 = *cand.lambda2;

        Mask train = pm.mask;
        Mask eval = Mask::Constant(pm.rows(), pm.cols(), false);
        for (Eigen::Index c = 0; c < pm.cols(); ++c)
            if (fold_of[static_cast<std::size_t>(c)] == fold) {
                eval.col(c) = pm.mask.col(c);
                train.col(c).setConstant(false);
            }
        if (!eval.any()) return;
        try {
            auto fitted = fit(spec, pm.with_mask(std::move(train)), meta, cfg);
            MetricConfig mcfg{options.rho, MetricKind::mse, eval};
            metric[job] = apst(pm.data, forecast_cold_all(fitted.params, meta), mcfg);
        } catch (const Error& e) {
            failure[job] = std::string(to_string(e.code())) + ": " + e.what();
        }
    });

    for (std::size_t c = 0; c < candidates.size(); ++c) {
        auto& cand = candidates[c];
        double sum = 0.0;
        std::size_t used = 0;
        for (std::size_t f = 0; f < n_folds; ++f) {
            const std::size_t job = c * n_folds + f;
            if (!failure[job].empty()) {
                cand.failed = true;
                cand.failure = failure[job];
            }
            cand.fold_metrics.push_back(metric[job]);
            if (std::isfinite(metric[job])) {
                sum += metric[job];
                ++used;
            }
        }
        if (!cand.failed && used == 0) {
            cand.failed = true;
            cand.failure = "no fold had evaluable entries";
        }
        if (!cand.failed) cand.mean = sum / static_cast<double>(used);
    }
}

// Index of the best non-failed candidate; candidates are generated in
// ascending (lambda, K) order so the first strict minimum wins ties.
std::size_t argmin(const std::vector<CvCandidate>& candidates, std::size_t begin, std::size_t end) {
    std::size_t best = end;
    for (std::size_t c = begin; c < end; ++c) {
        if (candidates[c].failed) continue;
        if (best == end || candidates[c].mean < candidates[best].mean) best = c;
    }
    if (best == end) throw Error(ErrorCode::divergence, "every cross-validation candidate failed");
    return best;
}

} // namespace

void Grid::validate() const {
    auto positive = [](const std::vector<double>& v, const char* name) {
        for (double x : v)
            if (!(x > 0.0)) throw Error(ErrorCode::invalid_range, std::string(name) + " grid values must be > 0");
    };
    positive(lambda1, "lambda1");
    positive(lambda2, "lambda2");
    for (auto k : knots)
        if (k < 1) throw Error(ErrorCode::invalid_range, "knot grid values must be >= 1");
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw Error(ErrorCode::invalid_range, "log grid needs 0 < lo < hi and n >= 2");
    std::vector<double> out(n);
    const double ratio = hi / lo;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lo * std::pow(ratio, static_cast<double>(i) / static_cast<double>(n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<std::size_t> kfold_columns(std::size_t N, std::size_t folds, std::uint64_t seed) {
    if (folds < 1 || folds > N) throw Error(ErrorCode::invalid_argument, "need 1 <= folds <= N");
    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = N; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(perm[i - 1], perm[pick(rng)]);
    }
    std::vector<std::size_t> fold_of(N);
    for (std::size_t i = 0; i < N; ++i) fold_of[perm[i]] = i % folds;
    return fold_of;
}

CvResult two_stage_cv(const ModelSpec& spec, const ProfileMatrix& pm, const MetadataMatrix& meta, const Grid& grid,
                      const TrainConfig& cfg, const CvOptions& options) {
    spec.validate();
    cfg.validate();
    grid.validate();
    CvResult result;
    result.fold_of_column = kfold_columns(static_cast<std::size_t>(pm.cols()), options.folds, options.seed);
    result.lambda1 = cfg.lambda1;

    if (spec.has_regression() && tunes_lambda1(spec.variant)) {
        if (grid.lambda1.empty()) throw Error(ErrorCode::invalid_range, "lambda1 grid is empty");
        ModelSpec reduced = spec;
        reduced.mf_enabled = false;
        std::vector<double> l1 = grid.lambda1;
        std::sort(l1.begin(), l1.end());
        std::vector<std::optional<std::size_t>> ks{std::nullopt};
        if (spec.variant == RegressionVariant::functional && !grid.knots.empty()) {
            ks.clear();
            std::vector<std::size_t> sorted = grid.knots;
            std::sort(sorted.begin(), sorted.end());
            for (auto k : sorted) ks.emplace_back(k);
        }
        std::vector<CvCandidate> stage1;
        for (double l : l1)
            for (auto k : ks) {
                CvCandidate c;
                c.stage = 1;
                c.lambda1 = l;
                c.knots = k;
                stage1.push_back(c);
            }
        evaluate_candidates(stage1, reduced, pm, meta, cfg, options, result.fold_of_column);
        const auto& best = stage1[argmin(stage1, 0, stage1.size())];
        result.lambda1 = best.lambda1;
        result.knots = best.knots;
        result.candidates = std::move(stage1);
    }

    if (spec.mf_enabled) {
        if (grid.lambda2.empty()) throw Error(ErrorCode::invalid_range, "lambda2 grid is empty");
        std::vector<double> l2 = grid.lambda2;
        std::sort(l2.begin(), l2.end());
        ModelSpec full = spec;
        if (result.knots) full.knots = *result.knots;
        std::vector<CvCandidate> stage2;
        for (double l : l2) {
            CvCandidate c;
            c.stage = 2;
            c.lambda1 = result.lambda1;
            c.lambda2 = l;
            stage2.push_back(c);
        }
        evaluate_candidates(stage2, full, pm, meta, cfg, options, result.fold_of_column);
        const std::size_t offset = result.candidates.size();
        result.candidates.insert(result.candidates.end(), stage2.begin(), stage2.end());
        result.lambda2 = result.candidates[argmin(result.candidates, offset, result.candidates.size())].lambda2;
    }
    return result;
}

void write_cv_report(const CvResult& result, std::ostream& out) {
    out << "stage,candidate,lambda1,lambda2,knots,fold,metric,mean\n";
    out.precision(17);
    for (std::size_t c = 0; c < result.candidates.size(); ++c) {
        const auto& cand = result.candidates[c];
        for (std::size_t f = 0; f < cand.fold_metrics.size(); ++f) {
            out << cand.stage << ',' << c << ',' << cand.lambda1 << ',';
            if (cand.lambda2) out << *cand.lambda2;
            out << ',';
            if (cand.knots) out << *cand.knots;
            out << ',' << f << ',' << cand.fold_metrics[f] << ',';
            if (cand.failed)
                out << "failed";
            else
                out << cand.mean;
            out << '\n';
        }
    }
}

} // namespace sfcast
