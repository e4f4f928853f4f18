#pragma once

#include "sfcast/metadata.hpp"
#include "sfcast/model.hpp"
#include "sfcast/profile_matrix.hpp"
#include "sfcast/trainer.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sfcast {

struct Grid {
    std::vector<double> lambda1;
    std::vector<double> lambda2;
    std::vector<std::size_t> knots; // functional only; empty keeps spec.knots

    void validate() const;
};

struct CvOptions {
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    bool single_holdout = false; // evaluate fold 0 only
    double rho = std::numeric_limits<double>::infinity();
};

struct CvCandidate {
    int stage = 1;
    double lambda1 = 0.0;
    std::optional<double> lambda2;
    std::optional<std::size_t> knots;
    std::vector<double> fold_metrics; // NaN where the fold had nothing to score
    double mean = std::numeric_limits<double>::infinity();
    bool failed = false;
    std::string failure;
};

struct CvResult {
    std::vector<CvCandidate> candidates;
    double lambda1 = 0.0;
    std::optional<double> lambda2;
    std::optional<std::size_t> knots;
    std::vector<std::size_t> fold_of_column;
};

// n values geometrically spaced over [lo, hi], endpoints exact.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

// Seeded near-equal partition of columns 0..N-1 into `folds` folds.
std::vector<std::size_t> kfold_columns(std::size_t N, std::size_t folds, std::uint64_t seed);

// Stage 1 tunes lambda1 (and K for functional) on the spec with MF switched
// off; stage 2 fixes those and tunes lambda2 on the full spec. A fold hides
// all observed cells of its columns during training and scores the cold
// forecast f(phi) + b there with APST_MSE. Ties go to the smaller lambda.
CvResult two_stage_cv(const ModelSpec& spec, const ProfileMatrix& pm, const MetadataMatrix& meta, const Grid& grid,
                      const TrainConfig& cfg, const CvOptions& options = {});

// `stage,candidate,lambda1,lambda2,knots,fold,metric,mean` lines.
void write_cv_report(const CvResult& result, std::ostream& out);

} // namespace sfcast
