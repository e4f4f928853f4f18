#pragma once

#include "sfcast/error.hpp"
#include "sfcast/metadata.hpp"
#include "sfcast/model.hpp"
#include "sfcast/profile_matrix.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace sfcast {

enum class TrainMode { stochastic, full_batch };

std::string_view to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view name);

struct TrainConfig {
    double lambda1 = 1.0;        // regression regularization
    double lambda2 = 1.0;        // MF regularization
    std::size_t minibatch = 300; // columns per step, sampled with replacement
    std::size_t iterations = 1000;
    double step_size = 1e-2;
    std::size_t restarts = 1;
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::stochastic;
    std::size_t trace_every = 0; // 0 picks iterations / 100

    void validate() const;
};

struct FitReport {
    double final_loss = 0.0;
    std::size_t best_restart = 0;
    std::vector<std::pair<std::size_t, double>> loss_trace; // best restart only
    std::vector<double> restart_losses;                     // +inf marks a diverged restart
    double wall_time = 0.0;                                 // seconds
};

struct FitResult {
    ModelParams params;
    FitReport report;
};

// Raised when every restart diverged; carries whatever was recorded.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& message, FitReport report)
        : Error(ErrorCode::divergence, message), report_(std::move(report)) {}
    const FitReport& report() const { return report_; }

private:
    FitReport report_;
};

// (1/2N) sum over observed cells of squared residuals
//   + (lambda1/2N) R_f + (lambda2/2N)(|L|^2 + |R|^2).
// R_f is |W|^2, |H|^2 + |U|^2, |Q|^2, or 0 for the neural regressor.
double loss(const ModelParams& params, const ProfileMatrix& pm, const MetadataMatrix& meta, const TrainConfig& cfg);

// Gradient of the objective with the residual sum restricted to `batch`
// (repeats count repeatedly); the regularization gradient is always the full one.
ModelParams gradient(const ModelParams& params, const ProfileMatrix& pm, const MetadataMatrix& meta,
                     const TrainConfig& cfg, std::span<const std::size_t> batch);

// Constant-step (mini-batch) gradient descent from `restarts` seeded
// initializations; returns the restart with the lowest full objective.
FitResult fit(const ModelSpec& spec, const ProfileMatrix& pm, const MetadataMatrix& meta, const TrainConfig& cfg);

// `iteration,loss` lines for plotting.
void write_loss_trace(const FitReport& report, std::ostream& out);

// Deterministic per-stream seed derivation (SplitMix64 finalizer).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

} // namespace sfcast
