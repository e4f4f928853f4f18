#pragma once

#include "sfcast/basis.hpp"
#include "sfcast/metadata.hpp"
#include "sfcast/profile_matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sfcast {

enum class RegressionVariant { full, low_rank, functional, neural, none };

std::string_view to_string(RegressionVariant v);
RegressionVariant parse_variant(std::string_view name);

// Structure of Y_i = f(phi_i) + L R_i + b + noise.
struct ModelSpec {
    RegressionVariant variant = RegressionVariant::low_rank;
    std::size_t regression_rank = 5; // k, low_rank only
    std::size_t knots = 8;           // K, functional only
    std::size_t hidden_units = 100;  // first hidden layer, neural only; the second has T units
    bool mf_enabled = true;
    std::size_t mf_rank = 5;         // k'
    double noise_variance = 1.0;     // documents the Gaussian noise model; never estimated

    void validate() const;
    bool has_regression() const { return variant != RegressionVariant::none; }
};

struct ModelDims {
    std::size_t T = 0; // samples per period
    std::size_t N = 0; // year-columns
    std::size_t m = 0; // metadata dimension
};

struct ModelParams {
    ModelSpec spec;
    ModelDims dims;

    Matrix W;        // full: T x m
    Matrix H, U;     // low_rank: T x k, k x m
    Matrix B;        // functional: fixed T x (K+3) basis
    Matrix Q;        // functional: (K+3) x m
    Matrix W1;       // neural: hidden x m
    Vector b1;       // neural: hidden
    Matrix W2;       // neural: T x hidden
    Vector b2;       // neural: T
    Matrix W3;       // neural: T x T
    Vector b3;       // neural: T
    Matrix L, R;     // mf: T x k', k' x N
    Vector b;        // T

    // Flat views over every learned array (B is fixed and excluded).
    std::vector<std::pair<std::string_view, Eigen::Map<Vector>>> learned_blocks();
    std::vector<std::pair<std::string_view, Eigen::Map<const Vector>>> learned_blocks() const;

    // Same shapes, all learned arrays zero; B is copied.
    ModelParams zeros_like() const;
    bool all_finite() const;
};

// Intermediate activations of the neural regressor, kept for backprop.
struct NeuralActivations {
    Vector a1, h1, a2, h2;
};

// A * x for dense A and sparse x, touching only the nonzero columns.
Vector sparse_product(const Matrix& A, const SparseVector& x);

// f(phi); the zero vector for variant none.
Vector eval_regression(const ModelParams& params, const SparseVector& phi, NeuralActivations* cache = nullptr);

// f(phi) + L r + b. `latent` must be given exactly when MF is enabled.
Vector eval_column(const ModelParams& params, const SparseVector& phi, const Vector* latent);

// Factor arrays i.i.d. Normal(0, 0.01), b = 0, deterministic in `seed`.
ModelParams init_params(const ModelSpec& spec, const ModelDims& dims, std::uint64_t seed);

// "SFMD" container; round-trips bit-exactly.
std::string encode_model(const ModelParams& params);
ModelParams decode_model(std::string bytes);
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

} // namespace sfcast
