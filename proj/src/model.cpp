#include "sfcast/model.hpp"

#include "sfcast/binary_io.hpp"
#include "sfcast/error.hpp"

#include <random>

namespace sfcast {

namespace {

constexpr std::uint32_t kModelVersion = 1;

template <typename Self>
auto named_arrays(Self& p) {
    using M = std::conditional_t<std::is_const_v<Self>, const Matrix, Matrix>;
    using V = std::conditional_t<std::is_const_v<Self>, const Vector, Vector>;
    struct Named {
        std::string_view name;
        M* matrix;
        V* vector;
    };
    return std::vector<Named>{
        {"W", &p.W, nullptr},   {"H", &p.H, nullptr},   {"U", &p.U, nullptr},   {"B", &p.B, nullptr},
        {"Q", &p.Q, nullptr},   {"W1", &p.W1, nullptr}, {"b1", nullptr, &p.b1}, {"W2", &p.W2, nullptr},
        {"b2", nullptr, &p.b2}, {"W3", &p.W3, nullptr}, {"b3", nullptr, &p.b3}, {"L", &p.L, nullptr},
        {"R", &p.R, nullptr},   {"b", nullptr, &p.b},
    };
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

} // namespace

std::string_view to_string(RegressionVariant v) {
    switch (v) {
    case RegressionVariant::full: return "full";
    case RegressionVariant::low_rank: return "low_rank";
    case RegressionVariant::functional: return "functional";
    case RegressionVariant::neural: return "neural";
    case RegressionVariant::none: return "none";
    }
    return "unknown";
}

RegressionVariant parse_variant(std::string_view name) {
    for (auto v : {RegressionVariant::full, RegressionVariant::low_rank, RegressionVariant::functional,
                   RegressionVariant::neural, RegressionVariant::none})
        if (to_string(v) == name) return v;
    throw Error(ErrorCode::invalid_argument, "unknown regression variant '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
    if (variant == RegressionVariant::low_rank) require(regression_rank >= 1, "low_rank needs regression rank >= 1");
    if (variant == RegressionVariant::functional) require(knots >= 1, "functional needs K >= 1");
    if (variant == RegressionVariant::neural) require(hidden_units >= 1, "neural needs hidden units >= 1");
    if (mf_enabled) require(mf_rank >= 1, "MF needs rank >= 1");
    require(variant != RegressionVariant::none || mf_enabled, "variant none without MF has nothing to learn");
}

std::vector<std::pair<std::string_view, Eigen::Map<Vector>>> ModelParams::learned_blocks() {
    std::vector<std::pair<std::string_view, Eigen::Map<Vector>>> out;
    for (auto& a : named_arrays(*this)) {
        if (a.name == "B") continue;
        if (a.matrix && a.matrix->size() > 0) out.emplace_back(a.name, Eigen::Map<Vector>(a.matrix->data(), a.matrix->size()));
        if (a.vector && a.vector->size() > 0) out.emplace_back(a.name, Eigen::Map<Vector>(a.vector->data(), a.vector->size()));
    }
    return out;
}

std::vector<std::pair<std::string_view, Eigen::Map<const Vector>>> ModelParams::learned_blocks() const {
    std::vector<std::pair<std::string_view, Eigen::Map<const Vector>>> out;
    for (const auto& a : named_arrays(*this)) {
        if (a.name == "B") continue;
        if (a.matrix && a.matrix->size() > 0)
            out.emplace_back(a.name, Eigen::Map<const Vector>(a.matrix->data(), a.matrix->size()));
        if (a.vector && a.vector->size() > 0)
            out.emplace_back(a.name, Eigen::Map<const Vector>(a.vector->data(), a.vector->size()));
    }
    return out;
}

ModelParams ModelParams::zeros_like() const {
    ModelParams z = *this;
    for (auto& [name, block] : z.learned_blocks()) block.setZero();
    return z;
}

bool ModelParams::all_finite() const {
    for (const auto& [name, block] : learned_blocks())
        if (!block.allFinite()) return false;
    return true;
}

Vector sparse_product(const Matrix& A, const SparseVector& x) {
    Vector y = Vector::Zero(A.rows());
    for (SparseVector::InnerIterator it(x); it; ++it) y.noalias() += it.value() * A.col(it.index());
    return y;
}

Vector eval_regression(const ModelParams& p, const SparseVector& phi, NeuralActivations* cache) {
    if (phi.size() != static_cast<Eigen::Index>(p.dims.m))
        throw Error(ErrorCode::shape_error, "metadata vector has dimension " + std::to_string(phi.size()) +
                                                ", model expects " + std::to_string(p.dims.m));
    const auto T = static_cast<Eigen::Index>(p.dims.T);
    switch (p.spec.variant) {
    case RegressionVariant::full: return sparse_product(p.W, phi);
    case RegressionVariant::low_rank: return p.H * sparse_product(p.U, phi);
    case RegressionVariant::functional: return p.B * sparse_product(p.Q, phi);
    case RegressionVariant::neural: {
        NeuralActivations local;
        NeuralActivations& act = cache ? *cache : local;
        act.a1 = sparse_product(p.W1, phi) + p.b1;
        act.h1 = act.a1.cwiseMax(0.0);
        act.a2 = p.W2 * act.h1 + p.b2;
        act.h2 = act.a2.cwiseMax(0.0);
        return p.W3 * act.h2 + p.b3;
    }
    case RegressionVariant::none: return Vector::Zero(T);
    }
    return Vector::Zero(T);
}

Vector eval_column(const ModelParams& p, const SparseVector& phi, const Vector* latent) {
    if (p.spec.mf_enabled != (latent != nullptr))
        throw Error(ErrorCode::shape_error, p.spec.mf_enabled ? "MF model needs a latent factor"
                                                              : "latent factor given to a model without MF");
    Vector y = eval_regression(p, phi) + p.b;
    if (latent) {
        if (latent->size() != p.L.cols()) throw Error(ErrorCode::shape_error, "latent factor has wrong length");
        y.noalias() += p.L * *latent;
    }
    return y;
}

ModelParams init_params(const ModelSpec& spec, const ModelDims& dims, std::uint64_t seed) {
    spec.validate();
    if (dims.T < 1 || dims.N < 1) throw Error(ErrorCode::shape_error, "model dims must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.1);
    auto gaussian = [&](std::size_t r, std::size_t c) {
        Matrix M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = normal(rng);
        return M;
    };
    auto gaussian_vec = [&](std::size_t n) -> Vector { return gaussian(n, 1).col(0); };

    ModelParams p;
    p.spec = spec;
    p.dims = dims;
    const auto T = dims.T, m = dims.m;
    switch (spec.variant) {
    case RegressionVariant::full: p.W = gaussian(T, m); break;
    case RegressionVariant::low_rank:
        p.H = gaussian(T, spec.regression_rank);
        p.U = gaussian(spec.regression_rank, m);
        break;
    case RegressionVariant::functional:
        p.B = bspline_basis(T, spec.knots).B;
        p.Q = gaussian(spec.knots + 3, m);
        break;
    case RegressionVariant::neural:
        p.W1 = gaussian(spec.hidden_units, m);
        p.b1 = gaussian_vec(spec.hidden_units);
        p.W2 = gaussian(T, spec.hidden_units);
        p.b2 = gaussian_vec(T);
        p.W3 = gaussian(T, T);
        p.b3 = gaussian_vec(T);
        break;
    case RegressionVariant::none: break;
    }
    if (spec.mf_enabled) {
        p.L = gaussian(T, spec.mf_rank);
        p.R = gaussian(spec.mf_rank, dims.N);
    }
    p.b = Vector::Zero(static_cast<Eigen::Index>(T));
    return p;
}

std::string encode_model(const ModelParams& p) {
    io::ByteWriter w;
    w.magic("SFMD");
    w.u32(kModelVersion);
    w.u32(static_cast<std::uint32_t>(p.spec.variant));
    w.u64(p.spec.regression_rank);
    w.u64(p.spec.knots);
    w.u64(p.spec.hidden_units);
    w.u32(p.spec.mf_enabled ? 1 : 0);
    w.u64(p.spec.mf_rank);
    w.f64(p.spec.noise_variance);
    w.u64(p.dims.T);
    w.u64(p.dims.N);
    w.u64(p.dims.m);

    auto arrays = named_arrays(p);
    std::uint32_t count = 0;
    for (const auto& a : arrays) count += (a.matrix ? a.matrix->size() : a.vector->size()) > 0;
    w.u32(count);
    for (const auto& a : arrays) {
        Matrix m = a.matrix ? *a.matrix : Matrix(*a.vector);
        if (m.size() == 0) continue;
        w.str(a.name);
        w.u64(static_cast<std::uint64_t>(m.rows()));
        w.u64(static_cast<std::uint64_t>(m.cols()));
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
        w.f64s(std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())));
    }
    return w.bytes();
}

ModelParams decode_model(std::string bytes) {
    io::ByteReader r(std::move(bytes));
    r.expect_magic("SFMD");
    if (auto v = r.u32(); v != kModelVersion)
        throw Error(ErrorCode::format_error, "unsupported SFMD version " + std::to_string(v));
    ModelParams p;
    auto variant = r.u32();
    if (variant > static_cast<std::uint32_t>(RegressionVariant::none))
        throw Error(ErrorCode::format_error, "bad variant tag in SFMD");
    p.spec.variant = static_cast<RegressionVariant>(variant);
    p.spec.regression_rank = r.u64();
    p.spec.knots = r.u64();
    p.spec.hidden_units = r.u64();
    p.spec.mf_enabled = r.u32() != 0;
    p.spec.mf_rank = r.u64();
    p.spec.noise_variance = r.f64();
    p.dims.T = r.u64();
    p.dims.N = r.u64();
    p.dims.m = r.u64();

    auto arrays = named_arrays(p);
    auto count = r.u32();
    for (std::uint32_t n = 0; n < count; ++n) {
        std::string name = r.str();
        auto rows = static_cast<Eigen::Index>(r.u64());
        auto cols = static_cast<Eigen::Index>(r.u64());
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
        r.f64s(std::span<double>(rm.data(), static_cast<std::size_t>(rm.size())));
        auto it = std::find_if(arrays.begin(), arrays.end(), [&](const auto& a) { return a.name == name; });
        if (it == arrays.end()) throw Error(ErrorCode::format_error, "unknown array '" + name + "' in SFMD");
        if (it->matrix) {
            *it->matrix = rm;
        } else {
            if (cols != 1) throw Error(ErrorCode::format_error, "vector array '" + name + "' must have one column");
            *it->vector = Eigen::Map<Vector>(rm.data(), rows);
        }
    }
    if (!r.at_end()) throw Error(ErrorCode::format_error, "trailing bytes in SFMD container");
    if (p.b.size() != static_cast<Eigen::Index>(p.dims.T)) throw Error(ErrorCode::format_error, "SFMD bias missing");
    return p;
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
    io::write_atomic(path, encode_model(params));
}

ModelParams load_model(const std::filesystem::path& path) { return decode_model(io::read_file(path)); }

} // namespace sfcast
