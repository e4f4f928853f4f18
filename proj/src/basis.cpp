#include "sfcast/basis.hpp"

#include "sfcast/error.hpp"

#include <algorithm>

namespace sfcast {

std::vector<double> BasisMatrix::knot_vector() const {
    std::vector<double> u;
    u.insert(u.end(), static_cast<std::size_t>(degree), knots.front());
    u.insert(u.end(), knots.begin(), knots.end());
    u.insert(u.end(), static_cast<std::size_t>(degree), knots.back());
    return u;
}

namespace {

// Knot span index s with u[s] <= x < u[s+1]; the right end maps to the last
// non-empty span.
std::size_t find_span(const std::vector<double>& u, int p, std::size_t n_basis, double x) {
    if (x >= u[n_basis]) return n_basis - 1;
    auto it = std::upper_bound(u.begin() + p, u.begin() + static_cast<std::ptrdiff_t>(n_basis) + 1, x);
    return static_cast<std::size_t>(it - u.begin()) - 1;
}

// Triangular de Boor evaluation of the p+1 non-vanishing basis functions on span s.
void nonzero_basis(const std::vector<double>& u, int p, std::size_t s, double x, std::vector<double>& out) {
    std::vector<double> left(static_cast<std::size_t>(p) + 1), right(static_cast<std::size_t>(p) + 1);
    out.assign(static_cast<std::size_t>(p) + 1, 0.0);
    out[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - u[s + 1 - j];
        right[j] = u[s + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            double tmp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        out[j] = saved;
    }
}

} // namespace

BasisMatrix bspline_basis(std::size_t T, std::size_t K) {
    if (T < 4) throw Error(ErrorCode::invalid_basis, "basis needs T >= 4");
    if (K < 1 || K > T) throw Error(ErrorCode::invalid_basis, "knot count must satisfy 1 <= K <= T");

    BasisMatrix basis;
    const double lo = 1.0, hi = static_cast<double>(T);
    basis.knots.resize(K + 1);
    for (std::size_t i = 0; i <= K; ++i)
        basis.knots[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(K);
    basis.knots.back() = hi;

    const int p = basis.degree;
    const std::size_t n_basis = K + 3;
    auto u = basis.knot_vector();
    basis.B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(n_basis));
    std::vector<double> vals;
    for (std::size_t j = 0; j < T; ++j) {
        double x = static_cast<double>(j + 1);
        std::size_t s = find_span(u, p, n_basis, x);
        nonzero_basis(u, p, s, x, vals);
        for (int r = 0; r <= p; ++r)
            basis.B(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(s - p + r)) = vals[r];
    }
    return basis;
}

} // namespace sfcast
