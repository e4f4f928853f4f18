#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace sfcast {

// Cubic B-spline design matrix evaluated at the sample positions 1..T.
struct BasisMatrix {
    Eigen::MatrixXd B;          // T x (K+3)
    std::vector<double> knots;  // K+1 uniformly spaced breakpoints, both ends included
    int degree = 3;

    // Full clamped knot vector (boundary knots repeated degree+1 times).
    std::vector<double> knot_vector() const;
};

// K uniform spans over [1, T]; clamped cubic, no intercept column dropped,
// giving exactly K+3 functions that form a partition of unity.
// Throws invalid-basis unless T >= 4 and 1 <= K <= T.
BasisMatrix bspline_basis(std::size_t T, std::size_t K);

} // namespace sfcast
