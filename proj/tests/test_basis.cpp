#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "sfcast/basis.hpp"

using namespace sfcast;
using fixtures::code_of;

TEST_CASE("rows sum to one and entries are nonnegative") {
    for (std::size_t T : {4, 7, 20, 52, 100})
        for (std::size_t K = 1; K <= std::min<std::size_t>(T, 25); ++K) {
            auto b = bspline_basis(T, K);
            CHECK(b.B.cols() == static_cast<Eigen::Index>(K + 3));
            CHECK((b.B.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
            CHECK(b.B.minCoeff() >= 0.0);
        }
}

TEST_CASE("T=20, K=5 matches the Cox-de Boor recursion") {
    auto b = bspline_basis(20, 5);
    Matrix want = oracle::bspline_design(20, 5);
    CHECK((b.B - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("clamped ends interpolate") {
    auto b = bspline_basis(30, 6);
    CHECK(b.B(0, 0) == doctest::Approx(1.0));
    CHECK(b.B(29, 8) == doctest::Approx(1.0));
}

TEST_CASE("knots") {
    auto b = bspline_basis(21, 4);
    CHECK(b.degree == 3);
    CHECK(b.knots == std::vector<double>{1, 6, 11, 16, 21});
    auto kv = b.knot_vector();
    CHECK(kv.size() == b.knots.size() + 6);
    CHECK(kv.front() == 1.0);
    CHECK(kv[3] == 1.0);
    CHECK(kv.back() == 21.0);
    CHECK(kv == oracle::clamped_uniform_knots(21, 4));
}

TEST_CASE("invalid basis requests") {
    CHECK(code_of([] { bspline_basis(3, 1); }) == ErrorCode::invalid_basis);
    CHECK(code_of([] { bspline_basis(10, 0); }) == ErrorCode::invalid_basis);
    CHECK(code_of([] { bspline_basis(10, 11); }) == ErrorCode::invalid_basis);
}
