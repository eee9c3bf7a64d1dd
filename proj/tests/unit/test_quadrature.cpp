#include "doctest.h"

#include "marle/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

using namespace marle;

namespace {

double apply(const Rule1D& r, auto&& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(r.x[i]);
    return s;
}

} // namespace

TEST_CASE("gauss-legendre integrates degree 2n-1 exactly") {
    for (int n : {1, 2, 5, 12, 30}) {
        const Rule1D r = gauss_legendre(n, -0.5, 2.0);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            const double exact = (std::pow(2.0, k + 1) - std::pow(-0.5, k + 1)) / (k + 1);
            const double got = apply(r, [k](double x) { return std::pow(x, k); });
            CHECK(got == doctest::Approx(exact).epsilon(1e-13).scale(std::pow(2.0, k)));
        }
    }
}

TEST_CASE("gauss-legendre nodes are symmetric") {
    const Rule1D r = gauss_legendre(9);
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        CHECK(r.x[i] == -r.x[r.x.size() - 1 - i]);
        CHECK(r.w[i] == r.w[r.x.size() - 1 - i]);
    }
}

TEST_CASE("gauss-jacobi moments match the beta function") {
    for (double alpha : {0.0, 0.5, -0.5, 1.5})
        for (double beta : {0.0, 0.5, 2.0}) {
            const int n = 8;
            const Rule1D r = gauss_jacobi(n, alpha, beta);
            // int (1-x)^alpha (1+x)^beta ((1+x)/2)^k dx = 2^{alpha+beta+1} B(alpha+1, beta+k+1)
            for (int k = 0; k < 2 * n; ++k) {
                const double exact = std::pow(2.0, alpha + beta + 1) * std::beta(alpha + 1, beta + k + 1);
                const double got = apply(r, [k](double x) { return std::pow(0.5 * (1 + x), k); });
                CHECK(got == doctest::Approx(exact).epsilon(1e-12));
            }
        }
}

TEST_CASE("sinh trapezoid: gaussian converges geometrically, endpoints at +-L") {
    const double exact = std::sqrt(std::numbers::pi);
    double prev = 1.0;
    for (int n : {9, 17, 33}) {
        const Rule1D r = sinh_trapezoid(n, 8.0);
        CHECK(r.x.front() == doctest::Approx(-8.0));
        CHECK(r.x.back() == doctest::Approx(8.0));
        const double err = std::abs(apply(r, [](double x) { return std::exp(-x * x); }) - exact);
        CHECK(err < prev / 10);
        prev = err;
    }
    CHECK(prev < 1e-10);
}

TEST_CASE("uniform midpoint covers [-L, L]") {
    const Rule1D r = uniform_midpoint(10, 3.0);
    CHECK(std::accumulate(r.w.begin(), r.w.end(), 0.0) == doctest::Approx(6.0));
    CHECK(apply(r, [](double x) { return x; }) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(apply(r, [](double x) { return x * x; }) == doctest::Approx(18.0).epsilon(0.02));
}

TEST_CASE("exp-sinh trapezoid on the half line") {
    const Rule1D r = exp_sinh_trapezoid(60, 1e-12, 60.0);
    CHECK(r.x.front() == doctest::Approx(1e-12).epsilon(1e-10));
    CHECK(r.x.back() == doctest::Approx(60.0));
    CHECK(apply(r, [](double x) { return std::exp(-x); }) == doctest::Approx(1.0).epsilon(1e-11));
    // integrable endpoint singularity
    CHECK(apply(r, [](double x) { return std::exp(-x) / std::sqrt(x); }) ==
          doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-5));
}
