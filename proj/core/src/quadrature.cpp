#include "marle/quadrature.hpp"

#include "marle/error.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace marle {

namespace {

Rule1D golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mu0) {
    const int n = static_cast<int>(diag.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) J(i, i) = diag(i);
    for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = off(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        r.x[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        r.w[i] = mu0 * v * v;
    }
    return r;
}

void require_count(int n, int min) {
    if (n < min) throw ConfigError("n", "quadrature needs at least " + std::to_string(min) + " nodes");
}

} // namespace

Rule1D gauss_jacobi(int n, double alpha, double beta) {
    require_count(n, 1);
    if (alpha <= -1.0 || beta <= -1.0) throw RangeError("gauss_jacobi: exponents must exceed -1");
    Eigen::VectorXd a(n), b(std::max(n - 1, 0));
    const double ab = alpha + beta;
    for (int k = 0; k < n; ++k) {
        double s = 2.0 * k + ab;
        if (k == 0)
            a(k) = (beta - alpha) / (ab + 2.0);
        else
            a(k) = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        double s = 2.0 * k + ab;
        double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
        double den = s * s * (s + 1.0) * (s - 1.0);
        b(k - 1) = std::sqrt(num / den);
    }
    double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                          std::lgamma(ab + 2.0));
    return golub_welsch(a, b, mu0);
}

Rule1D gauss_legendre(int n, double lo, double hi) {
    Rule1D r = gauss_jacobi(n, 0.0, 0.0);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    // symmetrize exactly so that odd moments cancel to rounding
    for (int i = 0; i < n / 2; ++i) {
        int j = n - 1 - i;
        double x = 0.5 * (r.x[j] - r.x[i]);
        double w = 0.5 * (r.w[i] + r.w[j]);
        r.x[i] = -x;
        r.x[j] = x;
        r.w[i] = r.w[j] = w;
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    for (int i = 0; i < n; ++i) {
        r.x[i] = mid + half * r.x[i];
        r.w[i] *= half;
    }
    return r;
}

Rule1D sinh_trapezoid(int n, double L) {
    require_count(n, 2);
    const double S = std::asinh(L);
    const double h = 2.0 * S / (n - 1);
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        // build from the centre out so that x[i] == -x[n-1-i] bitwise
        double s = (i - 0.5 * (n - 1)) * h;
        r.x[i] = std::sinh(s);
        r.w[i] = h * std::cosh(s);
    }
    for (int i = 0; i < n / 2; ++i) {
        r.x[n - 1 - i] = -r.x[i];
        r.w[n - 1 - i] = r.w[i];
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    r.w.front() *= 0.5;
    r.w.back() *= 0.5;
    return r;
}

Rule1D uniform_midpoint(int n, double L) {
    require_count(n, 2);
    const double h = 2.0 * L / n;
    Rule1D r;
    r.x.resize(n);
    r.w.assign(n, h);
    for (int i = 0; i < n; ++i) r.x[i] = -L + (i + 0.5) * h;
    for (int i = 0; i < n / 2; ++i) r.x[n - 1 - i] = -r.x[i];
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

Rule1D exp_sinh_trapezoid(int n, double x_min, double x_max) {
    require_count(n, 2);
    if (!(x_min > 0.0) || !(x_max > x_min)) throw RangeError("exp_sinh_trapezoid: need 0 < x_min < x_max");
    const double t0 = std::asinh(2.0 * std::log(x_min) / M_PI);
    const double t1 = std::asinh(2.0 * std::log(x_max) / M_PI);
    const double h = (t1 - t0) / (n - 1);
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = t0 + i * h;
        double x = std::exp(0.5 * M_PI * std::sinh(t));
        r.x[i] = x;
        r.w[i] = h * x * 0.5 * M_PI * std::cosh(t);
    }
    r.x.back() = x_max;
    r.w.front() *= 0.5;
    r.w.back() *= 0.5;
    return r;
}

} // namespace marle
