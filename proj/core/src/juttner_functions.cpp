#include "marle/juttner_functions.hpp"

#include "marle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace marle {

JuttnerFunctions::JuttnerFunctions(GridPtr grid, double gamma_lo, double gamma_hi)
    : grid_(std::move(grid)), lo_(gamma_lo), hi_(gamma_hi) {
    if (!(gamma_lo > 0.0) || !(gamma_hi > gamma_lo)) throw ConfigError("gamma_bracket", "need 0 < lo < hi");
    eta_lo_ = eta_of_gamma(lo_);
    eta_hi_ = eta_of_gamma(hi_);
}

void JuttnerFunctions::scaled_sums(double gamma, int kmax, double* S, double* St) const {
    if (!(gamma > 0.0)) throw RangeError("gamma must be positive, got " + std::to_string(gamma));
    const auto& W = grid_->weights();
    const auto& e = grid_->energy();
    const double emin = grid_->e_min();
    for (int k = 0; k <= kmax; ++k) S[k] = 0.0;
    double st = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i) {
        double w = W[i] * std::exp(-gamma * (e[i] - emin));
        st += w / e[i];
        double t = w;
        for (int k = 0; k <= kmax; ++k) {
            S[k] += t;
            t *= -e[i];
        }
    }
    if (St) *St = st;
}

double JuttnerFunctions::eval_M(double gamma, int order) const {
    if (order < 0 || order > 8) throw RangeError("eval_M: order out of range");
    double S[9];
    scaled_sums(gamma, order, S, nullptr);
    return S[order] * std::exp(-gamma * grid_->e_min());
}

double JuttnerFunctions::eval_Mtilde(double gamma, int order) const {
    if (order < 0 || order > 9) throw RangeError("eval_Mtilde: order out of range");
    if (order >= 1) return -eval_M(gamma, order - 1);
    double S[1], St;
    scaled_sums(gamma, 0, S, &St);
    return St * std::exp(-gamma * grid_->e_min());
}

double JuttnerFunctions::log_M(double gamma) const {
    double S[1];
    scaled_sums(gamma, 0, S, nullptr);
    return std::log(S[0]) - gamma * grid_->e_min();
}

double JuttnerFunctions::eta_of_gamma(double gamma) const {
    double S[1], St;
    scaled_sums(gamma, 0, S, &St);
    return St / S[0];
}

double JuttnerFunctions::eta_slope(double gamma) const {
    double S[2], St;
    scaled_sums(gamma, 1, S, &St);
    // (Mt/M)' = -(M^2 + M' Mt)/M^2
    return -(S[0] * S[0] + S[1] * St) / (S[0] * S[0]);
}

double JuttnerFunctions::solve_gamma(double eta) const {
    return solve_gamma(eta, 1.0);
}

double JuttnerFunctions::solve_gamma(double eta, double guess) const {
    if (!std::isfinite(eta) || !(eta > eta_lo_) || !(eta < eta_hi_))
        throw RangeError("solve_gamma: eta = " + std::to_string(eta) + " outside attainable range (" +
                         std::to_string(eta_lo_) + ", " + std::to_string(eta_hi_) + ")");
    // bracketed Newton in log(gamma)
    double a = std::log(lo_), b = std::log(hi_);
    double x = std::log(std::clamp(guess, lo_, hi_));
    for (int it = 0; it < 200; ++it) {
        const double gamma = std::exp(x);
        double S[2], St;
        scaled_sums(gamma, 1, S, &St);
        const double r = St / S[0] - eta;
        if (r == 0.0) return gamma;
        if (r < 0.0)
            a = x;
        else
            b = x;
        const double slope = -(S[0] * S[0] + S[1] * St) / (S[0] * S[0]) * gamma;
        double xn = x - r / slope;
        if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
        const double step = std::abs(xn - x);
        x = xn;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)) ||
            b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            return std::exp(x);
    }
    throw ConvergenceError("solve_gamma: no convergence for eta = " + std::to_string(eta));
}

RatioDerivs JuttnerFunctions::ratio_derivs(double gamma) const {
    double S[3], St;
    scaled_sums(gamma, 2, S, &St);
    RatioDerivs r{};
    // common scale factor cancels in every ratio below
    r.M = S[0];
    r.M1 = S[1];
    r.M2 = S[2];
    r.Mt = St;
    r.m = S[1] / S[0];
    r.dm = S[2] / S[0] - r.m * r.m;
    const double den = S[0] * S[0] + S[1] * St;
    // Mt' = -M
    const double dden = 2.0 * S[0] * S[1] + S[2] * St - S[1] * S[0];
    r.kappa = S[0] * S[0] / den;
    r.dkappa = (2.0 * S[0] * S[1] * den - S[0] * S[0] * dden) / (den * den);
    const double scale = std::exp(-gamma * grid_->e_min());
    r.M *= scale;
    r.M1 *= scale;
    r.M2 *= scale;
    r.Mt *= scale;
    return r;
}

EquilibriumConstants JuttnerFunctions::equilibrium_constants(double gamma0) const {
    double S[3], St;
    scaled_sums(gamma0, 2, S, &St);
    const double scale = std::exp(-gamma0 * grid_->e_min());
    EquilibriumConstants c;
    c.gamma0 = gamma0;
    c.M0 = S[0] * scale;
    c.Mprime0 = S[1] * scale;
    c.Mpp0 = S[2] * scale;
    c.Mtilde0 = St * scale;
    c.eta0 = St / S[0];
    c.m = S[1] / S[0];
    c.delta = -c.m;
    c.kappa = S[0] * S[0] / (S[0] * S[0] + S[1] * St);

    const auto& g = *grid_;
    const auto& W = g.weights();
    const auto& e = g.energy();
    const double lM = std::log(S[0]) - gamma0 * g.e_min();
    double q = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i) {
        const std::size_t k = g.mom_index(i);
        const double pp = g.p(0, k) * g.p(0, k) + g.p(1, k) * g.p(1, k) + g.p(2, k) * g.p(2, k);
        const double I = g.I(g.int_index(i));
        q += W[i] * (1.0 + I) * pp / g.p0(k) * std::exp(-gamma0 * e[i] - lM);
    }
    c.gamma_hat = 3.0 / q;
    return c;
}

} // namespace marle
