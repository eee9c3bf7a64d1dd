#include "marle/moments.hpp"

#include "marle/error.hpp"

#include <cmath>

namespace marle {

MomentSet compute_moments(const PhaseGrid& g, const Field& F) {
    MomentSet m;
    const auto& W = g.weights();
    const int nI = g.n_I();
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        const double pmu[4] = {g.p0(k), g.p(0, k), g.p(1, k), g.p(2, k)};
        double s0 = 0.0, s1 = 0.0;
        for (int j = 0; j < nI; ++j) {
            const std::size_t idx = k * nI + j;
            const double v = F[idx];
            if (!std::isfinite(v)) throw NonFiniteError("compute_moments: non-finite field value");
            s0 += W[idx] * v;
            s1 += W[idx] * (1.0 + g.I(j)) * v;
        }
        const double inv = 1.0 / pmu[0];
        for (int a = 0; a < 4; ++a) {
            m.V[a] += pmu[a] * s0 * inv;
            for (int b = a; b < 4; ++b) m.T[a][b] += pmu[a] * pmu[b] * s1 * inv;
        }
    }
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < a; ++b) m.T[a][b] = m.T[b][a];
    m.h0 = entropy_density(g, F);
    return m;
}

std::pair<double, Vec3> eckart_decompose(const MomentSet& m) {
    const double n2 = m.V[0] * m.V[0] - (m.V[1] * m.V[1] + m.V[2] * m.V[2] + m.V[3] * m.V[3]);
    if (!(m.V[0] > 0.0) || !(n2 > 0.0))
        throw DegenerateMomentsError("eckart_decompose: particle flux is not timelike");
    const double n = std::sqrt(n2);
    return {n, Vec3{m.V[1] / n, m.V[2] / n, m.V[3] / n}};
}

double compute_eta(const PhaseGrid& g, const Field& F, double n) {
    if (!(n > 0.0)) throw DegenerateMomentsError("compute_eta: n must be positive");
    const auto& W = g.weights();
    const auto& e = g.energy();
    double s = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i) s += W[i] * F[i] / e[i];
    if (!std::isfinite(s)) throw NonFiniteError("compute_eta: non-finite field value");
    return s / n;
}

Macrostate macrostate_of(const JuttnerFunctions& jf, const Field& F) {
    const auto& g = jf.g();
    MomentSet m;
    const auto& W = g.weights();
    const int nI = g.n_I();
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        double s0 = 0.0;
        for (int j = 0; j < nI; ++j) s0 += W[k * nI + j] * F[k * nI + j];
        m.V[0] += s0;
        for (int a = 0; a < 3; ++a) m.V[a + 1] += g.p(a, k) / g.p0(k) * s0;
    }
    if (!std::isfinite(m.V[0])) throw NonFiniteError("macrostate_of: non-finite field value");
    auto [n, u] = eckart_decompose(m);
    Macrostate s;
    s.n = n;
    s.u = u;
    s.eta = compute_eta(g, F, n);
    s.gamma = jf.solve_gamma(s.eta);
    return s;
}

double entropy_density(const PhaseGrid& g, const Field& F) {
    const auto& W = g.weights();
    double h = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i)
        if (F[i] >= kEntropyFloor) h -= W[i] * F[i] * std::log(F[i]);
    return h;
}

std::array<double, 5> invariant_moments(const PhaseGrid& g, const Field& F) {
    std::array<double, 5> r{};
    const auto& W = g.weights();
    const int nI = g.n_I();
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        double s0 = 0.0, s1 = 0.0;
        for (int j = 0; j < nI; ++j) {
            s0 += W[k * nI + j] * F[k * nI + j];
            s1 += W[k * nI + j] * (1.0 + g.I(j)) * F[k * nI + j];
        }
        r[0] += s0;
        r[1] += g.p0(k) * s1;
        for (int a = 0; a < 3; ++a) r[2 + a] += g.p(a, k) * s1;
    }
    return r;
}

} // namespace marle
