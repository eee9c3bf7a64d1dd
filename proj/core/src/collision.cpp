#include "marle/collision.hpp"

#include "marle/error.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace marle {

std::string to_string(RelaxationKind k) {
    switch (k) {
    case RelaxationKind::frozen: return "frozen";
    case RelaxationKind::picard: return "picard";
    case RelaxationKind::conservative: return "conservative";
    }
    return "?";
}

RelaxationKind relaxation_kind_from_string(const std::string& s) {
    if (s == "frozen") return RelaxationKind::frozen;
    if (s == "picard") return RelaxationKind::picard;
    if (s == "conservative") return RelaxationKind::conservative;
    throw ConfigError("collision_mode", "unknown relaxation mode '" + s + "'");
}

double ConservationDefect::max_rel() const {
    double m = 0.0;
    for (double r : rel) m = std::max(m, r);
    return m;
}

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

// z = (log alpha, u1, u2, u3, gamma); F_E = exp(z0 - gamma (1+I)(u0 p0 - u.p))
struct MatchSystem {
    const PhaseGrid& g;
    const Field& F;
    Vec5 target;
    Vec5 scale;

    MatchSystem(const PhaseGrid& grid, const Field& f) : g(grid), F(f) {
        target.setZero();
        scale.setZero();
        const auto& W = g.weights();
        const int nI = g.n_I();
        for (std::size_t k = 0; k < g.n_mom(); ++k) {
            const double ip0 = 1.0 / g.p0(k);
            double s0 = 0.0, s1 = 0.0, a0 = 0.0, a1 = 0.0;
            for (int j = 0; j < nI; ++j) {
                const std::size_t i = k * nI + j;
                s0 += W[i] * F[i];
                a0 += W[i] * std::abs(F[i]);
                s1 += W[i] * F[i] / (1.0 + g.I(j));
                a1 += W[i] * std::abs(F[i]) / (1.0 + g.I(j));
            }
            target(0) += s0;
            scale(0) += a0;
            for (int a = 0; a < 3; ++a) {
                target(1 + a) += g.p(a, k) * ip0 * s0;
                scale(1 + a) += std::abs(g.p(a, k)) * ip0 * a0;
            }
            target(4) += ip0 * s1;
            scale(4) += ip0 * a1;
        }
    }

    // residual (moments of F_E - F) and Jacobian
    void eval(const Vec5& z, Vec5& R, Mat5* J) const {
        const auto& W = g.weights();
        const int nI = g.n_I();
        const double u1 = z(1), u2 = z(2), u3 = z(3), gam = z(4);
        const double u0 = std::sqrt(1.0 + u1 * u1 + u2 * u2 + u3 * u3);
        R.setZero();
        if (J) J->setZero();
        for (std::size_t k = 0; k < g.n_mom(); ++k) {
            const double p0 = g.p0(k), px = g.p(0, k), py = g.p(1, k), pz = g.p(2, k);
            const double w = u0 * p0 - (u1 * px + u2 * py + u3 * pz);
            const double wi[3] = {u1 * p0 / u0 - px, u2 * p0 / u0 - py, u3 * p0 / u0 - pz};
            // per momentum node: sums over I of W F_E, W (1+I) F_E, and the same divided by (1+I)
            double A0 = 0.0, A1 = 0.0, B0 = 0.0, B1 = 0.0;
            for (int j = 0; j < nI; ++j) {
                const std::size_t i = k * nI + j;
                const double oI = 1.0 + g.I(j);
                const double fe = W[i] * std::exp(z(0) - gam * oI * w);
                A0 += fe;
                A1 += fe * oI;
                B0 += fe / oI;
                B1 += fe;
            }
            const double ip0 = 1.0 / p0;
            const double phi[5] = {1.0, px * ip0, py * ip0, pz * ip0, 0.0};
            // rows 0..3: phi_mu = p^mu/p0 acting on A-sums; row 4: 1/((1+I)p0) acting on B-sums
            for (int r = 0; r < 4; ++r) R(r) += phi[r] * A0;
            R(4) += ip0 * B0;
            if (J) {
                for (int r = 0; r < 4; ++r) {
                    (*J)(r, 0) += phi[r] * A0;
                    for (int c = 0; c < 3; ++c) (*J)(r, 1 + c) += -gam * wi[c] * phi[r] * A1;
                    (*J)(r, 4) += -w * phi[r] * A1;
                }
                (*J)(4, 0) += ip0 * B0;
                for (int c = 0; c < 3; ++c) (*J)(4, 1 + c) += -gam * wi[c] * ip0 * B1;
                (*J)(4, 4) += -w * ip0 * B1;
            }
        }
        R -= target;
    }

    double rel_norm(const Vec5& R) const {
        double m = 0.0;
        const double s0 = scale(0) > 0.0 ? scale(0) : 1.0;
        for (int r = 0; r < 5; ++r) m = std::max(m, std::abs(R(r)) / std::max(scale(r), 1e-300 * s0 + 1e-300));
        return m;
    }
};

Macrostate state_from(const JuttnerFunctions& jf, const Vec5& z) {
    Macrostate s;
    s.u = {z(1), z(2), z(3)};
    s.gamma = z(4);
    s.n = std::exp(z(0) + jf.log_M(s.gamma));
    s.eta = jf.eta_of_gamma(s.gamma);
    return s;
}

} // namespace

LocalEquilibrium local_equilibrium(const JuttnerFunctions& jf, const Field& F) {
    const PhaseGrid& g = jf.g();
    MatchSystem sys(g, F);
    const Macrostate s0 = macrostate_of(jf, F);
    Vec5 z;
    z << std::log(s0.n) - jf.log_M(s0.gamma), s0.u[0], s0.u[1], s0.u[2], s0.gamma;

    Vec5 R;
    Mat5 J;
    sys.eval(z, R, &J);
    double res = sys.rel_norm(R);
    int it = 0;
    for (; it < 60 && res > 1e-15; ++it) {
        Vec5 dz = J.fullPivLu().solve(-R);
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            Vec5 zt = z + step * dz;
            if (zt(4) > 0.0) {
                Vec5 Rt;
                sys.eval(zt, Rt, nullptr);
                double rt = sys.rel_norm(Rt);
                if (std::isfinite(rt) && rt < res) {
                    z = zt;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) break;
        sys.eval(z, R, &J);
        res = sys.rel_norm(R);
    }
    if (!(res < 1e-10)) throw ConvergenceError("local_equilibrium: moment matching stalled at " + std::to_string(res));

    LocalEquilibrium out;
    out.state = state_from(jf, z);
    out.iterations = it;
    out.residual = res;
    out.FE = eval_juttner(jf, out.state);
    return out;
}

Field bgk_rhs(const JuttnerFunctions& jf, const Field& F, double tau) {
    const LocalEquilibrium le = local_equilibrium(jf, F);
    const auto& e = jf.g().energy();
    Field r(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) r[i] = (le.FE[i] - F[i]) / (tau * e[i]);
    return r;
}

ConservationDefect defect_of(const PhaseGrid& g, const Field& rhs, const Field& F, double tau) {
    ConservationDefect d;
    std::array<double, 5> sc{};
    const auto& W = g.weights();
    const auto& e = g.energy();
    const int nI = g.n_I();
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        const double pmu[4] = {g.p0(k), g.p(0, k), g.p(1, k), g.p(2, k)};
        for (int j = 0; j < nI; ++j) {
            const std::size_t i = k * nI + j;
            const double oI = 1.0 + g.I(j);
            const double a = std::abs(F[i]) / (tau * e[i]);
            d.abs[0] += W[i] * rhs[i];
            sc[0] += W[i] * a;
            for (int m = 0; m < 4; ++m) {
                d.abs[1 + m] += W[i] * oI * pmu[m] * rhs[i];
                sc[1 + m] += W[i] * oI * std::abs(pmu[m]) * a;
            }
        }
    }
    for (int m = 0; m < 5; ++m) {
        d.rel[m] = sc[m] > 0.0 ? std::abs(d.abs[m]) / sc[m] : std::abs(d.abs[m]);
        d.abs[m] = std::abs(d.abs[m]);
    }
    return d;
}

ConservationDefect conservation_defect(const JuttnerFunctions& jf, const Field& F, double tau) {
    return defect_of(jf.g(), bgk_rhs(jf, F, tau), F, tau);
}

Field weighted_equilibrium(const JuttnerFunctions& jf, const Field& F, const Field& w, const Macrostate& guess) {
    const PhaseGrid& g = jf.g();
    const auto& W = g.weights();
    const int nI = g.n_I();
    // log Fbar = c0 + (1+I)(b0 p0 + b.p); phi = {1, (1+I)p0, (1+I)p}
    Vec5 target = Vec5::Zero(), scale = Vec5::Zero();
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        const double pmu[4] = {g.p0(k), g.p(0, k), g.p(1, k), g.p(2, k)};
        for (int j = 0; j < nI; ++j) {
            const std::size_t i = k * nI + j;
            const double oI = 1.0 + g.I(j);
            const double a = W[i] * w[i] * F[i];
            target(0) += a;
            scale(0) += std::abs(a);
            for (int m = 0; m < 4; ++m) {
                target(1 + m) += a * oI * pmu[m];
                scale(1 + m) += std::abs(a * oI * pmu[m]);
            }
        }
    }
    const double u0 = guess.u0();
    Vec5 lam;
    lam << std::log(guess.n) - jf.log_M(guess.gamma), -guess.gamma * u0, guess.gamma * guess.u[0],
        guess.gamma * guess.u[1], guess.gamma * guess.u[2];

    // convex dual: Phi = sum W w Fbar - lam . target
    auto eval = [&](const Vec5& l, Vec5* G, Mat5* H) {
        double phi = 0.0;
        if (G) G->setZero();
        if (H) H->setZero();
        for (std::size_t k = 0; k < g.n_mom(); ++k) {
            const double pmu[4] = {g.p0(k), g.p(0, k), g.p(1, k), g.p(2, k)};
            const double lin = l(1) * pmu[0] + l(2) * pmu[1] + l(3) * pmu[2] + l(4) * pmu[3];
            double s0 = 0.0, s1 = 0.0, s2 = 0.0;
            for (int j = 0; j < nI; ++j) {
                const std::size_t i = k * nI + j;
                const double oI = 1.0 + g.I(j);
                const double fb = W[i] * w[i] * std::exp(l(0) + oI * lin);
                s0 += fb;
                s1 += fb * oI;
                s2 += fb * oI * oI;
            }
            phi += s0;
            if (G) {
                (*G)(0) += s0;
                for (int m = 0; m < 4; ++m) (*G)(1 + m) += s1 * pmu[m];
            }
            if (H) {
                (*H)(0, 0) += s0;
                for (int m = 0; m < 4; ++m) {
                    (*H)(0, 1 + m) += s1 * pmu[m];
                    for (int n = m; n < 4; ++n) (*H)(1 + m, 1 + n) += s2 * pmu[m] * pmu[n];
                }
            }
        }
        if (G) *G -= target;
        if (H)
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < a; ++b) (*H)(a, b) = (*H)(b, a);
        return phi - l.dot(target);
    };
    auto rel = [&](const Vec5& G) {
        double m = 0.0;
        for (int a = 0; a < 5; ++a) m = std::max(m, std::abs(G(a)) / (scale(a) > 0.0 ? scale(a) : 1.0));
        return m;
    };

    Vec5 G;
    Mat5 H;
    double phi = eval(lam, &G, &H);
    for (int it = 0; it < 60 && rel(G) > 1e-15; ++it) {
        Vec5 d = H.ldlt().solve(-G);
        const double slope = G.dot(d);
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            Vec5 lt = lam + step * d;
            Vec5 Gt;
            double pt = eval(lt, &Gt, nullptr);
            if (std::isfinite(pt) && (pt <= phi + 1e-4 * step * slope || rel(Gt) < rel(G))) {
                lam = lt;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        phi = eval(lam, &G, &H);
    }
    if (!(rel(G) < 1e-10)) throw ConvergenceError("weighted_equilibrium: stalled at " + std::to_string(rel(G)));

    Field Fb(g.size());
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        const double lin = lam(1) * g.p0(k) + lam(2) * g.p(0, k) + lam(3) * g.p(1, k) + lam(4) * g.p(2, k);
        for (int j = 0; j < nI; ++j) Fb[k * nI + j] = std::exp(lam(0) + (1.0 + g.I(j)) * lin);
    }
    return Fb;
}

Field relaxation_step(const JuttnerFunctions& jf, const Field& F, double dt, double tau, const RelaxationMode& mode) {
    if (!(dt > 0.0)) throw RangeError("relaxation_step: dt must be positive");
    const auto& e = jf.g().energy();
    const std::size_t N = F.size();
    const LocalEquilibrium le = local_equilibrium(jf, F);
    Field out(N);
    Field decay(N);
    for (std::size_t i = 0; i < N; ++i) decay[i] = std::exp(-dt / (tau * e[i]));

    switch (mode.kind) {
    case RelaxationKind::frozen:
        for (std::size_t i = 0; i < N; ++i) out[i] = le.FE[i] + decay[i] * (F[i] - le.FE[i]);
        break;
    case RelaxationKind::picard: {
        // F_E taken linear in time across the substep; g(x) = 1 - (1 - e^{-x})/x
        Field gx(N);
        for (std::size_t i = 0; i < N; ++i) {
            const double x = dt / (tau * e[i]);
            gx[i] = x < 1e-3 ? x / 2.0 - x * x / 6.0 + x * x * x / 24.0 : 1.0 + std::expm1(-x) / x;
        }
        for (std::size_t i = 0; i < N; ++i) out[i] = le.FE[i] + decay[i] * (F[i] - le.FE[i]);
        for (int it = 0; it < mode.picard_iters; ++it) {
            const LocalEquilibrium end = local_equilibrium(jf, out);
            for (std::size_t i = 0; i < N; ++i)
                out[i] = le.FE[i] + decay[i] * (F[i] - le.FE[i]) + gx[i] * (end.FE[i] - le.FE[i]);
        }
        break;
    }
    case RelaxationKind::conservative: {
        Field w(N);
        for (std::size_t i = 0; i < N; ++i) w[i] = -std::expm1(-dt / (tau * e[i]));
        const Field Fb = weighted_equilibrium(jf, F, w, le.state);
        for (std::size_t i = 0; i < N; ++i) out[i] = w[i] * Fb[i] + (1.0 - w[i]) * F[i];
        break;
    }
    }
    return out;
}

} // namespace marle
