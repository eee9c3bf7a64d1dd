#include "doctest.h"

#include "oracles.hpp"

#include "marle/error.hpp"
#include "marle/linear_analysis.hpp"
#include "marle/moments.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace marle;

namespace {

BackgroundPtr background(int n_p = 12, int n_I = 8) {
    GridSpec s;
    s.n_p = n_p;
    s.p_max = 14.0;
    s.n_I = n_I;
    s.I_max = 14.0;
    return Background::make(PhaseGrid::build(s));
}

Field scaled(const Field& f, double a) {
    Field r(f);
    for (double& v : r) v *= a;
    return r;
}

double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("basis is orthonormal") {
    const auto bg = background();
    const LinearOperator op(bg);
    const auto& g = *bg->grid;
    const auto& B = op.basis();
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) CHECK(std::abs(g.dot(B.e[a], B.e[b]) - (a == b)) < 1e-12);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(B.e[0][i] == doctest::Approx(bg->sqrtF0[i]));
    CHECK(B.delta == doctest::Approx(bg->consts.delta).epsilon(1e-13));
}

TEST_CASE("P0 fixes the kernel fields and kills symmetric-orthogonal fields") {
    const auto bg = background();
    const auto& g = *bg->grid;
    for (auto form : {OperatorForm::grid_consistent, OperatorForm::continuum}) {
        const LinearOperator op(bg, form);
        // the continuum form is exact only up to the quadrature error in gamma_hat - gamma0
        const double tol = form == OperatorForm::grid_consistent ? 1e-10 : 1e-4;
        for (int a = 0; a < 5; ++a) {
            const Field& e = op.basis().e[a];
            CHECK(max_abs_diff(op.apply_P0(e), e) <= tol * g.norm(e));
            CHECK(g.norm(op.apply_L(e)) <= tol * g.norm(e));
        }
    }
    const LinearOperator op(bg);
    Field f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const std::size_t k = g.mom_index(i);
        f[i] = g.p(0, k) * g.p(1, k) * (1.0 + g.I(g.int_index(i))) * bg->sqrtF0[i];
    }
    CHECK(g.norm(op.apply_P0(f)) < 1e-14 * g.norm(f));
}

TEST_CASE("low-rank and direct P0 agree; L is self-adjoint and dissipative") {
    const auto bg = background();
    const auto& g = *bg->grid;
    const LinearOperator op(bg);
    const CounterRng root(21);
    for (int k = 0; k < 100; ++k) {
        CounterRng rng = root.split(k);
        const Field f = random_perturbation(op, rng), h = random_perturbation(op, rng);
        CHECK(max_abs_diff(op.apply_P0(f), op.apply_P0_lowrank(f)) < 1e-13 * g.norm(f));
        const Field Lf = op.apply_L(f), Lh = op.apply_L(h);
        CHECK(std::abs(g.dot(Lf, h) - g.dot(f, Lh)) <= 1e-12 * g.norm(f) * g.norm(h));
        CHECK(g.dot(Lf, f) <= 0.0);
        // L P = 0
        CHECK(g.norm(op.apply_L(op.apply_P(f))) < 1e-10 * g.norm(f));
    }
}

TEST_CASE("projection: idempotent and reconstructed from its coefficients") {
    const auto bg = background();
    const auto& g = *bg->grid;
    const LinearOperator op(bg);
    CounterRng rng(4);
    for (int k = 0; k < 10; ++k) {
        const Field f = random_perturbation(op, rng);
        const Field Pf = op.apply_P(f);
        CHECK(max_abs_diff(op.apply_P(Pf), Pf) < 1e-13 * g.norm(f));
        CHECK(max_abs_diff(op.reconstruct(op.micro_macro(f)), Pf) < 1e-13 * g.norm(f));
    }
}

TEST_CASE("micro-macro coefficients") {
    const auto bg = background();
    const auto& g = *bg->grid;
    const LinearOperator op(bg);
    const auto& B = op.basis();
    const double delta = B.delta;

    const MicroMacroCoeffs c1 = op.micro_macro(scaled(B.e[0], 3.0));
    CHECK(c1.a == doctest::Approx(3.0));
    for (double b : c1.b) CHECK(std::abs(b) < 1e-13);
    CHECK(std::abs(c1.c) < 1e-13);

    // f = alpha s + beta (1+I)p0 s, then P f = f = (alpha + beta delta) s + beta ((1+I)p0 - delta) s,
    // so a = alpha + beta delta, c = beta and a_tilde = alpha
    const double alpha = 0.7, beta = -1.9;
    Field f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = (alpha + beta * g.energy()[i]) * bg->sqrtF0[i];
    const MicroMacroCoeffs c2 = op.micro_macro(f);
    CHECK(c2.a == doctest::Approx(alpha + beta * delta).epsilon(1e-12));
    CHECK(c2.c == doctest::Approx(beta).epsilon(1e-12));
    CHECK(c2.a_tilde == doctest::Approx(alpha).epsilon(1e-11));

    // e5 itself: a = 0, c = 1/||((1+I)p0 - delta) s||, a_tilde = -delta c
    Field raw5(g.size());
    for (std::size_t i = 0; i < raw5.size(); ++i) raw5[i] = (g.energy()[i] - delta) * bg->sqrtF0[i];
    const MicroMacroCoeffs c5 = op.micro_macro(B.e[4]);
    CHECK(std::abs(c5.a) < 1e-12);
    CHECK(c5.c == doctest::Approx(1.0 / g.norm(raw5)).epsilon(1e-12));
    CHECK(c5.a_tilde == doctest::Approx(-delta * c5.c).epsilon(1e-12));
    CHECK(max_abs_diff(op.reconstruct(c5), B.e[4]) < 1e-13);
}

TEST_CASE("spectral gap matches a dense eigensolve on a tiny grid") {
    const auto bg = background(4, 3);
    const auto& g = *bg->grid;
    const LinearOperator op(bg);
    const std::size_t N = g.size();
    // symmetric form W^{1/2} (-L) W^{-1/2}
    Eigen::MatrixXd A(N, N);
    Field unit(N, 0.0);
    for (std::size_t j = 0; j < N; ++j) {
        unit[j] = 1.0;
        const Field col = op.apply_L(unit);
        unit[j] = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            A(i, j) = -col[i] * std::sqrt(g.weights()[i]) / std::sqrt(g.weights()[j]);
    }
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-12 * A.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
    const auto& ev = es.eigenvalues();
    for (int k = 0; k < 5; ++k) CHECK(std::abs(ev(k)) < 1e-11 * ev(N - 1));
    const SpectralReport rep = op.spectral_gap();
    CHECK(rep.kernel_count == 5);
    CHECK(rep.lambda == doctest::Approx(ev(5)).epsilon(1e-10));
    CHECK(rep.lambda <= rep.lambda_hi);
    CHECK(rep.residual < 1e-10);
    // eigenvalues sitting on a repeated collision frequency are exact multiples; probe only clear gaps
    int probes = 0;
    for (std::size_t k = 5; k + 1 < N; ++k) {
        if (ev(k + 1) - ev(k) < 1e-6 * ev(k + 1)) continue;
        const double x = 0.5 * (ev(k) + ev(k + 1));
        CHECK(op.count_below(x) == static_cast<int>(k + 1));
        ++probes;
    }
    CHECK(probes > 10);
    CHECK(op.count_below(1.01 * ev(N - 1)) == static_cast<int>(N));
}

TEST_CASE("coercivity with the reported gap") {
    const auto bg = background();
    const auto& g = *bg->grid;
    const LinearOperator op(bg);
    const SpectralReport rep = op.spectral_gap();
    CHECK(rep.lambda > 0.0);
    CHECK(rep.lambda >= rep.nu_min * (1 - 1e-12));
    CHECK(rep.lambda <= rep.nu_6 * (1 + 1e-12));
    CounterRng rng(8);
    for (int k = 0; k < 50; ++k) {
        const Field f = random_perturbation(op, rng);
        Field micro = f;
        const Field Pf = op.apply_P(f);
        for (std::size_t i = 0; i < f.size(); ++i) micro[i] -= Pf[i];
        const double nm = g.norm(micro);
        CHECK(g.dot(op.apply_L(f), f) + rep.lambda * nm * nm <= 1e-10 * g.dot(f, f));
    }
}

TEST_CASE("nonlinear parts: exact decompositions") {
    const auto bg = background();
    const auto& g = *bg->grid;
    const LinearOperator op(bg);
    const NonlinearParts zero = nonlinear_parts(*bg, Field(g.size(), 0.0));
    CHECK(zero.N_n == 0.0);
    CHECK(zero.N_eta == 0.0);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        CounterRng rng(seed);
        const Field f = scaled(random_perturbation(op, rng), 1e-3);
        const Macrostate m = macrostate_of(*bg->jf, from_perturbation(*bg, f));
        const NonlinearParts np = nonlinear_parts(*bg, f);
        CHECK(std::abs(m.n - 1.0 - np.n_minus_1()) < 1e-13);
        const Vec3 u = np.u();
        for (int a = 0; a < 3; ++a) CHECK(std::abs(m.u[a] - u[a]) < 1e-13);
        CHECK(std::abs(m.eta - bg->consts.eta0 - eta_minus_eta0(*bg, np)) < 1e-13);
    }
}

TEST_CASE("nonlinear parts are quadratic in the amplitude") {
    const auto bg = background();
    const LinearOperator op(bg);
    CounterRng rng(3);
    const Field f = random_perturbation(op, rng);
    auto size = [&](double eps) {
        const NonlinearParts np = nonlinear_parts(*bg, scaled(f, eps));
        return std::sqrt(np.N_n * np.N_n + np.N_u[0] * np.N_u[0] + np.N_u[1] * np.N_u[1] + np.N_u[2] * np.N_u[2] +
                         np.N_eta * np.N_eta);
    };
    const double e1 = 1e-4, e2 = 1e-1;
    // least squares over four decades
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double e = e1; e <= e2 * 1.0001; e *= 10.0, ++n) {
        const double x = std::log(e), y = std::log(size(e));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("out of the small-data region is reported") {
    const auto bg = background();
    Field f(bg->F0.size());
    const auto& g = *bg->grid;
    // bulk velocity beyond the light cone: 1 + Phi = (1+A)^2 - |B|^2 < 0
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 10.0 * g.p(0, g.mom_index(i)) / g.p0(g.mom_index(i)) * bg->sqrtF0[i];
    CHECK_THROWS_AS(nonlinear_parts(*bg, f), SmallDataError);
}

TEST_CASE("Hessian Q matches finite differences of the parametrized Juttner field") {
    const auto bg = background();
    const auto& g = *bg->grid;
    const auto& jf = *bg->jf;
    TransitionalState st;
    st.n = 1.05;
    st.u = {0.03, -0.02, 0.01};
    st.eta = bg->consts.eta0 + 0.002;
    st.gamma = jf.solve_gamma(st.eta);
    auto F = [&](const double* x, std::size_t k, std::size_t j) {
        return juttner_param(jf, x[0], {x[1], x[2], x[3]}, x[4], k, j);
    };
    const std::size_t nodes[][2] = {{0, 0}, {g.n_mom() / 2, 2}, {g.n_mom() / 3, 5}, {g.n_mom() - 7, 7}};
    for (const auto& nd : nodes) {
        const std::size_t k = nd[0], j = nd[1];
        const Mat5 Q = eval_hessian_Q(jf, st, k, j);
        // each step moves the exponent by about 1e-2
        const double e = (1.0 + g.I(j)) * g.p0(k);
        const double hu = 1e-2 / std::max(1.0, st.gamma * e);
        const double h[5] = {1e-2, hu, hu, hu, 1e-2 / std::max(1.0, std::abs(bg->consts.kappa) * e)};
        const double x0[5] = {st.n, st.u[0], st.u[1], st.u[2], st.eta};
        const double F0v = F(x0, k, j);
        Mat5 H;
        for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b) {
                // nested fourth-order first differences
                auto dF_b = [&](double xa) {
                    double x[5];
                    std::copy(x0, x0 + 5, x);
                    x[a] = xa;
                    return oracle::derivative(
                        [&](double xb) {
                            double y[5];
                            std::copy(x, x + 5, y);
                            y[b] = xb;
                            return F(y, k, j);
                        },
                        x[b], h[b]);
                };
                H(a, b) = oracle::derivative(dF_b, x0[a], h[a]);
            }
        const Mat5 QF = Q * F0v;
        CHECK((QF - H).norm() <= 1e-6 * H.norm());
        CHECK((Q - Q.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(Q(0, 0) == 0.0);
    }
}

TEST_CASE("Hessian at the global equilibrium") {
    const auto bg = background();
    const auto& g = *bg->grid;
    const auto& c = bg->consts;
    TransitionalState st;
    st.eta = c.eta0;
    st.gamma = c.gamma0;
    for (std::size_t k : {std::size_t(0), g.n_mom() / 2})
        for (std::size_t j : {std::size_t(0), std::size_t(4)}) {
            const Mat5 Q = eval_hessian_Q(*bg->jf, st, k, j);
            const double e = (1.0 + g.I(j)) * g.p0(k);
            CHECK(Q(0, 4) == doctest::Approx(c.kappa * (c.Mprime0 / c.M0 + e)).epsilon(1e-12));
        }
}

TEST_CASE("Gamma: two evaluation paths agree, vanish at zero, scale quadratically") {
    const auto bg = background();
    const auto& g = *bg->grid;
    const LinearOperator op(bg);
    const Field zero(g.size(), 0.0);
    CHECK(g.norm(gamma_direct(*bg, zero)) == 0.0);
    CHECK(g.norm(gamma_defect(bg, zero)) < 1e-13);
    CounterRng rng(12);
    const Field f = random_perturbation(op, rng);
    for (double eps : {1e-3, 1e-2}) {
        const Field fe = scaled(f, eps);
        const Field d8 = gamma_direct(*bg, fe, 8), d16 = gamma_direct(*bg, fe, 16);
        const Field df = gamma_defect(bg, fe);
        Field diff(g.size()), quad(g.size());
        for (std::size_t i = 0; i < diff.size(); ++i) {
            diff[i] = d8[i] - df[i];
            quad[i] = d8[i] - d16[i];
        }
        CHECK(g.norm(diff) <= std::max(10.0 * g.norm(quad), 1e-12));
    }
    const double r = g.norm(gamma_defect(bg, scaled(f, 1e-3))) / g.norm(gamma_defect(bg, scaled(f, 1e-4)));
    CHECK(std::log10(r) == doctest::Approx(2.0).epsilon(0.02));
}
