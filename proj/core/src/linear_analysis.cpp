#include "marle/linear_analysis.hpp"

#include "marle/error.hpp"
#include "marle/moments.hpp"
#include "marle/quadrature.hpp"
#include "marle/random.hpp"

#include <algorithm>
#include <cmath>

namespace marle {

OrthonormalBasis build_basis(const Background& bg) {
    const PhaseGrid& g = *bg.grid;
    const auto& s = bg.sqrtF0;
    const std::size_t N = g.size();
    const int nI = g.n_I();
    OrthonormalBasis B;
    B.delta = bg.consts.delta;
    for (auto& v : B.e) v.resize(N);
    for (std::size_t k = 0; k < g.n_mom(); ++k)
        for (int j = 0; j < nI; ++j) {
            const std::size_t i = k * nI + j;
            const double oI = 1.0 + g.I(j);
            B.e[0][i] = s[i];
            for (int a = 0; a < 3; ++a) B.e[1 + a][i] = oI * g.p(a, k) * s[i];
            B.e[4][i] = (oI * g.p0(k) - B.delta) * s[i];
        }
    for (int a = 0; a < 5; ++a) {
        B.norm[a] = 1.0 / g.norm(B.e[a]);
        for (double& x : B.e[a]) x *= B.norm[a];
    }
    return B;
}

LinearOperator::LinearOperator(BackgroundPtr bg, OperatorForm form)
    : bg_(std::move(bg)), form_(form), basis_(build_basis(*bg_)) {
    const auto& c = bg_->consts;
    gmom_ = form == OperatorForm::grid_consistent ? c.gamma_hat : c.gamma0;
    const PhaseGrid& g = *bg_->grid;
    const std::size_t N = g.size();
    const int nI = g.n_I();
    for (auto& v : lr_.v) v.resize(N);
    lr_.nu = bg_->inv_e;
    for (std::size_t k = 0; k < g.n_mom(); ++k)
        for (int j = 0; j < nI; ++j) {
            const std::size_t i = k * nI + j;
            const double s = bg_->sqrtF0[i];
            lr_.v[0][i] = s;
            lr_.v[1][i] = s * bg_->inv_e[i];
            for (int a = 0; a < 3; ++a) lr_.v[2 + a][i] = g.p(a, k) / g.p0(k) * s;
        }
    lr_.C.setZero();
    lr_.C(0, 0) = -c.kappa * c.eta0;
    lr_.C(0, 1) = lr_.C(1, 0) = c.kappa;
    lr_.C(1, 1) = c.kappa * c.m;
    for (int a = 0; a < 3; ++a) lr_.C(2 + a, 2 + a) = gmom_;
}

Field LinearOperator::apply_P0(const Field& f) const {
    const PhaseGrid& g = *bg_->grid;
    const auto& s = bg_->sqrtF0;
    const auto& c = bg_->consts;
    const int nI = g.n_I();
    double A = 0.0, E = 0.0;
    double Bm[3] = {0.0, 0.0, 0.0};
    const auto& W = g.weights();
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        double a = 0.0;
        for (int j = 0; j < nI; ++j) {
            const std::size_t i = k * nI + j;
            a += W[i] * f[i] * s[i];
            E += W[i] * f[i] * s[i] * bg_->inv_e[i];
        }
        A += a;
        for (int d = 0; d < 3; ++d) Bm[d] += g.p(d, k) / g.p0(k) * a;
    }
    const double eta_coef = c.kappa * (E - c.eta0 * A);
    Field out(f.size());
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        const double pb = gmom_ * (Bm[0] * g.p(0, k) + Bm[1] * g.p(1, k) + Bm[2] * g.p(2, k));
        for (int j = 0; j < nI; ++j) {
            const std::size_t i = k * nI + j;
            const double oI = 1.0 + g.I(j);
            out[i] = (A + oI * pb + eta_coef * (c.m + oI * g.p0(k))) * s[i];
        }
    }
    return out;
}

Field LinearOperator::apply_P0_lowrank(const Field& f) const {
    const PhaseGrid& g = *bg_->grid;
    Vec5 mom;
    for (int a = 0; a < 5; ++a) mom(a) = g.dot(lr_.v[a], f);
    const Vec5 coef = lr_.C * mom;
    Field out(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        double acc = 0.0;
        for (int a = 0; a < 5; ++a) acc += lr_.v[a][i] * coef(a);
        out[i] = acc / lr_.nu[i];
    }
    return out;
}

Field LinearOperator::apply_L(const Field& f) const {
    Field out = apply_P0(f);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = bg_->inv_e[i] * (out[i] - f[i]);
    return out;
}

Field LinearOperator::apply_P(const Field& f) const {
    const PhaseGrid& g = *bg_->grid;
    Field out(f.size(), 0.0);
    for (int a = 0; a < 5; ++a) {
        const double c = g.dot(f, basis_.e[a]);
        for (std::size_t i = 0; i < f.size(); ++i) out[i] += c * basis_.e[a][i];
    }
    return out;
}

MicroMacroCoeffs LinearOperator::micro_macro(const Field& f) const {
    const PhaseGrid& g = *bg_->grid;
    MicroMacroCoeffs m;
    m.a = g.dot(f, basis_.e[0]) * basis_.norm[0];
    for (int d = 0; d < 3; ++d) m.b[d] = g.dot(f, basis_.e[1 + d]) * basis_.norm[1 + d];
    m.c = g.dot(f, basis_.e[4]) * basis_.norm[4];
    m.a_tilde = m.a - basis_.delta * m.c;
    return m;
}

Field LinearOperator::reconstruct(const MicroMacroCoeffs& m) const {
    const PhaseGrid& g = *bg_->grid;
    const int nI = g.n_I();
    Field out(g.size());
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        const double bp = m.b[0] * g.p(0, k) + m.b[1] * g.p(1, k) + m.b[2] * g.p(2, k);
        for (int j = 0; j < nI; ++j) {
            const std::size_t i = k * nI + j;
            const double oI = 1.0 + g.I(j);
            out[i] = (m.a + oI * bp + m.c * (oI * g.p0(k) - basis_.delta)) * bg_->sqrtF0[i];
        }
    }
    return out;
}

int LinearOperator::count_below(double x) const {
    // Haynsworth: In(D - x - V C V^T W) = In(D - x) + In(C^{-1} - V^T W (D - x)^{-1} V) - In(C^{-1})
    const auto& W = bg_->grid->weights();
    const std::size_t N = W.size();
    Mat5 S = lr_.C.inverse();
    int neg_c = 0;
    {
        Eigen::SelfAdjointEigenSolver<Mat5> es(S, Eigen::EigenvaluesOnly);
        for (int a = 0; a < 5; ++a) neg_c += es.eigenvalues()(a) < 0.0;
    }
    int neg_d = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double d = lr_.nu[i] - x;
        if (d == 0.0) d = -1e-300;
        if (d < 0.0) ++neg_d;
        const double w = W[i] / d;
        double v[5];
        for (int a = 0; a < 5; ++a) v[a] = lr_.v[a][i];
        for (int a = 0; a < 5; ++a)
            for (int b = a; b < 5; ++b) S(a, b) -= w * v[a] * v[b];
    }
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < a; ++b) S(a, b) = S(b, a);
    Eigen::SelfAdjointEigenSolver<Mat5> es(S, Eigen::EigenvaluesOnly);
    int neg_s = 0;
    for (int a = 0; a < 5; ++a) neg_s += es.eigenvalues()(a) < 0.0;
    return neg_d + neg_s - neg_c;
}

SpectralReport LinearOperator::spectral_gap(const GapOptions& opt) const {
    SpectralReport rep;
    const PhaseGrid& g = *bg_->grid;
    const auto& W = g.weights();
    const std::size_t N = W.size();

    Field sorted = lr_.nu;
    std::nth_element(sorted.begin(), sorted.begin() + 5, sorted.end());
    rep.nu_6 = sorted[5];
    rep.nu_min = *std::min_element(sorted.begin(), sorted.begin() + 6);

    // -L = nu - V C V^T W with C positive definite of rank 5: lambda_6 lies in [nu_(1), nu_(6)]
    double lo = 0.5 * rep.nu_min;
    rep.kernel_count = count_below(lo);
    if (rep.kernel_count != 5)
        throw ConvergenceError("spectral_gap: expected a 5-dimensional kernel, found " +
                               std::to_string(rep.kernel_count) + " eigenvalues below nu_min/2");
    double hi = rep.nu_6 * (1.0 + 1e-12);
    if (count_below(hi) < 6) throw ConvergenceError("spectral_gap: sixth eigenvalue not below nu_(6)");
    int steps = 0;
    while (hi - lo > opt.rel_tol * hi && steps < opt.max_bisection) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(mid) >= 6)
            hi = mid;
        else
            lo = mid;
        ++steps;
    }
    if (hi - lo > opt.rel_tol * hi) throw ConvergenceError("spectral_gap: bisection did not converge");
    rep.lambda = lo;
    rep.lambda_hi = hi;
    rep.bisection_steps = steps;

    // eigenvector by shifted inverse iteration (Woodbury) in the complement of the kernel
    const double sigma = lo - 1e-6 * (hi + lo);
    Field Ainv(N);
    for (std::size_t i = 0; i < N; ++i) Ainv[i] = 1.0 / (lr_.nu[i] - sigma);
    Mat5 Mm = lr_.C.inverse();
    std::array<Field, 5> AV;
    for (int a = 0; a < 5; ++a) {
        AV[a].resize(N);
        for (std::size_t i = 0; i < N; ++i) AV[a][i] = Ainv[i] * lr_.v[a][i];
    }
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) Mm(a, b) -= g.dot(lr_.v[a], AV[b]);
    const auto Mlu = Mm.fullPivLu();

    auto deflate = [&](Field& y) {
        for (int a = 0; a < 5; ++a) {
            const double c = g.dot(y, basis_.e[a]);
            for (std::size_t i = 0; i < N; ++i) y[i] -= c * basis_.e[a][i];
        }
    };
    auto apply_neg_L = [&](const Field& y) {
        Field r = apply_L(y);
        for (double& v : r) v = -v;
        return r;
    };

    CounterRng rng(opt.seed);
    Field y(N);
    for (double& v : y) v = rng.normal();
    deflate(y);
    for (int it = 0; it < opt.inverse_iterations; ++it) {
        Field z(N);
        Vec5 t;
        for (std::size_t i = 0; i < N; ++i) z[i] = Ainv[i] * y[i];
        for (int a = 0; a < 5; ++a) t(a) = g.dot(lr_.v[a], z);
        const Vec5 q = Mlu.solve(t);
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            for (int a = 0; a < 5; ++a) acc += AV[a][i] * q(a);
            z[i] += acc;
        }
        deflate(z);
        const double nz = g.norm(z);
        for (std::size_t i = 0; i < N; ++i) y[i] = z[i] / nz;
        rep.inverse_iterations = it + 1;
    }
    const Field Ly = apply_neg_L(y);
    rep.rayleigh = g.dot(y, Ly);
    Field r(N);
    for (std::size_t i = 0; i < N; ++i) r[i] = Ly[i] - rep.rayleigh * y[i];
    rep.residual = g.norm(r);
    return rep;
}

Field random_perturbation(const LinearOperator& op, CounterRng& rng) {
    const auto& B = op.basis();
    Field f(B.e[0].size());
    for (double& v : f) v = rng.normal();
    for (int a = 0; a < 5; ++a) {
        const double c = rng.normal();
        for (std::size_t i = 0; i < f.size(); ++i) f[i] += c * B.e[a][i];
    }
    return f;
}

OperatorDiagnostics analyze_operator(const LinearOperator& op, int samples, std::uint64_t seed,
                                     const GapOptions& opt) {
    const PhaseGrid& g = *op.background().grid;
    const auto& B = op.basis();
    OperatorDiagnostics d;
    d.samples = samples;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
            d.gram_residual = std::max(d.gram_residual, std::abs(g.dot(B.e[a], B.e[b]) - (a == b ? 1.0 : 0.0)));
    for (int a = 0; a < 5; ++a) {
        Field r = op.apply_P0(B.e[a]);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= B.e[a][i];
        d.kernel_residuals[a] = g.norm(r) / g.norm(B.e[a]);
    }
    d.gap = op.spectral_gap(opt);
    const CounterRng root(seed);
    if (samples > 0) d.coercivity_worst = -INFINITY;
    for (int k = 0; k < samples; ++k) {
        CounterRng rng = root.split(static_cast<std::uint64_t>(k));
        const Field f = random_perturbation(op, rng);
        const Field h = random_perturbation(op, rng);
        const double nf = g.norm(f), nh = g.norm(h);
        const Field Lf = op.apply_L(f), Lh = op.apply_L(h);
        d.self_adjoint_residual = std::max(d.self_adjoint_residual, std::abs(g.dot(Lf, h) - g.dot(f, Lh)) / (nf * nh));
        const Field P0 = op.apply_P0(f), P0l = op.apply_P0_lowrank(f);
        double diff = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) diff = std::max(diff, std::abs(P0[i] - P0l[i]));
        d.lowrank_residual = std::max(d.lowrank_residual, diff / nf);
        const Field Pf = op.apply_P(f);
        Field micro(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) micro[i] = f[i] - Pf[i];
        const double nm = g.norm(micro);
        d.coercivity_worst =
            std::max(d.coercivity_worst, (g.dot(Lf, f) + d.gap.lambda * nm * nm) / (nf * nf));
    }
    return d;
}

NonlinearParts nonlinear_parts(const Background& bg, const Field& f) {
    const PhaseGrid& g = *bg.grid;
    const auto& W = g.weights();
    const int nI = g.n_I();
    NonlinearParts r;
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        double a = 0.0;
        for (int j = 0; j < nI; ++j) {
            const std::size_t i = k * nI + j;
            const double fs = W[i] * f[i] * bg.sqrtF0[i];
            a += fs;
            r.E += fs * bg.inv_e[i];
        }
        r.A += a;
        for (int d = 0; d < 3; ++d) r.B[d] += g.p(d, k) / g.p0(k) * a;
    }
    if (!std::isfinite(r.A) || !std::isfinite(r.E)) throw NonFiniteError("nonlinear_parts: non-finite input");
    const double B2 = r.B[0] * r.B[0] + r.B[1] * r.B[1] + r.B[2] * r.B[2];
    r.Phi = 2.0 * r.A + r.A * r.A - B2;
    if (!(1.0 + r.Phi > 0.0)) throw SmallDataError("nonlinear_parts: 1 + Phi <= 0");
    r.N_n = 0.5 * r.A * r.A - 0.5 * B2 - r.Phi * r.Phi / (2.0 * (2.0 + r.Phi + 2.0 * std::sqrt(1.0 + r.Phi)));
    r.Psi = r.A + r.N_n;
    if (!(1.0 + r.Psi > 0.0)) throw SmallDataError("nonlinear_parts: 1 + Psi <= 0");
    const double q = r.Psi / (1.0 + r.Psi);
    for (int d = 0; d < 3; ++d) r.N_u[d] = -q * r.B[d];
    const double eta0 = bg.consts.eta0;
    r.N_eta = -eta0 * r.N_n + eta0 * r.Psi * r.Psi / (1.0 + r.Psi) - q * r.E;
    return r;
}

double eta_minus_eta0(const Background& bg, const NonlinearParts& np) {
    return -bg.consts.eta0 * np.A + np.E + np.N_eta;
}

Mat5 eval_hessian_Q(const PhaseGrid& g, const TransitionalState& st, const RatioDerivs& rd, std::size_t k,
                    std::size_t j) {
    const double oI = 1.0 + g.I(j);
    const double p0 = g.p0(k);
    const double p[3] = {g.p(0, k), g.p(1, k), g.p(2, k)};
    const auto& u = st.u;
    const double uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    const double u0 = std::sqrt(1.0 + uu);
    const double X = st.gamma;
    const double w = u0 * p0 - (u[0] * p[0] + u[1] * p[1] + u[2] * p[2]);
    double wi[3];
    for (int a = 0; a < 3; ++a) wi[a] = u[a] * p0 / u0 - p[a];
    const double kap = rd.kappa;
    const double br = rd.m + oI * w;

    Mat5 Q;
    Q(0, 0) = 0.0;
    for (int a = 0; a < 3; ++a) Q(0, 1 + a) = -X * oI * wi[a] / st.n;
    Q(0, 4) = kap * br / st.n;
    const double u03 = u0 * u0 * u0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const double curv = ((a == b ? 1.0 / u0 : 0.0) - u[a] * u[b] / u03) * p0;
            Q(1 + a, 1 + b) = X * X * oI * oI * wi[a] * wi[b] - X * oI * curv;
        }
    for (int a = 0; a < 3; ++a) Q(1 + a, 4) = kap * oI * wi[a] - X * oI * wi[a] * kap * br;
    Q(4, 4) = kap * kap * br * br - kap * rd.dkappa * br - kap * kap * rd.dm;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < a; ++b) Q(a, b) = Q(b, a);
    return Q;
}

Mat5 eval_hessian_Q(const JuttnerFunctions& jf, const TransitionalState& st, std::size_t k, std::size_t j) {
    if (!(st.n > 0.0)) throw SmallDataError("eval_hessian_Q: n must be positive");
    TransitionalState s = st;
    s.gamma = jf.solve_gamma(st.eta, st.gamma);
    return eval_hessian_Q(jf.g(), s, jf.ratio_derivs(s.gamma), k, j);
}

double juttner_param(const JuttnerFunctions& jf, double n, const Vec3& u, double eta, std::size_t k, std::size_t j) {
    const auto& g = jf.g();
    const double gam = jf.solve_gamma(eta);
    const double u0 = std::sqrt(1.0 + u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    const double w = u0 * g.p0(k) - (u[0] * g.p(0, k) + u[1] * g.p(1, k) + u[2] * g.p(2, k));
    return n * std::exp(-jf.log_M(gam) - gam * (1.0 + g.I(j)) * w);
}

Field gamma_direct(const Background& bg, const Field& f, int theta_order) {
    const PhaseGrid& g = *bg.grid;
    const JuttnerFunctions& jf = *bg.jf;
    const auto& c = bg.consts;
    const int nI = g.n_I();
    const std::size_t N = g.size();
    const NonlinearParts np = nonlinear_parts(bg, f);
    Vec5 delta;
    const Vec3 u = np.u();
    delta << np.n_minus_1(), u[0], u[1], u[2], eta_minus_eta0(bg, np);

    Field out(N);
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        const double pn = np.N_u[0] * g.p(0, k) + np.N_u[1] * g.p(1, k) + np.N_u[2] * g.p(2, k);
        for (int j = 0; j < nI; ++j) {
            const std::size_t i = k * nI + j;
            const double oI = 1.0 + g.I(j);
            out[i] = (np.N_n + c.gamma0 * oI * pn + c.kappa * (c.m + oI * g.p0(k)) * np.N_eta) * bg.sqrtF0[i];
        }
    }

    // Taylor remainder int_0^1 (1-theta) Delta^T Q_theta Delta F_theta dtheta
    const Rule1D th = gauss_legendre(theta_order, 0.0, 1.0);
    Field rem(N, 0.0);
    for (int q = 0; q < theta_order; ++q) {
        const double t = th.x[q];
        TransitionalState st;
        st.n = 1.0 + t * delta(0);
        st.u = {t * delta(1), t * delta(2), t * delta(3)};
        st.eta = c.eta0 + t * delta(4);
        if (!(st.n > 0.0)) throw SmallDataError("gamma_direct: transitional density not positive");
        st.gamma = jf.solve_gamma(st.eta, c.gamma0);
        const RatioDerivs rd = jf.ratio_derivs(st.gamma);
        Macrostate ms;
        ms.n = st.n;
        ms.u = st.u;
        ms.gamma = st.gamma;
        const Field lF = log_juttner(jf, ms);
        const double wq = th.w[q] * (1.0 - t);
        for (std::size_t k = 0; k < g.n_mom(); ++k)
            for (int j = 0; j < nI; ++j) {
                const std::size_t i = k * nI + j;
                const Mat5 Q = eval_hessian_Q(g, st, rd, k, j);
                rem[i] += wq * delta.dot(Q * delta) * std::exp(lF[i] - bg.log_sqrtF0[i]);
            }
    }
    for (std::size_t i = 0; i < N; ++i) out[i] = bg.inv_e[i] * (out[i] + rem[i]);
    return out;
}

Field gamma_defect(const BackgroundPtr& bgp, const Field& f) {
    const Background& bg = *bgp;
    const JuttnerFunctions& jf = *bg.jf;
    const Field F = from_perturbation(bg, f);
    const Macrostate st = macrostate_of(jf, F);
    const Field lFE = log_juttner(jf, st);
    const LinearOperator L(bgp, OperatorForm::continuum);
    const Field Lf = L.apply_L(f);
    Field out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        out[i] = bg.inv_e[i] * (std::exp(lFE[i] - bg.log_sqrtF0[i]) - bg.sqrtF0[i] - f[i]) - Lf[i];
    return out;
}

} // namespace marle
