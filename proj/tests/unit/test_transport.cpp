#include "doctest.h"

#include "marle/error.hpp"
#include "marle/random.hpp"
#include "marle/transport.hpp"

#include <cmath>
#include <numbers>

using namespace marle;

namespace {

GridPtr grid(int n_x = 16) {
    GridSpec s;
    s.n_p = 6;
    s.p_max = 14.0;
    s.n_I = 3;
    s.I_max = 14.0;
    s.n_x = n_x;
    return PhaseGrid::build(s);
}

SlabField random_field(const PhaseGrid& g, std::uint64_t seed) {
    CounterRng rng(seed);
    SlabField F(g.n_x(), g.size());
    for (double& v : F.values) v = rng.uniform(-1.0, 1.0);
    return F;
}

// same, with the Nyquist mode removed
SlabField band_limited(Transport& T, const PhaseGrid& g, std::uint64_t seed) {
    SlabField F = random_field(g, seed);
    Spectrum S;
    T.forward(F, S);
    const std::size_t m = static_cast<std::size_t>(T.n_modes() - 1);
    for (std::size_t k = 0; k < g.size(); ++k) S[m * g.size() + k] = 0.0;
    T.inverse(S, F);
    return F;
}

double max_abs_diff(const SlabField& a, const SlabField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

double norm2(const PhaseGrid& g, const SlabField& f) {
    double s = 0.0;
    for (int i = 0; i < f.n_x; ++i)
        for (std::size_t k = 0; k < f.n_pI; ++k) s += g.weights()[k] * f.cell(i)[k] * f.cell(i)[k];
    return s * g.dx();
}

} // namespace

TEST_CASE("spatially constant fields do not move") {
    const auto g = grid();
    Transport T(g);
    SlabField F(g->n_x(), g->size());
    for (int i = 0; i < F.n_x; ++i)
        for (std::size_t k = 0; k < F.n_pI; ++k) F.cell(i)[k] = 1.0 + 0.01 * k;
    const SlabField F0 = F;
    T.step(F, 0.37);
    CHECK(max_abs_diff(F, F0) < 1e-14);
}

TEST_CASE("a single Fourier mode shifts by exactly v t") {
    const auto g = grid();
    Transport T(g);
    const double L = g->spec().L_x, kx = 2.0 * std::numbers::pi * 3.0 / L, t = 0.81;
    SlabField F(g->n_x(), g->size());
    for (int i = 0; i < F.n_x; ++i)
        for (std::size_t k = 0; k < F.n_pI; ++k) F.cell(i)[k] = std::cos(kx * g->x(i) + 0.3);
    T.step(F, t);
    double err = 0.0;
    for (int i = 0; i < F.n_x; ++i)
        for (std::size_t k = 0; k < F.n_pI; ++k)
            err = std::max(err, std::abs(F.cell(i)[k] - std::cos(kx * (g->x(i) - T.velocity(k) * t) + 0.3)));
    CHECK(err < 1e-13);
    CHECK(T.wavenumber(3) == doctest::Approx(kx));
    const auto z = T.shift_factor(3, 0.5, t);
    CHECK(z.real() == doctest::Approx(std::cos(kx * 0.5 * t)));
    CHECK(z.imag() == doctest::Approx(-std::sin(kx * 0.5 * t)));
}

TEST_CASE("the Nyquist mode keeps only its real part") {
    const auto g = grid(8);
    Transport T(g);
    const double kN = std::numbers::pi / g->dx(), t = 0.2;
    SlabField F(g->n_x(), g->size());
    for (int i = 0; i < F.n_x; ++i)
        for (std::size_t k = 0; k < F.n_pI; ++k) F.cell(i)[k] = (i % 2 == 0) ? 1.0 : -1.0;
    const double n0 = norm2(*g, F);
    T.step(F, t);
    for (int i = 0; i < F.n_x; ++i)
        for (std::size_t k = 0; k < F.n_pI; k += 5)
            CHECK(F.cell(i)[k] ==
                  doctest::Approx(((i % 2 == 0) ? 1.0 : -1.0) * std::cos(kN * T.velocity(k) * t)).epsilon(1e-12));
    CHECK(norm2(*g, F) <= n0 * (1 + 1e-14));
}

TEST_CASE("group property and conservation for band-limited fields") {
    const auto g = grid();
    Transport T(g);
    const SlabField F = band_limited(T, *g, 5);
    SlabField a = F, b = F;
    T.step(a, 0.3);
    T.step(a, 0.3);
    T.step(b, 0.6);
    CHECK(max_abs_diff(a, b) < 1e-13);
    CHECK(norm2(*g, b) == doctest::Approx(norm2(*g, F)).epsilon(1e-13));
    for (std::size_t k = 0; k < g->size(); k += 11) {
        double s0 = 0.0, s1 = 0.0;
        for (int i = 0; i < F.n_x; ++i) {
            s0 += F.cell(i)[k];
            s1 += b.cell(i)[k];
        }
        CHECK(std::abs(s1 - s0) < 1e-12);
    }
    T.step(b, -0.6);
    CHECK(max_abs_diff(b, F) < 1e-13);
}

TEST_CASE("cell averages are conserved for arbitrary fields") {
    const auto g = grid();
    Transport T(g);
    const SlabField F = random_field(*g, 3);
    SlabField G = F;
    T.step(G, 1.7);
    for (std::size_t k = 0; k < g->size(); ++k) {
        double s0 = 0.0, s1 = 0.0;
        for (int i = 0; i < F.n_x; ++i) {
            s0 += F.cell(i)[k];
            s1 += G.cell(i)[k];
        }
        CHECK(std::abs(s1 - s0) < 1e-12);
    }
}

TEST_CASE("forward/inverse round trip") {
    const auto g = grid();
    Transport T(g);
    const SlabField F = random_field(*g, 2);
    Spectrum S;
    SlabField back;
    T.forward(F, S);
    CHECK(S.size() == static_cast<std::size_t>(T.n_modes()) * g->size());
    T.inverse(S, back);
    CHECK(max_abs_diff(back, F) < 1e-14);
}

TEST_CASE("energy functional") {
    const auto g = grid();
    Transport T(g);
    const double L = g->spec().L_x;
    SlabField zero(g->n_x(), g->size());
    CHECK(T.energy(zero, 3) == 0.0);
    CHECK_THROWS_AS(T.energy(zero, -1), RangeError);

    const SlabField F = random_field(*g, 9);
    CHECK(T.energy(F, 0) == doctest::Approx(norm2(*g, F)).epsilon(1e-13));
    double prev = 0.0;
    for (int N = 0; N <= 4; ++N) {
        const double E = T.energy(F, N);
        CHECK(E >= prev);
        prev = E;
    }

    // eps sin(2 pi x / L) g: eps^2 ||g||^2 (L/2) sum_{k<=N} (2 pi / L)^{2k}
    const double eps = 0.3;
    std::vector<double> gv(g->size());
    for (std::size_t k = 0; k < gv.size(); ++k) gv[k] = std::exp(-g->energy()[k]);
    SlabField f(g->n_x(), g->size());
    for (int i = 0; i < f.n_x; ++i)
        for (std::size_t k = 0; k < f.n_pI; ++k)
            f.cell(i)[k] = eps * std::sin(2 * std::numbers::pi * g->x(i) / L) * gv[k];
    const double g2 = g->dot(gv, gv);
    for (int N = 0; N <= 3; ++N) {
        double series = 0.0;
        for (int k = 0; k <= N; ++k) series += std::pow(2 * std::numbers::pi / L, 2 * k);
        CHECK(T.energy(f, N) == doctest::Approx(eps * eps * g2 * (L / 2) * series).epsilon(1e-12));
    }
}

TEST_CASE("energy of the Nyquist mode: odd derivatives vanish") {
    const auto g = grid(8);
    Transport T(g);
    const double kN = std::numbers::pi / g->dx();
    SlabField f(g->n_x(), g->size());
    for (int i = 0; i < f.n_x; ++i)
        for (std::size_t k = 0; k < f.n_pI; ++k) f.cell(i)[k] = (i % 2 == 0) ? 1.0 : -1.0;
    const double E0 = T.energy(f, 0);
    CHECK(T.energy(f, 1) == doctest::Approx(E0));
    CHECK(T.energy(f, 2) == doctest::Approx(E0 * (1.0 + std::pow(kN, 4))));
}
