#include "doctest.h"

#include "marle/collision.hpp"
#include "marle/error.hpp"
#include "marle/random.hpp"

#include <algorithm>
#include <cmath>

using namespace marle;

namespace {

BackgroundPtr background() {
    GridSpec s;
    s.n_p = 12;
    s.p_max = 14.0;
    s.n_I = 8;
    s.I_max = 14.0;
    return Background::make(PhaseGrid::build(s));
}

// F0 (1 + eps b) with b even in p, zero F0-mean
Field bump(const Background& bg, double eps) {
    const auto& g = *bg.grid;
    Field b(g.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        const std::size_t k = g.mom_index(i);
        const double p2 = g.p(0, k) * g.p(0, k) + g.p(1, k) * g.p(1, k) + g.p(2, k) * g.p(2, k);
        b[i] = std::exp(-p2) * (1.0 + 0.5 * g.I(g.int_index(i)));
    }
    const double mean = g.dot(b, bg.F0);
    Field F(b.size());
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = bg.F0[i] * (1.0 + eps * (b[i] / mean - 1.0));
    return F;
}

Field noisy(const Background& bg, double eps, std::uint64_t seed) {
    CounterRng rng(seed);
    Field F(bg.F0.size());
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = bg.F0[i] * (1.0 + eps * rng.uniform(-1.0, 1.0));
    return F;
}

// sum W (F_E - F) p^mu / p0 and sum W (F_E - F) / e, relative to the same sums of |F|
double matching_residual(const PhaseGrid& g, const Field& FE, const Field& F) {
    double r[5] = {}, s[5] = {};
    for (std::size_t i = 0; i < F.size(); ++i) {
        const std::size_t k = g.mom_index(i);
        const double w = g.weights()[i], d = FE[i] - F[i], a = std::abs(F[i]);
        const double phi[5] = {1.0, g.p(0, k) / g.p0(k), g.p(1, k) / g.p0(k), g.p(2, k) / g.p0(k),
                               1.0 / g.energy()[i]};
        for (int c = 0; c < 5; ++c) {
            r[c] += w * phi[c] * d;
            s[c] += w * std::abs(phi[c]) * a;
        }
    }
    double m = 0.0;
    for (int c = 0; c < 5; ++c) m = std::max(m, std::abs(r[c]) / s[c]);
    return m;
}

double invariant_drift(const PhaseGrid& g, const Field& a, const Field& b) {
    const auto ma = invariant_moments(g, a), mb = invariant_moments(g, b);
    double d = 0.0;
    for (int c = 0; c < 5; ++c) d = std::max(d, std::abs(ma[c] - mb[c]) / std::max(std::abs(ma[0]), std::abs(ma[1])));
    return d;
}

} // namespace

TEST_CASE("F0 is a fixed point") {
    const auto bg = background();
    const LocalEquilibrium le = local_equilibrium(*bg->jf, bg->F0);
    for (std::size_t i = 0; i < le.FE.size(); ++i) CHECK(le.FE[i] == doctest::Approx(bg->F0[i]).epsilon(1e-12));
    CHECK(conservation_defect(*bg->jf, bg->F0, 1.0).max_rel() < 1e-13);
}

TEST_CASE("Juttner fields are fixed points") {
    const auto bg = background();
    Macrostate s;
    s.n = 0.8;
    s.u = {0.1, 0.05, -0.2};
    s.gamma = 1.3;
    const Field F = eval_juttner(*bg->jf, s);
    const LocalEquilibrium le = local_equilibrium(*bg->jf, F);
    for (std::size_t i = 0; i < F.size(); ++i)
        CHECK(le.FE[i] == doctest::Approx(F[i]).epsilon(1e-10).scale(1e-300));
    const Field rhs = bgk_rhs(*bg->jf, F, 1.0);
    double m = 0.0, f = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) {
        m = std::max(m, std::abs(rhs[i]));
        f = std::max(f, F[i]);
    }
    CHECK(m < 1e-11 * f);
}

TEST_CASE("bump: local equilibrium matches the five moments") {
    const auto bg = background();
    const Field F = bump(*bg, 0.1);
    const LocalEquilibrium le = local_equilibrium(*bg->jf, F);
    CHECK(le.residual < 1e-12);
    CHECK(matching_residual(*bg->grid, le.FE, F) < 1e-12);
    const ConservationDefect d = conservation_defect(*bg->jf, F, 1.0);
    for (double r : d.rel) CHECK(r <= 1e-9);
}

TEST_CASE("bgk_rhs vanishes only at Juttner fields") {
    const auto bg = background();
    const Field F = noisy(*bg, 0.05, 3);
    const Field rhs = bgk_rhs(*bg->jf, F, 1.0);
    CHECK(bg->grid->norm(rhs) > 1e-3 * 0.05 * bg->grid->norm(bg->F0));
}

TEST_CASE("entropy production is non-negative") {
    const auto bg = background();
    const auto& g = *bg->grid;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Field F = noisy(*bg, 0.1, seed);
        const Field rhs = bgk_rhs(*bg->jf, F, 1.0);
        double prod = 0.0;
        for (std::size_t i = 0; i < F.size(); ++i) prod -= g.weights()[i] * (1.0 + std::log(F[i])) * rhs[i];
        CHECK(prod >= -1e-12);
    }
}

TEST_CASE("frozen step: long times give F_E") {
    const auto bg = background();
    const Field F = bump(*bg, 0.1);
    const Field FE = local_equilibrium(*bg->jf, F).FE;
    const Field out = relaxation_step(*bg->jf, F, 1e6, 1.0, {RelaxationKind::frozen, 0});
    for (std::size_t i = 0; i < F.size(); ++i) CHECK(out[i] == doctest::Approx(FE[i]).epsilon(1e-12).scale(1e-300));
}

TEST_CASE("frozen drift is second order in dt; picard(3) cuts it tenfold") {
    const auto bg = background();
    const auto& g = *bg->grid;
    const Field F = noisy(*bg, 0.1, 5);
    auto drift = [&](double dt, RelaxationMode m) {
        return invariant_drift(g, F, relaxation_step(*bg->jf, F, dt, 1.0, m));
    };
    const RelaxationMode frozen{RelaxationKind::frozen, 0};
    const double d1 = drift(0.2, frozen), d2 = drift(0.1, frozen), d3 = drift(0.05, frozen);
    CHECK(std::log2(d1 / d2) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::log2(d2 / d3) == doctest::Approx(2.0).epsilon(0.1));
    const double dp = drift(0.1, {RelaxationKind::picard, 3});
    CHECK(dp <= d2 / 10);
}

TEST_CASE("conservative step: exact invariants, entropy increase, positivity") {
    const auto bg = background();
    const auto& g = *bg->grid;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Field F = noisy(*bg, 0.1, seed);
        for (double dt : {0.01, 0.5, 10.0}) {
            const Field out = relaxation_step(*bg->jf, F, dt, 1.0);
            CHECK(invariant_drift(g, F, out) < 1e-13);
            CHECK(entropy_density(g, out) >= entropy_density(g, F));
            CHECK(*std::min_element(out.begin(), out.end()) >= 0.0);
        }
    }
}

TEST_CASE("every mode maps non-negative fields to non-negative fields") {
    const auto bg = background();
    Field F = noisy(*bg, 0.1, 9);
    // zero a block of nodes
    for (std::size_t i = 0; i < F.size(); i += 7) F[i] = 0.0;
    for (auto kind : {RelaxationKind::frozen, RelaxationKind::picard, RelaxationKind::conservative}) {
        const Field out = relaxation_step(*bg->jf, F, 0.3, 1.0, {kind, 2});
        CHECK(*std::min_element(out.begin(), out.end()) >= 0.0);
    }
}

TEST_CASE("weighted equilibrium matches the weighted invariants") {
    const auto bg = background();
    const auto& g = *bg->grid;
    const Field F = noisy(*bg, 0.1, 2);
    Field w(F.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = -std::expm1(-0.7 / g.energy()[i]);
    const Field Fb = weighted_equilibrium(*bg->jf, F, w, macrostate_of(*bg->jf, F));
    Field a(F.size()), b(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) {
        a[i] = w[i] * Fb[i];
        b[i] = w[i] * F[i];
    }
    const auto ma = invariant_moments(g, a), mb = invariant_moments(g, b);
    for (int c = 0; c < 5; ++c) CHECK(std::abs(ma[c] - mb[c]) < 1e-13 * std::abs(mb[1]));
}

TEST_CASE("bad arguments") {
    const auto bg = background();
    CHECK_THROWS_AS(relaxation_step(*bg->jf, bg->F0, 0.0, 1.0), RangeError);
    CHECK_THROWS_AS(relaxation_kind_from_string("implicit"), ConfigError);
    CHECK(relaxation_kind_from_string(to_string(RelaxationKind::picard)) == RelaxationKind::picard);
}
