#include "doctest.h"

#include "marle/error.hpp"
#include "marle/phase_grid.hpp"

#include "json.hpp"

#include <cmath>
#include <string>

using namespace marle;

namespace {

GridSpec small() {
    GridSpec s;
    s.n_p = 8;
    s.p_max = 14.0;
    s.n_I = 6;
    s.I_max = 14.0;
    return s;
}

std::string failing_field(GridSpec s) {
    try {
        s.validate();
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

} // namespace

TEST_CASE("validation names the offending field") {
    GridSpec s;
    s.D = -1;
    CHECK(failing_field(s) == "D");
    s = GridSpec{};
    s.n_p = 1;
    CHECK(failing_field(s) == "n_p");
    s = GridSpec{};
    s.p_max = 3.0;
    CHECK(failing_field(s) == "p_max");
    s = GridSpec{};
    s.I_max = 2.0;
    CHECK(failing_field(s) == "I_max");
    s = GridSpec{};
    s.gamma0 = 0.0;
    CHECK(failing_field(s) == "gamma0");
    CHECK(failing_field(GridSpec{}).empty());
    CHECK(failing_field(small()).empty());
}

TEST_CASE("layout, weights and energies") {
    const auto g = PhaseGrid::build(small());
    CHECK(g->n_mom() == 512);
    CHECK(g->size() == 512 * 6);
    for (std::size_t idx = 0; idx < g->size(); ++idx) {
        const std::size_t k = g->mom_index(idx), j = g->int_index(idx);
        CHECK(idx == k * 6 + j);
        CHECK(g->weights()[idx] > 0.0);
        CHECK(g->energy()[idx] == doctest::Approx((1.0 + g->I(j)) * g->p0(k)).epsilon(1e-15));
        const double p2 = g->p(0, k) * g->p(0, k) + g->p(1, k) * g->p(1, k) + g->p(2, k) * g->p(2, k);
        CHECK(g->p0(k) == doctest::Approx(std::sqrt(1.0 + p2)).epsilon(1e-15));
    }
}

TEST_CASE("mirror map reflects momentum and keeps weights") {
    const auto g = PhaseGrid::build(small());
    for (std::size_t idx = 0; idx < g->size(); ++idx) {
        const std::size_t m = g->mirror(idx);
        CHECK(g->mirror(m) == idx);
        CHECK(g->weights()[m] == g->weights()[idx]);
        for (int a = 0; a < 3; ++a) CHECK(g->p(a, g->mom_index(m)) == -g->p(a, g->mom_index(idx)));
    }
}

TEST_CASE("odd moments vanish, dot and norm agree") {
    const auto g = PhaseGrid::build(small());
    std::vector<double> f(g->size()), v1(g->size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = std::exp(-g->energy()[i]);
        v1[i] = g->p(0, g->mom_index(i));
    }
    CHECK(std::abs(g->integrate_pI(f, v1)) < 1e-15 * g->integrate_pI(f));
    CHECK(g->norm(f) == doctest::Approx(std::sqrt(g->dot(f, f))));
}

TEST_CASE("alternative rules converge to the default-grid integral") {
    auto integral = [](const GridSpec& s) {
        const auto g = PhaseGrid::build(s);
        std::vector<double> f(g->size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-g->energy()[i]);
        return g->integrate_pI(f);
    };
    const double base = integral(GridSpec{});
    for (auto rule : {MomentumRule::gauss, MomentumRule::uniform}) {
        GridSpec s;
        s.p_max = 14.0;
        s.momentum_rule = rule;
        double prev = 1.0;
        for (int n : {20, 30, 40}) {
            s.n_p = n;
            const double err = std::abs(integral(s) / base - 1.0);
            CHECK(err < prev / 3);
            prev = err;
        }
        CHECK(prev < 5e-3);
    }
    GridSpec s;
    s.internal_rule = InternalRule::gauss_jacobi;
    double prev = 1.0;
    for (int n : {10, 20, 30}) {
        s.n_I = n;
        const double err = std::abs(integral(s) / base - 1.0);
        CHECK(err < prev / 10);
        prev = err;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("describe lists nodes and weights") {
    const auto g = PhaseGrid::build(small());
    const auto j = g->describe();
    CHECK(j.at("axis_nodes").size() == 8);
    CHECK(j.at("internal_weights").size() == 6);
    CHECK(j.at("momentum_rule") == "sinh");
}

TEST_CASE("rule names round-trip") {
    for (auto r : {MomentumRule::sinh, MomentumRule::uniform, MomentumRule::gauss})
        CHECK(momentum_rule_from_string(to_string(r)) == r);
    for (auto r : {InternalRule::exp_sinh, InternalRule::gauss_jacobi})
        CHECK(internal_rule_from_string(to_string(r)) == r);
    CHECK_THROWS_AS(momentum_rule_from_string("simpson"), ConfigError);
}

TEST_CASE("spatial grid") {
    const auto g = PhaseGrid::build(small());
    CHECK(g->dx() * g->n_x() == doctest::Approx(g->spec().L_x));
    CHECK(g->x(0) == 0.0);
}
