#include "marle/phase_grid.hpp"

#include "marle/error.hpp"
#include "marle/quadrature.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace marle {

namespace {

// sqrt(F0) ~ exp(-gamma0 e / 2) must stay a normal double
constexpr double kMaxHalfExponent = 700.0;

} // namespace

std::string to_string(MomentumRule r) {
    switch (r) {
    case MomentumRule::sinh: return "sinh";
    case MomentumRule::uniform: return "uniform";
    case MomentumRule::gauss: return "gauss";
    }
    return "?";
}

std::string to_string(InternalRule r) {
    switch (r) {
    case InternalRule::exp_sinh: return "exp_sinh";
    case InternalRule::gauss_jacobi: return "gauss_jacobi";
    }
    return "?";
}

MomentumRule momentum_rule_from_string(const std::string& s) {
    if (s == "sinh") return MomentumRule::sinh;
    if (s == "uniform") return MomentumRule::uniform;
    if (s == "gauss") return MomentumRule::gauss;
    throw ConfigError("momentum_rule", "unknown rule '" + s + "'");
}

InternalRule internal_rule_from_string(const std::string& s) {
    if (s == "exp_sinh") return InternalRule::exp_sinh;
    if (s == "gauss_jacobi") return InternalRule::gauss_jacobi;
    throw ConfigError("internal_rule", "unknown rule '" + s + "'");
}

void GridSpec::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name, "must be a finite positive number");
    };
    positive(D, "D");
    positive(p_max, "p_max");
    positive(I_max, "I_max");
    positive(L_x, "L_x");
    positive(gamma0, "gamma0");
    positive(tau, "tau");
    positive(tail_tol, "tail_tol");
    positive(floor_tol, "floor_tol");
    if (n_p < 2) throw ConfigError("n_p", "must be at least 2");
    if (n_I < 2) throw ConfigError("n_I", "must be at least 2");
    if (n_x < 2) throw ConfigError("n_x", "must be at least 2");

    const double p0_max = std::sqrt(1.0 + p_max * p_max);
    if (std::exp(-gamma0 * (1.0 + I_max)) > tail_tol)
        throw ConfigError("I_max", "cutoff too small for gamma0: exp(-gamma0 (1+I_max)) exceeds tail_tol");
    if (std::exp(-gamma0 * p0_max) > tail_tol)
        throw ConfigError("p_max", "cutoff too small for gamma0: exp(-gamma0 p0(p_max)) exceeds tail_tol");
    const double e_max = (1.0 + I_max) * std::sqrt(1.0 + 3.0 * p_max * p_max);
    if (0.5 * gamma0 * e_max > kMaxHalfExponent)
        throw ConfigError("p_max", "cutoffs so large that sqrt(F0) underflows at the box corner");
    if (internal_rule == InternalRule::exp_sinh) {
        const double I_min = std::pow(floor_tol * D / 2.0, 2.0 / D);
        if (!(I_min < I_max)) throw ConfigError("floor_tol", "lower internal-energy node above I_max");
    }
}

PhaseGrid::PhaseGrid(const GridSpec& spec) : spec_(spec) {}

std::shared_ptr<const PhaseGrid> PhaseGrid::build(const GridSpec& spec) {
    spec.validate();
    std::shared_ptr<PhaseGrid> g(new PhaseGrid(spec));

    Rule1D ax;
    switch (spec.momentum_rule) {
    case MomentumRule::sinh: ax = sinh_trapezoid(spec.n_p, spec.p_max); break;
    case MomentumRule::uniform: ax = uniform_midpoint(spec.n_p, spec.p_max); break;
    case MomentumRule::gauss: ax = gauss_legendre(spec.n_p, -spec.p_max, spec.p_max); break;
    }
    g->axis_x_ = ax.x;
    g->axis_w_ = ax.w;

    const double b = 0.5 * (spec.D - 2.0);
    Rule1D ir;
    if (spec.internal_rule == InternalRule::exp_sinh) {
        // int_0^{I_min} I^b dI = I_min^{D/2} / (D/2) = floor_tol
        const double I_min = std::pow(spec.floor_tol * spec.D / 2.0, 2.0 / spec.D);
        ir = exp_sinh_trapezoid(spec.n_I, I_min, spec.I_max);
        for (std::size_t j = 0; j < ir.x.size(); ++j) ir.w[j] *= std::pow(ir.x[j], b);
    } else {
        Rule1D gj = gauss_jacobi(spec.n_I, 0.0, b);
        const double half = 0.5 * spec.I_max;
        const double scale = std::pow(half, b + 1.0);
        ir.x.resize(gj.x.size());
        ir.w.resize(gj.x.size());
        for (std::size_t j = 0; j < gj.x.size(); ++j) {
            ir.x[j] = half * (1.0 + gj.x[j]);
            ir.w[j] = scale * gj.w[j];
        }
    }
    g->I_ = ir.x;
    g->wI_ = ir.w;

    const int n = spec.n_p;
    const std::size_t nm = static_cast<std::size_t>(n) * n * n;
    for (auto& v : g->p_) v.resize(nm);
    g->p0_.resize(nm);
    g->wmom_.resize(nm);
    for (int a = 0; a < n; ++a)
        for (int b2 = 0; b2 < n; ++b2)
            for (int c = 0; c < n; ++c) {
                std::size_t k = (static_cast<std::size_t>(a) * n + b2) * n + c;
                double px = ax.x[a], py = ax.x[b2], pz = ax.x[c];
                g->p_[0][k] = px;
                g->p_[1][k] = py;
                g->p_[2][k] = pz;
                g->p0_[k] = std::sqrt(1.0 + px * px + py * py + pz * pz);
                g->wmom_[k] = ax.w[a] * ax.w[b2] * ax.w[c];
            }

    const std::size_t nI = g->I_.size();
    g->W_.resize(nm * nI);
    g->e_.resize(nm * nI);
    double emin = INFINITY, emax = 0.0;
    for (std::size_t k = 0; k < nm; ++k)
        for (std::size_t j = 0; j < nI; ++j) {
            std::size_t idx = k * nI + j;
            g->W_[idx] = g->wmom_[k] * g->wI_[j];
            double e = (1.0 + g->I_[j]) * g->p0_[k];
            g->e_[idx] = e;
            emin = std::min(emin, e);
            emax = std::max(emax, e);
            if (!(g->W_[idx] >= 0.0)) throw RangeError("build_grid: negative quadrature weight");
        }
    g->e_min_ = emin;
    g->e_max_ = emax;
    return g;
}

std::size_t PhaseGrid::mirror_mom(std::size_t k) const {
    const std::size_t n = spec_.n_p;
    std::size_t c = k % n;
    std::size_t b = (k / n) % n;
    std::size_t a = k / (n * n);
    return ((n - 1 - a) * n + (n - 1 - b)) * n + (n - 1 - c);
}

std::size_t PhaseGrid::mirror(std::size_t idx) const {
    return mirror_mom(mom_index(idx)) * spec_.n_I + int_index(idx);
}

double PhaseGrid::check_finite(double s) {
    if (!std::isfinite(s)) throw NonFiniteError("integrate_pI: non-finite input values");
    return s;
}

double PhaseGrid::integrate_pI(std::span<const double> values) const {
    double s = 0.0;
    for (std::size_t i = 0; i < W_.size(); ++i) s += W_[i] * values[i];
    return check_finite(s);
}

double PhaseGrid::integrate_pI(std::span<const double> values, std::span<const double> extra_weight) const {
    double s = 0.0;
    for (std::size_t i = 0; i < W_.size(); ++i) s += W_[i] * extra_weight[i] * values[i];
    return check_finite(s);
}

double PhaseGrid::dot(std::span<const double> f, std::span<const double> g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < W_.size(); ++i) s += W_[i] * f[i] * g[i];
    return check_finite(s);
}

double PhaseGrid::norm(std::span<const double> f) const { return std::sqrt(dot(f, f)); }

nlohmann::json PhaseGrid::describe() const {
    nlohmann::json j;
    j["n_p"] = spec_.n_p;
    j["n_I"] = spec_.n_I;
    j["n_x"] = spec_.n_x;
    j["momentum_rule"] = to_string(spec_.momentum_rule);
    j["internal_rule"] = to_string(spec_.internal_rule);
    j["axis_nodes"] = axis_x_;
    j["axis_weights"] = axis_w_;
    j["internal_nodes"] = I_;
    // phi(I) already folded in
    j["internal_weights"] = wI_;
    j["e_min"] = e_min_;
    j["e_max"] = e_max_;
    return j;
}

} // namespace marle
