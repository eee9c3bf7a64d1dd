#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace marle {

enum class MomentumRule { sinh, uniform, gauss };
enum class InternalRule { exp_sinh, gauss_jacobi };

struct GridSpec {
    double D = 2.0;
    double p_max = 24.0;
    int n_p = 21;
    double I_max = 28.0;
    int n_I = 24;
    int n_x = 32;
    double L_x = 2.0 * 3.14159265358979323846;
    double gamma0 = 1.0;
    double tau = 1.0;

    MomentumRule momentum_rule = MomentumRule::sinh;
    InternalRule internal_rule = InternalRule::exp_sinh;
    // bound on e^{-gamma0 (1+I_max)} and e^{-gamma0 p0(p_max)}
    double tail_tol = 1e-6;
    // mass of phi below the first exp-sinh node
    double floor_tol = 1e-13;

    void validate() const;
    bool operator==(const GridSpec&) const = default;
};

std::string to_string(MomentumRule r);
std::string to_string(InternalRule r);
MomentumRule momentum_rule_from_string(const std::string& s);
InternalRule internal_rule_from_string(const std::string& s);

// Tensor-product (p,I) quadrature plus a uniform periodic x grid.
// Flat (p,I) index: idx = k * n_I + j with k = (k1 * n_p + k2) * n_p + k3.
class PhaseGrid {
public:
    static std::shared_ptr<const PhaseGrid> build(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }

    int n_p() const { return spec_.n_p; }
    int n_I() const { return spec_.n_I; }
    int n_x() const { return spec_.n_x; }
    std::size_t n_mom() const { return p0_.size(); }
    std::size_t size() const { return W_.size(); }

    std::size_t mom_index(std::size_t idx) const { return idx / spec_.n_I; }
    std::size_t int_index(std::size_t idx) const { return idx % spec_.n_I; }
    // node k' with p_{k'} = -p_k
    std::size_t mirror_mom(std::size_t k) const;
    std::size_t mirror(std::size_t idx) const;

    double p(int axis, std::size_t k) const { return p_[axis][k]; }
    double p0(std::size_t k) const { return p0_[k]; }
    double I(std::size_t j) const { return I_[j]; }
    const std::vector<double>& axis_nodes() const { return axis_x_; }
    const std::vector<double>& axis_weights() const { return axis_w_; }
    const std::vector<double>& internal_nodes() const { return I_; }
    const std::vector<double>& internal_weights() const { return wI_; }

    // W_{k,j}, phi(I_j) included
    const std::vector<double>& weights() const { return W_; }
    // (1+I) p0 per flat node
    const std::vector<double>& energy() const { return e_; }
    double e_min() const { return e_min_; }
    double e_max() const { return e_max_; }

    double x(int i) const { return spec_.L_x * i / spec_.n_x; }
    double dx() const { return spec_.L_x / spec_.n_x; }

    double integrate_pI(std::span<const double> values) const;
    double integrate_pI(std::span<const double> values, std::span<const double> extra_weight) const;
    template <class Fn>
    double integrate_pI_fn(std::span<const double> values, Fn&& extra_weight) const {
        double s = 0.0;
        for (std::size_t i = 0; i < W_.size(); ++i) s += W_[i] * extra_weight(i) * values[i];
        return check_finite(s);
    }
    // <f,g> = sum W f g
    double dot(std::span<const double> f, std::span<const double> g) const;
    double norm(std::span<const double> f) const;

    nlohmann::json describe() const;

private:
    explicit PhaseGrid(const GridSpec& spec);
    static double check_finite(double s);

    GridSpec spec_;
    std::vector<double> axis_x_, axis_w_;
    std::array<std::vector<double>, 3> p_;
    std::vector<double> p0_;
    std::vector<double> wmom_;
    std::vector<double> I_, wI_;
    std::vector<double> W_, e_;
    double e_min_ = 1.0, e_max_ = 1.0;
};

using GridPtr = std::shared_ptr<const PhaseGrid>;

} // namespace marle
