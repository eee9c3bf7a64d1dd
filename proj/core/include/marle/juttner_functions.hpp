#pragma once

#include "marle/phase_grid.hpp"

#include <array>

namespace marle {

struct EquilibriumConstants {
    double gamma0 = 1.0;
    double eta0 = 0.0;   // Mtilde/M at gamma0
    double delta = 0.0;  // -M'/M at gamma0
    double M0 = 0.0;
    double Mprime0 = 0.0;
    double Mpp0 = 0.0;
    double Mtilde0 = 0.0;
    double kappa = 0.0;  // M^2/(M^2 + M' Mtilde)
    double m = 0.0;      // M'/M = -delta
    // 3 / sum W (1+I)|p|^2 F0 / p0; equals gamma0 up to quadrature error
    double gamma_hat = 0.0;
};

// Value, first and second gamma-derivatives of kappa and m = M'/M.
struct RatioDerivs {
    double M, M1, M2, Mt;
    double m, dm;
    double kappa, dkappa;
};

class JuttnerFunctions {
public:
    explicit JuttnerFunctions(GridPtr grid, double gamma_lo = 1e-3, double gamma_hi = 1e3);

    const GridPtr& grid() const { return grid_; }
    const PhaseGrid& g() const { return *grid_; }

    double eval_M(double gamma, int order) const;
    double eval_Mtilde(double gamma, int order) const;
    // log M(gamma), safe where M itself underflows
    double log_M(double gamma) const;

    double eta_of_gamma(double gamma) const;
    // d(Mtilde/M)/dgamma = -1/kappa(gamma) > 0
    double eta_slope(double gamma) const;
    double solve_gamma(double eta) const;
    // same, starting from a nearby guess
    double solve_gamma(double eta, double guess) const;

    RatioDerivs ratio_derivs(double gamma) const;
    EquilibriumConstants equilibrium_constants(double gamma0) const;

    double gamma_lo() const { return lo_; }
    double gamma_hi() const { return hi_; }
    std::array<double, 2> eta_range() const { return {eta_lo_, eta_hi_}; }

private:
    // S_k = sum W (-e)^k exp(-gamma (e - e_min)), k = 0..kmax; St = sum W exp(-gamma(e-e_min))/e
    void scaled_sums(double gamma, int kmax, double* S, double* St) const;

    GridPtr grid_;
    double lo_, hi_;
    double eta_lo_, eta_hi_;
};

} // namespace marle
