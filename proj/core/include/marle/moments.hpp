#pragma once

#include "marle/distributions.hpp"

#include <array>
#include <utility>

namespace marle {

struct MomentSet {
    std::array<double, 4> V{};                    // sum W p^mu F / p0
    std::array<std::array<double, 4>, 4> T{};     // sum W p^mu p^nu (1+I) F / p0
    double h0 = 0.0;                              // -sum W F ln F
};

// nodes with F below this contribute nothing to F ln F
constexpr double kEntropyFloor = 1e-300;

MomentSet compute_moments(const PhaseGrid& g, const Field& F);
std::pair<double, Vec3> eckart_decompose(const MomentSet& m);
double compute_eta(const PhaseGrid& g, const Field& F, double n);
Macrostate macrostate_of(const JuttnerFunctions& jf, const Field& F);
double entropy_density(const PhaseGrid& g, const Field& F);

// the five collision-invariant totals sum W {1, (1+I)p^mu} F
std::array<double, 5> invariant_moments(const PhaseGrid& g, const Field& F);

} // namespace marle
