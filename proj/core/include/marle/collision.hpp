#pragma once

#include "marle/moments.hpp"

#include <array>
#include <string>

namespace marle {

enum class RelaxationKind { frozen, picard, conservative };

struct RelaxationMode {
    RelaxationKind kind = RelaxationKind::conservative;
    int picard_iters = 3;
};

std::string to_string(RelaxationKind k);
RelaxationKind relaxation_kind_from_string(const std::string& s);

struct LocalEquilibrium {
    Macrostate state;
    Field FE;
    int iterations = 0;
    // max relative residual of the five matching conditions
    double residual = 0.0;
};

// Juttner field whose grid moments sum W p^mu F/p0 and sum W F/((1+I)p0)
// coincide with those of F.
LocalEquilibrium local_equilibrium(const JuttnerFunctions& jf, const Field& F);

Field bgk_rhs(const JuttnerFunctions& jf, const Field& F, double tau);

struct ConservationDefect {
    std::array<double, 5> abs{};
    std::array<double, 5> rel{};
    double max_rel() const;
};

// moments of rhs against {1, (1+I)p^mu}; relative to the same moments of |F|/(tau (1+I)p0)
ConservationDefect defect_of(const PhaseGrid& g, const Field& rhs, const Field& F, double tau);
ConservationDefect conservation_defect(const JuttnerFunctions& jf, const Field& F, double tau);

Field relaxation_step(const JuttnerFunctions& jf, const Field& F, double dt, double tau,
                      const RelaxationMode& mode = {});

// Juttner field Fbar with sum W w phi_k (Fbar - F) = 0 for phi in {1,(1+I)p^mu}
Field weighted_equilibrium(const JuttnerFunctions& jf, const Field& F, const Field& w,
                           const Macrostate& guess);

} // namespace marle
