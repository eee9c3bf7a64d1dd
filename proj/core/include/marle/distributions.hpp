#pragma once

#include "marle/juttner_functions.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace marle {

using Field = std::vector<double>;
using Vec3 = std::array<double, 3>;

struct Macrostate {
    double n = 1.0;
    Vec3 u{0.0, 0.0, 0.0};
    double gamma = 1.0;
    double eta = 0.0;

    double u0() const { return std::sqrt(1.0 + u[0] * u[0] + u[1] * u[1] + u[2] * u[2]); }
};

// Everything that depends only on (grid, gamma0): constants, F0, sqrt(F0) and
// the collision frequency 1/((1+I)p0).
struct Background {
    GridPtr grid;
    std::shared_ptr<const JuttnerFunctions> jf;
    EquilibriumConstants consts;
    Field F0;
    Field sqrtF0;
    Field log_sqrtF0;
    Field inv_e;

    static std::shared_ptr<const Background> make(GridPtr grid);
    static std::shared_ptr<const Background> make(std::shared_ptr<const JuttnerFunctions> jf);
};

using BackgroundPtr = std::shared_ptr<const Background>;

Field eval_global_equilibrium(const JuttnerFunctions& jf, const EquilibriumConstants& consts);

// log of the Juttner field, finite even where the field underflows
Field log_juttner(const JuttnerFunctions& jf, const Macrostate& s);
Field eval_juttner(const JuttnerFunctions& jf, const Macrostate& s);

// u0 p0 - u.p at every flat node (checked > 0)
Field boost_factor(const PhaseGrid& g, const Vec3& u);

Field to_perturbation(const Background& bg, const Field& F);
Field from_perturbation(const Background& bg, const Field& f);

// CSV with header "index,value", one row per flat index, values printed with %.17g
void write_field_csv(const std::vector<double>& values, const std::string& path);
std::vector<double> read_field_csv(const std::string& path);

} // namespace marle
