#include "marle/distributions.hpp"

#include "marle/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace marle {

std::shared_ptr<const Background> Background::make(GridPtr grid) {
    return make(std::make_shared<const JuttnerFunctions>(std::move(grid)));
}

std::shared_ptr<const Background> Background::make(std::shared_ptr<const JuttnerFunctions> jf) {
    auto bg = std::make_shared<Background>();
    bg->grid = jf->grid();
    bg->jf = jf;
    const double g0 = bg->grid->spec().gamma0;
    bg->consts = jf->equilibrium_constants(g0);
    const auto& e = bg->grid->energy();
    const double lM = jf->log_M(g0);
    const std::size_t N = e.size();
    bg->F0.resize(N);
    bg->sqrtF0.resize(N);
    bg->log_sqrtF0.resize(N);
    bg->inv_e.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double lf = -g0 * e[i] - lM;
        bg->F0[i] = std::exp(lf);
        bg->log_sqrtF0[i] = 0.5 * lf;
        bg->sqrtF0[i] = std::exp(0.5 * lf);
        bg->inv_e[i] = 1.0 / e[i];
    }
    return bg;
}

Field eval_global_equilibrium(const JuttnerFunctions& jf, const EquilibriumConstants& c) {
    const auto& e = jf.g().energy();
    const double lM = jf.log_M(c.gamma0);
    Field F(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) F[i] = std::exp(-c.gamma0 * e[i] - lM);
    return F;
}

Field boost_factor(const PhaseGrid& g, const Vec3& u) {
    const double u0 = std::sqrt(1.0 + u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    Field w(g.n_mom());
    for (std::size_t k = 0; k < w.size(); ++k) {
        double v = u0 * g.p0(k) - (u[0] * g.p(0, k) + u[1] * g.p(1, k) + u[2] * g.p(2, k));
        if (!(v > 0.0)) throw RangeError("eval_juttner: u0 p0 - u.p not positive on the grid");
        w[k] = v;
    }
    return w;
}

Field log_juttner(const JuttnerFunctions& jf, const Macrostate& s) {
    if (!(s.n > 0.0)) throw RangeError("eval_juttner: n must be positive");
    const auto& g = jf.g();
    const Field w = boost_factor(g, s.u);
    const double base = std::log(s.n) - jf.log_M(s.gamma);
    const int nI = g.n_I();
    Field L(g.size());
    for (std::size_t k = 0; k < w.size(); ++k)
        for (int j = 0; j < nI; ++j) L[k * nI + j] = base - s.gamma * (1.0 + g.I(j)) * w[k];
    return L;
}

Field eval_juttner(const JuttnerFunctions& jf, const Macrostate& s) {
    Field F = log_juttner(jf, s);
    for (double& v : F) v = std::exp(v);
    return F;
}

Field to_perturbation(const Background& bg, const Field& F) {
    Field f(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) f[i] = (F[i] - bg.F0[i]) / bg.sqrtF0[i];
    return f;
}

Field from_perturbation(const Background& bg, const Field& f) {
    Field F(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) F[i] = bg.F0[i] + bg.sqrtF0[i] * f[i];
    return F;
}

void write_field_csv(const std::vector<double>& values, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << "index,value\n";
    char buf[48];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        os << i << ',' << buf << '\n';
    }
}

std::vector<double> read_field_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line) || line != "index,value") throw Error("'" + path + "': bad header");
    std::vector<double> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error("'" + path + "': malformed row '" + line + "'");
        const std::size_t idx = std::stoull(line.substr(0, comma));
        if (idx != out.size()) throw Error("'" + path + "': indices must be consecutive from 0");
        out.push_back(std::stod(line.substr(comma + 1)));
    }
    return out;
}

} // namespace marle
