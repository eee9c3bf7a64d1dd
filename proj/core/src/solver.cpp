#include "marle/solver.hpp"

#include "marle/error.hpp"
#include "marle/moments.hpp"
#include "marle/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <tuple>

namespace marle {

std::string to_string(Scheme s) {
    switch (s) {
    case Scheme::strang: return "strang";
    case Scheme::lie: return "lie";
    case Scheme::duhamel: return "duhamel";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "strang") return Scheme::strang;
    if (s == "lie") return Scheme::lie;
    if (s == "duhamel") return Scheme::duhamel;
    throw ConfigError("scheme", "unknown scheme '" + s + "'");
}

bool operator==(const RelaxationMode& a, const RelaxationMode& b) {
    return a.kind == b.kind && a.picard_iters == b.picard_iters;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.grid == b.grid && a.t_end == b.t_end && a.dt == b.dt && a.scheme == b.scheme &&
           a.duhamel_iterations == b.duhamel_iterations && a.duhamel_window == b.duhamel_window &&
           a.collision == b.collision && a.energy_order == b.energy_order && a.output_every == b.output_every &&
           a.initial == b.initial && a.seed == b.seed && a.fit_start_fraction == b.fit_start_fraction &&
           a.monitors == b.monitors;
}

void RunConfig::validate() const {
    grid.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end", "must be non-negative");
    const double n = t_end / dt;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
        throw ConfigError("t_end", "must be an integer multiple of dt");
    if (energy_order < 0) throw ConfigError("energy_order", "must be non-negative");
    if (output_every < 1) throw ConfigError("output_every", "must be at least 1");
    if (duhamel_iterations < 1) throw ConfigError("duhamel_iterations", "must be at least 1");
    if (!(duhamel_window > 0.0)) throw ConfigError("duhamel_window", "must be positive");
    if (collision.picard_iters < 0) throw ConfigError("picard_iters", "must be non-negative");
    if (!(initial.epsilon >= 0.0) || initial.epsilon > 0.1)
        throw ConfigError("epsilon", "must lie in [0, 0.1] (small-data regime)");
    if (initial.mode < 1 || 2 * initial.mode >= grid.n_x) throw ConfigError("mode", "must satisfy 1 <= mode < n_x/2");
    if (initial.shape != "random" && initial.shape != "sine") throw ConfigError("shape", "must be 'random' or 'sine'");
    if (!(fit_start_fraction >= 0.0 && fit_start_fraction < 1.0))
        throw ConfigError("fit_start_fraction", "must lie in [0, 1)");
    if (!(monitors.blowup_factor > 1.0)) throw ConfigError("blowup_factor", "must exceed 1");
}

bool EnergyTrace::all_passed() const {
    if (aborted) return false;
    for (const auto& m : monitors)
        if (!m.passed) return false;
    return true;
}

DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& E, double t_start) {
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t_start && E[i] > 0.0 && std::isfinite(E[i])) {
            ts.push_back(t[i]);
            ys.push_back(std::log(E[i]));
        }
    if (ts.size() < 10) throw RangeError("fit_decay_rate: fewer than 10 usable samples in the fit window");
    const double n = static_cast<double>(ts.size());
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        tm += ts[i];
        ym += ys[i];
    }
    tm /= n;
    ym /= n;
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        stt += (ts[i] - tm) * (ts[i] - tm);
        sty += (ts[i] - tm) * (ys[i] - ym);
    }
    if (!(stt > 0.0)) throw RangeError("fit_decay_rate: degenerate time samples");
    const double slope = sty / stt;
    double rr = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double r = ys[i] - (ym + slope * (ts[i] - tm));
        rr += r * r;
    }
    DecayFit f;
    f.lambda0 = -slope;
    f.residual = std::sqrt(rr / n);
    f.samples = static_cast<int>(ts.size());
    return f;
}

DecayFit fit_decay_rate(const EnergyTrace& trace, double t_start) {
    std::vector<double> t, E;
    for (const auto& r : trace.rows) {
        t.push_back(r.t);
        E.push_back(r.energy);
    }
    return fit_decay_rate(t, E, t_start);
}

Solver::Solver(const RunConfig& cfg)
    : cfg_(cfg), grid_((cfg.validate(), PhaseGrid::build(cfg.grid))), bg_(Background::make(grid_)),
      transport_(grid_) {
    const auto m = invariant_moments(*grid_, bg_->F0);
    for (int a = 0; a < 5; ++a) eq_totals_[a] = m[a] * grid_->spec().L_x;
}

SlabField Solver::uniform(const Field& cellF) const {
    SlabField F(grid_->n_x(), grid_->size());
    for (int i = 0; i < F.n_x; ++i) std::copy(cellF.begin(), cellF.end(), F.cell(i));
    return F;
}

SlabField Solver::equilibrium() const { return uniform(bg_->F0); }

SlabField Solver::initial_condition() const {
    const PhaseGrid& g = *grid_;
    const std::size_t N = g.size();
    const int nx = g.n_x();
    const int nI = g.n_I();
    constexpr int kProfiles = 8;
    std::vector<Field> psi(kProfiles, Field(N));
    for (std::size_t k = 0; k < g.n_mom(); ++k) {
        const double v1 = g.p(0, k) / g.p0(k), v2 = g.p(1, k) / g.p0(k), v3 = g.p(2, k) / g.p0(k);
        for (int j = 0; j < nI; ++j) {
            const std::size_t i = k * nI + j;
            const double ie = 1.0 / g.energy()[i];
            const double vals[kProfiles] = {1.0, v1, v2, v3, ie, v1 * v1, v1 * v2, v1 * ie};
            for (int r = 0; r < kProfiles; ++r) psi[r][i] = vals[r];
        }
    }
    std::vector<double> a(kProfiles, 0.0), b(kProfiles, 0.0);
    if (cfg_.initial.shape == "sine") {
        a[1] = 0.5;
        a[4] = 0.3;
        a[5] = 0.2;
    } else {
        CounterRng rng(cfg_.seed);
        for (int r = 0; r < kProfiles; ++r) {
            a[r] = rng.uniform(-1.0, 1.0);
            b[r] = rng.uniform(-1.0, 1.0);
        }
    }
    double l1 = 0.0;
    for (int r = 0; r < kProfiles; ++r) l1 += std::abs(a[r]) + std::abs(b[r]);
    const double eps = cfg_.initial.epsilon;

    SlabField F(nx, N);
    const double kx = 2.0 * M_PI * cfg_.initial.mode / g.spec().L_x;
    for (int ix = 0; ix < nx; ++ix) {
        const double sx = std::sin(kx * g.x(ix)), cx = std::cos(kx * g.x(ix));
        double* c = F.cell(ix);
        for (std::size_t i = 0; i < N; ++i) {
            double p = 0.0;
            for (int r = 0; r < kProfiles; ++r) p += (a[r] * sx + b[r] * cx) * psi[r][i];
            c[i] = bg_->F0[i] * (1.0 + eps * p / l1);
        }
    }

    // remove the five conserved perturbation totals with a spatially uniform correction
    const auto tot = perturbation_totals(F);
    Eigen::Matrix<double, 5, 5> G = Eigen::Matrix<double, 5, 5>::Zero();
    std::array<Field, 5> phi;
    for (auto& v : phi) v.resize(N);
    for (std::size_t k = 0; k < g.n_mom(); ++k)
        for (int j = 0; j < nI; ++j) {
            const std::size_t i = k * nI + j;
            const double oI = 1.0 + g.I(j);
            phi[0][i] = 1.0;
            phi[1][i] = oI * g.p0(k);
            for (int d = 0; d < 3; ++d) phi[2 + d][i] = oI * g.p(d, k);
        }
    const auto& W = g.weights();
    for (int r = 0; r < 5; ++r)
        for (int s = 0; s < 5; ++s) {
            double acc = 0.0;
            for (std::size_t i = 0; i < N; ++i) acc += W[i] * phi[r][i] * phi[s][i] * bg_->F0[i];
            G(r, s) = g.spec().L_x * acc;
        }
    Eigen::Matrix<double, 5, 1> t;
    for (int r = 0; r < 5; ++r) t(r) = tot[r];
    const Eigen::Matrix<double, 5, 1> c = G.ldlt().solve(t);
    for (int ix = 0; ix < nx; ++ix) {
        double* cell = F.cell(ix);
        for (std::size_t i = 0; i < N; ++i) {
            double corr = 0.0;
            for (int r = 0; r < 5; ++r) corr += c(r) * phi[r][i];
            cell[i] -= corr * bg_->F0[i];
        }
    }
    return F;
}

void Solver::transport_step(SlabField& F, double dt) { transport_.step(F, dt); }

void Solver::collision_step(SlabField& F, double dt) const {
    const std::size_t N = grid_->size();
    const double tau = grid_->spec().tau;
    const int nx = F.n_x;
#pragma omp parallel for schedule(static)
    for (int ix = 0; ix < nx; ++ix) {
        double* c = F.cell(ix);
        Field cell(c, c + N);
        const Field out = relaxation_step(*bg_->jf, cell, dt, tau, cfg_.collision);
        std::copy(out.begin(), out.end(), c);
    }
}

void Solver::step(SlabField& F, double dt) { step(F, dt, cfg_.scheme); }

void Solver::step(SlabField& F, double dt, Scheme scheme) {
    switch (scheme) {
    case Scheme::strang:
        transport_step(F, 0.5 * dt);
        collision_step(F, dt);
        transport_step(F, 0.5 * dt);
        break;
    case Scheme::lie:
        collision_step(F, dt);
        transport_step(F, dt);
        break;
    case Scheme::duhamel: {
        const int n = std::max(1, static_cast<int>(std::lround(cfg_.duhamel_window / cfg_.dt)));
        const double h = dt / n;
        DuhamelTrajectory tr = constant_trajectory(F, h, n);
        for (int it = 0; it < cfg_.duhamel_iterations; ++it) tr = duhamel_iterate(F, tr);
        F = tr.F.back();
        break;
    }
    }
}

namespace {

// (e^w - 1)/w and (e^w - 1 - w)/w^2
std::complex<double> phi1(std::complex<double> w) {
    if (std::abs(w) > 0.5) return (std::exp(w) - 1.0) / w;
    std::complex<double> s = 0.0, term = 1.0;
    for (int n = 1; n < 20; ++n) {
        s += term;
        term *= w / double(n + 1);
    }
    return s;
}

std::complex<double> phi2(std::complex<double> w) {
    if (std::abs(w) > 0.5) return (std::exp(w) - 1.0 - w) / (w * w);
    std::complex<double> s = 0.0, term = 0.5;
    for (int n = 2; n < 21; ++n) {
        s += term;
        term *= w / double(n + 1);
    }
    return s;
}

void local_equilibria(const Background& bg, const SlabField& F, SlabField& FE) {
    const std::size_t N = F.n_pI;
    FE = SlabField(F.n_x, N);
    const int nx = F.n_x;
#pragma omp parallel for schedule(static)
    for (int ix = 0; ix < nx; ++ix) {
        const double* c = F.cell(ix);
        const Field cell(c, c + N);
        const LocalEquilibrium le = local_equilibrium(*bg.jf, cell);
        std::copy(le.FE.begin(), le.FE.end(), FE.cell(ix));
    }
}

} // namespace

DuhamelTrajectory Solver::constant_trajectory(const SlabField& F_init, double h, int n_steps) {
    if (n_steps < 1 || !(h > 0.0)) throw RangeError("constant_trajectory: need n_steps >= 1 and h > 0");
    constexpr std::size_t kMaxStoredValues = std::size_t(1) << 28;
    if (F_init.values.size() * static_cast<std::size_t>(n_steps + 1) * 3 > kMaxStoredValues)
        throw RangeError("duhamel: trajectory storage exceeds the configured budget; shorten duhamel_window");
    DuhamelTrajectory tr;
    tr.h = h;
    tr.F.assign(n_steps + 1, F_init);
    SlabField FE;
    local_equilibria(*bg_, F_init, FE);
    Spectrum S;
    transport_.forward(FE, S);
    tr.FE_hat.assign(n_steps + 1, S);
    return tr;
}

DuhamelTrajectory Solver::duhamel_iterate(const SlabField& F_init, const DuhamelTrajectory& prev) {
    const int n = static_cast<int>(prev.F.size()) - 1;
    const double h = prev.h;
    const std::size_t npI = grid_->size();
    const int nm = transport_.n_modes();
    const double tau = grid_->spec().tau;
    const auto& e = grid_->energy();

    Spectrum F0hat;
    transport_.forward(F_init, F0hat);
    Spectrum acc(F0hat.size(), {0.0, 0.0});
    // one-step propagator e^{-z h} with z = nu + i k v, and the exact weights of the
    // linear interpolant of nu F_E on [t_{j-1}, t_j]
    Spectrum prop(F0hat.size()), w_left(F0hat.size()), w_right(F0hat.size());
    const bool has_nyquist = grid_->n_x() % 2 == 0;
    for (int m = 0; m < nm; ++m)
        for (std::size_t idx = 0; idx < npI; ++idx) {
            const std::size_t q = m * npI + idx;
            const double nu = 1.0 / (tau * e[idx]);
            prop[q] = std::exp(-nu * h) * transport_.shift_factor(m, transport_.velocity(idx), h);
            const double kv = transport_.wavenumber(m) * transport_.velocity(idx);
            auto weights = [&](double sign) {
                const std::complex<double> w(-nu * h, -sign * kv * h);
                const auto p1 = phi1(w), p2 = phi2(w);
                return std::pair{h * nu * (p1 - p2), h * nu * p2};
            };
            if (has_nyquist && m == nm - 1) {
                const auto [a1, b1] = weights(1.0);
                const auto [a2, b2] = weights(-1.0);
                w_left[q] = 0.5 * (a1 + a2);
                w_right[q] = 0.5 * (b1 + b2);
            } else {
                std::tie(w_left[q], w_right[q]) = weights(1.0);
            }
        }

    DuhamelTrajectory out;
    out.h = h;
    out.F.resize(n + 1);
    out.FE_hat.resize(n + 1);
    Spectrum cur(F0hat.size());
    for (int j = 0; j <= n; ++j) {
        const double t = j * h;
        if (j > 0) {
            for (int m = 0; m < nm; ++m)
                for (std::size_t idx = 0; idx < npI; ++idx) {
                    const std::size_t q = m * npI + idx;
                    acc[q] = prop[q] * acc[q] + w_left[q] * prev.FE_hat[j - 1][q] + w_right[q] * prev.FE_hat[j][q];
                }
        }
        for (int m = 0; m < nm; ++m)
            for (std::size_t idx = 0; idx < npI; ++idx) {
                const std::size_t q = m * npI + idx;
                const double nu = 1.0 / (tau * e[idx]);
                cur[q] = std::exp(-nu * t) * transport_.shift_factor(m, transport_.velocity(idx), t) * F0hat[q] +
                         acc[q];
            }
        transport_.inverse(cur, out.F[j]);
        SlabField FE;
        local_equilibria(*bg_, out.F[j], FE);
        transport_.forward(FE, out.FE_hat[j]);
    }
    return out;
}

double Solver::trajectory_distance(const DuhamelTrajectory& a, const DuhamelTrajectory& b) const {
    if (a.F.size() != b.F.size()) throw RangeError("trajectory_distance: mismatched time grids");
    const auto& W = grid_->weights();
    const std::size_t N = grid_->size();
    double worst = 0.0;
    for (std::size_t j = 0; j < a.F.size(); ++j) {
        double s = 0.0;
        for (int ix = 0; ix < a.F[j].n_x; ++ix) {
            const double* x = a.F[j].cell(ix);
            const double* y = b.F[j].cell(ix);
            for (std::size_t i = 0; i < N; ++i) {
                const double d = (x[i] - y[i]) / bg_->sqrtF0[i];
                s += W[i] * d * d;
            }
        }
        worst = std::max(worst, std::sqrt(s * grid_->dx()));
    }
    return worst;
}

double Solver::distance(const SlabField& a, const SlabField& b) const {
    const auto& W = grid_->weights();
    const std::size_t N = grid_->size();
    double s = 0.0;
    for (int ix = 0; ix < a.n_x; ++ix) {
        const double* x = a.cell(ix);
        const double* y = b.cell(ix);
        for (std::size_t i = 0; i < N; ++i) {
            const double d = (x[i] - y[i]) / bg_->sqrtF0[i];
            s += W[i] * d * d;
        }
    }
    return std::sqrt(s * grid_->dx());
}

SlabField Solver::perturbation(const SlabField& F) const {
    SlabField f(F.n_x, F.n_pI);
    for (int ix = 0; ix < F.n_x; ++ix) {
        const double* c = F.cell(ix);
        double* o = f.cell(ix);
        for (std::size_t i = 0; i < F.n_pI; ++i) o[i] = (c[i] - bg_->F0[i]) / bg_->sqrtF0[i];
    }
    return f;
}

double Solver::energy_functional(const SlabField& f, int order) { return transport_.energy(f, order); }

std::array<double, 5> Solver::perturbation_totals(const SlabField& F) const {
    std::array<double, 5> tot{};
    const std::size_t N = grid_->size();
    Field d(N);
    for (int ix = 0; ix < F.n_x; ++ix) {
        const double* c = F.cell(ix);
        for (std::size_t i = 0; i < N; ++i) d[i] = c[i] - bg_->F0[i];
        const auto m = invariant_moments(*grid_, d);
        for (int a = 0; a < 5; ++a) tot[a] += m[a] * grid_->dx();
    }
    return tot;
}

double Solver::total_entropy(const SlabField& F) const {
    double h = 0.0;
    const std::size_t N = grid_->size();
    for (int ix = 0; ix < F.n_x; ++ix) {
        const double* c = F.cell(ix);
        h += entropy_density(*grid_, Field(c, c + N)) * grid_->dx();
    }
    return h;
}

double Solver::max_defect(const SlabField& F) const {
    const std::size_t N = grid_->size();
    std::vector<double> d(F.n_x);
    const int nx = F.n_x;
#pragma omp parallel for schedule(static)
    for (int ix = 0; ix < nx; ++ix) {
        const double* c = F.cell(ix);
        d[ix] = conservation_defect(*bg_->jf, Field(c, c + N), grid_->spec().tau).max_rel();
    }
    return *std::max_element(d.begin(), d.end());
}

TraceRow Solver::sample(double t, const SlabField& F) {
    TraceRow r;
    r.t = t;
    r.energy = energy_functional(perturbation(F), cfg_.energy_order);
    r.totals = perturbation_totals(F);
    r.entropy = total_entropy(F);
    r.defect = max_defect(F);
    r.min_F = *std::min_element(F.values.begin(), F.values.end());
    return r;
}

std::vector<MacroRow> Solver::macro_snapshot(double t, const SlabField& F) const {
    std::vector<MacroRow> rows(F.n_x);
    const std::size_t N = grid_->size();
    for (int ix = 0; ix < F.n_x; ++ix) {
        const double* c = F.cell(ix);
        rows[ix].t = t;
        rows[ix].x = grid_->x(ix);
        rows[ix].state = macrostate_of(*bg_->jf, Field(c, c + N));
    }
    return rows;
}

EnergyTrace Solver::run(const std::function<void(const TraceRow&)>& on_sample) {
    EnergyTrace tr;
    SlabField F = initial_condition();
    const double dt = cfg_.dt;
    const long n_steps = std::lround(cfg_.t_end / dt);

    auto record = [&](double t, const SlabField& Fs) {
        tr.rows.push_back(sample(t, Fs));
        auto m = macro_snapshot(t, Fs);
        tr.macro.insert(tr.macro.end(), m.begin(), m.end());
        if (on_sample) on_sample(tr.rows.back());
        const double E0 = tr.rows.front().energy;
        if (tr.rows.back().energy > cfg_.monitors.blowup_factor * E0 && E0 > 0.0) {
            tr.aborted = true;
            tr.abort_reason = "energy exceeded blowup_factor x initial value at t = " + std::to_string(t);
        }
        if (!std::isfinite(tr.rows.back().energy)) {
            tr.aborted = true;
            tr.abort_reason = "non-finite energy at t = " + std::to_string(t);
        }
    };

    record(0.0, F);
    if (cfg_.scheme == Scheme::duhamel) {
        const long window = std::max(1L, std::lround(cfg_.duhamel_window / dt));
        long done = 0;
        while (done < n_steps && !tr.aborted) {
            const int n = static_cast<int>(std::min(window, n_steps - done));
            DuhamelTrajectory traj = constant_trajectory(F, dt, n);
            for (int it = 0; it < cfg_.duhamel_iterations; ++it) traj = duhamel_iterate(F, traj);
            for (int j = 1; j <= n && !tr.aborted; ++j) {
                const long s = done + j;
                if (s % cfg_.output_every == 0 || s == n_steps) record(s * dt, traj.F[j]);
            }
            F = traj.F.back();
            done += n;
        }
    } else {
        for (long s = 1; s <= n_steps && !tr.aborted; ++s) {
            step(F, dt);
            if (s % cfg_.output_every == 0 || s == n_steps) record(s * dt, F);
        }
    }

    tr.final_state = std::move(F);
    const auto& lim = cfg_.monitors;
    MonitorResult pos{"positivity", true, 0.0, lim.positivity_floor};
    MonitorResult tot{"perturbation_totals", true, 0.0, lim.totals_tol};
    MonitorResult mono{"energy_monotone", true, 0.0, lim.energy_increase_tol};
    MonitorResult blow{"blowup", !tr.aborted, 0.0, lim.blowup_factor};
    MonitorResult def{"conservation_defect", true, 0.0, lim.defect_tol};
    pos.worst = INFINITY;
    for (std::size_t i = 0; i < tr.rows.size(); ++i) {
        const auto& r = tr.rows[i];
        pos.worst = std::min(pos.worst, r.min_F);
        for (double v : r.totals) tot.worst = std::max(tot.worst, std::abs(v));
        def.worst = std::max(def.worst, r.defect);
        if (i > 0) mono.worst = std::max(mono.worst, r.energy - tr.rows[i - 1].energy);
        if (tr.rows.front().energy > 0.0) blow.worst = std::max(blow.worst, r.energy / tr.rows.front().energy);
    }
    pos.passed = pos.worst >= lim.positivity_floor;
    tot.passed = tot.worst <= lim.totals_tol;
    mono.passed = mono.worst <= lim.energy_increase_tol;
    def.passed = def.worst <= lim.defect_tol;
    tr.monitors = {pos, tot, mono, blow, def};

    try {
        const DecayFit fit = fit_decay_rate(tr, cfg_.fit_start_fraction * cfg_.t_end);
        tr.lambda0 = fit.lambda0;
        tr.fit_residual = fit.residual;
        tr.fit_ok = true;
    } catch (const Error& e) {
        tr.fit_ok = false;
        tr.fit_message = e.what();
    }
    return tr;
}

EnergyTrace run_simulation(const RunConfig& cfg) {
    Solver s(cfg);
    return s.run();
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    return os;
}

} // namespace

void write_trace_csv(const EnergyTrace& tr, const std::string& path) {
    auto os = open_out(path);
    os << "t,E,mass,E0,E1,E2,E3,entropy,defect,min_F\n";
    for (const auto& r : tr.rows) {
        os << fmt17(r.t) << ',' << fmt17(r.energy);
        for (double v : r.totals) os << ',' << fmt17(v);
        os << ',' << fmt17(r.entropy) << ',' << fmt17(r.defect) << ',' << fmt17(r.min_F) << '\n';
    }
}

void write_macro_csv(const EnergyTrace& tr, const std::string& path) {
    auto os = open_out(path);
    os << "t,x,n,u1,u2,u3,gamma,eta\n";
    for (const auto& r : tr.macro) {
        os << fmt17(r.t) << ',' << fmt17(r.x) << ',' << fmt17(r.state.n);
        for (double v : r.state.u) os << ',' << fmt17(v);
        os << ',' << fmt17(r.state.gamma) << ',' << fmt17(r.state.eta) << '\n';
    }
}

void write_relax0d_csv(const Relax0dResult& r, const std::string& path) {
    auto os = open_out(path);
    os << "t,entropy,drift,defect0,defect1,defect2,defect3,defect4,min_F\n";
    for (const auto& row : r.rows) {
        os << fmt17(row.t) << ',' << fmt17(row.entropy) << ',' << fmt17(row.drift);
        for (double d : row.defect) os << ',' << fmt17(d);
        os << ',' << fmt17(row.min_F) << '\n';
    }
}

bool Relax0dResult::all_passed() const {
    for (const auto& m : monitors)
        if (!m.passed) return false;
    return true;
}

Field relax0d_initial(const Background& bg, double epsilon, std::uint64_t seed) {
    Field F(bg.F0.size());
    for (std::size_t i = 0; i < F.size(); ++i) {
        CounterRng rng(seed, i);
        F[i] = bg.F0[i] * (1.0 + epsilon * rng.uniform(-1.0, 1.0));
    }
    return F;
}

Relax0dResult run_relax0d(const RunConfig& cfg) {
    cfg.validate();
    const auto grid = PhaseGrid::build(cfg.grid);
    const auto bg = Background::make(grid);
    const double tau = cfg.grid.tau;
    Field F = relax0d_initial(*bg, cfg.initial.epsilon, cfg.seed);
    const auto m0 = invariant_moments(*grid, F);
    const long n_steps = std::lround(cfg.t_end / cfg.dt);

    Relax0dResult res;
    auto record = [&](double t) {
        Relax0dRow r;
        r.t = t;
        r.entropy = entropy_density(*grid, F);
        const auto m = invariant_moments(*grid, F);
        for (int a = 0; a < 5; ++a)
            if (m0[a] != 0.0) r.drift = std::max(r.drift, std::abs(m[a] - m0[a]) / std::abs(m0[a]));
        r.defect = conservation_defect(*bg->jf, F, tau).rel;
        r.min_F = *std::min_element(F.begin(), F.end());
        res.rows.push_back(r);
    };
    record(0.0);
    for (long s = 1; s <= n_steps; ++s) {
        F = relaxation_step(*bg->jf, F, cfg.dt, tau, cfg.collision);
        if (s % cfg.output_every == 0 || s == n_steps) record(s * cfg.dt);
    }

    const auto& lim = cfg.monitors;
    MonitorResult ent{"entropy_monotone", true, 0.0, lim.entropy_slack};
    MonitorResult drift{"invariant_drift", true, 0.0, lim.totals_tol};
    MonitorResult pos{"positivity", true, INFINITY, lim.positivity_floor};
    MonitorResult def{"conservation_defect", true, 0.0, lim.defect_tol};
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const auto& r = res.rows[i];
        if (i > 0) ent.worst = std::max(ent.worst, res.rows[i - 1].entropy - r.entropy);
        drift.worst = std::max(drift.worst, r.drift);
        pos.worst = std::min(pos.worst, r.min_F);
        for (double d : r.defect) def.worst = std::max(def.worst, std::abs(d));
    }
    ent.passed = ent.worst <= lim.entropy_slack;
    drift.passed = drift.worst <= lim.totals_tol;
    pos.passed = pos.worst >= lim.positivity_floor;
    def.passed = def.worst <= lim.defect_tol;
    res.monitors = {ent, drift, pos, def};
    return res;
}

ConvergenceStudy time_convergence(const RunConfig& cfg, Scheme scheme, int n_levels) {
    if (n_levels < 3) throw RangeError("time_convergence: need at least 3 levels");
    RunConfig c = cfg;
    c.scheme = scheme;
    Solver solver(c);
    const SlabField F_init = solver.initial_condition();
    const long n0 = std::lround(c.t_end / c.dt);
    if (n0 < 1) throw RangeError("time_convergence: t_end must cover at least one step");
    std::vector<SlabField> finals;
    for (int l = 0; l < n_levels; ++l) {
        const long n = n0 << l;
        const double h = c.dt / static_cast<double>(1L << l);
        SlabField F = F_init;
        for (long s = 0; s < n; ++s) solver.step(F, h, scheme);
        finals.push_back(std::move(F));
    }
    ConvergenceStudy st;
    st.scheme = scheme;
    for (int l = 0; l + 1 < n_levels; ++l)
        st.levels.push_back({c.dt / static_cast<double>(1L << l), solver.distance(finals[l], finals[l + 1])});
    for (std::size_t l = 0; l + 1 < st.levels.size(); ++l)
        st.slopes.push_back(std::log2(st.levels[l].diff / st.levels[l + 1].diff));
    st.slope = st.slopes.back();
    return st;
}

} // namespace marle
