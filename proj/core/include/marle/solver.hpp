#pragma once

#include "marle/collision.hpp"
#include "marle/transport.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace marle {

enum class Scheme { strang, lie, duhamel };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct InitialCondition {
    double epsilon = 1e-3;
    int mode = 1;
    // "random": seeded combination of bounded profiles; "sine": fixed profile
    std::string shape = "random";

    bool operator==(const InitialCondition&) const = default;
};

struct MonitorLimits {
    double positivity_floor = -1e-14;
    double totals_tol = 1e-9;
    double energy_increase_tol = 1e-10;
    double blowup_factor = 10.0;
    double defect_tol = 1e-9;
    double entropy_slack = 1e-12;

    bool operator==(const MonitorLimits&) const = default;
};

struct RunConfig {
    GridSpec grid;
    double t_end = 1.0;
    double dt = 0.05;
    Scheme scheme = Scheme::strang;
    int duhamel_iterations = 4;
    double duhamel_window = 0.5;
    RelaxationMode collision;
    int energy_order = 3;
    int output_every = 1;
    InitialCondition initial;
    std::uint64_t seed = 1;
    double fit_start_fraction = 0.5;
    MonitorLimits monitors;

    void validate() const;
};

bool operator==(const RelaxationMode& a, const RelaxationMode& b);
bool operator==(const RunConfig& a, const RunConfig& b);

struct TraceRow {
    double t = 0.0;
    double energy = 0.0;
    // perturbation totals of {1, (1+I)p^mu}: sum_x dx sum W phi (F - F0)
    std::array<double, 5> totals{};
    double entropy = 0.0;
    // max over cells of the relative conservation defect of the BGK right-hand side
    double defect = 0.0;
    double min_F = 0.0;
};

struct MacroRow {
    double t = 0.0;
    double x = 0.0;
    Macrostate state;
};

struct MonitorResult {
    std::string name;
    bool passed = true;
    double worst = 0.0;
    double limit = 0.0;
};

struct EnergyTrace {
    std::vector<TraceRow> rows;
    std::vector<MacroRow> macro;
    std::vector<MonitorResult> monitors;
    SlabField final_state;
    double lambda0 = 0.0;
    double fit_residual = 0.0;
    bool fit_ok = false;
    std::string fit_message;
    bool aborted = false;
    std::string abort_reason;

    bool all_passed() const;
};

struct DecayFit {
    double lambda0 = 0.0;
    double residual = 0.0;
    int samples = 0;
};

// least-squares slope of log E on samples with t >= t_start
DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& E, double t_start);
DecayFit fit_decay_rate(const EnergyTrace& trace, double t_start);

struct DuhamelTrajectory {
    double h = 0.0;
    std::vector<SlabField> F;          // F(t_j), t_j = j h
    std::vector<Spectrum> FE_hat;      // Fourier transform of F_E(F(t_j))
};

class Solver {
public:
    explicit Solver(const RunConfig& cfg);

    const RunConfig& config() const { return cfg_; }
    const Background& background() const { return *bg_; }
    const BackgroundPtr& background_ptr() const { return bg_; }
    Transport& transport() { return transport_; }

    SlabField uniform(const Field& cellF) const;
    SlabField equilibrium() const;
    SlabField initial_condition() const;

    void transport_step(SlabField& F, double dt);
    void collision_step(SlabField& F, double dt) const;
    void step(SlabField& F, double dt);
    void step(SlabField& F, double dt, Scheme scheme);

    // constant-in-time trajectory (zeroth iterate) on nodes j h, j = 0..n_steps
    DuhamelTrajectory constant_trajectory(const SlabField& F_init, double h, int n_steps);
    DuhamelTrajectory duhamel_iterate(const SlabField& F_init, const DuhamelTrajectory& prev);
    // max over time nodes of ||(A - B)/sqrt(F0)||_{x,p,I}
    double trajectory_distance(const DuhamelTrajectory& a, const DuhamelTrajectory& b) const;
    // ||(A - B)/sqrt(F0)||_{x,p,I}
    double distance(const SlabField& a, const SlabField& b) const;

    SlabField perturbation(const SlabField& F) const;
    double energy_functional(const SlabField& f, int order);
    std::array<double, 5> perturbation_totals(const SlabField& F) const;
    double total_entropy(const SlabField& F) const;
    double max_defect(const SlabField& F) const;

    TraceRow sample(double t, const SlabField& F);
    std::vector<MacroRow> macro_snapshot(double t, const SlabField& F) const;

    EnergyTrace run(const std::function<void(const TraceRow&)>& on_sample = {});

private:
    RunConfig cfg_;
    GridPtr grid_;
    BackgroundPtr bg_;
    Transport transport_;
    std::array<double, 5> eq_totals_{};
};

EnergyTrace run_simulation(const RunConfig& cfg);

// space-homogeneous relaxation of one cell, no transport
struct Relax0dRow {
    double t = 0.0;
    double entropy = 0.0;
    // max over the five invariants of |m(t) - m(0)| / |m(0)|, the spatial part excluded
    double drift = 0.0;
    std::array<double, 5> defect{};   // relative defect components
    double min_F = 0.0;
};

struct Relax0dResult {
    std::vector<Relax0dRow> rows;
    std::vector<MonitorResult> monitors;
    bool all_passed() const;
};

// F = F0 (1 + epsilon r), r uniform in [-1, 1] per node from CounterRng(seed, node)
Field relax0d_initial(const Background& bg, double epsilon, std::uint64_t seed);
Relax0dResult run_relax0d(const RunConfig& cfg);

struct ConvergenceLevel {
    double dt = 0.0;
    double diff = 0.0;      // distance to the next finer level
};

struct ConvergenceStudy {
    Scheme scheme = Scheme::strang;
    std::vector<ConvergenceLevel> levels;
    std::vector<double> slopes;   // log2 ratios of consecutive diffs
    double slope = 0.0;           // last slope
};

// runs t_end with dt, dt/2, ..., dt/2^(n_levels-1) from the same initial data
ConvergenceStudy time_convergence(const RunConfig& cfg, Scheme scheme, int n_levels = 4);

void write_trace_csv(const EnergyTrace& tr, const std::string& path);
void write_macro_csv(const EnergyTrace& tr, const std::string& path);
void write_relax0d_csv(const Relax0dResult& r, const std::string& path);

} // namespace marle
