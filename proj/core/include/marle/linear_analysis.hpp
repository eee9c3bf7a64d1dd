#pragma once

#include "marle/distributions.hpp"
#include "marle/random.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>

namespace marle {

using Mat5 = Eigen::Matrix<double, 5, 5>;
using Vec5 = Eigen::Matrix<double, 5, 1>;

// grid_consistent: momentum coefficient gamma_hat, so the five kernel fields are
// exact fixed points of P0 on the grid; continuum: momentum coefficient gamma0.
enum class OperatorForm { grid_consistent, continuum };

struct OrthonormalBasis {
    std::array<Field, 5> e;
    // e_a = norm[a] * raw_a with raw = {s, (1+I)p^i s, ((1+I)p0 - delta) s}
    std::array<double, 5> norm{};
    double delta = 0.0;
};

OrthonormalBasis build_basis(const Background& bg);

// nu P0 f = sum_ab v_a C_ab <v_b, f>,  v = {s, s/e, (p^i/p0) s}
struct LowRankOperator {
    std::array<Field, 5> v;
    Mat5 C;
    Field nu;
};

struct MicroMacroCoeffs {
    double a = 0.0;
    Vec3 b{};
    double c = 0.0;
    double a_tilde = 0.0;
};

struct GapOptions {
    double rel_tol = 1e-13;
    int max_bisection = 200;
    int inverse_iterations = 8;
    std::uint64_t seed = 7;
};

struct SpectralReport {
    double lambda = 0.0;       // certified lower end of the final bracket
    double lambda_hi = 0.0;
    double residual = 0.0;     // ||(-L) y - rho y|| / ||y|| for the inverse-iteration vector
    double rayleigh = 0.0;
    int kernel_count = 0;      // eigenvalues below nu_min / 2 (expected 5)
    int bisection_steps = 0;
    int inverse_iterations = 0;
    double nu_min = 0.0;
    double nu_6 = 0.0;
};

class LinearOperator {
public:
    explicit LinearOperator(BackgroundPtr bg, OperatorForm form = OperatorForm::grid_consistent);

    const Background& background() const { return *bg_; }
    const OrthonormalBasis& basis() const { return basis_; }
    const LowRankOperator& low_rank() const { return lr_; }
    OperatorForm form() const { return form_; }
    double momentum_coefficient() const { return gmom_; }

    Field apply_P0(const Field& f) const;
    Field apply_P0_lowrank(const Field& f) const;
    Field apply_L(const Field& f) const;
    Field apply_P(const Field& f) const;
    MicroMacroCoeffs micro_macro(const Field& f) const;
    Field reconstruct(const MicroMacroCoeffs& c) const;

    SpectralReport spectral_gap(const GapOptions& opt = {}) const;
    // number of eigenvalues of -L below x
    int count_below(double x) const;

private:
    BackgroundPtr bg_;
    OperatorForm form_;
    double gmom_;
    OrthonormalBasis basis_;
    LowRankOperator lr_;
};

struct NonlinearParts {
    double A = 0.0;      // sum W f s
    Vec3 B{};            // sum W (p/p0) f s
    double E = 0.0;      // sum W f s / ((1+I)p0)
    double Phi = 0.0;
    double Psi = 0.0;
    double N_n = 0.0;
    Vec3 N_u{};
    double N_eta = 0.0;

    double n_minus_1() const { return A + N_n; }
    Vec3 u() const { return {B[0] + N_u[0], B[1] + N_u[1], B[2] + N_u[2]}; }
};

// z_i + sum_a c_a e_a[i] with z_i, c_a standard normal draws from rng
Field random_perturbation(const LinearOperator& op, CounterRng& rng);

struct OperatorDiagnostics {
    double gram_residual = 0.0;                 // max |<e_a, e_b> - delta_ab|
    std::array<double, 5> kernel_residuals{};   // ||P0 e - e|| / ||e||
    double lowrank_residual = 0.0;              // max |P0 f - P0_lowrank f| / ||f|| over samples
    double self_adjoint_residual = 0.0;         // max |<Lf,g> - <f,Lg>| / (||f|| ||g||)
    double coercivity_worst = 0.0;              // max (<Lf,f> + lambda ||(I-P)f||^2) / ||f||^2
    int samples = 0;
    SpectralReport gap;
};

OperatorDiagnostics analyze_operator(const LinearOperator& op, int samples, std::uint64_t seed,
                                     const GapOptions& opt = {});

NonlinearParts nonlinear_parts(const Background& bg, const Field& f);
double eta_minus_eta0(const Background& bg, const NonlinearParts& np);

struct TransitionalState {
    double n = 1.0;
    Vec3 u{};
    double eta = 0.0;
    double gamma = 1.0;
};

// Q with Hess_{(n,u,eta)} F(n,u,eta) = Q F at momentum node k, internal node j
Mat5 eval_hessian_Q(const JuttnerFunctions& jf, const TransitionalState& st, std::size_t k, std::size_t j);
// helper sharing the gamma-dependent ratios across nodes
Mat5 eval_hessian_Q(const PhaseGrid& g, const TransitionalState& st, const RatioDerivs& rd, std::size_t k,
                    std::size_t j);

// F(n,u,eta) = n/M(X(eta)) exp(-X(eta)(1+I)(u0 p0 - u.p)) at one node
double juttner_param(const JuttnerFunctions& jf, double n, const Vec3& u, double eta, std::size_t k, std::size_t j);

Field gamma_direct(const Background& bg, const Field& f, int theta_order = 8);
Field gamma_defect(const BackgroundPtr& bg, const Field& f);

} // namespace marle
