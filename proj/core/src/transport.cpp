#include "marle/transport.hpp"

#include "marle/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>

namespace marle {

Transport::Transport(GridPtr grid) : grid_(std::move(grid)), n_x_(grid_->n_x()), n_pI_(grid_->size()) {
    v_.resize(n_pI_);
    for (std::size_t idx = 0; idx < n_pI_; ++idx) {
        const std::size_t k = grid_->mom_index(idx);
        v_[idx] = grid_->p(0, k) / grid_->p0(k);
    }
    const int nm = n_modes();
    rbuf_ = fftw_alloc_real(static_cast<std::size_t>(n_x_) * n_pI_);
    auto* c = fftw_alloc_complex(static_cast<std::size_t>(nm) * n_pI_);
    cbuf_ = c;
    int n[1] = {n_x_};
    const int howmany = static_cast<int>(n_pI_);
    const int stride = static_cast<int>(n_pI_);
    // FFTW_ESTIMATE: plan choice independent of timing, so results are reproducible
    fwd_ = fftw_plan_many_dft_r2c(1, n, howmany, rbuf_, nullptr, stride, 1, c, nullptr, stride, 1, FFTW_ESTIMATE);
    inv_ = fftw_plan_many_dft_c2r(1, n, howmany, c, nullptr, stride, 1, rbuf_, nullptr, stride, 1, FFTW_ESTIMATE);
    if (!fwd_ || !inv_) throw Error("Transport: FFTW planning failed");
}

Transport::~Transport() {
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (inv_) fftw_destroy_plan(static_cast<fftw_plan>(inv_));
    fftw_free(rbuf_);
    fftw_free(cbuf_);
}

double Transport::wavenumber(int m) const { return 2.0 * M_PI * m / grid_->spec().L_x; }

void Transport::forward(const SlabField& F, Spectrum& out) {
    const std::size_t n = F.values.size();
    std::memcpy(rbuf_, F.values.data(), n * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(fwd_));
    const std::size_t nc = static_cast<std::size_t>(n_modes()) * n_pI_;
    out.resize(nc);
    std::memcpy(static_cast<void*>(out.data()), cbuf_, nc * sizeof(fftw_complex));
}

void Transport::inverse(const Spectrum& in, SlabField& F) {
    const std::size_t nc = static_cast<std::size_t>(n_modes()) * n_pI_;
    std::memcpy(cbuf_, static_cast<const void*>(in.data()), nc * sizeof(fftw_complex));
    fftw_execute(static_cast<fftw_plan>(inv_));
    F.n_x = n_x_;
    F.n_pI = n_pI_;
    F.values.resize(static_cast<std::size_t>(n_x_) * n_pI_);
    const double s = 1.0 / n_x_;
    for (std::size_t i = 0; i < F.values.size(); ++i) F.values[i] = rbuf_[i] * s;
}

std::complex<double> Transport::shift_factor(int m, double v, double t) const {
    const double ph = wavenumber(m) * v * t;
    // Nyquist mode of an even grid: real part of the shift keeps the field real
    if (n_x_ % 2 == 0 && m == n_x_ / 2) return {std::cos(ph), 0.0};
    return {std::cos(ph), -std::sin(ph)};
}

void Transport::shift(Spectrum& S, double t) const {
    const int nm = n_modes();
    for (int m = 1; m < nm; ++m)
        for (std::size_t idx = 0; idx < n_pI_; ++idx) S[m * n_pI_ + idx] *= shift_factor(m, v_[idx], t);
}

void Transport::step(SlabField& F, double dt) {
    Spectrum S;
    forward(F, S);
    shift(S, dt);
    inverse(S, F);
}

double Transport::energy(const SlabField& f, int order) {
    if (order < 0) throw RangeError("energy_functional: order must be non-negative");
    Spectrum S;
    forward(f, S);
    const auto& W = grid_->weights();
    const int nm = n_modes();
    const double dx = grid_->dx();
    double total = 0.0;
    for (int m = 0; m < nm; ++m) {
        const bool nyq = (n_x_ % 2 == 0 && m == n_x_ / 2);
        const double mult = (m == 0 || nyq) ? 1.0 : 2.0;
        const double k2 = wavenumber(m) * wavenumber(m);
        double factor = 0.0, pw = 1.0;
        for (int a = 0; a <= order; ++a) {
            // odd derivatives of the sampled Nyquist cosine vanish on the nodes
            if (!(nyq && a % 2 == 1)) factor += pw;
            pw *= k2;
        }
        double acc = 0.0;
        for (std::size_t idx = 0; idx < n_pI_; ++idx) acc += W[idx] * std::norm(S[m * n_pI_ + idx]);
        total += mult * factor * acc;
    }
    return total * dx / n_x_;
}

} // namespace marle
