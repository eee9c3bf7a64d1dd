#pragma once

#include "marle/phase_grid.hpp"

#include <complex>
#include <vector>

namespace marle {

// F(x_i, p, I) stored as values[i * n_pI + idx]
struct SlabField {
    int n_x = 0;
    std::size_t n_pI = 0;
    std::vector<double> values;

    SlabField() = default;
    SlabField(int nx, std::size_t npI, double fill = 0.0) : n_x(nx), n_pI(npI), values(nx * npI, fill) {}

    double* cell(int i) { return values.data() + static_cast<std::size_t>(i) * n_pI; }
    const double* cell(int i) const { return values.data() + static_cast<std::size_t>(i) * n_pI; }
};

using Spectrum = std::vector<std::complex<double>>;

// Exact free streaming x -> x - (p1/p0) t on the periodic slab via Fourier phase shifts.
// Owns FFTW plans and scratch buffers; not safe to share between threads.
class Transport {
public:
    explicit Transport(GridPtr grid);
    ~Transport();
    Transport(const Transport&) = delete;
    Transport& operator=(const Transport&) = delete;

    int n_modes() const { return n_x_ / 2 + 1; }
    double wavenumber(int m) const;
    // p1/p0 at flat (p,I) node
    double velocity(std::size_t idx) const { return v_[idx]; }

    void forward(const SlabField& F, Spectrum& out);
    void inverse(const Spectrum& in, SlabField& F);

    // spectral shift factor for mode m, velocity v, elapsed time t
    std::complex<double> shift_factor(int m, double v, double t) const;
    void shift(Spectrum& S, double t) const;

    void step(SlabField& F, double dt);

    // sum_{k<=order} ||d_x^k f||^2 with ||g||^2 = sum_i dx sum W g^2
    double energy(const SlabField& f, int order);

private:
    GridPtr grid_;
    int n_x_;
    std::size_t n_pI_;
    std::vector<double> v_;
    double* rbuf_ = nullptr;
    void* cbuf_ = nullptr;
    void* fwd_ = nullptr;
    void* inv_ = nullptr;
};

} // namespace marle
