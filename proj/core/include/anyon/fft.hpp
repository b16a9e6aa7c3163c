#pragma once

#include "anyon/grid.hpp"

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace anyon {

// Square complex 2D transform of side n (unnormalised both ways). Owns its
// FFTW buffers; one instance must not be shared between threads.
class Fft2D {
public:
    explicit Fft2D(std::size_t n);
    ~Fft2D();
    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;
    Fft2D(Fft2D&&) noexcept;
    Fft2D& operator=(Fft2D&&) noexcept;

    std::size_t n() const;
    void forward(std::span<const cplx> in, std::span<cplx> out);
    void backward(std::span<const cplx> in, std::span<cplx> out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Spectral differentiation on the periodic grid. The Nyquist mode is dropped
// so the derivative of a real field stays real and the operator is exactly
// skew-adjoint with respect to the h^2-weighted inner product.
class SpectralOps {
public:
    explicit SpectralOps(const Grid2D& grid);

    const Grid2D& grid() const { return grid_; }
    // axis 0 = x, 1 = y
    ComplexField derivative(std::span<const cplx> u, int axis);
    std::array<ComplexField, 2> gradient(std::span<const cplx> u);
    RealField derivative(std::span<const double> f, int axis);
    // Spectral Laplacian with the Nyquist mode kept at -(pi/h)^2.
    ComplexField laplacian(std::span<const cplx> u);

    // Wavenumber used for index m along one axis (0 at Nyquist).
    double wavenumber(std::size_t m) const { return k_[m]; }

    // Dense n x n matrix (row-major) of the 1D derivative along one axis;
    // identical in exact arithmetic to `derivative`.
    std::vector<double> derivative_matrix() const;
    // Dense n x n matrix of the 1D second derivative matching `laplacian`.
    std::vector<double> second_derivative_matrix() const;

private:
    Grid2D grid_;
    std::vector<double> k_;
    Fft2D fft_;
    ComplexField work_;
};

// Free-space discrete convolution on an n x n grid via zero padding to
// 2n x 2n: (K * f)_i = h^2 sum_j K(x_i - x_j) f_j, with no wrap-around for
// any pair of nodes. Kernels are sampled at node displacements.
class FreeSpaceConvolver {
public:
    using KernelFn = std::function<double(Vec2)>;
    using Spectrum = std::vector<cplx>;

    FreeSpaceConvolver(const Grid2D& grid, std::vector<KernelFn> kernels);
    ~FreeSpaceConvolver();
    FreeSpaceConvolver(const FreeSpaceConvolver&) = delete;
    FreeSpaceConvolver& operator=(const FreeSpaceConvolver&) = delete;

    const Grid2D& grid() const { return grid_; }
    std::size_t kernel_count() const { return kernel_spectra_.size(); }

    Spectrum forward(std::span<const double> f);
    RealField inverse(const Spectrum& s);
    // acc += K_id^ * s
    void accumulate(Spectrum& acc, std::size_t id, const Spectrum& s) const;
    Spectrum zero_spectrum() const;

    RealField apply(std::size_t id, std::span<const double> f);

private:
    struct Plans;
    Grid2D grid_;
    std::size_t padded_;
    std::vector<Spectrum> kernel_spectra_;
    std::unique_ptr<Plans> plans_;
};

} // namespace anyon
