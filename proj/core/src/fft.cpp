#include "anyon/fft.hpp"
#include "anyon/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <numbers>

namespace anyon {

namespace {

// Planner calls are not thread-safe in FFTW; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// FFTW_ESTIMATE keeps the chosen algorithm, and therefore every rounding
// pattern, identical from run to run.
constexpr unsigned kPlanFlags = FFTW_ESTIMATE;

} // namespace

struct Fft2D::Impl {
    std::size_t n = 0;
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    explicit Impl(std::size_t n_) : n(n_) {
        std::lock_guard lock(planner_mutex());
        buf = fftw_alloc_complex(n * n);
        const int ni = static_cast<int>(n);
        fwd = fftw_plan_dft_2d(ni, ni, buf, buf, FFTW_FORWARD, kPlanFlags);
        bwd = fftw_plan_dft_2d(ni, ni, buf, buf, FFTW_BACKWARD, kPlanFlags);
    }
    ~Impl() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buf);
    }

    void run(fftw_plan p, std::span<const cplx> in, std::span<cplx> out) {
        std::memcpy(buf, in.data(), n * n * sizeof(fftw_complex));
        fftw_execute(p);
        std::memcpy(static_cast<void*>(out.data()), buf, n * n * sizeof(fftw_complex));
    }
};

Fft2D::Fft2D(std::size_t n) : impl_(std::make_unique<Impl>(n)) {}
Fft2D::~Fft2D() = default;
Fft2D::Fft2D(Fft2D&&) noexcept = default;
Fft2D& Fft2D::operator=(Fft2D&&) noexcept = default;

std::size_t Fft2D::n() const { return impl_->n; }

void Fft2D::forward(std::span<const cplx> in, std::span<cplx> out) { impl_->run(impl_->fwd, in, out); }
void Fft2D::backward(std::span<const cplx> in, std::span<cplx> out) { impl_->run(impl_->bwd, in, out); }

SpectralOps::SpectralOps(const Grid2D& grid)
    : grid_(grid), k_(grid.n()), fft_(grid.n()), work_(grid.size()) {
    const std::size_t n = grid.n();
    const double dk = 2.0 * std::numbers::pi / grid.box();
    for (std::size_t m = 0; m < n; ++m) {
        if (m < n / 2)
            k_[m] = dk * static_cast<double>(m);
        else if (m == n / 2)
            k_[m] = 0.0;
        else
            k_[m] = dk * (static_cast<double>(m) - static_cast<double>(n));
    }
}

ComplexField SpectralOps::derivative(std::span<const cplx> u, int axis) {
    const std::size_t n = grid_.n();
    ComplexField out(grid_.size());
    fft_.forward(u, work_);
    const double inv = 1.0 / static_cast<double>(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            const double k = axis == 0 ? k_[a] : k_[b];
            work_[a * n + b] *= cplx(0.0, k * inv);
        }
    }
    fft_.backward(work_, out);
    return out;
}

std::array<ComplexField, 2> SpectralOps::gradient(std::span<const cplx> u) {
    const std::size_t n = grid_.n();
    std::array<ComplexField, 2> out{ComplexField(grid_.size()), ComplexField(grid_.size())};
    fft_.forward(u, work_);
    ComplexField spec = work_;
    const double inv = 1.0 / static_cast<double>(n * n);
    for (int axis = 0; axis < 2; ++axis) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                const double k = axis == 0 ? k_[a] : k_[b];
                work_[a * n + b] = spec[a * n + b] * cplx(0.0, k * inv);
            }
        fft_.backward(work_, out[axis]);
    }
    return out;
}

RealField SpectralOps::derivative(std::span<const double> f, int axis) {
    ComplexField c(f.begin(), f.end());
    ComplexField d = derivative(c, axis);
    RealField out(d.size());
    std::transform(d.begin(), d.end(), out.begin(), [](const cplx& z) { return z.real(); });
    return out;
}

ComplexField SpectralOps::laplacian(std::span<const cplx> u) {
    const std::size_t n = grid_.n();
    const double nyq = std::numbers::pi / grid_.spacing();
    auto ksq = [&](std::size_t m) { return m == n / 2 ? nyq * nyq : k_[m] * k_[m]; };
    ComplexField out(grid_.size());
    fft_.forward(u, work_);
    const double inv = 1.0 / static_cast<double>(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        const double ka = ksq(a);
        for (std::size_t b = 0; b < n; ++b) work_[a * n + b] *= -(ka + ksq(b)) * inv;
    }
    fft_.backward(work_, out);
    return out;
}

std::vector<double> SpectralOps::second_derivative_matrix() const {
    const std::size_t n = grid_.n();
    const double h = grid_.spacing();
    const double nyq = std::numbers::pi / h;
    std::vector<double> d(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
            const double dx = (static_cast<double>(j) - static_cast<double>(l)) * h;
            double s = 0.0;
            for (std::size_t m = 0; m < n; ++m) {
                const double k = m == n / 2 ? nyq : k_[m];
                s += -k * k * std::cos(k * dx);
            }
            d[j * n + l] = s / static_cast<double>(n);
        }
    }
    return d;
}

std::vector<double> SpectralOps::derivative_matrix() const {
    // Column l of D is the derivative of the unit vector e_l:
    // D_jl = (1/n) sum_m i k_m exp(i k_m (x_j - x_l)), real and skew.
    const std::size_t n = grid_.n();
    const double h = grid_.spacing();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
            const double dx = (static_cast<double>(j) - static_cast<double>(l)) * h;
            double s = 0.0;
            for (std::size_t m = 0; m < n; ++m) s += -k_[m] * std::sin(k_[m] * dx);
            d[j * n + l] = s / static_cast<double>(n);
        }
    }
    return d;
}

struct FreeSpaceConvolver::Plans {
    std::size_t N = 0;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    explicit Plans(std::size_t N_) : N(N_) {
        std::lock_guard lock(planner_mutex());
        real = fftw_alloc_real(N * N);
        spec = fftw_alloc_complex(N * (N / 2 + 1));
        const int ni = static_cast<int>(N);
        r2c = fftw_plan_dft_r2c_2d(ni, ni, real, spec, kPlanFlags);
        c2r = fftw_plan_dft_c2r_2d(ni, ni, spec, real, kPlanFlags);
    }
    ~Plans() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(r2c);
        fftw_destroy_plan(c2r);
        fftw_free(real);
        fftw_free(spec);
    }
    std::size_t spectrum_size() const { return N * (N / 2 + 1); }
};

FreeSpaceConvolver::FreeSpaceConvolver(const Grid2D& grid, std::vector<KernelFn> kernels)
    : grid_(grid), padded_(2 * grid.n()), plans_(std::make_unique<Plans>(2 * grid.n())) {
    const std::size_t N = padded_;
    const double h = grid.spacing();
    const double scale = grid.cell_area();
    for (const auto& k : kernels) {
        // Displacement index m in [0, N) maps to m or m - N; the value at
        // m = n (displacement -n h) is never reached by a pair of nodes.
        for (std::size_t a = 0; a < N; ++a) {
            const long ma = a < N / 2 ? static_cast<long>(a) : static_cast<long>(a) - static_cast<long>(N);
            for (std::size_t b = 0; b < N; ++b) {
                const long mb = b < N / 2 ? static_cast<long>(b) : static_cast<long>(b) - static_cast<long>(N);
                double v = 0.0;
                if (a != N / 2 && b != N / 2)
                    v = scale * k(Vec2{static_cast<double>(ma) * h, static_cast<double>(mb) * h});
                plans_->real[a * N + b] = v;
            }
        }
        fftw_execute(plans_->r2c);
        Spectrum s(plans_->spectrum_size());
        std::memcpy(static_cast<void*>(s.data()), plans_->spec, s.size() * sizeof(cplx));
        kernel_spectra_.push_back(std::move(s));
    }
}

FreeSpaceConvolver::~FreeSpaceConvolver() = default;

FreeSpaceConvolver::Spectrum FreeSpaceConvolver::forward(std::span<const double> f) {
    const std::size_t n = grid_.n();
    const std::size_t N = padded_;
    std::fill(plans_->real, plans_->real + N * N, 0.0);
    for (std::size_t ix = 0; ix < n; ++ix)
        std::copy_n(f.data() + ix * n, n, plans_->real + ix * N);
    fftw_execute(plans_->r2c);
    Spectrum s(plans_->spectrum_size());
    std::memcpy(static_cast<void*>(s.data()), plans_->spec, s.size() * sizeof(cplx));
    return s;
}

RealField FreeSpaceConvolver::inverse(const Spectrum& s) {
    const std::size_t n = grid_.n();
    const std::size_t N = padded_;
    std::memcpy(plans_->spec, s.data(), s.size() * sizeof(cplx));
    fftw_execute(plans_->c2r);
    RealField out(n * n);
    const double inv = 1.0 / static_cast<double>(N * N);
    for (std::size_t ix = 0; ix < n; ++ix)
        for (std::size_t iy = 0; iy < n; ++iy)
            out[ix * n + iy] = plans_->real[ix * N + iy] * inv;
    return out;
}

void FreeSpaceConvolver::accumulate(Spectrum& acc, std::size_t id, const Spectrum& s) const {
    const Spectrum& k = kernel_spectra_.at(id);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += k[i] * s[i];
}

FreeSpaceConvolver::Spectrum FreeSpaceConvolver::zero_spectrum() const {
    return Spectrum(plans_->spectrum_size(), cplx(0.0, 0.0));
}

RealField FreeSpaceConvolver::apply(std::size_t id, std::span<const double> f) {
    Spectrum s = forward(f);
    Spectrum acc = zero_spectrum();
    accumulate(acc, id, s);
    return inverse(acc);
}

} // namespace anyon
