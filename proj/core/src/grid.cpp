#include "anyon/grid.hpp"
#include "anyon/error.hpp"


namespace anyon {

Grid2D::Grid2D(double box, std::size_t points) : box_(box), n_(points) {
    if (!(box > 0.0))
        throw DomainError("grid box side must be positive");
    if (points < 4 || (points & (points - 1)) != 0)
        throw DomainError("grid points per axis must be a power of two >= 4");
    h_ = box_ / static_cast<double>(n_);
}

// Sums accumulate in long double so that normalization and energy
// differences stay well below the solver's stopping tolerance.
double integrate(const Grid2D& g, std::span<const double> f) {
    long double s = 0.0L;
    for (double v : f) s += v;
    return g.cell_area() * static_cast<double>(s);
}

double l2_norm_squared(const Grid2D& g, std::span<const cplx> u) {
    long double s = 0.0L;
    for (const cplx& z : u) s += std::norm(z);
    return g.cell_area() * static_cast<double>(s);
}

cplx inner(const Grid2D& g, std::span<const cplx> a, std::span<const cplx> b) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return g.cell_area() * cplx(static_cast<double>(re), static_cast<double>(im));
}

} // namespace anyon
