#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace anyon {

using cplx = std::complex<double>;
using RealField = std::vector<double>;
using ComplexField = std::vector<cplx>;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

// Two real components per grid node.
struct VectorField {
    RealField x;
    RealField y;

    VectorField() = default;
    explicit VectorField(std::size_t size) : x(size, 0.0), y(size, 0.0) {}
    std::size_t size() const { return x.size(); }
};

// Uniform square grid of side `L` centred on the origin, n points per axis.
// Node (ix, iy) sits at (-L/2 + ix h, -L/2 + iy h) and is stored at
// ix * n + iy. The origin is always a node (n even).
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(double box, std::size_t points);

    double box() const { return box_; }
    std::size_t n() const { return n_; }
    std::size_t size() const { return n_ * n_; }
    double spacing() const { return h_; }
    double cell_area() const { return h_ * h_; }

    double coord(std::size_t i) const { return -0.5 * box_ + static_cast<double>(i) * h_; }
    Vec2 point(std::size_t ix, std::size_t iy) const { return {coord(ix), coord(iy)}; }
    Vec2 point(std::size_t flat) const { return point(flat / n_, flat % n_); }
    std::size_t index(std::size_t ix, std::size_t iy) const { return ix * n_ + iy; }

    bool operator==(const Grid2D& o) const { return box_ == o.box_ && n_ == o.n_; }

private:
    double box_ = 0.0;
    std::size_t n_ = 0;
    double h_ = 0.0;
};

// Discrete L2 quantities with the h^2 quadrature weight.
double integrate(const Grid2D& g, std::span<const double> f);
double l2_norm_squared(const Grid2D& g, std::span<const cplx> u);
cplx inner(const Grid2D& g, std::span<const cplx> a, std::span<const cplx> b);

// Sample f(x, y) on every node.
template <class F>
RealField sample(const Grid2D& g, F&& f) {
    RealField out(g.size());
    for (std::size_t ix = 0; ix < g.n(); ++ix)
        for (std::size_t iy = 0; iy < g.n(); ++iy)
            out[g.index(ix, iy)] = f(g.point(ix, iy));
    return out;
}

} // namespace anyon
