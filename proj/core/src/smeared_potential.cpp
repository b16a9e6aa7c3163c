#include "anyon/smeared_potential.hpp"

#include "anyon/error.hpp"
#include "anyon/fft.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace anyon {

namespace {

constexpr double kPi = std::numbers::pi;

double taper_formula(double t, double kappa) {
    if (t <= 1.0)
        return 1.0;
    if (t >= 2.0)
        return 0.0;
    return 0.5 * (1.0 + std::cos(kPi * std::pow(t - 1.0, kappa)));
}

// Integral of g over [a, b] by `panels` equal Gauss-Legendre panels.
template <class F>
double panel_gauss(F&& g, double a, double b, int panels) {
    using boost::math::quadrature::gauss;
    const double w = (b - a) / panels;
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * w;
        acc += gauss<double, 10>::integrate(g, lo, lo + w);
    }
    return acc;
}

} // namespace

double taper_mass_integral(double kappa) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto g = [kappa](double t) { return taper_formula(t, kappa) * t; };
    return integrator.integrate(g, 1.0, 2.0, 1e-15);
}

double solve_taper_exponent(double lo, double hi) {
    const double target = 0.5 * (kPi - 1.0);
    double flo = taper_mass_integral(lo) - target;
    double fhi = taper_mass_integral(hi) - target;
    if (!(flo < 0.0 && fhi > 0.0))
        throw BracketError("taper exponent bracket does not straddle the unit-mass root");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = taper_mass_integral(mid) - target;
        if (fm == 0.0)
            return mid;
        if (fm < 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
            break;
    }
    return 0.5 * (lo + hi);
}

const SmoothingProfile& SmoothingProfile::standard() {
    static const SmoothingProfile profile(solve_taper_exponent());
    return profile;
}

SmoothingProfile::SmoothingProfile(double kappa, std::size_t intervals) : kappa_(kappa), intervals_(intervals) {
    if (intervals_ < 2)
        throw DomainError("profile table needs at least two intervals");
    using boost::math::quadrature::gauss;
    const std::size_t N = intervals_;
    const double ds = 1.0 / static_cast<double>(N);
    cum_mass_.assign(N + 1, 0.0);
    cum_mass_slope_.assign(N + 1, 0.0);
    log_tail_.assign(N + 1, 0.0);
    log_tail_slope_.assign(N + 1, 0.0);

    auto fm = [this](double t) { return taper(t) * t; };
    auto fl = [this](double t) { return std::log(t) * taper(t) * t; };
    for (std::size_t k = 0; k <= N; ++k) {
        const double s = 1.0 + k * ds;
        cum_mass_slope_[k] = fm(s);
        log_tail_slope_[k] = -fl(s);
    }
    for (std::size_t k = 0; k < N; ++k) {
        const double a = 1.0 + k * ds;
        cum_mass_[k + 1] = cum_mass_[k] + gauss<double, 10>::integrate(fm, a, a + ds);
    }
    for (std::size_t k = N; k > 0; --k) {
        const double a = 1.0 + (k - 1) * ds;
        log_tail_[k - 1] = log_tail_[k] + gauss<double, 10>::integrate(fl, a, a + ds);
    }
}

double SmoothingProfile::taper(double t) const { return taper_formula(t, kappa_); }

double SmoothingProfile::chi(double r) const {
    if (r <= 1.0)
        return kPlateau;
    if (r >= kSupport)
        return 0.0;
    return kPlateau * taper(r);
}

double SmoothingProfile::hermite(const std::vector<double>& values, const std::vector<double>& slopes, double s) const {
    const double N = static_cast<double>(intervals_);
    const double x = (s - 1.0) * N;
    std::size_t k = static_cast<std::size_t>(x);
    if (k >= intervals_)
        k = intervals_ - 1;
    const double t = x - static_cast<double>(k);
    const double h = 1.0 / N;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * values[k] + h * h10 * slopes[k] + h01 * values[k + 1] + h * h11 * slopes[k + 1];
}

double SmoothingProfile::mass_inside(double s) const {
    if (s <= 0.0)
        return 0.0;
    if (s <= 1.0)
        return s * s / kPi;
    if (s >= kSupport)
        return 1.0 / kPi + (2.0 / kPi) * cum_mass_.back();
    return 1.0 / kPi + (2.0 / kPi) * hermite(cum_mass_, cum_mass_slope_, s);
}

double SmoothingProfile::log_moment_outside(double s) const {
    if (s >= kSupport)
        return 0.0;
    if (s >= 1.0)
        return (2.0 / kPi) * hermite(log_tail_, log_tail_slope_, s);
    // plateau part: int_s^1 t log t dt = -1/4 - s^2 log(s)/2 + s^2/4
    const double s2 = s * s;
    const double plateau = -0.25 + 0.25 * s2 - (s > 0.0 ? 0.5 * s2 * std::log(s) : 0.0);
    return (2.0 / kPi) * (plateau + log_tail_.front());
}

double SmoothingProfile::fourier(double p) const {
    p = std::abs(p);
    double inner;
    if (p < 1e-6)
        inner = 0.5 - p * p / 16.0;
    else
        inner = ::j1(p) / p;
    const int panels = 8 + static_cast<int>(std::ceil(p));
    auto g = [this, p](double t) { return taper(t) * ::j0(p * t) * t; };
    return (2.0 / kPi) * (inner + panel_gauss(g, 1.0, 2.0, panels));
}

SmearedKernel::SmearedKernel(double R, const SmoothingProfile& profile) : R_(R), profile_(&profile) {
    if (!(R > 0.0) || !std::isfinite(R))
        throw DomainError("smearing radius must be positive and finite");
}

double SmearedKernel::chi_R(double r) const { return profile_->chi(r / R_) / (R_ * R_); }

double SmearedKernel::mass(double r) const { return profile_->mass_inside(r / R_); }

double SmearedKernel::v(double r) const {
    if (r <= 0.0)
        return 0.0;
    const double s = r / R_;
    if (s <= 1.0)
        return r / (kPi * R_ * R_);
    if (s >= SmoothingProfile::kSupport)
        return 1.0 / r;
    return mass(r) / r;
}

double SmearedKernel::w(double r) const {
    const double s = r / R_;
    if (s >= SmoothingProfile::kSupport)
        return std::log(r);
    double w1;
    if (s <= 1.0)
        w1 = (2.0 / kPi) * (0.25 * s * s - 0.25) + profile_->log_moment_outside(1.0);
    else
        w1 = std::log(s) * mass(r) + profile_->log_moment_outside(s);
    return std::log(R_) + w1;
}

Vec2 SmearedKernel::grad(Vec2 x) const {
    const double r = norm(x);
    if (r == 0.0)
        return {0.0, 0.0};
    const double a = v(r) / r;
    return {a * x.x, a * x.y};
}

Vec2 SmearedKernel::grad_perp(Vec2 x) const {
    const Vec2 g = grad(x);
    return {-g.y, g.x};
}

double SmearedKernel::sup_v() const {
    auto neg = [this](double r) { return -v(r); };
    const auto res = boost::math::tools::brent_find_minima(neg, R_, 2.0 * R_, 52);
    return std::max(-res.second, std::max(v(R_), v(2.0 * R_)));
}

nlohmann::json SmearedKernel::to_json() const {
    return {
        {"R", R_},
        {"kappa", profile_->kappa()},
        {"plateau_height", SmoothingProfile::kPlateau},
        {"support_radius", SmoothingProfile::kSupport},
        {"table_domain", {1.0, SmoothingProfile::kSupport}},
        {"table_intervals", profile_->table_intervals()},
        {"table_mesh", 1.0 / static_cast<double>(profile_->table_intervals())},
        {"interpolation", "cubic_hermite"},
        {"total_mass", profile_->total_mass()},
        {"sup_v", sup_v()},
    };
}

void SmearedKernel::write_table_csv(std::ostream& os, std::size_t samples, double rmax) const {
    if (samples < 2)
        throw DomainError("radial table needs at least two samples");
    os << "r,v\n";
    char buf[64];
    for (std::size_t k = 0; k < samples; ++k) {
        const double r = rmax * static_cast<double>(k) / static_cast<double>(samples - 1);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r, v(r));
        os << buf;
    }
}

double chi_eval(double r) { return SmoothingProfile::standard().chi(r); }

Vec2 grad_wR(Vec2 x, double R) { return SmearedKernel(R).grad(x); }

Vec2 grad_perp_wR(Vec2 x, double R) { return SmearedKernel(R).grad_perp(x); }

double wR_eval(Vec2 x, double R) {
    if (R == 0.0)
        return std::log(norm(x));
    return SmearedKernel(R).w(x);
}

double lp_norm_grad(double p, double R) {
    if (std::isinf(p) && p > 0)
        return SmearedKernel(R).sup_v();
    if (!(p > 2.0))
        throw DomainError("L^p norm of the kernel gradient diverges for p <= 2");
    const SmearedKernel k(R);
    const double inner = 2.0 * kPi * std::pow(R, 2.0 - p) / ((p + 2.0) * std::pow(kPi, p));
    const double outer = 2.0 * kPi * std::pow(2.0 * R, 2.0 - p) / (p - 2.0);
    auto g = [&](double r) { return std::pow(k.v(r), p) * r; };
    const double middle =
        2.0 * kPi * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, R, 2.0 * R, 15, 1e-14);
    return std::pow(inner + middle + outer, 1.0 / p);
}

double chi_fourier(double p) { return SmoothingProfile::standard().fourier(p); }

double chi_fourier_abs_integral(double P) {
    if (P <= 0.0)
        return 0.0;
    const auto& prof = SmoothingProfile::standard();
    auto g = [&](double p) { return std::abs(prof.fourier(p)) * p; };
    const int panels = static_cast<int>(std::ceil(P * 4.0));
    return 2.0 * kPi * panel_gauss(g, 0.0, P, panels);
}

std::array<cplx, 2> kernel_symbol(Vec2 p, double R) {
    const double p2 = p.x * p.x + p.y * p.y;
    if (p2 == 0.0)
        return {cplx{0.0, 0.0}, cplx{0.0, 0.0}};
    const double c = -2.0 * kPi * chi_fourier(R * std::sqrt(p2)) / p2;
    // p_perp = (-p_y, p_x)
    return {cplx{0.0, -c * p.y}, cplx{0.0, c * p.x}};
}

double weierstrass_eta1_square(double L) {
    const double q2 = std::exp(-2.0 * kPi);
    double sum = 0.0, qn = 1.0;
    for (int n = 1; n < 40; ++n) {
        qn *= q2;
        sum += n * qn / (1.0 - qn);
    }
    return kPi * kPi / (6.0 * L) * (1.0 - 24.0 * sum);
}

cplx weierstrass_zeta_square(cplx z, double L) {
    const double eta1 = weierstrass_eta1_square(L);
    const double q2 = std::exp(-2.0 * kPi);
    const cplx arg = kPi * z / L;
    cplx val = (2.0 * eta1 / L) * z + (kPi / L) * std::cos(arg) / std::sin(arg);
    double qn = 1.0;
    for (int n = 1; n < 40; ++n) {
        qn *= q2;
        val += (4.0 * kPi / L) * (qn / (1.0 - qn)) * std::sin(2.0 * n * arg);
    }
    return val;
}

namespace {

// chi^ sampled on a uniform mesh, 4-point Lagrange interpolation.
class FourierTable {
public:
    FourierTable(const SmoothingProfile& prof, double qmax, double dq) : dq_(dq) {
        const std::size_t m = static_cast<std::size_t>(std::ceil(qmax / dq)) + 4;
        vals_.resize(m);
        for (std::size_t k = 0; k < m; ++k)
            vals_[k] = prof.fourier((static_cast<double>(k) - 1.0) * dq);
    }
    double operator()(double q) const {
        const double x = q / dq_ + 1.0;
        std::size_t k = static_cast<std::size_t>(x);
        k = std::clamp<std::size_t>(k, 1, vals_.size() - 3);
        const double t = x - static_cast<double>(k);
        const double a = vals_[k - 1], b = vals_[k], c = vals_[k + 1], d = vals_[k + 2];
        return -t * (t - 1) * (t - 2) / 6.0 * a + (t + 1) * (t - 1) * (t - 2) / 2.0 * b -
               (t + 1) * t * (t - 2) / 2.0 * c + (t + 1) * t * (t - 1) / 6.0 * d;
    }

private:
    double dq_;
    std::vector<double> vals_;
};

} // namespace

FourierCheck kernel_fourier_check(const Grid2D& grid, double R, std::size_t pad) {
    const double h = grid.spacing();
    if (R < 2.0 * h)
        throw ResolutionError("aliasing: smearing radius below two grid spacings");
    if (pad < 2)
        throw DomainError("zero-padding factor must be at least 2");
    if (R >= grid.box() / 4.0)
        throw DomainError("smearing radius must be below a quarter of the box");

    const std::size_t N = pad * grid.n();
    const double Lp = h * static_cast<double>(N);
    const double dk = 2.0 * kPi / Lp;
    const double kmax = kPi / h;
    const SmearedKernel kernel(R);
    const FourierTable table(kernel.profile(), R * kmax * std::sqrt(2.0) + 0.1, 1e-3);

    auto signed_index = [N](std::size_t m) {
        return m < N / 2 ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(N);
    };
    auto symbol = [&](long a, long b) -> std::array<cplx, 2> {
        if (a == 0 && b == 0)
            return {cplx{}, cplx{}};
        const double px = a * dk, py = b * dk;
        const double p2 = px * px + py * py;
        const double c = -2.0 * kPi * table(R * std::sqrt(p2)) / p2;
        return {cplx{0.0, -c * py}, cplx{0.0, c * px}};
    };

    FourierCheck out;
    std::vector<cplx> sx(N * N), sy(N * N);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            const long a = signed_index(i), b = signed_index(j);
            if (i == N / 2 || j == N / 2)
                continue; // Nyquist rows carry no odd content
            const auto s = symbol(a, b);
            const auto m = symbol(-a, -b);
            out.symbol_oddness = std::max({out.symbol_oddness, std::abs(s[0] + m[0]), std::abs(s[1] + m[1])});
            sx[i * N + j] = s[0];
            sy[i * N + j] = s[1];
        }
    }
    Fft2D fft(N);
    fft.backward(sx, sx);
    fft.backward(sy, sy);
    const double norm_factor = 1.0 / (Lp * Lp);

    const long quarter = static_cast<long>(grid.n() / 4);
    const double c_lin = kPi / (Lp * Lp);
    for (long a = -quarter; a <= quarter; ++a) {
        for (long b = -quarter; b <= quarter; ++b) {
            const std::size_t ia = static_cast<std::size_t>((a + static_cast<long>(N)) % static_cast<long>(N));
            const std::size_t ib = static_cast<std::size_t>((b + static_cast<long>(N)) % static_cast<long>(N));
            const Vec2 x{a * h, b * h};
            Vec2 direct = kernel.grad_perp(x);
            if (a != 0 || b != 0) {
                const cplx z{x.x, x.y};
                // periodic grad log minus its free-space part, rotated by i
                const cplx g = std::conj(weierstrass_zeta_square(z, Lp) - 1.0 / z) - c_lin * z;
                const cplx corr = cplx{0.0, 1.0} * g;
                direct.x += corr.real();
                direct.y += corr.imag();
            }
            const double fx = (sx[ia * N + ib] * norm_factor).real();
            const double fy = (sy[ia * N + ib] * norm_factor).real();
            out.max_abs = std::max(out.max_abs, std::hypot(fx - direct.x, fy - direct.y));
            out.kernel_scale = std::max(out.kernel_scale, norm(direct));
        }
    }
    out.relative = out.kernel_scale > 0.0 ? out.max_abs / out.kernel_scale : 0.0;
    return out;
}

} // namespace anyon
