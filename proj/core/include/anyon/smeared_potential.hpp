#pragma once

// Smeared unit flux: the profile chi, the potential w_R = log|.| * chi_R and
// its gradient, the Fourier symbol of chi and the L^p norms of grad w_R.

#include "anyon/grid.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <iosfwd>
#include <vector>

namespace anyon {

// Mass of the taper region, I(kappa) = int_1^2 f(t) t dt with
// f(t) = (1 + cos(pi (t-1)^kappa)) / 2. Unit total mass of chi requires
// I = (pi - 1) / 2.
double taper_mass_integral(double kappa);

// Bisection for the taper exponent on [lo, hi]. Throws BracketError when the
// bracket does not straddle the root.
double solve_taper_exponent(double lo = 1.0, double hi = 8.0);

// Unit profile chi on R^2 (radius 1 plateau, radius 2 support) together with
// cumulative tables on the taper. Immutable once built.
class SmoothingProfile {
public:
    static constexpr double kPlateau = 0.10132118364233778; // 1 / pi^2
    static constexpr double kSupport = 2.0;
    static constexpr std::size_t kDefaultIntervals = 4096;

    // Profile with the mass-exact exponent, built on first use.
    static const SmoothingProfile& standard();

    explicit SmoothingProfile(double kappa, std::size_t intervals = kDefaultIntervals);

    double kappa() const { return kappa_; }
    std::size_t table_intervals() const { return intervals_; }

    double taper(double t) const;
    double chi(double r) const;
    // Mass of chi inside the disc of radius s.
    double mass_inside(double s) const;
    // 2 pi int_s^2 log(t) chi(t) t dt (zero for s >= 2).
    double log_moment_outside(double s) const;
    double total_mass() const { return mass_inside(kSupport); }

    // Radial (Hankel) transform 2 pi int chi(r) J0(p r) r dr.
    double fourier(double p) const;

private:
    double hermite(const std::vector<double>& values, const std::vector<double>& slopes, double s) const;

    double kappa_;
    std::size_t intervals_;
    std::vector<double> cum_mass_, cum_mass_slope_;   // int_1^s f t dt
    std::vector<double> log_tail_, log_tail_slope_;   // int_s^2 log(t) f t dt
};

// grad w_R for one smearing radius. Exact scaling grad w_R(x) = grad w_1(x/R)/R
// is used only through the profile tables; every query is O(1).
class SmearedKernel {
public:
    explicit SmearedKernel(double R, const SmoothingProfile& profile = SmoothingProfile::standard());

    double radius() const { return R_; }
    const SmoothingProfile& profile() const { return *profile_; }

    double chi_R(double r) const;
    double mass(double r) const;      // M(r)
    double v(double r) const;         // |grad w_R| at radius r
    double w(double r) const;         // w_R at radius r
    double w(Vec2 x) const { return w(norm(x)); }
    Vec2 grad(Vec2 x) const;
    Vec2 grad_perp(Vec2 x) const;

    // sup_r v(r), attained inside (R, 2R).
    double sup_v() const;

    nlohmann::json to_json() const;
    // Two-column CSV "r,v" on `samples` equispaced radii in [0, rmax].
    void write_table_csv(std::ostream& os, std::size_t samples, double rmax) const;

private:
    double R_;
    const SmoothingProfile* profile_;
};

double chi_eval(double r);
Vec2 grad_wR(Vec2 x, double R);
Vec2 grad_perp_wR(Vec2 x, double R);
double wR_eval(Vec2 x, double R);

// ||grad w_R||_{L^p(R^2)}; p must exceed 2.
double lp_norm_grad(double p, double R);

double chi_fourier(double p);
// int_{|p| <= P} |chi^(p)| dp over the plane.
double chi_fourier_abs_integral(double P);

// Symbol of grad-perp w_R under FT[f](p) = int f e^{-ip.x}:
// (-2 pi i p_perp / |p|^2) chi^(R|p|); zero at p = 0.
std::array<cplx, 2> kernel_symbol(Vec2 p, double R);

struct FourierCheck {
    double max_abs = 0.0;        // max |direct - spectral| on the interior half box
    double kernel_scale = 0.0;   // max |direct| over the same points
    double relative = 0.0;       // max_abs / kernel_scale
    double symbol_oddness = 0.0; // max |S(-p) + S(p)|
};

// Compares grad-perp w_R sampled directly (plus the analytic periodic-image
// correction of the padded box) with the inverse DFT of its analytic symbol.
FourierCheck kernel_fourier_check(const Grid2D& grid, double R, std::size_t pad = 2);

// Weierstrass zeta for the square lattice of side L (periods L, iL).
cplx weierstrass_zeta_square(cplx z, double L);
// Quasi-period eta_1 = zeta(L/2) from the q-series.
double weierstrass_eta1_square(double L);

} // namespace anyon
