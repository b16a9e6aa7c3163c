#include "anyon/error.hpp"
#include "anyon/smeared_potential.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace anyon;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(TaperExponent, MassIsOneAfterSolve) {
    const auto& prof = SmoothingProfile::standard();
    EXPECT_NEAR(prof.total_mass(), 1.0, 1e-10);
    EXPECT_NEAR(taper_mass_integral(prof.kappa()), (kPi - 1.0) / 2.0, 1e-13);
}

TEST(TaperExponent, BracketWithoutSignChangeThrows) {
    EXPECT_THROW(solve_taper_exponent(5.0, 8.0), BracketError);
}

TEST(Profile, PlateauAndSupport) {
    EXPECT_DOUBLE_EQ(chi_eval(0.3), 1.0 / (kPi * kPi));
    EXPECT_DOUBLE_EQ(chi_eval(2.0), 0.0);
    EXPECT_DOUBLE_EQ(chi_eval(3.5), 0.0);
    EXPECT_GT(chi_eval(1.5), 0.0);
    EXPECT_LT(chi_eval(1.5), chi_eval(1.0));
}

TEST(Profile, FourierAtOriginIsMass) { EXPECT_NEAR(chi_fourier(0.0), 1.0, 1e-9); }

TEST(Profile, AbsFourierPartialSumsSettle) {
    const double a = chi_fourier_abs_integral(200.0), b = chi_fourier_abs_integral(400.0);
    EXPECT_LE((b - a) / a, 0.01);
}

TEST(Kernel, OutsideSupportIsPointFlux) {
    const SmearedKernel k(0.25);
    for (double r : {0.5, 0.75, 3.0})
        EXPECT_NEAR(k.v(r), 1.0 / r, 1e-14);
    EXPECT_DOUBLE_EQ(k.v(0.0), 0.0);
    EXPECT_NEAR(k.w(1.7), std::log(1.7), 1e-14);
}

TEST(Kernel, InsidePlateauIsLinear) {
    const SmearedKernel k(0.5);
    EXPECT_NEAR(k.v(0.2), 0.2 / (kPi * 0.25), 1e-14);
}

TEST(Kernel, SupAttainedBetweenRAnd2R) {
    const SmearedKernel k(0.1);
    const double s = k.sup_v();
    EXPECT_GE(s, k.v(0.1));
    EXPECT_GE(s, k.v(0.2));
    for (int i = 0; i <= 100; ++i)
        EXPECT_LE(k.v(0.1 + 0.001 * i), s * (1.0 + 1e-12));
}

TEST(Kernel, GradPerpIsRotatedGradient) {
    const Vec2 x{0.13, -0.07};
    const Vec2 g = grad_wR(x, 0.1), p = grad_perp_wR(x, 0.1);
    EXPECT_DOUBLE_EQ(p.x, -g.y);
    EXPECT_DOUBLE_EQ(p.y, g.x);
    EXPECT_NEAR(norm(g), SmearedKernel(0.1).v(norm(x)), 1e-14);
}

TEST(Kernel, ScalingOfLpNorms) {
    for (double p : {3.0, 4.0, 8.0}) {
        const double base = lp_norm_grad(p, 1.0);
        for (int k = 1; k <= 6; ++k) {
            const double R = std::ldexp(1.0, -k);
            EXPECT_NEAR(lp_norm_grad(p, R) / (std::pow(R, 2.0 / p - 1.0) * base), 1.0, 1e-8) << "p=" << p;
        }
    }
}

TEST(Kernel, LpNormNeedsPAboveTwo) {
    EXPECT_THROW(lp_norm_grad(2.0, 1.0), DomainError);
    EXPECT_THROW(lp_norm_grad(1.5, 1.0), DomainError);
}

TEST(Kernel, RTimesSupVIsScaleFree) {
    const double ref = SmearedKernel(1.0).sup_v();
    for (int k = 1; k <= 6; ++k) {
        const double R = std::ldexp(1.0, -k);
        EXPECT_NEAR(R * SmearedKernel(R).sup_v(), ref, 1e-10 * ref);
    }
}

TEST(Kernel, SymbolIsOdd) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int i = 0; i < 50; ++i) {
        const Vec2 p{3.0 * g(rng), 3.0 * g(rng)};
        const auto a = kernel_symbol(p, 0.25), b = kernel_symbol({-p.x, -p.y}, 0.25);
        EXPECT_LT(std::abs(a[0] + b[0]), 1e-14);
        EXPECT_LT(std::abs(a[1] + b[1]), 1e-14);
    }
    const auto z = kernel_symbol({0.0, 0.0}, 0.25);
    EXPECT_EQ(z[0], cplx(0.0));
}

TEST(Weierstrass, LegendreRelationForSquareLattice) {
    const double L = 3.0;
    EXPECT_NEAR(weierstrass_eta1_square(L), kPi / (2.0 * L), 1e-13);
}

TEST(Kernel, TableCsvHeader) {
    std::ostringstream os;
    SmearedKernel(0.25).write_table_csv(os, 3, 1.0);
    EXPECT_EQ(os.str().substr(0, 4), "r,v\n");
    EXPECT_THROW(SmearedKernel(0.25).write_table_csv(os, 1, 1.0), DomainError);
}

// Property: grad w_R(x) = grad w_1(x / R) / R at random points and radii.
TEST(KernelProperty, ExactScaling) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0), lr(-5.0, 0.0);
    for (int i = 0; i < 200; ++i) {
        const double R = std::exp(lr(rng));
        const Vec2 x{R * u(rng), R * u(rng)};
        const Vec2 a = grad_wR(x, R), b = grad_wR({x.x / R, x.y / R}, 1.0);
        EXPECT_NEAR(a.x, b.x / R, 1e-11 * (std::abs(b.x) + 1e-300) / R + 1e-12 / R);
        EXPECT_NEAR(a.y, b.y / R, 1e-11 * (std::abs(b.y) + 1e-300) / R + 1e-12 / R);
    }
}
