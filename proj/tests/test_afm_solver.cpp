#include "anyon/afm_solver.hpp"
#include "anyon/error.hpp"
#include "anyon/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace anyon;

namespace {

FieldConfig harmonic(std::size_t n, double beta, double R = 0.25) {
    FieldConfig c;
    c.grid = Grid2D(8.0, n);
    c.beta = beta;
    c.R = R;
    return c;
}

double fd_relative_error(double beta, std::uint64_t seed) {
    FieldConfig cfg = harmonic(64, beta, 0.5);
    cfg.field = ExternalField(GaugeKind::ConstantPlusPerturbation, 0.5, {GaussianBump{0.7, {0.5, 0.0}, 0.8}});
    AverageFieldFunctional F(cfg);
    const WaveFunction u = WaveFunction::random(cfg.grid, seed);
    const WaveFunction d = WaveFunction::random(cfg.grid, seed + 100);
    const ComplexField G = F.gradient(u);
    const double analytic = 2.0 * inner(cfg.grid, G, d.values()).real();
    const double eps = 1e-5;
    auto shifted = [&](double s) {
        ComplexField v = u.values();
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] += s * d[i];
        return F.energy(WaveFunction(cfg.grid, v)).total;
    };
    const double fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
    return std::abs(fd - analytic) / std::abs(analytic);
}

} // namespace

TEST(Functional, AssembledEnergyMatchesDirect) {
    for (double beta : {0.0, 1.0, -2.0}) {
        AverageFieldFunctional F(harmonic(64, beta));
        const auto e = F.energy(WaveFunction::random(Grid2D(8.0, 64), 5));
        EXPECT_NEAR(e.total, e.direct_total, 1e-10 * std::abs(e.total)) << beta;
    }
}

TEST(Functional, GradientMatchesFiniteDifferences) {
    for (double beta : {0.0, 1.0, -1.0, 4.0, -4.0})
        EXPECT_LT(fd_relative_error(beta, 17), 1e-6) << "beta=" << beta;
}

TEST(Functional, QuarticTermScalesAsBetaSquared) {
    const WaveFunction u = WaveFunction::random(Grid2D(8.0, 64), 9);
    AverageFieldFunctional F1(harmonic(64, 1.0)), F3(harmonic(64, 3.0));
    EXPECT_NEAR(F3.energy(u).quartic, 9.0 * F1.energy(u).quartic, 1e-12 * F3.energy(u).quartic);
}

TEST(Functional, RadialDensityHasAzimuthalSelfPotential) {
    AverageFieldFunctional F(harmonic(64, 1.0));
    const RealField rho = density(WaveFunction::gaussian(Grid2D(8.0, 64), 0.7));
    const VectorField A = F.self_potential(rho);
    const Grid2D g(8.0, 64);
    const std::size_t i = g.index(44, 32);
    const Vec2 x = g.point(i);
    EXPECT_NEAR(A.x[i] * x.x + A.y[i] * x.y, 0.0, 1e-10);
    EXPECT_GT(A.y[i], 0.0);
}

TEST(Functional, ResolutionErrorBelowTwoSpacings) {
    EXPECT_THROW(AverageFieldFunctional F(harmonic(64, 1.0, 0.2)), ResolutionError);
}

TEST(Minimizer, HarmonicOscillatorAtBetaZero) {
    const FieldConfig cfg = harmonic(64, 0.0);
    const auto r = minimize(cfg, WaveFunction::trap_adapted(cfg), Schedule{});
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.energy.total, 2.0, 0.02);
    EXPECT_NEAR(r.energy.total, one_body_ground(cfg).energy, 1e-4);
    EXPECT_NEAR(r.lambda, r.energy.total, 1e-6);
}

TEST(Minimizer, MatchesOneBodyGroundOnCoarseBox) {
    FieldConfig cfg;
    cfg.grid = Grid2D(4.0, 32);
    cfg.field = symmetric_gauge(1.0);
    Schedule s;
    s.tol = 1e-10;
    const auto r = minimize(cfg, WaveFunction::trap_adapted(cfg), s);
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.energy.total, one_body_ground(cfg, 1e-12).energy, 1e-9);
}

TEST(Minimizer, TraceIsNonincreasing) {
    const FieldConfig cfg = harmonic(64, 2.0, 0.5);
    const auto r = minimize(cfg, WaveFunction::random(cfg.grid, 3), Schedule{});
    ASSERT_GT(r.trace.size(), 2u);
    for (std::size_t k = 1; k < r.trace.size(); ++k)
        EXPECT_LE(r.trace[k], r.trace[k - 1] + 4.0 * 2.2e-16 * std::abs(r.trace[k - 1]));
}

TEST(Minimizer, LowerBoundHoldsAtMinimizer) {
    FieldConfig cfg = harmonic(64, 1.5, 0.5);
    cfg.field = symmetric_gauge(1.0);
    AverageFieldFunctional F(cfg);
    const auto r = minimize(F, WaveFunction::trap_adapted(cfg), Schedule{});
    EXPECT_GE(r.energy.total - r.energy.potential, F.lower_bound(r.u) - 1e-8);
}

TEST(Schedule, RejectsUnknownKey) {
    try {
        Schedule::from_json({{"tolerance", 1e-6}});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.path(), "/schedule/tolerance");
    }
    EXPECT_THROW(Schedule::from_json({{"armijo", 0.7}}), ConfigError);
}

TEST(ConvergenceStudy, FlagsUnresolvedRadius) {
    const FieldConfig cfg = harmonic(32, 1.0);
    const auto st = convergence_study(cfg, {1.0, 0.5, 0.1}, Schedule{});
    ASSERT_EQ(st.rows.size(), 3u);
    EXPECT_FALSE(st.rows[2].flags.empty());
    EXPECT_FALSE(st.flags.empty());
}

TEST(LogLog, RecoversPowerLaw) {
    std::vector<double> x{1, 2, 4, 8}, y;
    for (double v : x)
        y.push_back(3.0 * std::pow(v, 1.7));
    EXPECT_NEAR(loglog_slope(x, y), 1.7, 1e-12);
}

// Property: E >= 0 for any state when V >= 0.
TEST(FunctionalProperty, PositivityOnRandomStates) {
    for (double beta : {0.5, -2.0}) {
        AverageFieldFunctional F(harmonic(64, beta));
        for (std::uint64_t s = 0; s < 25; ++s)
            EXPECT_GE(F.energy(WaveFunction::random(Grid2D(8.0, 64), 1000 + s)).total, 0.0);
    }
}

// Property: the energy does not depend on the global phase.
TEST(FunctionalProperty, GlobalPhaseInvariance) {
    AverageFieldFunctional F(harmonic(64, 1.0));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ph(0.0, 6.283185307179586);
    for (int t = 0; t < 5; ++t) {
        WaveFunction u = WaveFunction::random(Grid2D(8.0, 64), 40 + t);
        const double e0 = F.energy(u).total;
        const cplx z = std::polar(1.0, ph(rng));
        for (auto& v : u.values())
            v *= z;
        EXPECT_NEAR(F.energy(u).total, e0, 1e-12 * e0);
    }
}
