#include "anyon/error.hpp"
#include "anyon/inequality_lab.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace anyon;

namespace {

Vec2 rot(Vec2 p, double a) { return {std::cos(a) * p.x - std::sin(a) * p.y, std::sin(a) * p.x + std::cos(a) * p.y}; }

} // namespace

TEST(Triangle, EquilateralClosedForm) {
    for (double L : {0.6, 1.0, 7.0}) {
        const Vec2 x{0.0, 0.0}, y{L, 0.0}, z{0.5 * L, 0.5 * std::sqrt(3.0) * L};
        const double S = three_body_S(x, y, z, 0.25);
        EXPECT_NEAR(S, 1.5 / (L * L), 1e-12 / (L * L));
        EXPECT_NEAR(S * 3.0 * L * L, 4.5, 1e-10);
        const auto cr = circumradius_rho(x, y, z);
        EXPECT_NEAR(cr.circumradius, L / std::sqrt(3.0), 1e-14 * L);
        EXPECT_NEAR(cr.rho, L * std::sqrt(3.0), 1e-14 * L);
        EXPECT_NEAR(circumradius_ratio(x, y, z), 1.0, 1e-12);
    }
}

TEST(Triangle, RightTriangleCircumradiusIsHalfHypotenuse) {
    const auto cr = circumradius_rho({0, 0}, {3, 0}, {0, 4});
    EXPECT_NEAR(cr.circumradius, 2.5, 1e-14);
}

TEST(Triangle, CollinearHasInfiniteCircumradius) {
    const auto cr = circumradius_rho({0, 0}, {1, 0}, {3, 0});
    EXPECT_TRUE(std::isinf(cr.circumradius));
    EXPECT_EQ(circumradius_ratio({0, 0}, {1, 0}, {3, 0}), 0.0);
}

TEST(Triangle, CoincidentPointsGiveFiniteS) {
    const double S = three_body_S({0.1, 0.1}, {0.1, 0.1}, {0.5, -0.2}, 0.1);
    EXPECT_TRUE(std::isfinite(S));
}

TEST(Triangle, RegimeFollowsEdgeCount) {
    const double R = 0.5;
    EXPECT_EQ(classify_triangle({0, 0}, {2, 0}, {0, 2}, R), TriangleRegime::AllLong);
    EXPECT_EQ(classify_triangle({0, 0}, {0.5, 0}, {5, 0}, R), TriangleRegime::OneShort);
    EXPECT_EQ(classify_triangle({0, 0}, {0.9, 0}, {-0.9, 0}, R), TriangleRegime::TwoShort);
    EXPECT_EQ(classify_triangle({0, 0}, {0.5, 0}, {0.25, 0.3}, R), TriangleRegime::AllShort);
    EXPECT_EQ(to_string(TriangleRegime::TwoShort), "two-short");
}

TEST(GeomScan, NeedsEnoughSamples) { EXPECT_THROW(geom_bound_scan(100, {1.0}, 0), DomainError); }

TEST(GeomScan, ReproducibleAndBoundedInAllLongRegime) {
    const auto a = geom_bound_scan(10000, {0.1, 1.0}, 7);
    const auto b = geom_bound_scan(10000, {0.1, 1.0}, 7);
    ASSERT_EQ(a.cells.size(), 8u);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        EXPECT_EQ(a.cells[i].sup, b.cells[i].sup);
        EXPECT_GE(a.cells[i].samples, 10000u);
    }
    EXPECT_LE(a.sup(TriangleRegime::AllLong), 4.5 + 1e-9);
    for (auto r : kTriangleRegimes)
        EXPECT_LE(a.spread(r), 2.0);
}

TEST(Circumradius, ScanNeverExceedsBound) {
    const auto s = circumradius_scan(200000, 1);
    EXPECT_EQ(s.samples, 200000u);
    EXPECT_LE(s.max_ratio, 1.0 + 1e-12);
    EXPECT_GT(s.max_ratio, 0.999);
    EXPECT_LE(s.equilateral_deviation, 1e-12);
}

TEST(Hardy, IsotropicGaussianHasExactRhs) {
    const auto r = hardy_mc("isotropic_centered", 0, 200000, 3);
    EXPECT_NEAR(r.rhs_exact, 3.0, 1e-14);
    EXPECT_NEAR(r.rhs, 3.0, 5.0 * r.rhs_stderr);
    EXPECT_TRUE(r.holds());
    EXPECT_LT(r.lhs, r.rhs);
}

TEST(Hardy, DilationLeavesRatioInvariant) {
    const auto f = hardy_test_function("random_separable", 2, 5);
    const auto a = hardy_mc(f, 100000, 9);
    const auto b = hardy_mc(f.dilate(2.5), 100000, 9);
    EXPECT_NEAR(a.lhs / a.rhs, b.lhs / b.rhs, 1e-10);
}

TEST(Hardy, DisplacedFamilyHolds) {
    for (std::size_t i = 0; i < 2; ++i)
        EXPECT_TRUE(hardy_mc("displaced", i, 100000, 1).holds());
}

TEST(Diamagnetic, EqualityForRealStateWithoutField) {
    const Grid2D g(8.0, 64);
    WaveFunction u = WaveFunction::gaussian(g, 0.8);
    const auto r = diamagnetic_check(u, VectorField(g.size()));
    EXPECT_NEAR(r.lhs, r.rhs, 1e-12 * r.lhs);
    EXPECT_EQ(r.violation(), 0.0);
}

TEST(Diamagnetic, RealStateGapIsMagneticPotentialTerm) {
    const Grid2D g(8.0, 64);
    WaveFunction u = WaveFunction::gaussian(g, 0.8, {0.2, -0.1});
    const VectorField A = symmetric_gauge(1.5).sample(g);
    const auto r = diamagnetic_check(u, A);
    double a2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        a2 += (A.x[i] * A.x[i] + A.y[i] * A.y[i]) * std::norm(u[i]);
    EXPECT_NEAR(r.lhs - r.rhs, a2 * g.cell_area(), 1e-10 * r.lhs);
}

TEST(Diamagnetic, RefinementStudyPasses) {
    const auto st = diamagnetic_refinement_study(4, 2);
    EXPECT_TRUE(st.passed);
    EXPECT_EQ(st.fine_n, 256u);
}

TEST(MagneticBound, GaussianBelowThreeHalves) {
    const auto r = magnetic_bound_check(WaveFunction::gaussian(Grid2D(8.0, 128), 1.0));
    EXPECT_GT(r.ratio, 0.0);
    EXPECT_LT(r.scaled_ratio(), 1.5);
}

TEST(MagneticBound, HomogeneousOfDegreeFour) {
    const Grid2D g(8.0, 128);
    MagneticBoundChecker chk(g);
    WaveFunction u = WaveFunction::random(g, 12);
    const auto a = chk.check(u);
    for (auto& v : u.values())
        v *= 3.0;
    const auto b = chk.check(u);
    EXPECT_NEAR(b.ratio / a.ratio, 81.0, 81.0 * 1e-12);
    EXPECT_NEAR(b.scaled_ratio(), a.scaled_ratio(), 1e-12 * a.scaled_ratio());
}

TEST(MagneticBound, RoughStateIsRejected) {
    const Grid2D g(8.0, 64);
    ComplexField v(g.size(), 0.0);
    v[g.index(32, 32)] = 1.0;
    WaveFunction u(g, v);
    u.normalize();
    EXPECT_THROW(magnetic_bound_check(u), ResolutionError);
}

TEST(FormRatio, HardBoundAndBareMixedTerm) {
    const auto fs = two_body_family("gaussian", 6, 4);
    for (const auto& f : fs) {
        const auto r = two_body_form_ratio(f, 0.25, ExternalField{});
        EXPECT_LE(r.singular_ratio(), std::pow(SmearedKernel(0.25).sup_v(), 2));
        EXPECT_GT(r.denominator, 1.0);
        EXPECT_NEAR(r.mixed, 0.0, 1e-10);
    }
}

TEST(FormRatio, ScanReportsRows) {
    const auto scan = quadratic_form_ratios("gaussian_phase", {0.25, 0.125}, 3, ExternalField{}, 6);
    ASSERT_EQ(scan.rows.size(), 2u);
    EXPECT_TRUE(scan.hard_bound_holds);
    EXPECT_GT(scan.rows[1].sup_singular, 0.0);
}

TEST(LemmaReportJson, TopLevelRepeatsWorstEntry) {
    LemmaReport rep;
    rep.lemma_id = "x";
    rep.entries.push_back({"a", 1.0, 0.5, nlohmann::json::object(), 10, 3});
    rep.entries.push_back({"b", 0.5, 2.0, nlohmann::json::object(), 20, 3});
    const auto j = rep.to_json();
    EXPECT_EQ(j["regime"], "b");
    EXPECT_EQ(j["empirical_constant"], 2.0);
    EXPECT_EQ(j["sample_count"], 20);
    for (const char* k : {"lemma_id", "regime", "R", "empirical_constant", "witness", "sample_count", "seed"})
        EXPECT_TRUE(j.contains(k)) << k;
}

// Property: S(lambda x; lambda R) = S(x; R) / lambda^2 and S is invariant under rigid motions.
TEST(TriangleProperty, ScalingAndRigidInvariance) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0), lam(0.1, 10.0);
    for (int i = 0; i < 300; ++i) {
        const Vec2 x{u(rng), u(rng)}, y{u(rng), u(rng)}, z{u(rng), u(rng)};
        const double R = 0.2, l = lam(rng), a = 3.0 * u(rng);
        const double S = three_body_S(x, y, z, R);
        EXPECT_NEAR(three_body_S(l * x, l * y, l * z, l * R), S / (l * l), 1e-9 * (std::abs(S) + 1.0) / (l * l));
        const Vec2 t{u(rng), u(rng)};
        EXPECT_NEAR(three_body_S(rot(x, a) + t, rot(y, a) + t, rot(z, a) + t, R), S, 1e-9 * (std::abs(S) + 1.0));
        EXPECT_LE(circumradius_ratio(x, y, z), 1.0 + 1e-12);
    }
}

// Property: the cyclic sum is symmetric in its arguments.
TEST(TriangleProperty, PermutationSymmetry) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Vec2 x{u(rng), u(rng)}, y{u(rng), u(rng)}, z{u(rng), u(rng)};
        const double S = three_body_S(x, y, z, 0.3);
        EXPECT_NEAR(three_body_S(y, x, z, 0.3), S, 1e-12 * (std::abs(S) + 1.0));
        EXPECT_NEAR(three_body_S(z, y, x, 0.3), S, 1e-12 * (std::abs(S) + 1.0));
    }
}
