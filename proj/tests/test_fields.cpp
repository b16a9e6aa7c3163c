#include "anyon/error.hpp"
#include "anyon/fields.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace anyon;

TEST(Grid, OriginIsANode) {
    const Grid2D g(8.0, 64);
    EXPECT_DOUBLE_EQ(g.spacing(), 0.125);
    const Vec2 o = g.point(32, 32);
    EXPECT_DOUBLE_EQ(o.x, 0.0);
    EXPECT_DOUBLE_EQ(o.y, 0.0);
    EXPECT_EQ(g.index(3, 5), 3u * 64u + 5u);
}

TEST(Field, ZeroGaugeVanishes) {
    const ExternalField f;
    EXPECT_TRUE(f.is_zero());
    const Vec2 a = f.A({0.3, 0.4});
    EXPECT_EQ(a.x, 0.0);
    EXPECT_EQ(a.y, 0.0);
}

TEST(Field, SymmetricGaugeHasConstantCurl) {
    const ExternalField f = symmetric_gauge(2.0);
    const Vec2 a = f.A({1.0, 0.0});
    EXPECT_DOUBLE_EQ(a.x, 0.0);
    EXPECT_DOUBLE_EQ(a.y, 1.0);
    EXPECT_LT(curl_check(f, Grid2D(8.0, 64)), 1e-12);
}

TEST(Field, BumpCurlConvergesSecondOrder) {
    const ExternalField f(GaugeKind::ConstantPlusPerturbation, 1.0, {GaussianBump{0.8, {0.4, -0.3}, 0.6}});
    EXPECT_NEAR(f.B({0.4, -0.3}), 1.8, 1e-12);
    const double e1 = curl_check(f, Grid2D(8.0, 64));
    const double e2 = curl_check(f, Grid2D(8.0, 128));
    EXPECT_LT(e2, e1 / 3.5);
    EXPECT_LT(e2, 5e-3);
}

TEST(Field, JsonRoundTrip) {
    const ExternalField f(GaugeKind::ConstantPlusPerturbation, 0.5, {GaussianBump{-1.0, {0.1, 0.2}, 0.7}});
    const ExternalField g = ExternalField::from_json(f.to_json());
    EXPECT_EQ(g.kind(), f.kind());
    EXPECT_EQ(g.B0(), f.B0());
    ASSERT_EQ(g.bumps().size(), 1u);
    EXPECT_EQ(g.bumps()[0].width, 0.7);
}

TEST(Field, UnknownKeyNamesPath) {
    try {
        ExternalField::from_json({{"B0", 1.0}, {"Bzero", 2.0}});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.path(), "/field/Bzero");
    }
}

TEST(Field, BumpsNeedPerturbationGauge) {
    nlohmann::json j = {{"gauge_kind", "symmetric"}, {"B0", 1.0}, {"bumps", {{{"amplitude", 1.0}}}}};
    EXPECT_THROW(ExternalField::from_json(j), ConfigError);
}

TEST(Trap, PowerLawWithOffset) {
    const TrapPotential V(2.0, 4.0, 1.0);
    EXPECT_DOUBLE_EQ(V({1.0, 1.0}), 2.0 * 4.0 - 1.0);
    EXPECT_DOUBLE_EQ(V({0.0, 0.0}), -1.0);
    EXPECT_THROW(TrapPotential::from_json({{"c", -1.0}}), ConfigError);
}

TEST(Trap, BoundaryMinimum) {
    const Grid2D g(8.0, 16);
    EXPECT_DOUBLE_EQ(TrapPotential(1.0, 2.0).boundary_minimum(g), 3.5 * 3.5);
}
