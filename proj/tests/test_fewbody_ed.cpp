#include "anyon/error.hpp"
#include "anyon/fewbody_ed.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace anyon;

namespace {

FieldConfig small(double beta, double R = 0.5) {
    FieldConfig c;
    c.grid = Grid2D(4.0, 16);
    c.beta = beta;
    c.R = R;
    return c;
}

ComplexField random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    ComplexField v(n);
    for (auto& z : v)
        z = {g(rng), g(rng)};
    return v;
}

cplx dot(const ComplexField& a, const ComplexField& b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::conj(a[i]) * b[i];
    return s;
}

} // namespace

TEST(TwoBodyHamiltonian, RejectsGridAboveCap) {
    FieldConfig c = small(0.0);
    c.grid = Grid2D(4.0, 64);
    EXPECT_THROW(TwoBodyHamiltonian H(c), DomainError);
}

TEST(TwoBodyHamiltonian, RejectsUnresolvedRadius) { EXPECT_THROW(TwoBodyHamiltonian H(small(1.0, 0.25)), ResolutionError); }

TEST(TwoBodyHamiltonian, IsHermitian) {
    FieldConfig c = small(1.0);
    c.field = symmetric_gauge(0.5);
    TwoBodyHamiltonian H(c);
    const auto x = random_vector(H.dimension(), 1), y = random_vector(H.dimension(), 2);
    ComplexField Hx(x.size()), Hy(y.size());
    H.apply(x, Hx);
    H.apply(y, Hy);
    EXPECT_LT(std::abs(dot(y, Hx) - std::conj(dot(x, Hy))), 1e-11 * std::abs(dot(y, Hx)));
}

TEST(TwoBodyHamiltonian, CommutesWithExchange) {
    TwoBodyHamiltonian H(small(1.0));
    auto x = random_vector(H.dimension(), 3);
    exchange_symmetrize(Grid2D(4.0, 16), x);
    ComplexField Hx(x.size());
    H.apply(x, Hx);
    TwoBodyState s(Grid2D(4.0, 16), Hx);
    double scale = 0.0;
    for (const auto& z : Hx)
        scale = std::max(scale, std::abs(z));
    EXPECT_LT(s.exchange_asymmetry(), 1e-11 * scale);
}

TEST(TwoBodyState, ProductNormAndSymmetry) {
    const Grid2D g(4.0, 16);
    const auto u = WaveFunction::gaussian(g, 0.6);
    auto p = TwoBodyState::product(u, u);
    EXPECT_NEAR(p.norm_squared(), 1.0, 1e-12);
    EXPECT_EQ(p.exchange_asymmetry(), 0.0);
}

TEST(GroundState, FactorizesWithoutInteraction) {
    const FieldConfig c = small(0.0);
    const auto g2 = ground_energy_2body(c, 1e-10);
    const auto g1 = one_body_ground(c, 1e-12);
    EXPECT_NEAR(g2.energy / 2.0, g1.energy, 1e-6 * g1.energy);
    const auto gamma = reduced_density(g2.state);
    EXPECT_NEAR(gamma.trace(), 1.0, 1e-10);
    EXPECT_LT(gamma.hermiticity_error(), 1e-12);
    EXPECT_NEAR(gamma.fidelity(g1.state), 1.0, 1e-6);
}

TEST(GroundState, MeanFieldMinimizerFactorizesWithoutInteraction) {
    const auto run = fewbody_compare(small(0.0), Schedule{}, 1e-10);
    EXPECT_NEAR(run.E2_half, run.mf_energy, 1e-6 * run.mf_energy);
    EXPECT_GE(run.fidelity, 1.0 - 1e-6);
}

TEST(GroundState, VariationalAgainstProductState) {
    const FieldConfig c = small(1.0);
    const auto run = fewbody_compare(c, Schedule{}, 1e-8);
    EXPECT_LE(run.E2_half, run.product_energy + 1e-7);
    EXPECT_GT(run.fidelity, 0.5);
    EXPECT_LE(run.fidelity, 1.0 + 1e-10);
    EXPECT_GT(run.apriori.ratio, 0.0);
    EXPECT_LT(run.ground.projection_residual, 1e-8);
}

TEST(ReducedDensity, EigenvaluesSumToOne) {
    const Grid2D g(4.0, 16);
    auto psi = TwoBodyState(g, random_vector(g.size() * g.size(), 8));
    psi.symmetrize();
    psi.normalize();
    const auto gamma = reduced_density(psi);
    const auto ev = gamma.eigenvalues();
    EXPECT_NEAR(ev.sum(), 1.0, 1e-10);
    EXPECT_GE(ev.minCoeff(), -1e-12);
}
