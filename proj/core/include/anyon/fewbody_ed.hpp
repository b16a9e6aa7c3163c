#pragma once

// Exact diagonalization of the regularized two-anyon Hamiltonian on the
// tensor grid (x1, x2) and comparison with the average-field functional.

#include "anyon/afm_solver.hpp"
#include "anyon/spectral.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace anyon {

inline constexpr std::size_t kDefaultPointCap = 40;

// psi(x1, x2) stored at (i1 * n + j1) * n^2 + (i2 * n + j2).
class TwoBodyState {
public:
    TwoBodyState() = default;
    TwoBodyState(const Grid2D& grid, ComplexField values);

    static TwoBodyState product(const WaveFunction& u, const WaveFunction& v);

    const Grid2D& grid() const { return grid_; }
    const ComplexField& values() const { return values_; }
    ComplexField& values() { return values_; }

    double norm_squared() const; // h^4 sum |psi|^2
    void normalize();
    void symmetrize();
    // max |psi(x1, x2) - psi(x2, x1)|
    double exchange_asymmetry() const;
    cplx inner(const TwoBodyState& o) const;

private:
    Grid2D grid_;
    ComplexField values_;
};

// In-place exchange projector (psi + swap psi) / 2.
void exchange_symmetrize(const Grid2D& grid, std::span<cplx> psi);

// H_2 = sum_j (p_j^{A_e} + beta grad-perp w_R(x_j - x_k))^2 + V(x_j), with
// alpha = beta for two particles. Each particle carries the one-body
// discretization of OneBodyOperator; the pair field is sampled on node
// displacements. Not thread-safe.
class TwoBodyHamiltonian {
public:
    explicit TwoBodyHamiltonian(const FieldConfig& cfg, std::size_t point_cap = kDefaultPointCap);

    const FieldConfig& config() const { return cfg_; }
    std::size_t dimension() const { return dim_; }
    void apply(std::span<const cplx> in, std::span<cplx> out);
    LinearMap as_map();
    // ((p^A)^2 + V) acting on one particle only (particle 0 or 1)
    void apply_one_body(int particle, std::span<const cplx> in, std::span<cplx> out);

    // bytes held by one state vector
    std::size_t state_bytes() const { return dim_ * sizeof(cplx); }

private:
    void axis_apply(const Eigen::MatrixXd& M, int axis, std::span<const cplx> in, std::span<cplx> out) const;
    void particle_part(int particle, bool interacting, std::span<const cplx> in, std::span<cplx> out);

    FieldConfig cfg_;
    std::size_t n_ = 0, dim_ = 0;
    Eigen::MatrixXd D_, D2_;
    std::array<RealField, 4> a_;     // (a1x, a1y, a2x, a2y) with the pair field
    std::array<RealField, 4> a0_;    // external part only
    RealField diag_;                 // |a1|^2 + |a2|^2 + V1 + V2
    std::array<RealField, 2> diag1_; // |A_e(x_j)|^2 + V(x_j)
    ComplexField t_, s_, r_;
};

struct TwoBodyGround {
    double energy = 0.0;
    TwoBodyState state;
    LanczosResult solver;
    double projection_residual = 0.0;
    std::vector<std::string> flags;

    nlohmann::json to_json() const;
};

// Lowest eigenpair in the bosonic sector; every Krylov vector is projected.
// tol is the relative eigenvalue tolerance (residual target sqrt(tol)).
// Throws ConvergenceError on non-convergence and Error when the final
// projection residual exceeds 1e-8.
TwoBodyGround ground_energy_2body(const FieldConfig& cfg, double tol = 1e-8,
                                  const std::optional<WaveFunction>& start = std::nullopt,
                                  std::size_t point_cap = kDefaultPointCap);

// One-body density matrix in the orthonormal node basis (u~ = h u).
class ReducedDensity {
public:
    ReducedDensity(const Grid2D& grid, Eigen::MatrixXcd matrix);

    const Grid2D& grid() const { return grid_; }
    const Eigen::MatrixXcd& matrix() const { return gamma_; }
    double trace() const;
    double hermiticity_error() const;
    Eigen::VectorXd eigenvalues() const; // ascending
    // <u, gamma u> for u normalized in the h^2 norm
    double fidelity(const WaveFunction& u) const;

private:
    Grid2D grid_;
    Eigen::MatrixXcd gamma_;
};

ReducedDensity reduced_density(const TwoBodyState& psi);

struct AprioriCheck {
    double lhs = 0.0;   // Tr[((p^A)^2 + V) gamma]
    double rhs = 0.0;   // (1 + beta) E_af
    double ratio = 0.0; // lhs / rhs
    double E_af = 0.0;
    nlohmann::json to_json() const;
};

AprioriCheck apriori_kinetic_check(const TwoBodyState& psi0, const FieldConfig& cfg, double E_af);

struct FewBodyRun {
    double beta = 0.0, R = 0.0;
    double E2_half = 0.0;
    double mf_energy = 0.0;          // minimum of the average-field functional
    double product_energy = 0.0;     // product_state_energy(u*, 2)
    double gap = 0.0;                // product_energy - E2_half
    double fidelity = 0.0;           // <u*, gamma u*>
    std::size_t iterations = 0;      // operator applications
    AprioriCheck apriori;
    std::vector<std::string> flags;
    WaveFunction minimizer;
    TwoBodyGround ground;

    nlohmann::json to_json() const;
};

// Minimize the average-field functional on cfg, diagonalize H_2 seeded with
// u* (x) u*, and collect the comparison quantities.
FewBodyRun fewbody_compare(const FieldConfig& cfg, const Schedule& schedule, double tol = 1e-8,
                           std::size_t point_cap = kDefaultPointCap);

struct FidelityRow {
    double beta = 0.0;
    double overlap = 0.0;
    double E2_half = 0.0;
    double mf_energy = 0.0;
};

struct FidelityTrend {
    std::vector<FidelityRow> rows;     // in the order of the beta list
    bool nondecreasing = false;        // overlap nondecreasing as beta decreases
    std::vector<std::string> flags;
    nlohmann::json to_json() const;
};

FidelityTrend fidelity_trend(const std::vector<double>& betas, const FieldConfig& cfg, const Schedule& schedule,
                             double tol = 1e-8, std::size_t point_cap = kDefaultPointCap);
FidelityTrend fidelity_trend(const std::vector<FewBodyRun>& runs);

} // namespace anyon
