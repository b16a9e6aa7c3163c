#pragma once

// Average-field functional E_R[u] on a periodic grid: self-consistent
// potential A^R[rho], current, energy, its gradient and a projected
// gradient minimizer.

#include "anyon/fft.hpp"
#include "anyon/fields.hpp"
#include "anyon/grid.hpp"
#include "anyon/smeared_potential.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace anyon {

struct FieldConfig {
    Grid2D grid{8.0, 128};
    ExternalField field{};
    TrapPotential trap{};
    double beta = 0.0;
    double R = 0.25;

    nlohmann::json to_json() const;
};

class WaveFunction {
public:
    WaveFunction() = default;
    WaveFunction(const Grid2D& grid, ComplexField values);

    const Grid2D& grid() const { return grid_; }
    const ComplexField& values() const { return values_; }
    ComplexField& values() { return values_; }
    cplx operator[](std::size_t i) const { return values_[i]; }

    double norm_squared() const { return l2_norm_squared(grid_, values_); }
    void normalize();
    // Rotate the global phase so that u is real positive at its largest modulus.
    void fix_phase();
    WaveFunction conj() const;

    // exp(-|x - c|^2 / (2 l^2)) normalized
    static WaveFunction gaussian(const Grid2D& grid, double length, Vec2 center = {});
    // Gaussian adapted to the trap (and to B0 for s = 2).
    static WaveFunction trap_adapted(const FieldConfig& cfg);
    // Smooth random state: Gaussian envelope times a random low-mode phase/amplitude.
    static WaveFunction random(const Grid2D& grid, std::uint64_t seed, double envelope = 0.8);

private:
    Grid2D grid_;
    ComplexField values_;
};

RealField density(const WaveFunction& u);

struct EnergyBreakdown {
    double kinetic = 0.0;   // ||(-i grad + A_e) u||^2 plus the Nyquist k^2 part
    double potential = 0.0; // int V rho
    double mixed = 0.0;     // 2 beta int A^R . (J + A_e rho)
    double quartic = 0.0;   // beta^2 int |A^R|^2 rho
    double total = 0.0;
    // ||(-i grad + A_e + beta A^R) u||^2 + int V rho assembled directly
    double direct_total = 0.0;

    nlohmann::json to_json() const;
};

// Precomputed sampled fields, spectral operators and kernel spectra for one
// configuration. Not thread-safe (owns transform buffers); build one per worker.
class AverageFieldFunctional {
public:
    explicit AverageFieldFunctional(const FieldConfig& cfg);
    ~AverageFieldFunctional();

    const FieldConfig& config() const { return cfg_; }
    const Grid2D& grid() const { return cfg_.grid; }
    const VectorField& external_potential() const { return Ae_; }
    const RealField& trap() const { return V_; }

    // A^R[rho] = grad-perp w_R * rho (free space)
    VectorField self_potential(std::span<const double> rho);
    // chi_R * rho
    RealField smeared_density(std::span<const double> rho);
    // int int |grad w_R(x - y)|^2 rho(x) rho(y)
    double singular_pair_term(std::span<const double> rho);

    // j = Im(conj(u) grad u) + A_tot |u|^2
    VectorField current(const WaveFunction& u, const VectorField& A_tot);

    EnergyBreakdown energy(const WaveFunction& u);
    // G(u) = (-i grad + A_tot)^2 u + V u + Phi[u] u, with dE = 2 Re <G, delta>.
    ComplexField gradient(const WaveFunction& u);
    // energy and gradient sharing the transforms
    EnergyBreakdown energy_and_gradient(const WaveFunction& u, ComplexField& G);

    // (-i grad + A)^2 u + V u for a fixed vector potential A
    ComplexField magnetic_hamiltonian(std::span<const cplx> u, const VectorField& A);

    // |int (B_e + 2 pi beta chi_R * rho) rho|
    double lower_bound(const WaveFunction& u);
    // <u, -i (x d_y - y d_x) u>
    double angular_momentum(const WaveFunction& u);

    // (|k|^2 + shift)^{-1} applied spectrally
    ComplexField precondition(std::span<const cplx> u, double shift);

    SpectralOps& ops() { return *ops_; }

private:
    FieldConfig cfg_;
    VectorField Ae_;
    RealField V_;
    RealField Be_;
    std::unique_ptr<SpectralOps> ops_;
    std::unique_ptr<FreeSpaceConvolver> conv_;
    std::unique_ptr<Fft2D> fft_;
    ComplexField work_;
};

struct Schedule {
    double step = 0.1;            // first trial step
    std::size_t max_iterations = 50000;
    double tol = 1e-8;            // projected gradient L2 norm
    double armijo = 1e-4;
    double preconditioner_shift = 1.0;
    std::size_t trace_stride = 1; // keep every k-th energy in the trace

    nlohmann::json to_json() const;
    static Schedule from_json(const nlohmann::json& j, const std::string& path = "/schedule");
};

struct MinimizeResult {
    WaveFunction u;
    EnergyBreakdown energy;
    double lambda = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> trace;
    std::vector<std::string> flags;
    double angular_momentum = 0.0;

    nlohmann::json to_json() const;
};

// Projected, kinetically preconditioned gradient descent with
// Barzilai-Borwein seeding and Armijo backtracking. Throws ConvergenceError
// when backtracking underflows.
MinimizeResult minimize(AverageFieldFunctional& functional, const WaveFunction& init, const Schedule& schedule);
MinimizeResult minimize(const FieldConfig& cfg, const WaveFunction& init, const Schedule& schedule);

struct ConvergenceRow {
    double R = 0.0;
    double energy = 0.0;
    double diff = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<std::string> flags;
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0;          // log-log fit of diff against R (rows with diff > 0)
    bool monotone_diffs = false; // successive diffs decreasing
    std::vector<std::string> flags;

    nlohmann::json to_json() const;
};

// Minimize for each R (warm started along the list). Rows whose R is below
// two grid spacings are flagged and skipped.
ConvergenceStudy convergence_study(const FieldConfig& cfg, const std::vector<double>& R_list, const Schedule& schedule,
                                   std::optional<WaveFunction> init = std::nullopt);

struct ProductStateEnergy {
    double one_body = 0.0;   // <u, h u>
    double mixed = 0.0;      // 2 beta int A^R . (J + A_e rho)
    double three_body = 0.0; // beta^2 (N-2)/(N-1) int |A^R|^2 rho
    double singular = 0.0;   // beta^2/(N-1) int int |grad w_R|^2 rho rho
    double total = 0.0;
    double three_body_coefficient = 0.0;

    nlohmann::json to_json() const;
};

ProductStateEnergy product_state_energy(AverageFieldFunctional& functional, const WaveFunction& u, std::size_t N);

// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace anyon
