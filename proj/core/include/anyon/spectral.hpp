#pragma once

// One-body magnetic Schroedinger operator h = (-i grad + A_e)^2 + V on the
// periodic grid, expanded as -Lap - i (D.A + A.D) + |A|^2 + V with the full
// spectral Laplacian (no spurious Nyquist null modes): lowest eigenpair by restarted Lanczos, eigenvalue counting
// below a cutoff by Chebyshev-filtered subspace iteration, Weyl exponent fit.

#include "anyon/afm_solver.hpp"
#include "anyon/fft.hpp"
#include "anyon/grid.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace anyon {

using LinearMap = std::function<void(std::span<const cplx>, std::span<cplx>)>;

class OneBodyOperator {
public:
    explicit OneBodyOperator(const FieldConfig& cfg);

    const Grid2D& grid() const { return grid_; }
    std::size_t dimension() const { return grid_.size(); }
    void apply(std::span<const cplx> in, std::span<cplx> out);
    LinearMap as_map();
    // Crude upper bound on the spectrum: 2 (k_max + |A|_max)^2 + max V.
    double upper_bound() const;

private:
    Grid2D grid_;
    SpectralOps ops_;
    VectorField A_;
    RealField V_;
    RealField A2_;
    bool zero_field_;
    ComplexField p_;
};

struct LanczosOptions {
    std::size_t krylov_dim = 60;
    std::size_t max_matvecs = 200000;
    double tol = 1e-9;                               // residual / max(1, |theta|)
    std::function<void(std::span<cplx>)> project;   // optional sector projector
};

struct LanczosResult {
    double value = 0.0;
    ComplexField vector; // unit Euclidean norm
    double residual = 0.0;
    std::size_t matvecs = 0;
    std::size_t restarts = 0;
    bool converged = false;
    double symmetry_leak = 0.0;      // largest |P v - v| seen (with a projector)
    std::vector<double> ritz_history; // lowest Ritz value after every step
};

// Lowest eigenpair of a Hermitian map, explicit restarts from the current
// Ritz vector, full reorthogonalization.
LanczosResult lanczos_lowest(const LinearMap& apply, ComplexField start, const LanczosOptions& opt);

struct GroundState {
    double energy = 0.0;
    WaveFunction state;
    LanczosResult solver;
    double refinement_shift = -1.0; // |E0(n) - E0(2n)| when requested
    std::vector<std::string> warnings;
};

GroundState one_body_ground(const FieldConfig& cfg, double tol = 1e-10, bool check_refinement = false);

// 0.5 pi^2 / h^2
double trusted_cutoff(const Grid2D& grid);

struct LevelCountOptions {
    double tie_tolerance = 1e-6; // levels within this relative distance of the cutoff are not counted
    double residual_tol = 1e-8;
    std::size_t filter_degree = 24;
    std::size_t max_passes = 200;
    std::uint64_t seed = 0;
};

struct LevelCount {
    double cutoff = 0.0;
    std::size_t count = 0;
    std::vector<double> eigenvalues; // converged Ritz values below the cutoff
    std::size_t block_size = 0;
    std::size_t passes = 0;
    std::string method = "chebyshev_filtered_subspace_iteration";
    double trusted_max = 0.0;

    nlohmann::json to_json() const;
};

// Number of eigenvalues of h strictly below the cutoff. Throws DomainError
// when the cutoff is above the trusted range of the grid.
LevelCount count_levels(double cutoff, const FieldConfig& cfg, const LevelCountOptions& opt = {});

// Count below every cutoff with one subspace computation at the largest.
std::vector<LevelCount> count_levels(const std::vector<double>& cutoffs, const FieldConfig& cfg,
                                     const LevelCountOptions& opt = {});

// Semiclassical estimate (1/4pi) int (cutoff - V)_+ on the grid.
double weyl_estimate(double cutoff, const FieldConfig& cfg);

struct WeylFit {
    std::vector<double> cutoffs;
    std::vector<std::size_t> counts;
    double exponent = 0.0;
    double prefactor = 0.0; // N ~ prefactor * cutoff^exponent

    nlohmann::json to_json() const;
};

// Needs at least four cutoffs, all with nonzero counts.
WeylFit weyl_fit(const std::vector<double>& cutoffs, const FieldConfig& cfg, const LevelCountOptions& opt = {});

} // namespace anyon
