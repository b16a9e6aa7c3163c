#pragma once

// Randomized and quadrature checks of the inequalities behind the
// average-field limit: three-body geometry, the three-particle Hardy
// inequality, diamagnetic and magnetic-term bounds, and two-body form ratios.

#include "anyon/afm_solver.hpp"
#include "anyon/fields.hpp"
#include "anyon/grid.hpp"
#include "anyon/smeared_potential.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace anyon {

// ---------------------------------------------------------------- triangles

// Edges compared to 2R: all-long (none short), one-short, two-short, all-short.
enum class TriangleRegime { AllLong, OneShort, TwoShort, AllShort };
inline constexpr std::array<TriangleRegime, 4> kTriangleRegimes = {
    TriangleRegime::AllLong, TriangleRegime::OneShort, TriangleRegime::TwoShort, TriangleRegime::AllShort};

std::string to_string(TriangleRegime r);
TriangleRegime classify_triangle(Vec2 x, Vec2 y, Vec2 z, double R);

struct CircumradiusRho {
    double circumradius = 0.0; // infinity for collinear points
    double rho = 0.0;
};

CircumradiusRho circumradius_rho(Vec2 x, Vec2 y, Vec2 z);

// rho^2 / (9 circumradius^2); at most 1, equal to 1 for equilateral triangles
double circumradius_ratio(Vec2 x, Vec2 y, Vec2 z);

struct CircumradiusScan {
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double max_ratio = 0.0;
    Vec2 witness[3]{};
    double equilateral_deviation = 0.0; // max |ratio - 1| over rotated, scaled equilateral triangles
    nlohmann::json to_json() const;
};

// Uniform, clustered and near-degenerate triangles over twelve decades of scale.
CircumradiusScan circumradius_scan(std::size_t samples, std::uint64_t seed);

struct TriangleSample {
    Vec2 x{}, y{}, z{};
    TriangleRegime regime = TriangleRegime::AllLong;
    double circumradius = 0.0;
    double rho = 0.0;

    static TriangleSample make(Vec2 x, Vec2 y, Vec2 z, double R);
    nlohmann::json to_json() const;
};

// Cyclic sum of grad w_R(x-y).grad w_R(x-z); v(0) = 0 at coincident points.
double three_body_S(Vec2 x, Vec2 y, Vec2 z, const SmearedKernel& kernel);
double three_body_S(Vec2 x, Vec2 y, Vec2 z, double R);

struct GeomCell {
    TriangleRegime regime = TriangleRegime::AllLong;
    double R = 0.0;
    double sup = 0.0; // sup |S| rho^2
    TriangleSample witness;
    std::size_t samples = 0;
};

struct GeomScan {
    std::uint64_t seed = 0;
    std::vector<double> R_list;
    std::vector<GeomCell> cells; // R-major, regimes in kTriangleRegimes order
    std::size_t attempts = 0;

    const GeomCell& cell(std::size_t r_index, TriangleRegime regime) const;
    // max/min over R of the per-regime sup
    double spread(TriangleRegime regime) const;
    double sup(TriangleRegime regime) const;
    nlohmann::json to_json() const;
};

inline constexpr std::size_t kGeomBatches = 16;

// Rejection sampling from a mixture of uniform, clustered and near-collinear
// triangles until every regime holds at least `samples_per_regime` samples.
// Batches use independent generators keyed on (seed, R index, batch), so the
// result does not depend on the worker count.
GeomScan geom_bound_scan(std::size_t samples_per_regime, const std::vector<double>& R_list, std::uint64_t seed);

// ---------------------------------------------------------- Gaussian factors

// g(x) = exp(-(x-m)^T Q (x-m) / 2 + i k.x); |g|^2 is a normal law with
// covariance (2Q)^{-1}.
struct GaussianFactor {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
    Eigen::Vector2d k = Eigen::Vector2d::Zero();

    Eigen::Matrix2d covariance() const { return (2.0 * Q).inverse(); }
    // ||grad g||^2 / ||g||^2
    double kinetic() const { return 0.5 * Q.trace() + k.squaredNorm(); }
    GaussianFactor dilate(double lambda) const; // g(lambda x)
    nlohmann::json to_json() const;
};

// ------------------------------------------------------------------- Hardy

struct HardyTestFunction {
    std::string family;
    std::size_t index = 0;
    std::array<GaussianFactor, 3> factors;

    HardyTestFunction dilate(double lambda) const;
    nlohmann::json to_json() const;
};

// Families: "isotropic_centered", "random_separable", "displaced".
HardyTestFunction hardy_test_function(const std::string& family, std::size_t index, std::uint64_t seed);

// Both sides per unit ||u||^2: lhs = 3 int |u|^2/rho^2, rhs = int |grad u|^2.
struct HardyResult {
    std::string family;
    std::size_t index = 0;
    double lhs = 0.0, lhs_stderr = 0.0;
    double rhs = 0.0, rhs_stderr = 0.0;
    double rhs_exact = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;

    double margin_sigmas() const; // (rhs - lhs) / combined stderr
    bool holds(double sigmas = 3.0) const;
    nlohmann::json to_json() const;
};

inline constexpr std::size_t kHardyBatches = 64;

// Monte Carlo in Jacobi coordinates. The relative coordinate is drawn from a
// defensive mixture of the exact Gaussian marginal and a radial law with
// density ~ 1/|xi|^2 near the origin, which keeps the variance finite; the
// centre of mass is drawn from its exact conditional law.
// Throws ConvergenceError when the estimate is not finite (degenerate sampler).
HardyResult hardy_mc(const HardyTestFunction& f, std::size_t samples, std::uint64_t seed);
HardyResult hardy_mc(const std::string& family, std::size_t index, std::size_t samples, std::uint64_t seed);

// ------------------------------------------------------------- diamagnetic

struct DiamagneticResult {
    double lhs = 0.0; // h^2 sum |(grad + iA) u|^2
    double rhs = 0.0; // h^2 sum |grad |u||^2
    // rhs - lhs above a roundoff floor of 64 eps (lhs + rhs), else zero
    double violation() const {
        const double gap = rhs - lhs;
        return gap > 64.0 * std::numeric_limits<double>::epsilon() * (lhs + rhs) ? gap : 0.0;
    }
    nlohmann::json to_json() const;
};

DiamagneticResult diamagnetic_check(const WaveFunction& u, const VectorField& A);

struct DiamagneticTrial {
    std::uint64_t seed = 0;
    ExternalField field;
    DiamagneticResult coarse, fine;
    bool passed = false;
};

struct DiamagneticStudy {
    std::size_t coarse_n = 0, fine_n = 0;
    double box = 0.0;
    std::vector<DiamagneticTrial> trials;
    double worst_coarse = 0.0, worst_fine = 0.0;
    bool passed = false;
    nlohmann::json to_json() const;
};

// Random smooth (u, A_e) pairs on two resolutions; a trial passes when its
// violation is zero on both or shrinks by at least `factor`.
DiamagneticStudy diamagnetic_refinement_study(std::size_t trials, std::uint64_t seed, double box = 8.0,
                                              std::size_t coarse_n = 128, double factor = 4.0);

ExternalField random_smooth_field(std::uint64_t seed);

// --------------------------------------------------------- magnetic bound

struct MagneticBoundResult {
    double magnetic = 0.0;  // h^2 sum |A[rho]|^2 rho
    double gradient = 0.0;  // h^2 sum |grad |u||^2
    double norm = 0.0;      // ||u||
    double ratio = 0.0;     // magnetic / gradient
    double scaled_ratio() const { return ratio / (norm * norm * norm * norm); }
    nlohmann::json to_json() const;
};

// A[rho] = grad-perp w_R * rho with R = 2h standing in for the point kernel.
class MagneticBoundChecker {
public:
    explicit MagneticBoundChecker(const Grid2D& grid);
    ~MagneticBoundChecker();
    MagneticBoundChecker(const MagneticBoundChecker&) = delete;
    MagneticBoundChecker& operator=(const MagneticBoundChecker&) = delete;

    double radius() const { return R_; }
    // Throws ResolutionError when u carries spectral weight near the grid cutoff.
    MagneticBoundResult check(const WaveFunction& u);

private:
    Grid2D grid_;
    double R_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

MagneticBoundResult magnetic_bound_check(const WaveFunction& u);

inline constexpr double kMagneticBoundConstant = 1.5;

// ------------------------------------------------------ two-body form ratios

struct TwoBodyTestFunction {
    GaussianFactor first, second; // f(x1) g(x2)
    nlohmann::json to_json() const;
};

// Families: "gaussian" (real), "gaussian_phase", "concentrated", "mixed".
std::vector<TwoBodyTestFunction> two_body_family(const std::string& family, std::size_t members, std::uint64_t seed);

struct FormRatio {
    double singular = 0.0;    // <f, |grad w_R(x1-x2)|^2 f>
    double mixed = 0.0;       // |<f, (p^A . grad-perp w_R + grad-perp w_R . p^A) f>|
    double denominator = 0.0; // <f, ((p_1^A)^2 + 1) f>
    double singular_ratio() const { return singular / denominator; }
    double mixed_ratio() const { return mixed / denominator; }
};

// Polar quadrature about the singular point for the relative coordinate;
// p^A acts on the first particle.
FormRatio two_body_form_ratio(const TwoBodyTestFunction& f, double R, const ExternalField& field);

struct FormRow {
    double R = 0.0;
    double sup_singular = 0.0;
    std::size_t singular_witness = 0;
    double sup_mixed = 0.0;
    std::size_t mixed_witness = 0;
    double sup_v_squared = 0.0;
};

struct FormScan {
    std::string family;
    std::uint64_t seed = 0;
    std::size_t members = 0;
    ExternalField field;
    std::vector<TwoBodyTestFunction> functions;
    std::vector<FormRow> rows;
    double singular_slope = 0.0; // d log(sup ratio) / d log(1/R)
    double mixed_slope = 0.0;
    bool hard_bound_holds = true;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

inline constexpr double kFormSlopeLimit = 0.2;

// Per-R sup over the family. A second family drawn with seed + 1 checks that
// the singular sup is stable; a spread above 25% adds a warning.
FormScan quadratic_form_ratios(const std::string& family, const std::vector<double>& R_list, std::uint64_t seed,
                               const ExternalField& field = {}, std::size_t members = 48);

// ----------------------------------------------------------------- reports

struct LemmaEntry {
    std::string regime;
    double R = 0.0;
    double empirical_constant = 0.0;
    nlohmann::json witness;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
};

struct LemmaReport {
    std::string lemma_id;
    std::string statement;
    std::string scope;
    bool passed = false;
    std::vector<LemmaEntry> entries;
    nlohmann::json details;

    // Top-level fields repeat the entry with the largest empirical constant.
    nlohmann::json to_json() const;
};

} // namespace anyon
