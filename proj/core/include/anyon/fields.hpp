#pragma once

// External magnetic potential A_e (constant B0 plus Gaussian bumps) and the
// confining trap V.

#include "anyon/grid.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace anyon {

enum class GaugeKind { Zero, Symmetric, ConstantPlusPerturbation };

std::string to_string(GaugeKind k);
GaugeKind gauge_kind_from_string(const std::string& s);

// B(x) = amplitude * exp(-|x - center|^2 / (2 width^2))
struct GaussianBump {
    double amplitude = 0.0;
    Vec2 center{};
    double width = 1.0;
};

class ExternalField {
public:
    ExternalField() = default;
    ExternalField(GaugeKind kind, double B0, std::vector<GaussianBump> bumps = {});

    GaugeKind kind() const { return kind_; }
    double B0() const { return B0_; }
    const std::vector<GaussianBump>& bumps() const { return bumps_; }
    bool is_zero() const;

    Vec2 A(Vec2 x) const;
    double B(Vec2 x) const;          // B0 + B~
    double perturbation(Vec2 x) const;

    VectorField sample(const Grid2D& grid) const;
    RealField sample_B(const Grid2D& grid) const;

    // h-weighted ||B~||_p + ||grad B~||_p with p = 3 on the grid.
    double perturbation_norm_proxy(const Grid2D& grid) const;
    // Smallest bump width (infinity without bumps).
    double feature_length() const;

    nlohmann::json to_json() const;
    static ExternalField from_json(const nlohmann::json& j, const std::string& path = "/field");

private:
    GaugeKind kind_ = GaugeKind::Zero;
    double B0_ = 0.0;
    std::vector<GaussianBump> bumps_;
};

ExternalField symmetric_gauge(double B0);

// V(x) = c |x|^s - C
class TrapPotential {
public:
    TrapPotential() = default;
    TrapPotential(double c, double s, double C = 0.0);

    double c() const { return c_; }
    double s() const { return s_; }
    double offset() const { return C_; }

    double operator()(Vec2 x) const;
    RealField sample(const Grid2D& grid) const;
    // min of V over the boundary nodes of the grid
    double boundary_minimum(const Grid2D& grid) const;

    nlohmann::json to_json() const;
    static TrapPotential from_json(const nlohmann::json& j, const std::string& path = "/trap");

private:
    double c_ = 1.0;
    double s_ = 2.0;
    double C_ = 0.0;
};

// Second-order central-difference curl of a sampled field.
RealField discrete_curl(const Grid2D& grid, const VectorField& A);

// max over interior nodes (one layer dropped) of |curl A - B|.
double curl_check(const ExternalField& field, const Grid2D& grid);
double curl_check(const Grid2D& grid, const VectorField& A, const RealField& B);

} // namespace anyon
