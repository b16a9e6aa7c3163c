#include "anyon/fields.hpp"

#include "anyon/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace anyon {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object())
        throw ConfigError(path, "expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError(path + "/" + key, "unknown key \"" + key + "\"");
}

double number_at(const json& j, const std::string& key, const std::string& path, double fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j.at(key).is_number())
        throw ConfigError(path + "/" + key, "expected a number");
    return j.at(key).get<double>();
}

} // namespace

std::string to_string(GaugeKind k) {
    switch (k) {
    case GaugeKind::Zero: return "zero";
    case GaugeKind::Symmetric: return "symmetric";
    case GaugeKind::ConstantPlusPerturbation: return "constant_plus_perturbation";
    }
    return "zero";
}

GaugeKind gauge_kind_from_string(const std::string& s) {
    if (s == "zero")
        return GaugeKind::Zero;
    if (s == "symmetric")
        return GaugeKind::Symmetric;
    if (s == "constant_plus_perturbation")
        return GaugeKind::ConstantPlusPerturbation;
    throw ConfigError("/field/gauge_kind", "unknown gauge kind \"" + s + "\"");
}

ExternalField::ExternalField(GaugeKind kind, double B0, std::vector<GaussianBump> bumps)
    : kind_(kind), B0_(B0), bumps_(std::move(bumps)) {
    if (kind_ == GaugeKind::Zero) {
        B0_ = 0.0;
        bumps_.clear();
    }
    if (kind_ == GaugeKind::Symmetric)
        bumps_.clear();
    for (const auto& b : bumps_)
        if (!(b.width > 0.0))
            throw DomainError("bump width must be positive");
}

ExternalField symmetric_gauge(double B0) { return ExternalField(GaugeKind::Symmetric, B0); }

bool ExternalField::is_zero() const {
    return B0_ == 0.0 && std::all_of(bumps_.begin(), bumps_.end(), [](const auto& b) { return b.amplitude == 0.0; });
}

Vec2 ExternalField::A(Vec2 x) const {
    Vec2 a = (0.5 * B0_) * perp(x);
    for (const auto& b : bumps_) {
        const Vec2 d = x - b.center;
        const double r2 = dot(d, d);
        const double s2 = b.width * b.width;
        const double t = r2 / (2.0 * s2);
        // flux inside radius r over 2 pi r^2; expm1 keeps the centre finite
        const double f = t < 1e-8 ? 0.5 * b.amplitude * (1.0 - 0.5 * t) : -b.amplitude * s2 * std::expm1(-t) / r2;
        a = a + f * perp(d);
    }
    return a;
}

double ExternalField::perturbation(Vec2 x) const {
    double s = 0.0;
    for (const auto& b : bumps_) {
        const Vec2 d = x - b.center;
        s += b.amplitude * std::exp(-dot(d, d) / (2.0 * b.width * b.width));
    }
    return s;
}

double ExternalField::B(Vec2 x) const { return B0_ + perturbation(x); }

VectorField ExternalField::sample(const Grid2D& grid) const {
    VectorField out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec2 a = A(grid.point(i));
        out.x[i] = a.x;
        out.y[i] = a.y;
    }
    return out;
}

RealField ExternalField::sample_B(const Grid2D& grid) const {
    return anyon::sample(grid, [this](Vec2 x) { return B(x); });
}

double ExternalField::feature_length() const {
    double w = std::numeric_limits<double>::infinity();
    for (const auto& b : bumps_)
        w = std::min(w, b.width);
    return w;
}

double ExternalField::perturbation_norm_proxy(const Grid2D& grid) const {
    constexpr double p = 3.0;
    double f = 0.0, g = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec2 x = grid.point(i);
        double val = 0.0;
        Vec2 grad{};
        for (const auto& b : bumps_) {
            const Vec2 d = x - b.center;
            const double e = b.amplitude * std::exp(-dot(d, d) / (2.0 * b.width * b.width));
            val += e;
            grad = grad + (-e / (b.width * b.width)) * d;
        }
        f += std::pow(std::abs(val), p);
        g += std::pow(norm(grad), p);
    }
    const double w = grid.cell_area();
    return std::pow(w * f, 1.0 / p) + std::pow(w * g, 1.0 / p);
}

nlohmann::json ExternalField::to_json() const {
    json bumps = json::array();
    for (const auto& b : bumps_)
        bumps.push_back({{"amplitude", b.amplitude}, {"center", {b.center.x, b.center.y}}, {"width", b.width}});
    return {{"gauge_kind", to_string(kind_)}, {"B0", B0_}, {"bumps", bumps}};
}

ExternalField ExternalField::from_json(const nlohmann::json& j, const std::string& path) {
    reject_unknown(j, path, {"gauge_kind", "B0", "bumps"});
    GaugeKind kind = GaugeKind::Zero;
    if (j.contains("gauge_kind")) {
        if (!j.at("gauge_kind").is_string())
            throw ConfigError(path + "/gauge_kind", "expected a string");
        kind = gauge_kind_from_string(j.at("gauge_kind").get<std::string>());
    } else if (j.contains("bumps")) {
        kind = GaugeKind::ConstantPlusPerturbation;
    } else if (j.contains("B0")) {
        kind = GaugeKind::Symmetric;
    }
    const double B0 = number_at(j, "B0", path, 0.0);
    std::vector<GaussianBump> bumps;
    if (j.contains("bumps")) {
        const auto& arr = j.at("bumps");
        if (!arr.is_array())
            throw ConfigError(path + "/bumps", "expected an array");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string bp = path + "/bumps/" + std::to_string(k);
            reject_unknown(arr[k], bp, {"amplitude", "center", "width"});
            GaussianBump b;
            b.amplitude = number_at(arr[k], "amplitude", bp, 0.0);
            b.width = number_at(arr[k], "width", bp, 1.0);
            if (!(b.width > 0.0))
                throw ConfigError(bp + "/width", "must be positive");
            if (arr[k].contains("center")) {
                const auto& c = arr[k].at("center");
                if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
                    throw ConfigError(bp + "/center", "expected [x, y]");
                b.center = {c[0].get<double>(), c[1].get<double>()};
            }
            bumps.push_back(b);
        }
    }
    if (kind != GaugeKind::ConstantPlusPerturbation && !bumps.empty())
        throw ConfigError(path + "/bumps", "bumps require gauge_kind constant_plus_perturbation");
    if (kind == GaugeKind::Zero && B0 != 0.0)
        throw ConfigError(path + "/B0", "zero gauge requires B0 = 0");
    return ExternalField(kind, B0, std::move(bumps));
}

TrapPotential::TrapPotential(double c, double s, double C) : c_(c), s_(s), C_(C) {
    if (!(s > 0.0))
        throw DomainError("trap growth exponent must be positive");
    if (!(c > 0.0))
        throw DomainError("trap strength must be positive");
}

double TrapPotential::operator()(Vec2 x) const {
    const double r2 = dot(x, x);
    const double p = s_ == 2.0 ? r2 : std::pow(r2, 0.5 * s_);
    return c_ * p - C_;
}

RealField TrapPotential::sample(const Grid2D& grid) const {
    return anyon::sample(grid, [this](Vec2 x) { return (*this)(x); });
}

double TrapPotential::boundary_minimum(const Grid2D& grid) const {
    double m = std::numeric_limits<double>::infinity();
    const std::size_t n = grid.n();
    for (std::size_t k = 0; k < n; ++k) {
        m = std::min({m, (*this)(grid.point(0, k)), (*this)(grid.point(k, 0)), (*this)(grid.point(n - 1, k)),
                      (*this)(grid.point(k, n - 1))});
    }
    return m;
}

nlohmann::json TrapPotential::to_json() const { return {{"c", c_}, {"s", s_}, {"C", C_}}; }

TrapPotential TrapPotential::from_json(const nlohmann::json& j, const std::string& path) {
    reject_unknown(j, path, {"c", "s", "C"});
    const double c = number_at(j, "c", path, 1.0);
    const double s = number_at(j, "s", path, 2.0);
    const double C = number_at(j, "C", path, 0.0);
    if (!(c > 0.0))
        throw ConfigError(path + "/c", "must be positive");
    if (!(s > 0.0))
        throw ConfigError(path + "/s", "must be positive");
    return TrapPotential(c, s, C);
}

RealField discrete_curl(const Grid2D& grid, const VectorField& A) {
    const std::size_t n = grid.n();
    const double inv2h = 0.5 / grid.spacing();
    RealField out(grid.size(), 0.0);
    for (std::size_t ix = 1; ix + 1 < n; ++ix)
        for (std::size_t iy = 1; iy + 1 < n; ++iy) {
            const double dAy_dx = (A.y[grid.index(ix + 1, iy)] - A.y[grid.index(ix - 1, iy)]) * inv2h;
            const double dAx_dy = (A.x[grid.index(ix, iy + 1)] - A.x[grid.index(ix, iy - 1)]) * inv2h;
            out[grid.index(ix, iy)] = dAy_dx - dAx_dy;
        }
    return out;
}

double curl_check(const Grid2D& grid, const VectorField& A, const RealField& B) {
    const RealField c = discrete_curl(grid, A);
    const std::size_t n = grid.n();
    double err = 0.0;
    for (std::size_t ix = 1; ix + 1 < n; ++ix)
        for (std::size_t iy = 1; iy + 1 < n; ++iy) {
            const std::size_t i = grid.index(ix, iy);
            err = std::max(err, std::abs(c[i] - B[i]));
        }
    return err;
}

double curl_check(const ExternalField& field, const Grid2D& grid) {
    if (field.feature_length() < 2.0 * grid.spacing())
        throw ResolutionError("field perturbation varies faster than the grid resolves");
    return curl_check(grid, field.sample(grid), field.sample_B(grid));
}

} // namespace anyon
