#include "anyon/inequality_lab.hpp"

#include "anyon/error.hpp"
#include "anyon/fft.hpp"
#include "anyon/parallel.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace anyon {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(b),
                      static_cast<std::uint32_t>(c)};
    return std::mt19937_64(seq);
}

nlohmann::json vec_json(Vec2 p) { return nlohmann::json::array({p.x, p.y}); }
nlohmann::json vec_json(const Eigen::Vector2d& p) { return nlohmann::json::array({p.x(), p.y()}); }

Vec2 direction(double a) { return {std::cos(a), std::sin(a)}; }

Eigen::Vector2d to_eigen(Vec2 p) { return {p.x, p.y}; }
Vec2 to_vec(const Eigen::Vector2d& p) { return {p.x(), p.y()}; }

// Gauss-Legendre nodes and weights on [-1, 1].
struct Legendre {
    std::vector<double> x, w;
    Legendre() {
        using G = boost::math::quadrature::gauss<double, 10>;
        const auto& a = G::abscissa();
        const auto& wt = G::weights();
        for (std::size_t i = 0; i < a.size(); ++i) {
            x.push_back(-a[i]);
            w.push_back(wt[i]);
            if (a[i] != 0.0) {
                x.push_back(a[i]);
                w.push_back(wt[i]);
            }
        }
    }
};

const Legendre& legendre() {
    static const Legendre l;
    return l;
}

// Physicists' Gauss-Hermite rule via Golub-Welsch.
struct Hermite {
    std::vector<double> t, w;
    explicit Hermite(int order) {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
        for (int i = 1; i < order; ++i)
            J(i, i - 1) = J(i - 1, i) = std::sqrt(0.5 * i);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        for (int i = 0; i < order; ++i) {
            t.push_back(es.eigenvalues()(i));
            const double v = es.eigenvectors()(0, i);
            w.push_back(std::sqrt(kPi) * v * v);
        }
    }
};

const Hermite& hermite(int order) {
    static const Hermite h4(4), h10(10);
    return order <= 4 ? h4 : h10;
}

// E[g(x)] for x ~ N(m, S) with a tensor Gauss-Hermite rule.
template <class G>
auto gaussian_expectation(const Eigen::Vector2d& m, const Eigen::Matrix2d& S, int order, G&& g) {
    const auto& H = hermite(order);
    const Eigen::Matrix2d L = S.llt().matrixL();
    using T = decltype(g(m));
    T acc{};
    bool first = true;
    for (std::size_t i = 0; i < H.t.size(); ++i)
        for (std::size_t j = 0; j < H.t.size(); ++j) {
            const Eigen::Vector2d x = m + std::sqrt(2.0) * (L * Eigen::Vector2d(H.t[i], H.t[j]));
            const double wt = H.w[i] * H.w[j] / kPi;
            if (first) {
                acc = wt * g(x);
                first = false;
            } else {
                acc = acc + wt * g(x);
            }
        }
    return acc;
}

} // namespace

// ---------------------------------------------------------------- triangles

std::string to_string(TriangleRegime r) {
    switch (r) {
    case TriangleRegime::AllLong: return "all-long";
    case TriangleRegime::OneShort: return "one-short";
    case TriangleRegime::TwoShort: return "two-short";
    case TriangleRegime::AllShort: return "all-short";
    }
    return "unknown";
}

TriangleRegime classify_triangle(Vec2 x, Vec2 y, Vec2 z, double R) {
    const double t = 2.0 * R;
    const int shorts = (norm(x - y) < t) + (norm(y - z) < t) + (norm(z - x) < t);
    return static_cast<TriangleRegime>(shorts);
}

CircumradiusRho circumradius_rho(Vec2 x, Vec2 y, Vec2 z) {
    const double a = norm(y - z), b = norm(z - x), c = norm(x - y);
    const Vec2 u = y - x, v = z - x;
    const double area2 = std::abs(u.x * v.y - u.y * v.x); // twice the area
    CircumradiusRho out;
    out.rho = std::sqrt(a * a + b * b + c * c);
    out.circumradius = area2 > 0.0 ? a * b * c / (2.0 * area2) : kInf;
    return out;
}

double circumradius_ratio(Vec2 x, Vec2 y, Vec2 z) {
    const double a2 = dot(y - z, y - z), b2 = dot(z - x, z - x), c2 = dot(x - y, x - y);
    const Vec2 u = y - x, v = z - x;
    const double cross = u.x * v.y - u.y * v.x;
    const double denom = 9.0 * a2 * b2 * c2;
    return denom > 0.0 ? (a2 + b2 + c2) * 4.0 * cross * cross / denom : 0.0;
}

nlohmann::json CircumradiusScan::to_json() const {
    return {{"samples", samples},
            {"seed", seed},
            {"max_ratio", max_ratio},
            {"witness", {vec_json(witness[0]), vec_json(witness[1]), vec_json(witness[2])}},
            {"equilateral_deviation", equilateral_deviation}};
}

CircumradiusScan circumradius_scan(std::size_t samples, std::uint64_t seed) {
    constexpr std::size_t batches = 16;
    struct Part {
        double max = 0.0;
        Vec2 w[3]{};
        std::size_t count = 0;
    };
    std::vector<Part> parts(batches);
    parallel_for(batches, [&](std::size_t b) {
        auto rng = keyed_rng(seed, 0xc12, b);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Part& p = parts[b];
        const std::size_t count = samples / batches + (b < samples % batches ? 1 : 0);
        for (std::size_t i = 0; i < count; ++i) {
            const double scale = std::pow(10.0, -6.0 + 12.0 * unit(rng));
            auto pt = [&] { return Vec2{scale * (2.0 * unit(rng) - 1.0), scale * (2.0 * unit(rng) - 1.0)}; };
            Vec2 x = pt(), y = pt(), z = pt();
            const double pick = unit(rng);
            if (pick < 0.25) {
                const Vec2 m = 0.5 * (x + y);
                const double t = std::pow(10.0, -9.0 + 8.0 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
                z = m + 0.5 * std::sqrt(3.0) * (1.0 + t) * perp(y - x);
            } else if (pick < 0.5) {
                const double t = 2.0 * unit(rng) - 1.0;
                z = x + t * (y - x) + std::pow(10.0, -12.0 + 11.0 * unit(rng)) * perp(y - x);
            }
            const double q = circumradius_ratio(x, y, z);
            if (q > p.max) {
                p.max = q;
                p.w[0] = x;
                p.w[1] = y;
                p.w[2] = z;
            }
            ++p.count;
        }
    });
    CircumradiusScan out;
    out.seed = seed;
    for (const auto& p : parts) {
        out.samples += p.count;
        if (p.max > out.max_ratio) {
            out.max_ratio = p.max;
            std::copy(std::begin(p.w), std::end(p.w), std::begin(out.witness));
        }
    }
    for (int k = 0; k < 64; ++k) {
        const double a = 0.1 * k, s = std::pow(10.0, -4.0 + 0.125 * k);
        const Vec2 c{0.3 * k, -0.2 * k};
        const Vec2 x = c + s * direction(a), y = c + s * direction(a + 2.0 * kPi / 3.0),
                   z = c + s * direction(a + 4.0 * kPi / 3.0);
        out.equilateral_deviation = std::max(out.equilateral_deviation, std::abs(circumradius_ratio(x, y, z) - 1.0));
    }
    return out;
}

TriangleSample TriangleSample::make(Vec2 x, Vec2 y, Vec2 z, double R) {
    TriangleSample s;
    s.x = x;
    s.y = y;
    s.z = z;
    s.regime = classify_triangle(x, y, z, R);
    const auto cr = circumradius_rho(x, y, z);
    s.circumradius = cr.circumradius;
    s.rho = cr.rho;
    return s;
}

nlohmann::json TriangleSample::to_json() const {
    return {{"x", vec_json(x)},
            {"y", vec_json(y)},
            {"z", vec_json(z)},
            {"regime", to_string(regime)},
            {"circumradius", std::isfinite(circumradius) ? nlohmann::json(circumradius) : nlohmann::json("inf")},
            {"rho", rho}};
}

double three_body_S(Vec2 x, Vec2 y, Vec2 z, const SmearedKernel& kernel) {
    auto term = [&](Vec2 a, Vec2 b, Vec2 c) {
        const Vec2 p = a - b, q = a - c;
        const double rp = norm(p), rq = norm(q);
        if (rp == 0.0 || rq == 0.0)
            return 0.0;
        return dot(p, q) / (rp * rq) * kernel.v(rp) * kernel.v(rq);
    };
    return term(x, y, z) + term(y, z, x) + term(z, x, y);
}

double three_body_S(Vec2 x, Vec2 y, Vec2 z, double R) { return three_body_S(x, y, z, SmearedKernel(R)); }

const GeomCell& GeomScan::cell(std::size_t r_index, TriangleRegime regime) const {
    return cells.at(r_index * kTriangleRegimes.size() + static_cast<std::size_t>(regime));
}

double GeomScan::sup(TriangleRegime regime) const {
    double s = 0.0;
    for (std::size_t r = 0; r < R_list.size(); ++r)
        s = std::max(s, cell(r, regime).sup);
    return s;
}

double GeomScan::spread(TriangleRegime regime) const {
    double lo = kInf, hi = 0.0;
    for (std::size_t r = 0; r < R_list.size(); ++r) {
        lo = std::min(lo, cell(r, regime).sup);
        hi = std::max(hi, cell(r, regime).sup);
    }
    return lo > 0.0 ? hi / lo : kInf;
}

nlohmann::json GeomScan::to_json() const {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : cells)
        cs.push_back({{"regime", to_string(c.regime)},
                      {"R", c.R},
                      {"sup_abs_S_rho2", c.sup},
                      {"samples", c.samples},
                      {"witness", c.witness.to_json()}});
    nlohmann::json sp = nlohmann::json::object();
    for (auto r : kTriangleRegimes)
        sp[to_string(r)] = spread(r);
    return {{"seed", seed}, {"R_list", R_list}, {"attempts", attempts}, {"cells", cs}, {"spread", sp}};
}

namespace {

struct Triangle {
    Vec2 x, y, z;
};

Triangle draw_triangle(std::mt19937_64& rng, double R) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) { return lo * std::exp(std::log(hi / lo) * unit(rng)); };
    const Vec2 base{R * (2.0 * unit(rng) - 1.0), R * (2.0 * unit(rng) - 1.0)};
    const double pick = unit(rng);
    if (pick < 1.0 / 3.0) {
        const double s = R * log_uniform(0.25, 40.0);
        auto pt = [&] { return base + Vec2{s * (2.0 * unit(rng) - 1.0), s * (2.0 * unit(rng) - 1.0)}; };
        const Vec2 x = pt(), y = pt(), z = pt();
        return {x, y, z};
    }
    if (pick < 2.0 / 3.0) {
        const double e1 = R * log_uniform(0.05, 6.0), e2 = R * log_uniform(0.05, 6.0);
        const Vec2 y = base + e1 * direction(2.0 * kPi * unit(rng));
        const Vec2 z = base + e2 * direction(2.0 * kPi * unit(rng));
        return {base, y, z};
    }
    const Vec2 dir = direction(2.0 * kPi * unit(rng));
    const double e1 = R * log_uniform(0.05, 12.0);
    const double e2 = R * log_uniform(0.05, 12.0) * (unit(rng) < 0.5 ? -1.0 : 1.0);
    const double eps = std::abs(e2) * std::pow(10.0, -8.0 + 7.0 * unit(rng));
    const Vec2 y = base + e1 * dir;
    const Vec2 z = base + e2 * dir + eps * perp(dir);
    return {base, y, z};
}

struct BatchOut {
    std::array<GeomCell, 4> cells;
    std::size_t attempts = 0;
};

BatchOut run_geom_batch(const SmearedKernel& kernel, std::size_t target, std::uint64_t seed, std::size_t r_index,
                        std::size_t batch) {
    const double R = kernel.radius();
    auto rng = keyed_rng(seed, 0x6e0, r_index, batch);
    BatchOut out;
    for (auto reg : kTriangleRegimes) {
        auto& c = out.cells[static_cast<std::size_t>(reg)];
        c.regime = reg;
        c.R = R;
    }
    std::size_t filled = 0;
    const std::size_t cap = 4000 * target + 100000;
    while (filled < 4) {
        if (++out.attempts > cap)
            throw ConvergenceError("triangle sampler could not fill every regime");
        const Triangle t = draw_triangle(rng, R);
        const auto reg = classify_triangle(t.x, t.y, t.z, R);
        auto& c = out.cells[static_cast<std::size_t>(reg)];
        if (c.samples >= target)
            continue;
        const double rho2 = dot(t.x - t.y, t.x - t.y) + dot(t.y - t.z, t.y - t.z) + dot(t.z - t.x, t.z - t.x);
        const double val = std::abs(three_body_S(t.x, t.y, t.z, kernel)) * rho2;
        if (c.samples == 0 || val > c.sup) {
            c.sup = val;
            c.witness = TriangleSample::make(t.x, t.y, t.z, R);
        }
        if (++c.samples == target)
            ++filled;
    }
    return out;
}

} // namespace

GeomScan geom_bound_scan(std::size_t samples_per_regime, const std::vector<double>& R_list, std::uint64_t seed) {
    if (samples_per_regime < 10000)
        throw DomainError("geometric scan needs at least 1e4 samples per regime");
    if (R_list.empty())
        throw DomainError("geometric scan needs at least one radius");
    const std::size_t target = (samples_per_regime + kGeomBatches - 1) / kGeomBatches;
    std::vector<SmearedKernel> kernels;
    for (double R : R_list) {
        if (!(R > 0.0))
            throw DomainError("smearing radius must be positive");
        kernels.emplace_back(R);
    }
    std::vector<BatchOut> batches(R_list.size() * kGeomBatches);
    parallel_for(batches.size(), [&](std::size_t task) {
        const std::size_t r = task / kGeomBatches, b = task % kGeomBatches;
        batches[task] = run_geom_batch(kernels[r], target, seed, r, b);
    });
    GeomScan scan;
    scan.seed = seed;
    scan.R_list = R_list;
    for (std::size_t r = 0; r < R_list.size(); ++r) {
        for (auto reg : kTriangleRegimes) {
            GeomCell merged;
            merged.regime = reg;
            merged.R = R_list[r];
            for (std::size_t b = 0; b < kGeomBatches; ++b) {
                const auto& c = batches[r * kGeomBatches + b].cells[static_cast<std::size_t>(reg)];
                if (merged.samples == 0 || c.sup > merged.sup) {
                    merged.sup = c.sup;
                    merged.witness = c.witness;
                }
                merged.samples += c.samples;
            }
            scan.cells.push_back(merged);
        }
        for (std::size_t b = 0; b < kGeomBatches; ++b)
            scan.attempts += batches[r * kGeomBatches + b].attempts;
    }
    return scan;
}

// ---------------------------------------------------------- Gaussian factors

GaussianFactor GaussianFactor::dilate(double lambda) const {
    GaussianFactor g;
    g.mean = mean / lambda;
    g.Q = lambda * lambda * Q;
    g.k = lambda * k;
    return g;
}

nlohmann::json GaussianFactor::to_json() const {
    return {{"mean", vec_json(mean)}, {"Q", {{Q(0, 0), Q(0, 1)}, {Q(1, 0), Q(1, 1)}}}, {"k", vec_json(k)}};
}

namespace {

Eigen::Matrix2d rotated_diag(double a, double b, double theta) {
    Eigen::Matrix2d Rm;
    Rm << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return Rm * Eigen::Vector2d(a, b).asDiagonal() * Rm.transpose();
}

// Factor whose |g|^2 has principal standard deviations s1, s2.
GaussianFactor factor_from_widths(const Eigen::Vector2d& mean, double s1, double s2, double theta,
                                  const Eigen::Vector2d& k) {
    GaussianFactor g;
    g.mean = mean;
    g.Q = rotated_diag(0.5 / (s1 * s1), 0.5 / (s2 * s2), theta);
    g.k = k;
    return g;
}

} // namespace

// ------------------------------------------------------------------- Hardy

HardyTestFunction HardyTestFunction::dilate(double lambda) const {
    HardyTestFunction out = *this;
    for (auto& f : out.factors)
        f = f.dilate(lambda);
    return out;
}

nlohmann::json HardyTestFunction::to_json() const {
    nlohmann::json fs = nlohmann::json::array();
    for (const auto& f : factors)
        fs.push_back(f.to_json());
    return {{"family", family}, {"index", index}, {"factors", fs}};
}

HardyTestFunction hardy_test_function(const std::string& family, std::size_t index, std::uint64_t seed) {
    HardyTestFunction f;
    f.family = family;
    f.index = index;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto sym = [&](std::mt19937_64& rng, double a) { return a * (2.0 * unit(rng) - 1.0); };
    if (family == "isotropic_centered") {
        for (auto& g : f.factors)
            g = GaussianFactor{};
        return f;
    }
    if (family == "random_separable") {
        auto rng = keyed_rng(seed, 0x4a1, index);
        for (auto& g : f.factors) {
            const Eigen::Vector2d m(sym(rng, 1.0), sym(rng, 1.0));
            const double a = 0.25 * std::exp(std::log(16.0) * unit(rng));
            const double b = 0.25 * std::exp(std::log(16.0) * unit(rng));
            g.mean = m;
            g.Q = rotated_diag(a, b, kPi * unit(rng));
            g.k.setZero();
        }
        return f;
    }
    if (family == "displaced") {
        auto rng = keyed_rng(seed, 0x4a2, index);
        const double d = 0.5 + 1.5 * unit(rng);
        const std::array<Eigen::Vector2d, 3> means = {Eigen::Vector2d(d, 0.0), Eigen::Vector2d(-d, 0.0),
                                                      Eigen::Vector2d(0.0, d * sym(rng, 1.0))};
        for (std::size_t i = 0; i < 3; ++i) {
            auto& g = f.factors[i];
            g.mean = means[i];
            g.Q = (0.5 + 1.5 * unit(rng)) * Eigen::Matrix2d::Identity();
            g.k = Eigen::Vector2d(sym(rng, 1.0), sym(rng, 1.0));
        }
        return f;
    }
    throw DomainError("unknown Hardy test family '" + family + "'");
}

double HardyResult::margin_sigmas() const {
    const double s = std::hypot(lhs_stderr, rhs_stderr);
    return s > 0.0 ? (rhs - lhs) / s : (rhs >= lhs ? kInf : -kInf);
}

bool HardyResult::holds(double sigmas) const { return lhs <= rhs + sigmas * std::hypot(lhs_stderr, rhs_stderr); }

nlohmann::json HardyResult::to_json() const {
    return {{"family", family},       {"index", index},           {"lhs", lhs},   {"lhs_stderr", lhs_stderr},
            {"rhs", rhs},             {"rhs_stderr", rhs_stderr}, {"rhs_exact", rhs_exact},
            {"ratio", lhs / rhs},     {"samples", samples},       {"seed", seed}, {"holds_3sigma", holds(3.0)}};
}

namespace {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Orthogonal map x -> (xi_1, xi_2, eta): Jacobi coordinates and the scaled centre of mass.
Mat6 jacobi_map() {
    Mat6 J = Mat6::Zero();
    const double a = 1.0 / std::sqrt(2.0), b = 1.0 / std::sqrt(6.0), c = 1.0 / std::sqrt(3.0);
    for (int d = 0; d < 2; ++d) {
        J(d, d) = a;
        J(d, 2 + d) = -a;
        J(2 + d, d) = b;
        J(2 + d, 2 + d) = b;
        J(2 + d, 4 + d) = -2.0 * b;
        J(4 + d, d) = c;
        J(4 + d, 2 + d) = c;
        J(4 + d, 4 + d) = c;
    }
    return J;
}

struct HardySampler {
    Mat6 J;
    Vec4 mu_xi;
    Mat4 L_xi, P_xi; // Cholesky factor and precision
    double log_norm_xi = 0.0;
    Eigen::Vector2d mu_eta;
    Eigen::Matrix<double, 2, 4> B;
    Eigen::Matrix2d L_eta;
    double s0 = 0.0;
    double eps = 0.25;

    explicit HardySampler(const HardyTestFunction& f) : J(jacobi_map()) {
        Vec6 M;
        Mat6 S = Mat6::Zero();
        for (int i = 0; i < 3; ++i) {
            M.segment<2>(2 * i) = f.factors[i].mean;
            S.block<2, 2>(2 * i, 2 * i) = f.factors[i].covariance();
        }
        const Vec6 mz = J * M;
        const Mat6 Sz = J * S * J.transpose();
        mu_xi = mz.head<4>();
        const Mat4 Sxi = Sz.topLeftCorner<4, 4>();
        Eigen::LLT<Mat4> llt(Sxi);
        if (llt.info() != Eigen::Success)
            throw ConvergenceError("importance sampler degenerate: singular relative covariance");
        L_xi = llt.matrixL();
        P_xi = llt.solve(Mat4::Identity());
        const double logdet = 2.0 * L_xi.diagonal().array().log().sum();
        log_norm_xi = -2.0 * std::log(2.0 * kPi) - 0.5 * logdet;
        mu_eta = mz.tail<2>();
        const Eigen::Matrix<double, 2, 4> Sex = Sz.bottomLeftCorner<2, 4>();
        B = Sex * P_xi;
        const Eigen::Matrix2d Ce = Sz.bottomRightCorner<2, 2>() - B * Sex.transpose();
        L_eta = Ce.llt().matrixL();
        s0 = std::sqrt(Sxi.trace());
    }

    double p_xi(const Vec4& xi) const {
        const Vec4 d = xi - mu_xi;
        return std::exp(log_norm_xi - 0.5 * d.dot(P_xi * d));
    }
    double h_xi(double s) const { return s <= s0 ? 1.0 / (kPi * kPi * s0 * s0 * s * s) : 0.0; }
};

struct HardySums {
    long double lhs = 0, lhs2 = 0, rhs = 0, rhs2 = 0;
};

} // namespace

HardyResult hardy_mc(const HardyTestFunction& f, std::size_t samples, std::uint64_t seed) {
    if (samples < kHardyBatches)
        throw DomainError("Hardy Monte Carlo needs at least one sample per batch");
    const HardySampler hs(f);
    const Mat6 Jt = hs.J.transpose();
    std::vector<HardySums> sums(kHardyBatches);
    parallel_for(kHardyBatches, [&](std::size_t b) {
        auto rng = keyed_rng(seed, 0x4a7, f.index, b);
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const std::size_t count = samples / kHardyBatches + (b < samples % kHardyBatches ? 1 : 0);
        HardySums acc;
        for (std::size_t s = 0; s < count; ++s) {
            Vec4 n4;
            for (int i = 0; i < 4; ++i)
                n4(i) = normal(rng);
            Vec4 xi;
            if (unit(rng) < hs.eps) {
                const double r = hs.s0 * std::sqrt(unit(rng));
                xi = r * n4.normalized();
            } else {
                xi = hs.mu_xi + hs.L_xi * n4;
            }
            const Eigen::Vector2d n2(normal(rng), normal(rng));
            const Eigen::Vector2d eta = hs.mu_eta + hs.B * (xi - hs.mu_xi) + hs.L_eta * n2;
            const double s2 = xi.squaredNorm();
            const double p = hs.p_xi(xi);
            const double q = (1.0 - hs.eps) * p + hs.eps * hs.h_xi(std::sqrt(s2));
            const double w = p / q;
            Vec6 z;
            z.head<4>() = xi;
            z.tail<2>() = eta;
            const Vec6 x = Jt * z;
            double grad2 = 0.0;
            for (int i = 0; i < 3; ++i) {
                const auto& g = f.factors[i];
                grad2 += (g.Q * (x.segment<2>(2 * i) - g.mean)).squaredNorm() + g.k.squaredNorm();
            }
            const long double lv = w / s2, rv = w * grad2;
            acc.lhs += lv;
            acc.lhs2 += lv * lv;
            acc.rhs += rv;
            acc.rhs2 += rv * rv;
        }
        sums[b] = acc;
    });
    HardySums tot;
    for (const auto& s : sums) {
        tot.lhs += s.lhs;
        tot.lhs2 += s.lhs2;
        tot.rhs += s.rhs;
        tot.rhs2 += s.rhs2;
    }
    const long double n = static_cast<long double>(samples);
    auto stats = [&](long double s1, long double s2) {
        const long double mean = s1 / n;
        const long double var = std::max<long double>(0.0L, s2 / n - mean * mean) * n / (n - 1.0L);
        return std::pair<double, double>(static_cast<double>(mean), static_cast<double>(std::sqrt(var / n)));
    };
    HardyResult r;
    r.family = f.family;
    r.index = f.index;
    std::tie(r.lhs, r.lhs_stderr) = stats(tot.lhs, tot.lhs2);
    std::tie(r.rhs, r.rhs_stderr) = stats(tot.rhs, tot.rhs2);
    for (const auto& g : f.factors)
        r.rhs_exact += g.kinetic();
    r.samples = samples;
    r.seed = seed;
    if (!std::isfinite(r.lhs) || !std::isfinite(r.lhs_stderr) || !std::isfinite(r.rhs_stderr) ||
        r.lhs_stderr > 0.5 * r.lhs)
        throw ConvergenceError("importance sampler degenerate: variance overflow");
    return r;
}

HardyResult hardy_mc(const std::string& family, std::size_t index, std::size_t samples, std::uint64_t seed) {
    return hardy_mc(hardy_test_function(family, index, seed), samples, seed);
}

// ------------------------------------------------------------- diamagnetic

nlohmann::json DiamagneticResult::to_json() const {
    return {{"lhs", lhs}, {"rhs", rhs}, {"violation", violation()}};
}

DiamagneticResult diamagnetic_check(const WaveFunction& u, const VectorField& A) {
    const Grid2D& g = u.grid();
    if (A.size() != g.size())
        throw DomainError("vector potential does not match the grid");
    SpectralOps ops(g);
    RealField mod(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        mod[i] = std::abs(u[i]);
    long double lhs = 0, rhs = 0;
    for (int axis = 0; axis < 2; ++axis) {
        const ComplexField du = ops.derivative(std::span<const cplx>(u.values()), axis);
        const RealField dm = ops.derivative(std::span<const double>(mod), axis);
        const RealField& a = axis == 0 ? A.x : A.y;
        for (std::size_t i = 0; i < g.size(); ++i) {
            lhs += std::norm(du[i] + cplx(0.0, a[i]) * u[i]);
            rhs += dm[i] * dm[i];
        }
    }
    DiamagneticResult r;
    r.lhs = static_cast<double>(lhs) * g.cell_area();
    r.rhs = static_cast<double>(rhs) * g.cell_area();
    return r;
}

ExternalField random_smooth_field(std::uint64_t seed) {
    auto rng = keyed_rng(seed, 0xd1a);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double B0 = 2.0 * unit(rng);
    std::vector<GaussianBump> bumps;
    for (int k = 0; k < 2; ++k) {
        GaussianBump b;
        b.amplitude = 2.0 * unit(rng);
        b.center = {1.5 * unit(rng), 1.5 * unit(rng)};
        b.width = 1.05 + 0.45 * unit(rng);
        bumps.push_back(b);
    }
    return ExternalField(GaugeKind::ConstantPlusPerturbation, B0, std::move(bumps));
}

nlohmann::json DiamagneticStudy::to_json() const {
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& t : trials)
        ts.push_back({{"seed", t.seed},
                      {"field", t.field.to_json()},
                      {"coarse", t.coarse.to_json()},
                      {"fine", t.fine.to_json()},
                      {"passed", t.passed}});
    return {{"coarse_n", coarse_n}, {"fine_n", fine_n},         {"box", box},   {"worst_coarse", worst_coarse},
            {"worst_fine", worst_fine}, {"passed", passed}, {"trials", ts}};
}

DiamagneticStudy diamagnetic_refinement_study(std::size_t trials, std::uint64_t seed, double box, std::size_t coarse_n,
                                              double factor) {
    DiamagneticStudy st;
    st.coarse_n = coarse_n;
    st.fine_n = 2 * coarse_n;
    st.box = box;
    st.trials.resize(trials);
    const Grid2D gc(box, coarse_n), gf(box, 2 * coarse_n);
    parallel_for(trials, [&](std::size_t i) {
        auto& t = st.trials[i];
        t.seed = seed + i;
        t.field = random_smooth_field(t.seed);
        t.coarse = diamagnetic_check(WaveFunction::random(gc, t.seed), t.field.sample(gc));
        t.fine = diamagnetic_check(WaveFunction::random(gf, t.seed), t.field.sample(gf));
        const double vc = t.coarse.violation(), vf = t.fine.violation();
        t.passed = (vc == 0.0 && vf == 0.0) || vf * factor <= vc;
    });
    st.passed = true;
    for (const auto& t : st.trials) {
        st.worst_coarse = std::max(st.worst_coarse, t.coarse.violation());
        st.worst_fine = std::max(st.worst_fine, t.fine.violation());
        st.passed = st.passed && t.passed;
    }
    return st;
}

// --------------------------------------------------------- magnetic bound

nlohmann::json MagneticBoundResult::to_json() const {
    return {{"magnetic", magnetic}, {"gradient", gradient}, {"norm", norm}, {"ratio", ratio},
            {"scaled_ratio", scaled_ratio()}};
}

struct MagneticBoundChecker::Impl {
    FreeSpaceConvolver conv;
    SpectralOps ops;
    Fft2D fft;
    Impl(const Grid2D& g, double R)
        : conv(g,
               {[k = SmearedKernel(R)](Vec2 x) { return k.grad_perp(x).x; },
                [k = SmearedKernel(R)](Vec2 x) { return k.grad_perp(x).y; }}),
          ops(g), fft(g.n()) {}
};

MagneticBoundChecker::MagneticBoundChecker(const Grid2D& grid)
    : grid_(grid), R_(2.0 * grid.spacing()), impl_(std::make_unique<Impl>(grid, 2.0 * grid.spacing())) {}

MagneticBoundChecker::~MagneticBoundChecker() = default;

MagneticBoundResult MagneticBoundChecker::check(const WaveFunction& u) {
    if (!(u.grid() == grid_))
        throw DomainError("wave function lives on a different grid");
    const std::size_t n = grid_.n();
    ComplexField spec(grid_.size());
    impl_->fft.forward(u.values(), spec);
    long double total = 0, high = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const double e = std::norm(spec[a * n + b]);
            total += e;
            if (std::max(std::min(a, n - a), std::min(b, n - b)) > n / 3)
                high += e;
        }
    if (total > 0 && high > 1e-8L * total)
        throw ResolutionError("wave function has features below 2h");

    RealField rho(grid_.size()), mod(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        rho[i] = std::norm(u[i]);
        mod[i] = std::abs(u[i]);
    }
    const auto s = impl_->conv.forward(rho);
    auto acc = impl_->conv.zero_spectrum();
    impl_->conv.accumulate(acc, 0, s);
    const RealField ax = impl_->conv.inverse(acc);
    acc = impl_->conv.zero_spectrum();
    impl_->conv.accumulate(acc, 1, s);
    const RealField ay = impl_->conv.inverse(acc);
    long double mag = 0, grad = 0;
    for (std::size_t i = 0; i < grid_.size(); ++i)
        mag += (static_cast<long double>(ax[i]) * ax[i] + static_cast<long double>(ay[i]) * ay[i]) * rho[i];
    for (int axis = 0; axis < 2; ++axis) {
        const RealField dm = impl_->ops.derivative(std::span<const double>(mod), axis);
        for (double d : dm)
            grad += static_cast<long double>(d) * d;
    }
    MagneticBoundResult r;
    r.magnetic = static_cast<double>(mag) * grid_.cell_area();
    r.gradient = static_cast<double>(grad) * grid_.cell_area();
    r.norm = std::sqrt(u.norm_squared());
    r.ratio = r.magnetic / r.gradient;
    return r;
}

MagneticBoundResult magnetic_bound_check(const WaveFunction& u) {
    MagneticBoundChecker c(u.grid());
    return c.check(u);
}

// ------------------------------------------------------ two-body form ratios

nlohmann::json TwoBodyTestFunction::to_json() const { return {{"first", first.to_json()}, {"second", second.to_json()}}; }

std::vector<TwoBodyTestFunction> two_body_family(const std::string& family, std::size_t members, std::uint64_t seed) {
    static const std::vector<std::string> kinds = {"gaussian", "gaussian_phase", "concentrated"};
    if (family != "mixed" && std::find(kinds.begin(), kinds.end(), family) == kinds.end())
        throw DomainError("unknown two-body family '" + family + "'");
    std::vector<TwoBodyTestFunction> out;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < members; ++i) {
        const std::string kind = family == "mixed" ? kinds[i % kinds.size()] : family;
        auto rng = keyed_rng(seed, 0x2b0, i);
        auto sym = [&](double a) { return a * (2.0 * unit(rng) - 1.0); };
        auto log_uniform = [&](double lo, double hi) { return lo * std::exp(std::log(hi / lo) * unit(rng)); };
        auto factor = [&] {
            const bool conc = kind == "concentrated";
            const double mspan = conc ? 0.3 : 1.0;
            const double lo = conc ? 0.02 : 0.15, hi = conc ? 0.15 : 1.0;
            const Eigen::Vector2d m(sym(mspan), sym(mspan));
            const double s1 = log_uniform(lo, hi), s2 = log_uniform(lo, hi);
            const double th = kPi * unit(rng);
            Eigen::Vector2d k = Eigen::Vector2d::Zero();
            if (kind != "gaussian")
                k = Eigen::Vector2d(sym(2.0), sym(2.0));
            return factor_from_widths(m, s1, s2, th, k);
        };
        TwoBodyTestFunction f;
        f.first = factor();
        f.second = factor();
        out.push_back(f);
    }
    return out;
}

namespace {

// Panel boundaries covering [a, b] with breakpoints and a maximal width.
std::vector<double> panel_edges(double a, double b, std::vector<double> breaks, double width) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> edges;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double lo = std::max(a, breaks[i]), hi = std::min(b, breaks[i + 1]);
        if (!(hi > lo))
            continue;
        const std::size_t m = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil((hi - lo) / width)), 1, 400);
        for (std::size_t k = 0; k < m; ++k)
            edges.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m));
    }
    edges.push_back(b);
    return edges;
}

template <class F>
void gl_nodes(const std::vector<double>& edges, F&& f) {
    const auto& L = legendre();
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double lo = edges[p], hi = edges[p + 1];
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        for (std::size_t j = 0; j < L.x.size(); ++j)
            f(c + h * L.x[j], h * L.w[j]);
    }
}

} // namespace

namespace {

FormRatio form_ratio_impl(const TwoBodyTestFunction& f, double R, const ExternalField& field, bool with_mixed) {
    const SmearedKernel kernel(R);
    const Eigen::Matrix2d S1 = f.first.covariance(), S2 = f.second.covariance();
    const Eigen::Matrix2d C = S1 + S2;
    const Eigen::Matrix2d Ci = C.inverse();
    const Eigen::Vector2d mu = f.first.mean - f.second.mean;
    const Eigen::Matrix2d gain = S1 * Ci;
    const Eigen::Matrix2d Scond = S1 - gain * S1;
    const double norm_c = 1.0 / (2.0 * kPi * std::sqrt(C.determinant()));
    const bool linear_field = field.bumps().empty();

    FormRatio out;
    const Eigen::Vector2d k1 = f.first.k;
    const double kin_field = gaussian_expectation(f.first.mean, S1, 10, [&](const Eigen::Vector2d& x) {
        return (k1 + to_eigen(field.A(to_vec(x)))).squaredNorm();
    });
    out.denominator = 0.5 * f.first.Q.trace() + kin_field + 1.0;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(C);
    const double smin = std::sqrt(es.eigenvalues()(0)), smax = std::sqrt(es.eigenvalues()(1));
    const double reach = 9.0 * smax;
    const double m = mu.norm();
    double rlo = 0.0, rhi = m + reach, t0 = 0.0, t1 = 2.0 * kPi;
    if (m > reach) {
        rlo = m - reach;
        const double half = std::asin(reach / m);
        const double c = std::atan2(mu.y(), mu.x());
        t0 = c - half;
        t1 = c + half;
    }
    const auto redges = panel_edges(rlo, rhi, {R, 2.0 * R}, 2.0 * smin);
    const auto tedges = panel_edges(t0, t1, {}, 2.0 * smin / std::max(rhi, smin));

    long double sing = 0, mix = 0;
    gl_nodes(redges, [&](double r, double wr) {
        const double v = kernel.v(r);
        gl_nodes(tedges, [&](double t, double wt) {
            const Eigen::Vector2d d(r * std::cos(t), r * std::sin(t));
            const Eigen::Vector2d e = d - mu;
            const double dens = norm_c * std::exp(-0.5 * e.dot(Ci * e));
            const double w = wr * wt * r * dens;
            if (w == 0.0)
                return;
            sing += w * v * v;
            if (!with_mixed || r == 0.0)
                return;
            const Eigen::Vector2d K = (v / r) * Eigen::Vector2d(-d.y(), d.x());
            const Eigen::Vector2d xm = f.first.mean + gain * e;
            Eigen::Vector2d a;
            if (linear_field)
                a = to_eigen(field.A(to_vec(xm)));
            else
                a = gaussian_expectation(xm, Scond, 4,
                                         [&](const Eigen::Vector2d& x) -> Eigen::Vector2d { return to_eigen(field.A(to_vec(x))); });
            mix += w * K.dot(k1 + a);
        });
    });
    out.singular = static_cast<double>(sing);
    out.mixed = std::abs(2.0 * static_cast<double>(mix));
    return out;
}

} // namespace

FormRatio two_body_form_ratio(const TwoBodyTestFunction& f, double R, const ExternalField& field) {
    return form_ratio_impl(f, R, field, true);
}

nlohmann::json FormScan::to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows)
        rs.push_back({{"R", r.R},
                      {"sup_singular_ratio", r.sup_singular},
                      {"singular_witness", r.singular_witness},
                      {"sup_mixed_ratio", r.sup_mixed},
                      {"mixed_witness", r.mixed_witness},
                      {"sup_v_squared", r.sup_v_squared}});
    return {{"family", family},
            {"seed", seed},
            {"members", members},
            {"field", field.to_json()},
            {"rows", rs},
            {"singular_slope", singular_slope},
            {"mixed_slope", mixed_slope},
            {"hard_bound_holds", hard_bound_holds},
            {"warnings", warnings}};
}

namespace {

std::vector<std::vector<FormRatio>> form_table(const std::vector<TwoBodyTestFunction>& fs,
                                               const std::vector<double>& R_list, const ExternalField& field,
                                               bool singular_only) {
    std::vector<std::vector<FormRatio>> table(R_list.size(), std::vector<FormRatio>(fs.size()));
    parallel_for(R_list.size() * fs.size(), [&](std::size_t task) {
        const std::size_t r = task / fs.size(), i = task % fs.size();
        table[r][i] = form_ratio_impl(fs[i], R_list[r], field, !singular_only);
    });
    return table;
}

} // namespace

FormScan quadratic_form_ratios(const std::string& family, const std::vector<double>& R_list, std::uint64_t seed,
                               const ExternalField& field, std::size_t members) {
    if (R_list.size() < 2)
        throw DomainError("form-ratio scan needs at least two radii");
    if (members == 0)
        throw DomainError("form-ratio scan needs a nonempty family");
    FormScan scan;
    scan.family = family;
    scan.seed = seed;
    scan.members = members;
    scan.field = field;
    scan.functions = two_body_family(family, members, seed);
    const auto table = form_table(scan.functions, R_list, field, false);

    std::vector<double> inv_R, sing, mixed;
    for (std::size_t r = 0; r < R_list.size(); ++r) {
        FormRow row;
        row.R = R_list[r];
        const double sv = SmearedKernel(row.R).sup_v();
        row.sup_v_squared = sv * sv;
        for (std::size_t i = 0; i < members; ++i) {
            const auto& fr = table[r][i];
            if (fr.singular_ratio() > row.sup_singular) {
                row.sup_singular = fr.singular_ratio();
                row.singular_witness = i;
            }
            if (fr.mixed_ratio() > row.sup_mixed) {
                row.sup_mixed = fr.mixed_ratio();
                row.mixed_witness = i;
            }
        }
        if (row.sup_singular > row.sup_v_squared * (1.0 + 1e-9))
            scan.hard_bound_holds = false;
        inv_R.push_back(1.0 / row.R);
        sing.push_back(row.sup_singular);
        mixed.push_back(row.sup_mixed);
        scan.rows.push_back(row);
    }
    scan.singular_slope = loglog_slope(inv_R, sing);
    if (std::all_of(mixed.begin(), mixed.end(), [](double x) { return x > 0.0; }))
        scan.mixed_slope = loglog_slope(inv_R, mixed);
    else
        scan.warnings.push_back("mixed ratio vanishes on the family; slope undefined");

    const auto other = two_body_family(family, members, seed + 1);
    const auto check = form_table(other, R_list, field, true);
    for (std::size_t r = 0; r < R_list.size(); ++r) {
        double s = 0.0;
        for (const auto& fr : check[r])
            s = std::max(s, fr.singular_ratio());
        const double a = scan.rows[r].sup_singular;
        const double spread = std::abs(a - s) / std::max(a, s);
        if (spread > 0.25)
            scan.warnings.push_back("family too narrow: singular sup differs by " + std::to_string(spread) +
                                    " between seeds at R=" + std::to_string(R_list[r]));
    }
    return scan;
}

// ----------------------------------------------------------------- reports

nlohmann::json LemmaReport::to_json() const {
    nlohmann::json es = nlohmann::json::array();
    const LemmaEntry* worst = nullptr;
    for (const auto& e : entries) {
        es.push_back({{"regime", e.regime},
                      {"R", e.R},
                      {"empirical_constant", e.empirical_constant},
                      {"witness", e.witness},
                      {"sample_count", e.sample_count},
                      {"seed", e.seed}});
        if (!worst || e.empirical_constant > worst->empirical_constant)
            worst = &e;
    }
    nlohmann::json j = {{"lemma_id", lemma_id}, {"statement", statement}, {"scope", scope},
                        {"passed", passed},     {"entries", es},          {"details", details}};
    if (worst) {
        j["regime"] = worst->regime;
        j["R"] = worst->R;
        j["empirical_constant"] = worst->empirical_constant;
        j["witness"] = worst->witness;
        j["sample_count"] = worst->sample_count;
        j["seed"] = worst->seed;
    }
    return j;
}

} // namespace anyon
