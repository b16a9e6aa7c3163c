#include "anyon/afm_solver.hpp"

#include "anyon/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace anyon {

namespace {

constexpr double kPi = std::numbers::pi;

double real_inner(const Grid2D& g, std::span<const cplx> a, std::span<const cplx> b) { return inner(g, a, b).real(); }

enum KernelId : std::size_t { kKx = 0, kKy = 1, kV2 = 2, kChi = 3 };

// k_N^2 sum over both axes of |P u|^2, with P the projector onto the Nyquist
// mode along each grid line; adds k_N^2 P u to G when G is nonempty.
double nyquist_energy(const Grid2D& g, std::span<const cplx> u, std::span<cplx> G) {
    const std::size_t n = g.n();
    const double kn = kPi / g.spacing();
    const double k2 = kn * kn;
    long double e = 0.0L;
    for (int axis = 0; axis < 2; ++axis)
        for (std::size_t line = 0; line < n; ++line) {
            auto at = [&](std::size_t j) { return axis == 0 ? j * n + line : line * n + j; };
            cplx c = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                c += (j % 2 ? -1.0 : 1.0) * u[at(j)];
            c /= static_cast<double>(n);
            e += static_cast<long double>(n) * std::norm(c);
            if (!G.empty())
                for (std::size_t j = 0; j < n; ++j)
                    G[at(j)] += k2 * (j % 2 ? -1.0 : 1.0) * c;
        }
    return k2 * static_cast<double>(e);
}

} // namespace

nlohmann::json FieldConfig::to_json() const {
    return {{"grid", {{"L", grid.box()}, {"n", grid.n()}}},
            {"field", field.to_json()},
            {"trap", trap.to_json()},
            {"beta", beta},
            {"R", R}};
}

WaveFunction::WaveFunction(const Grid2D& grid, ComplexField values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw DomainError("wave function size does not match the grid");
}

void WaveFunction::normalize() {
    const double n2 = norm_squared();
    if (!(n2 > 0.0))
        throw DomainError("cannot normalize the zero wave function");
    const double s = 1.0 / std::sqrt(n2);
    for (auto& z : values_) z *= s;
}

void WaveFunction::fix_phase() {
    std::size_t peak = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double a = std::norm(values_[i]);
        if (a > best) {
            best = a;
            peak = i;
        }
    }
    if (best <= 0.0)
        return;
    const cplx phase = std::conj(values_[peak]) / std::abs(values_[peak]);
    for (auto& z : values_) z *= phase;
    values_[peak] = cplx(values_[peak].real(), 0.0);
}

WaveFunction WaveFunction::conj() const {
    ComplexField c(values_.size());
    std::transform(values_.begin(), values_.end(), c.begin(), [](cplx z) { return std::conj(z); });
    return WaveFunction(grid_, std::move(c));
}

WaveFunction WaveFunction::gaussian(const Grid2D& grid, double length, Vec2 center) {
    ComplexField v(grid.size());
    const double inv = 1.0 / (2.0 * length * length);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec2 d = grid.point(i) - center;
        v[i] = std::exp(-dot(d, d) * inv);
    }
    WaveFunction u(grid, std::move(v));
    u.normalize();
    return u;
}

WaveFunction WaveFunction::trap_adapted(const FieldConfig& cfg) {
    const double c = cfg.trap.c(), s = cfg.trap.s();
    double length;
    if (s == 2.0) {
        const double omega = std::sqrt(c + 0.25 * cfg.field.B0() * cfg.field.B0());
        length = 1.0 / std::sqrt(omega);
    } else {
        length = std::pow(c, -1.0 / (s + 2.0));
    }
    return gaussian(cfg.grid, length);
}

WaveFunction WaveFunction::random(const Grid2D& grid, std::uint64_t seed, double envelope) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    constexpr int modes = 4;
    struct Mode {
        double kx, ky, amp, phase, ph_amp;
    };
    std::vector<Mode> ms;
    for (int k = 0; k < modes; ++k) {
        Mode m;
        m.kx = 1.5 * unit(rng);
        m.ky = 1.5 * unit(rng);
        m.amp = 0.4 * unit(rng);
        m.phase = kPi * unit(rng);
        m.ph_amp = 1.5 * unit(rng);
        ms.push_back(m);
    }
    const Vec2 centre{0.3 * unit(rng), 0.3 * unit(rng)};
    const double width = envelope * (1.0 + 0.25 * unit(rng));
    ComplexField v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec2 x = grid.point(i);
        const Vec2 d = x - centre;
        double amp = 0.0, ph = 0.0;
        for (const auto& m : ms) {
            const double arg = m.kx * x.x + m.ky * x.y + m.phase;
            amp += m.amp * std::cos(arg);
            ph += m.ph_amp * std::sin(arg);
        }
        v[i] = std::polar(std::exp(amp - dot(d, d) / (2.0 * width * width)), ph);
    }
    WaveFunction u(grid, std::move(v));
    u.normalize();
    return u;
}

RealField density(const WaveFunction& u) {
    RealField rho(u.values().size());
    std::transform(u.values().begin(), u.values().end(), rho.begin(), [](cplx z) { return std::norm(z); });
    return rho;
}

nlohmann::json EnergyBreakdown::to_json() const {
    return {{"kinetic", kinetic}, {"potential", potential}, {"mixed", mixed},
            {"quartic", quartic}, {"total", total},         {"direct_total", direct_total}};
}

AverageFieldFunctional::AverageFieldFunctional(const FieldConfig& cfg) : cfg_(cfg) {
    const Grid2D& g = cfg_.grid;
    if (cfg_.R < 2.0 * g.spacing())
        throw ResolutionError("smearing radius R = " + std::to_string(cfg_.R) + " is below two grid spacings (h = " +
                              std::to_string(g.spacing()) + ")");
    Ae_ = cfg_.field.sample(g);
    V_ = cfg_.trap.sample(g);
    Be_ = cfg_.field.sample_B(g);
    ops_ = std::make_unique<SpectralOps>(g);
    fft_ = std::make_unique<Fft2D>(g.n());
    work_.resize(g.size());
    auto kernel = std::make_shared<SmearedKernel>(cfg_.R);
    std::vector<FreeSpaceConvolver::KernelFn> ks{
        [kernel](Vec2 x) { return kernel->grad_perp(x).x; },
        [kernel](Vec2 x) { return kernel->grad_perp(x).y; },
        [kernel](Vec2 x) {
            const double v = kernel->v(norm(x));
            return v * v;
        },
        [kernel](Vec2 x) { return kernel->chi_R(norm(x)); },
    };
    conv_ = std::make_unique<FreeSpaceConvolver>(g, std::move(ks));
}

AverageFieldFunctional::~AverageFieldFunctional() = default;

VectorField AverageFieldFunctional::self_potential(std::span<const double> rho) {
    const auto s = conv_->forward(rho);
    VectorField A;
    auto acc = conv_->zero_spectrum();
    conv_->accumulate(acc, kKx, s);
    A.x = conv_->inverse(acc);
    acc = conv_->zero_spectrum();
    conv_->accumulate(acc, kKy, s);
    A.y = conv_->inverse(acc);
    return A;
}

RealField AverageFieldFunctional::smeared_density(std::span<const double> rho) { return conv_->apply(kChi, rho); }

double AverageFieldFunctional::singular_pair_term(std::span<const double> rho) {
    const RealField c = conv_->apply(kV2, rho);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * rho[i];
    return s * grid().cell_area();
}

VectorField AverageFieldFunctional::current(const WaveFunction& u, const VectorField& A_tot) {
    const auto du = ops_->gradient(u.values());
    VectorField j(u.values().size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const cplx c = std::conj(u[i]);
        const double rho = std::norm(u[i]);
        j.x[i] = (c * du[0][i]).imag() + A_tot.x[i] * rho;
        j.y[i] = (c * du[1][i]).imag() + A_tot.y[i] * rho;
    }
    return j;
}

ComplexField AverageFieldFunctional::magnetic_hamiltonian(std::span<const cplx> u, const VectorField& A) {
    const std::size_t m = u.size();
    ComplexField out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = V_[i] * u[i];
    nyquist_energy(grid(), u, out);
    const RealField* comps[2] = {&A.x, &A.y};
    ComplexField p(m);
    for (int axis = 0; axis < 2; ++axis) {
        const RealField& a = *comps[axis];
        const auto d = ops_->derivative(u, axis);
        for (std::size_t i = 0; i < m; ++i) p[i] = cplx(d[i].imag(), -d[i].real()) + a[i] * u[i];
        const auto d2 = ops_->derivative(p, axis);
        for (std::size_t i = 0; i < m; ++i) out[i] += cplx(d2[i].imag(), -d2[i].real()) + a[i] * p[i];
    }
    return out;
}

EnergyBreakdown AverageFieldFunctional::energy_and_gradient(const WaveFunction& u, ComplexField& G) {
    const bool want_gradient = !G.empty();
    const Grid2D& g = grid();
    const std::size_t m = g.size();
    const double w = g.cell_area();
    const double beta = cfg_.beta;
    const RealField rho = density(u);

    VectorField AR(m);
    if (beta != 0.0)
        AR = self_potential(rho);

    EnergyBreakdown e;
    long double pot = 0.0L;
    for (std::size_t i = 0; i < m; ++i) pot += V_[i] * rho[i];
    e.potential = w * static_cast<double>(pot);

    const RealField* Ae[2] = {&Ae_.x, &Ae_.y};
    const RealField* Ar[2] = {&AR.x, &AR.y};
    std::array<RealField, 2> jtot;
    long double kin = 0.0L, mixed = 0.0L, quart = 0.0L, direct = 0.0L;
    ComplexField q(m);
    if (want_gradient)
        for (std::size_t i = 0; i < m; ++i) G[i] = V_[i] * u[i];
    for (int axis = 0; axis < 2; ++axis) {
        const auto d = ops_->derivative(u.values(), axis);
        const RealField& ae = *Ae[axis];
        const RealField& ar = *Ar[axis];
        RealField& jt = jtot[axis];
        if (want_gradient)
            jt.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const cplx p = cplx(d[i].imag(), -d[i].real()) + ae[i] * u[i];
            kin += std::norm(p);
            const double je = (std::conj(u[i]) * p).real();
            mixed += ar[i] * je;
            quart += ar[i] * ar[i] * rho[i];
            q[i] = p + beta * ar[i] * u[i];
            direct += std::norm(q[i]);
            if (want_gradient)
                jt[i] = je + beta * ar[i] * rho[i];
        }
        if (want_gradient) {
            const auto d2 = ops_->derivative(q, axis);
            for (std::size_t i = 0; i < m; ++i)
                G[i] += cplx(d2[i].imag(), -d2[i].real()) + (ae[i] + beta * ar[i]) * q[i];
        }
    }
    const double nyq = nyquist_energy(g, u.values(), want_gradient ? std::span<cplx>(G) : std::span<cplx>());
    e.kinetic = w * (static_cast<double>(kin) + nyq);
    e.mixed = 2.0 * beta * w * static_cast<double>(mixed);
    e.quartic = beta * beta * w * static_cast<double>(quart);
    e.total = e.kinetic + e.potential + e.mixed + e.quartic;
    e.direct_total = w * (static_cast<double>(direct) + nyq) + e.potential;

    if (want_gradient && beta != 0.0) {
        auto acc = conv_->zero_spectrum();
        conv_->accumulate(acc, kKx, conv_->forward(jtot[0]));
        conv_->accumulate(acc, kKy, conv_->forward(jtot[1]));
        const RealField phi = conv_->inverse(acc);
        for (std::size_t i = 0; i < m; ++i) G[i] += -2.0 * beta * phi[i] * u[i];
    }
    return e;
}

EnergyBreakdown AverageFieldFunctional::energy(const WaveFunction& u) {
    ComplexField none;
    return energy_and_gradient(u, none);
}

ComplexField AverageFieldFunctional::gradient(const WaveFunction& u) {
    ComplexField G(u.values().size());
    energy_and_gradient(u, G);
    return G;
}

double AverageFieldFunctional::lower_bound(const WaveFunction& u) {
    const RealField rho = density(u);
    RealField smeared(rho.size(), 0.0);
    if (cfg_.beta != 0.0)
        smeared = smeared_density(rho);
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) s += (Be_[i] + 2.0 * kPi * cfg_.beta * smeared[i]) * rho[i];
    return std::abs(s * grid().cell_area());
}

double AverageFieldFunctional::angular_momentum(const WaveFunction& u) {
    const auto du = ops_->gradient(u.values());
    double s = 0.0;
    for (std::size_t i = 0; i < du[0].size(); ++i) {
        const Vec2 x = grid().point(i);
        const cplx Lu = cplx(0.0, -1.0) * (x.x * du[1][i] - x.y * du[0][i]);
        s += (std::conj(u[i]) * Lu).real();
    }
    return s * grid().cell_area();
}

ComplexField AverageFieldFunctional::precondition(std::span<const cplx> u, double shift) {
    const std::size_t n = grid().n();
    fft_->forward(u, work_);
    const double nyq = kPi / grid().spacing();
    auto ksq = [&](std::size_t m) { return m == n / 2 ? nyq * nyq : ops_->wavenumber(m) * ops_->wavenumber(m); };
    for (std::size_t a = 0; a < n; ++a) {
        const double ka2 = ksq(a);
        for (std::size_t b = 0; b < n; ++b) {
            work_[a * n + b] /= (ka2 + ksq(b) + shift) * static_cast<double>(n * n);
        }
    }
    ComplexField out(u.size());
    fft_->backward(work_, out);
    return out;
}

nlohmann::json Schedule::to_json() const {
    return {{"step", step},
            {"max_iterations", max_iterations},
            {"tol", tol},
            {"armijo", armijo},
            {"preconditioner_shift", preconditioner_shift},
            {"trace_stride", trace_stride}};
}

Schedule Schedule::from_json(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object())
        throw ConfigError(path, "expected an object");
    Schedule s;
    for (const auto& [key, val] : j.items()) {
        const std::string kp = path + "/" + key;
        if (key == "step" || key == "tol" || key == "armijo" || key == "preconditioner_shift") {
            if (!val.is_number())
                throw ConfigError(kp, "expected a number");
            const double x = val.get<double>();
            if (!(x > 0.0))
                throw ConfigError(kp, "must be positive");
            if (key == "step")
                s.step = x;
            else if (key == "tol")
                s.tol = x;
            else if (key == "armijo") {
                if (x >= 0.5)
                    throw ConfigError(kp, "must lie in (0, 0.5)");
                s.armijo = x;
            } else
                s.preconditioner_shift = x;
        } else if (key == "max_iterations" || key == "trace_stride") {
            if (!val.is_number_integer() || val.get<long long>() < 1)
                throw ConfigError(kp, "expected a positive integer");
            (key == "max_iterations" ? s.max_iterations : s.trace_stride) = val.get<std::size_t>();
        } else {
            throw ConfigError(kp, "unknown key \"" + key + "\"");
        }
    }
    return s;
}

nlohmann::json MinimizeResult::to_json() const {
    return {{"energy", energy.to_json()},
            {"lambda", lambda},
            {"residual", residual},
            {"iterations", iterations},
            {"converged", converged},
            {"flags", flags},
            {"angular_momentum", angular_momentum}};
}

MinimizeResult minimize(AverageFieldFunctional& F, const WaveFunction& init, const Schedule& sched) {
    const Grid2D& g = F.grid();
    if (!(init.grid() == g))
        throw DomainError("initial state lives on a different grid");
    const std::size_t m = g.size();
    const double shift = sched.preconditioner_shift;

    MinimizeResult res;
    WaveFunction u = init;
    u.normalize();
    ComplexField G(m), d(m), Pu, d_prev, u_prev;
    EnergyBreakdown E = F.energy_and_gradient(u, G);
    res.trace.push_back(E.total);

    double tau = sched.step;
    std::size_t it = 0;
    for (;; ++it) {
        const double lambda = real_inner(g, u.values(), G);
        ComplexField r(m);
        for (std::size_t i = 0; i < m; ++i) r[i] = G[i] - lambda * u[i];
        res.residual = std::sqrt(l2_norm_squared(g, r));
        res.lambda = lambda;
        if (res.residual <= sched.tol) {
            res.converged = true;
            break;
        }
        if (it >= sched.max_iterations) {
            res.flags.push_back("iteration_cap");
            break;
        }

        const ComplexField PG = F.precondition(G, shift);
        Pu = F.precondition(u.values(), shift);
        const double mu = real_inner(g, u.values(), PG) / real_inner(g, u.values(), Pu);
        for (std::size_t i = 0; i < m; ++i) d[i] = PG[i] - mu * Pu[i];
        const double slope = 2.0 * real_inner(g, G, d);

        if (it > 0) {
            ComplexField s(m), y(m);
            for (std::size_t i = 0; i < m; ++i) {
                s[i] = u[i] - u_prev[i];
                y[i] = d[i] - d_prev[i];
            }
            const double sy = real_inner(g, s, y);
            const double ss = real_inner(g, s, s);
            if (sy > 0.0 && std::isfinite(ss / sy))
                tau = std::clamp(ss / sy, 1e-6, 1e6);
            else
                tau = std::min(2.0 * tau, 1e6);
        }

        const double scale = std::abs(E.kinetic) + std::abs(E.potential) + std::abs(E.mixed) + std::abs(E.quartic);
        const double floor = 16.0 * std::numeric_limits<double>::epsilon() * scale;
        WaveFunction trial(g, ComplexField(m));
        EnergyBreakdown Et;
        ComplexField Gt(m);
        bool accepted = false;
        for (int bt = 0; bt < 80; ++bt) {
            for (std::size_t i = 0; i < m; ++i) trial.values()[i] = u[i] - tau * d[i];
            trial.normalize();
            Et = F.energy_and_gradient(trial, Gt);
            const double predicted = sched.armijo * tau * slope;
            if (Et.total <= E.total - predicted) {
                accepted = true;
                break;
            }
            // Below the energy's rounding floor the decrease is invisible;
            // take the step when it shrinks the projected gradient instead.
            if (predicted < floor && Et.total <= E.total + floor) {
                const double lt = real_inner(g, trial.values(), Gt);
                long double acc = 0.0L;
                for (std::size_t i = 0; i < m; ++i) acc += std::norm(Gt[i] - lt * trial[i]);
                if (std::sqrt(g.cell_area() * static_cast<double>(acc)) < res.residual) {
                    accepted = true;
                    break;
                }
            }
            tau *= 0.5;
        }
        if (!accepted) {
            if (res.residual <= 100.0 * sched.tol) {
                res.flags.push_back("stagnated_at_roundoff");
                break;
            }
            throw ConvergenceError("backtracking step underflow at iteration " + std::to_string(it));
        }
        u_prev = u.values();
        d_prev = d;
        u = std::move(trial);
        G = std::move(Gt);
        E = Et;
        if ((it + 1) % sched.trace_stride == 0)
            res.trace.push_back(E.total);
    }
    res.iterations = it;
    u.fix_phase();
    res.energy = F.energy(u);
    res.angular_momentum = F.angular_momentum(u);
    res.u = std::move(u);
    if (res.trace.back() != res.energy.total && it % sched.trace_stride != 0)
        res.trace.push_back(res.energy.total);
    return res;
}

MinimizeResult minimize(const FieldConfig& cfg, const WaveFunction& init, const Schedule& schedule) {
    AverageFieldFunctional F(cfg);
    return minimize(F, init, schedule);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw DomainError("log-log fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw DomainError("log-log fit needs positive data");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0)
        throw DomainError("log-log fit with coincident abscissae");
    return (n * sxy - sx * sy) / den;
}

nlohmann::json ConvergenceStudy::to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows)
        rs.push_back({{"R", r.R},
                      {"energy", r.energy},
                      {"diff", r.diff},
                      {"iterations", r.iterations},
                      {"converged", r.converged},
                      {"flags", r.flags}});
    return {{"rows", rs}, {"slope", slope}, {"monotone_diffs", monotone_diffs}, {"flags", flags}};
}

ConvergenceStudy convergence_study(const FieldConfig& cfg, const std::vector<double>& R_list, const Schedule& schedule,
                                   std::optional<WaveFunction> init) {
    ConvergenceStudy st;
    for (std::size_t k = 1; k < R_list.size(); ++k)
        if (!(R_list[k] < R_list[k - 1]))
            throw DomainError("R list must be strictly decreasing");
    WaveFunction u = init ? *init : WaveFunction::trap_adapted(cfg);
    std::vector<std::size_t> valid;
    for (double R : R_list) {
        ConvergenceRow row;
        row.R = R;
        FieldConfig c = cfg;
        c.R = R;
        try {
            AverageFieldFunctional F(c);
            MinimizeResult mr = minimize(F, u, schedule);
            row.energy = mr.energy.total;
            row.iterations = mr.iterations;
            row.converged = mr.converged;
            row.flags = mr.flags;
            u = mr.u;
            valid.push_back(st.rows.size());
        } catch (const Error& e) {
            row.flags.push_back(e.what());
            st.flags.push_back("R=" + std::to_string(R) + ": " + e.what());
        }
        st.rows.push_back(std::move(row));
    }
    if (valid.empty())
        return st;
    const double Emin = st.rows[valid.back()].energy;
    std::vector<double> xs, ys;
    for (std::size_t k : valid) {
        st.rows[k].diff = std::abs(st.rows[k].energy - Emin);
        if (k != valid.back() && st.rows[k].diff > 0.0) {
            xs.push_back(st.rows[k].R);
            ys.push_back(st.rows[k].diff);
        }
    }
    if (xs.size() >= 2)
        st.slope = loglog_slope(xs, ys);
    else
        st.flags.push_back("slope_undefined");
    st.monotone_diffs = true;
    for (std::size_t k = 1; k < ys.size(); ++k)
        if (!(ys[k] < ys[k - 1]))
            st.monotone_diffs = false;
    return st;
}

nlohmann::json ProductStateEnergy::to_json() const {
    return {{"one_body", one_body},     {"mixed", mixed}, {"three_body", three_body},
            {"singular", singular},     {"total", total}, {"three_body_coefficient", three_body_coefficient}};
}

ProductStateEnergy product_state_energy(AverageFieldFunctional& F, const WaveFunction& u, std::size_t N) {
    if (N < 2)
        throw DomainError("product state energy needs N >= 2");
    const double beta = F.config().beta;
    const RealField rho = density(u);
    const double Nd = static_cast<double>(N);

    ProductStateEnergy out;
    out.three_body_coefficient = (Nd - 2.0) / (Nd - 1.0);
    const EnergyBreakdown e = F.energy(u);
    if (beta == 0.0) {
        out.one_body = e.kinetic + e.potential;
        out.total = out.one_body;
        return out;
    }
    // e carries kinetic, potential, mixed and the N -> infinity quartic term
    out.one_body = e.kinetic + e.potential;
    out.mixed = e.mixed;
    out.three_body = out.three_body_coefficient * e.quartic;
    out.singular = beta * beta / (Nd - 1.0) * F.singular_pair_term(rho);
    out.total = out.one_body + out.mixed + out.three_body + out.singular;
    return out;
}

} // namespace anyon
