#include "anyon/fewbody_ed.hpp"

#include "anyon/error.hpp"

#include <algorithm>
#include <cmath>

namespace anyon {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd dense_from(const std::vector<double>& rowmajor, std::size_t n) {
    Eigen::MatrixXd M(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            M(i, j) = rowmajor[i * n + j];
    return M;
}

double euclid_norm(std::span<const cplx> v) {
    long double s = 0;
    for (const auto& z : v)
        s += std::norm(z);
    return std::sqrt(static_cast<double>(s));
}

} // namespace

// ------------------------------------------------------------------ states

TwoBodyState::TwoBodyState(const Grid2D& grid, ComplexField values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size() * grid_.size())
        throw DomainError("two-body state size does not match the grid");
}

TwoBodyState TwoBodyState::product(const WaveFunction& u, const WaveFunction& v) {
    if (!(u.grid() == v.grid()))
        throw DomainError("product of states on different grids");
    const std::size_t m = u.grid().size();
    ComplexField out(m * m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            out[a * m + b] = u[a] * v[b];
    return TwoBodyState(u.grid(), std::move(out));
}

double TwoBodyState::norm_squared() const {
    const double h2 = grid_.cell_area();
    return h2 * h2 * euclid_norm(values_) * euclid_norm(values_);
}

void TwoBodyState::normalize() {
    const double n2 = norm_squared();
    if (!(n2 > 0.0))
        throw DomainError("cannot normalize the zero two-body state");
    const double s = 1.0 / std::sqrt(n2);
    for (auto& z : values_)
        z *= s;
}

void exchange_symmetrize(const Grid2D& grid, std::span<cplx> psi) {
    const std::size_t m = grid.size();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            const cplx s = 0.5 * (psi[a * m + b] + psi[b * m + a]);
            psi[a * m + b] = s;
            psi[b * m + a] = s;
        }
}

void TwoBodyState::symmetrize() { exchange_symmetrize(grid_, values_); }

double TwoBodyState::exchange_asymmetry() const {
    const std::size_t m = grid_.size();
    double worst = 0.0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
            worst = std::max(worst, std::abs(values_[a * m + b] - values_[b * m + a]));
    return worst;
}

cplx TwoBodyState::inner(const TwoBodyState& o) const {
    std::complex<long double> s = 0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const cplx z = std::conj(values_[i]) * o.values_[i];
        s += std::complex<long double>(z.real(), z.imag());
    }
    const double h2 = grid_.cell_area();
    return cplx(static_cast<double>(s.real()), static_cast<double>(s.imag())) * (h2 * h2);
}

// -------------------------------------------------------------- Hamiltonian

TwoBodyHamiltonian::TwoBodyHamiltonian(const FieldConfig& cfg, std::size_t point_cap) : cfg_(cfg) {
    const Grid2D& g = cfg.grid;
    n_ = g.n();
    if (n_ > point_cap)
        throw DomainError("two-body grid of " + std::to_string(n_) + " points per axis exceeds the memory cap of " +
                          std::to_string(point_cap));
    if (cfg.beta != 0.0 && cfg.R < 2.0 * g.spacing())
        throw ResolutionError("smearing radius R=" + std::to_string(cfg.R) + " is below two grid spacings");
    const std::size_t m = g.size();
    dim_ = m * m;

    SpectralOps ops(g);
    D_ = dense_from(ops.derivative_matrix(), n_);
    D2_ = dense_from(ops.second_derivative_matrix(), n_);

    const VectorField Ae = cfg.field.sample(g);
    const RealField V = cfg.trap.sample(g);
    const SmearedKernel kernel(cfg.R);
    const std::size_t span = 2 * n_ - 1;
    std::vector<Vec2> K(span * span);
    for (std::size_t di = 0; di < span; ++di)
        for (std::size_t dj = 0; dj < span; ++dj) {
            const Vec2 d{(static_cast<double>(di) - static_cast<double>(n_ - 1)) * g.spacing(),
                         (static_cast<double>(dj) - static_cast<double>(n_ - 1)) * g.spacing()};
            K[di * span + dj] = kernel.grad_perp(d);
        }

    for (auto& f : a_)
        f.assign(dim_, 0.0);
    for (auto& f : a0_)
        f.assign(dim_, 0.0);
    for (auto& f : diag1_)
        f.assign(dim_, 0.0);
    diag_.assign(dim_, 0.0);
    t_.assign(dim_, {});
    s_.assign(dim_, {});
    r_.assign(dim_, {});

    const double beta = cfg.beta;
    for (std::size_t p1 = 0; p1 < m; ++p1) {
        const std::size_t i1 = p1 / n_, j1 = p1 % n_;
        for (std::size_t p2 = 0; p2 < m; ++p2) {
            const std::size_t i2 = p2 / n_, j2 = p2 % n_;
            const std::size_t idx = p1 * m + p2;
            const Vec2 k = K[(i1 + n_ - 1 - i2) * span + (j1 + n_ - 1 - j2)];
            a0_[0][idx] = Ae.x[p1];
            a0_[1][idx] = Ae.y[p1];
            a0_[2][idx] = Ae.x[p2];
            a0_[3][idx] = Ae.y[p2];
            a_[0][idx] = Ae.x[p1] + beta * k.x;
            a_[1][idx] = Ae.y[p1] + beta * k.y;
            a_[2][idx] = Ae.x[p2] - beta * k.x;
            a_[3][idx] = Ae.y[p2] - beta * k.y;
            diag1_[0][idx] = Ae.x[p1] * Ae.x[p1] + Ae.y[p1] * Ae.y[p1] + V[p1];
            diag1_[1][idx] = Ae.x[p2] * Ae.x[p2] + Ae.y[p2] * Ae.y[p2] + V[p2];
            double d = V[p1] + V[p2];
            for (int c = 0; c < 4; ++c)
                d += a_[c][idx] * a_[c][idx];
            diag_[idx] = d;
        }
    }
}

void TwoBodyHamiltonian::axis_apply(const Eigen::MatrixXd& M, int axis, std::span<const cplx> in,
                                    std::span<cplx> out) const {
    const auto n = static_cast<Eigen::Index>(n_);
    if (axis == 3) {
        const Eigen::Index rows = static_cast<Eigen::Index>(dim_ / n_);
        Eigen::Map<const RowMatC> X(in.data(), rows, n);
        Eigen::Map<RowMatC> Y(out.data(), rows, n);
        Y.noalias() = X * M.transpose().cast<cplx>();
        return;
    }
    std::size_t after = 1;
    for (int k = axis + 1; k < 4; ++k)
        after *= n_;
    const std::size_t before = dim_ / (after * n_);
    const auto* src = reinterpret_cast<const double*>(in.data());
    auto* dst = reinterpret_cast<double*>(out.data());
    const std::size_t slab = 2 * after * n_;
    for (std::size_t b = 0; b < before; ++b) {
        Eigen::Map<const RowMat> X(src + b * slab, n, static_cast<Eigen::Index>(2 * after));
        Eigen::Map<RowMat> Y(dst + b * slab, n, static_cast<Eigen::Index>(2 * after));
        Y.noalias() = M * X;
    }
}

void TwoBodyHamiltonian::particle_part(int particle, bool interacting, std::span<const cplx> in,
                                       std::span<cplx> out) {
    for (int c = 0; c < 2; ++c) {
        axis_apply(D2_, 2 * particle + c, in, t_);
        for (std::size_t i = 0; i < dim_; ++i)
            out[i] -= t_[i];
    }
    const bool first_order = !cfg_.field.is_zero() || (interacting && cfg_.beta != 0.0);
    if (!first_order)
        return;
    const auto& a = interacting ? a_ : a0_;
    for (int c = 0; c < 2; ++c) {
        const int axis = 2 * particle + c;
        const RealField& ac = a[static_cast<std::size_t>(axis)];
        for (std::size_t i = 0; i < dim_; ++i)
            s_[i] = ac[i] * in[i];
        axis_apply(D_, axis, s_, r_);
        axis_apply(D_, axis, in, t_);
        // -i (D a + a D) psi
        for (std::size_t i = 0; i < dim_; ++i) {
            const cplx z = r_[i] + ac[i] * t_[i];
            out[i] += cplx(z.imag(), -z.real());
        }
    }
}

void TwoBodyHamiltonian::apply(std::span<const cplx> in, std::span<cplx> out) {
    for (std::size_t i = 0; i < dim_; ++i)
        out[i] = diag_[i] * in[i];
    particle_part(0, true, in, out);
    particle_part(1, true, in, out);
}

void TwoBodyHamiltonian::apply_one_body(int particle, std::span<const cplx> in, std::span<cplx> out) {
    const auto& d = diag1_[static_cast<std::size_t>(particle)];
    for (std::size_t i = 0; i < dim_; ++i)
        out[i] = d[i] * in[i];
    particle_part(particle, false, in, out);
}

LinearMap TwoBodyHamiltonian::as_map() {
    return [this](std::span<const cplx> in, std::span<cplx> out) { apply(in, out); };
}

// ------------------------------------------------------------ ground state

nlohmann::json TwoBodyGround::to_json() const {
    return {{"energy", energy},
            {"matvecs", solver.matvecs},
            {"restarts", solver.restarts},
            {"residual", solver.residual},
            {"converged", solver.converged},
            {"symmetry_leak", solver.symmetry_leak},
            {"projection_residual", projection_residual},
            {"flags", flags}};
}

TwoBodyGround ground_energy_2body(const FieldConfig& cfg, double tol, const std::optional<WaveFunction>& start,
                                  std::size_t point_cap) {
    if (!(tol > 0.0))
        throw DomainError("eigenvalue tolerance must be positive");
    TwoBodyHamiltonian H(cfg, point_cap);
    WaveFunction seed = start ? *start : one_body_ground(cfg, 1e-10).state;
    if (!(seed.grid() == cfg.grid))
        throw DomainError("start state lives on a different grid");
    TwoBodyState init = TwoBodyState::product(seed, seed);

    LanczosOptions opt;
    opt.krylov_dim = 40;
    opt.max_matvecs = 6000;
    opt.tol = std::sqrt(tol);
    const Grid2D grid = cfg.grid;
    opt.project = [grid](std::span<cplx> v) { exchange_symmetrize(grid, v); };

    TwoBodyGround out;
    out.solver = lanczos_lowest(H.as_map(), std::move(init.values()), opt);
    if (!out.solver.converged)
        throw ConvergenceError("two-body Lanczos did not converge within " + std::to_string(opt.max_matvecs) +
                               " operator applications");
    out.energy = out.solver.value;
    ComplexField v = out.solver.vector;
    ComplexField p = v;
    exchange_symmetrize(grid, p);
    long double r = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        r += std::norm(p[i] - v[i]);
    out.projection_residual = std::sqrt(static_cast<double>(r)) / euclid_norm(v);
    if (out.projection_residual > 1e-8)
        throw Error("bosonic projection residual " + std::to_string(out.projection_residual) + " exceeds 1e-8");
    out.state = TwoBodyState(grid, std::move(v));
    out.state.normalize();
    return out;
}

// ---------------------------------------------------------- reduced density

ReducedDensity::ReducedDensity(const Grid2D& grid, Eigen::MatrixXcd matrix) : grid_(grid), gamma_(std::move(matrix)) {}

double ReducedDensity::trace() const { return gamma_.trace().real(); }

double ReducedDensity::hermiticity_error() const { return (gamma_ - gamma_.adjoint()).cwiseAbs().maxCoeff(); }

Eigen::VectorXd ReducedDensity::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gamma_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double ReducedDensity::fidelity(const WaveFunction& u) const {
    if (!(u.grid() == grid_))
        throw DomainError("state lives on a different grid");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(grid_.size()));
    for (std::size_t i = 0; i < grid_.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = grid_.spacing() * u[i];
    const double nv = v.squaredNorm();
    return (v.adjoint() * gamma_ * v)(0, 0).real() / nv;
}

ReducedDensity reduced_density(const TwoBodyState& psi) {
    const Grid2D& g = psi.grid();
    const auto m = static_cast<Eigen::Index>(g.size());
    Eigen::Map<const RowMatC> P(psi.values().data(), m, m);
    const double h2 = g.cell_area();
    Eigen::MatrixXcd gamma = (h2 * h2) * (P * P.adjoint());
    return ReducedDensity(g, std::move(gamma));
}

// ------------------------------------------------------------ comparisons

nlohmann::json AprioriCheck::to_json() const { return {{"lhs", lhs}, {"rhs", rhs}, {"ratio", ratio}, {"E_af", E_af}}; }

AprioriCheck apriori_kinetic_check(const TwoBodyState& psi0, const FieldConfig& cfg, double E_af) {
    TwoBodyHamiltonian H(cfg, std::max<std::size_t>(cfg.grid.n(), kDefaultPointCap));
    ComplexField w(H.dimension());
    H.apply_one_body(0, psi0.values(), w);
    const TwoBodyState image(psi0.grid(), std::move(w));
    AprioriCheck c;
    c.lhs = psi0.inner(image).real() / psi0.norm_squared();
    c.E_af = E_af;
    c.rhs = (1.0 + cfg.beta) * E_af;
    c.ratio = c.lhs / c.rhs;
    return c;
}

nlohmann::json FewBodyRun::to_json() const {
    return {{"beta", beta},
            {"R", R},
            {"E2_half", E2_half},
            {"mf_energy", mf_energy},
            {"product_energy", product_energy},
            {"gap", gap},
            {"fidelity", fidelity},
            {"iterations", iterations},
            {"apriori", apriori.to_json()},
            {"ground", ground.to_json()},
            {"flags", flags}};
}

FewBodyRun fewbody_compare(const FieldConfig& cfg, const Schedule& schedule, double tol, std::size_t point_cap) {
    FewBodyRun run;
    run.beta = cfg.beta;
    run.R = cfg.R;
    AverageFieldFunctional F(cfg);
    const MinimizeResult mr = minimize(F, WaveFunction::trap_adapted(cfg), schedule);
    for (const auto& f : mr.flags)
        run.flags.push_back("minimizer:" + f);
    if (!mr.converged)
        run.flags.push_back("minimizer:not_converged");
    run.minimizer = mr.u;
    run.mf_energy = mr.energy.total;
    run.product_energy = product_state_energy(F, mr.u, 2).total;
    run.ground = ground_energy_2body(cfg, tol, mr.u, point_cap);
    for (const auto& f : run.ground.flags)
        run.flags.push_back("eigensolver:" + f);
    run.E2_half = 0.5 * run.ground.energy;
    run.gap = run.product_energy - run.E2_half;
    run.iterations = run.ground.solver.matvecs;
    run.fidelity = reduced_density(run.ground.state).fidelity(mr.u);
    run.apriori = apriori_kinetic_check(run.ground.state, cfg, run.mf_energy);
    return run;
}

nlohmann::json FidelityTrend::to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows)
        rs.push_back({{"beta", r.beta}, {"overlap", r.overlap}, {"E2_half", r.E2_half}, {"mf_energy", r.mf_energy}});
    return {{"rows", rs}, {"nondecreasing", nondecreasing}, {"flags", flags}};
}

FidelityTrend fidelity_trend(const std::vector<FewBodyRun>& runs) {
    FidelityTrend t;
    for (const auto& r : runs) {
        t.rows.push_back({r.beta, r.fidelity, r.E2_half, r.mf_energy});
        for (const auto& f : r.flags)
            t.flags.push_back("beta=" + std::to_string(r.beta) + ":" + f);
    }
    std::vector<FidelityRow> sorted = t.rows;
    std::sort(sorted.begin(), sorted.end(),
              [](const FidelityRow& a, const FidelityRow& b) { return std::abs(a.beta) > std::abs(b.beta); });
    t.nondecreasing = true;
    for (std::size_t k = 1; k < sorted.size(); ++k)
        if (sorted[k].overlap < sorted[k - 1].overlap)
            t.nondecreasing = false;
    return t;
}

FidelityTrend fidelity_trend(const std::vector<double>& betas, const FieldConfig& cfg, const Schedule& schedule,
                             double tol, std::size_t point_cap) {
    std::vector<FewBodyRun> runs;
    for (double b : betas) {
        FieldConfig c = cfg;
        c.beta = b;
        runs.push_back(fewbody_compare(c, schedule, tol, point_cap));
    }
    return fidelity_trend(runs);
}

} // namespace anyon
