#include "anyon/spectral.hpp"

#include "anyon/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace anyon {

namespace {

constexpr double kPi = std::numbers::pi;

double euclid_norm(std::span<const cplx> v) {
    long double s = 0.0L;
    for (const cplx& z : v) s += std::norm(z);
    return std::sqrt(static_cast<double>(s));
}

cplx euclid_dot(std::span<const cplx> a, std::span<const cplx> b) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

} // namespace

OneBodyOperator::OneBodyOperator(const FieldConfig& cfg)
    : grid_(cfg.grid), ops_(cfg.grid), A_(cfg.field.sample(cfg.grid)), V_(cfg.trap.sample(cfg.grid)),
      A2_(cfg.grid.size()), zero_field_(cfg.field.is_zero()), p_(cfg.grid.size()) {
    for (std::size_t i = 0; i < A2_.size(); ++i) A2_[i] = A_.x[i] * A_.x[i] + A_.y[i] * A_.y[i];
}

void OneBodyOperator::apply(std::span<const cplx> in, std::span<cplx> out) {
    const std::size_t m = in.size();
    const auto lap = ops_.laplacian(in);
    for (std::size_t i = 0; i < m; ++i) out[i] = (V_[i] + A2_[i]) * in[i] - lap[i];
    if (zero_field_)
        return;
    // -i (D A + A D) u per axis
    const RealField* comps[2] = {&A_.x, &A_.y};
    for (int axis = 0; axis < 2; ++axis) {
        const RealField& a = *comps[axis];
        for (std::size_t i = 0; i < m; ++i) p_[i] = a[i] * in[i];
        const auto dAu = ops_.derivative(p_, axis);
        const auto du = ops_.derivative(in, axis);
        for (std::size_t i = 0; i < m; ++i) {
            const cplx s = dAu[i] + a[i] * du[i];
            out[i] += cplx(s.imag(), -s.real());
        }
    }
}

LinearMap OneBodyOperator::as_map() {
    return [this](std::span<const cplx> in, std::span<cplx> out) { apply(in, out); };
}

double OneBodyOperator::upper_bound() const {
    double kmax = 0.0;
    for (std::size_t m = 0; m < grid_.n(); ++m) kmax = std::max(kmax, std::abs(ops_.wavenumber(m)));
    double ax = 0.0, ay = 0.0, v = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        ax = std::max(ax, std::abs(A_.x[i]));
        ay = std::max(ay, std::abs(A_.y[i]));
        v = std::max(v, V_[i]);
    }
    return (kmax + ax) * (kmax + ax) + (kmax + ay) * (kmax + ay) + v;
}

LanczosResult lanczos_lowest(const LinearMap& apply, ComplexField start, const LanczosOptions& opt) {
    const std::size_t dim = start.size();
    const std::size_t m = std::max<std::size_t>(opt.krylov_dim, 2);
    LanczosResult res;
    ComplexField x = std::move(start);
    if (opt.project)
        opt.project(x);
    {
        const double nx = euclid_norm(x);
        if (!(nx > 0.0))
            throw DomainError("Lanczos start vector vanishes");
        for (auto& z : x) z /= nx;
    }
    std::vector<ComplexField> V;
    V.reserve(m);
    ComplexField w(dim), scratch(dim);

    for (;;) {
        V.clear();
        V.push_back(x);
        std::vector<double> alpha, beta;
        Eigen::VectorXd ritz_vec;
        double theta = 0.0;
        for (std::size_t j = 0;; ++j) {
            apply(V[j], w);
            ++res.matvecs;
            if (opt.project) {
                scratch = w;
                opt.project(w);
                double leak = 0.0;
                for (std::size_t i = 0; i < dim; ++i) leak = std::max(leak, std::abs(w[i] - scratch[i]));
                res.symmetry_leak = std::max(res.symmetry_leak, leak);
            }
            const double a = euclid_dot(V[j], w).real();
            alpha.push_back(a);
            for (std::size_t i = 0; i < dim; ++i) w[i] -= a * V[j][i];
            if (j > 0)
                for (std::size_t i = 0; i < dim; ++i) w[i] -= beta[j - 1] * V[j - 1][i];
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : V) {
                    const cplx c = euclid_dot(q, w);
                    for (std::size_t i = 0; i < dim; ++i) w[i] -= c * q[i];
                }
            const double b = euclid_norm(w);
            beta.push_back(b);

            const std::size_t k = alpha.size();
            Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(k));
            Eigen::VectorXd sub(static_cast<Eigen::Index>(k > 1 ? k - 1 : 0));
            for (std::size_t i = 0; i + 1 < k; ++i) sub[static_cast<Eigen::Index>(i)] = beta[i];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
            es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            theta = es.eigenvalues()[0];
            ritz_vec = es.eigenvectors().col(0);
            res.ritz_history.push_back(theta);
            const double est = b * std::abs(ritz_vec[static_cast<Eigen::Index>(k - 1)]);
            const double scale = std::max(1.0, std::abs(theta));
            if (est <= opt.tol * scale || b <= 1e-14 * scale || k >= m || res.matvecs >= opt.max_matvecs)
                break;
            for (auto& z : w) z /= b;
            V.push_back(w);
        }
        std::fill(x.begin(), x.end(), cplx{});
        for (std::size_t i = 0; i < V.size(); ++i) {
            const double c = ritz_vec[static_cast<Eigen::Index>(i)];
            for (std::size_t l = 0; l < dim; ++l) x[l] += c * V[i][l];
        }
        if (opt.project)
            opt.project(x);
        const double nx = euclid_norm(x);
        for (auto& z : x) z /= nx;
        apply(x, w);
        ++res.matvecs;
        const double rq = euclid_dot(x, w).real();
        for (std::size_t i = 0; i < dim; ++i) w[i] -= rq * x[i];
        res.residual = euclid_norm(w);
        res.value = rq;
        if (res.residual <= opt.tol * std::max(1.0, std::abs(rq))) {
            res.converged = true;
            break;
        }
        if (res.matvecs >= opt.max_matvecs)
            break;
        ++res.restarts;
    }
    res.vector = std::move(x);
    return res;
}

GroundState one_body_ground(const FieldConfig& cfg, double tol, bool check_refinement) {
    OneBodyOperator H(cfg);
    WaveFunction init = WaveFunction::trap_adapted(cfg);
    LanczosOptions opt;
    opt.tol = tol;
    GroundState gs;
    gs.solver = lanczos_lowest(H.as_map(), init.values(), opt);
    if (!gs.solver.converged)
        throw ConvergenceError("one-body Lanczos did not converge within " + std::to_string(opt.max_matvecs) +
                               " operator applications");
    gs.energy = gs.solver.value;
    gs.state = WaveFunction(cfg.grid, gs.solver.vector);
    gs.state.normalize();
    gs.state.fix_phase();
    if (check_refinement) {
        FieldConfig fine = cfg;
        fine.grid = Grid2D(cfg.grid.box(), 2 * cfg.grid.n());
        const GroundState g2 = one_body_ground(fine, tol, false);
        gs.refinement_shift = std::abs(g2.energy - gs.energy);
        if (gs.refinement_shift > 1e-3)
            gs.warnings.push_back("ground energy shifts by " + std::to_string(gs.refinement_shift) +
                                  " under grid refinement");
    }
    return gs;
}

double trusted_cutoff(const Grid2D& grid) { return 0.5 * kPi * kPi / (grid.spacing() * grid.spacing()); }

double weyl_estimate(double cutoff, const FieldConfig& cfg) {
    const RealField V = cfg.trap.sample(cfg.grid);
    long double s = 0.0L;
    for (double v : V) s += std::max(0.0, cutoff - v);
    return cfg.grid.cell_area() * static_cast<double>(s) / (4.0 * kPi);
}

nlohmann::json LevelCount::to_json() const {
    return {{"cutoff", cutoff},         {"count", count}, {"eigenvalues", eigenvalues}, {"block_size", block_size},
            {"passes", passes},         {"method", method}, {"trusted_max", trusted_max}};
}

namespace {

using Block = Eigen::MatrixXcd;

void apply_block(OneBodyOperator& H, const Block& X, Block& Y) {
    Y.resize(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        H.apply(std::span<const cplx>(X.col(j).data(), static_cast<std::size_t>(X.rows())),
                std::span<cplx>(Y.col(j).data(), static_cast<std::size_t>(Y.rows())));
}

Block orthonormalize(const Block& Y) {
    Eigen::HouseholderQR<Block> qr(Y);
    return qr.householderQ() * Block::Identity(Y.rows(), Y.cols());
}

Block random_block(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Block X(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) X(i, j) = cplx(u(rng), u(rng));
    return X;
}

struct RitzPairs {
    Eigen::VectorXd values;
    Block vectors;
    Eigen::VectorXd residuals;
};

RitzPairs rayleigh_ritz(OneBodyOperator& H, const Block& Q) {
    Block HQ;
    apply_block(H, Q, HQ);
    Block S = Q.adjoint() * HQ;
    S = 0.5 * (S + S.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Block> es(S);
    RitzPairs rp;
    rp.values = es.eigenvalues();
    rp.vectors = Q * es.eigenvectors();
    const Block HX = HQ * es.eigenvectors();
    rp.residuals.resize(rp.values.size());
    for (Eigen::Index j = 0; j < rp.values.size(); ++j)
        rp.residuals[j] = (HX.col(j) - rp.values[j] * rp.vectors.col(j)).norm();
    return rp;
}

Block chebyshev_filter(OneBodyOperator& H, const Block& X, std::size_t degree, double a, double b) {
    const double e = 0.5 * (b - a), c = 0.5 * (b + a);
    Block HX, Y, Ynew;
    apply_block(H, X, HX);
    Y = (HX - c * X) / e;
    Block Xp = X;
    for (std::size_t i = 2; i <= degree; ++i) {
        apply_block(H, Y, HX);
        Ynew = 2.0 * (HX - c * Y) / e - Xp;
        Xp = std::move(Y);
        Y = std::move(Ynew);
    }
    return Y;
}

} // namespace

std::vector<LevelCount> count_levels(const std::vector<double>& cutoffs, const FieldConfig& cfg,
                                     const LevelCountOptions& opt) {
    if (cutoffs.empty())
        return {};
    const double trusted = trusted_cutoff(cfg.grid);
    const double top = *std::max_element(cutoffs.begin(), cutoffs.end());
    for (double c : cutoffs)
        if (c > trusted)
            throw DomainError("cutoff " + std::to_string(c) + " exceeds the trusted spectral range " +
                              std::to_string(trusted));

    OneBodyOperator H(cfg);
    const auto dim = static_cast<Eigen::Index>(H.dimension());
    const double b = H.upper_bound();
    std::mt19937_64 rng(opt.seed);
    Eigen::Index k = std::min<Eigen::Index>(dim, static_cast<Eigen::Index>(std::ceil(1.25 * weyl_estimate(top, cfg))) + 16);

    Block Q = orthonormalize(random_block(dim, k, rng));
    RitzPairs rp = rayleigh_ritz(H, Q);
    std::size_t passes = 0;
    for (;; ++passes) {
        const double highest = rp.values[k - 1];
        if (highest <= top && k < dim) {
            const Eigen::Index extra = std::min<Eigen::Index>(dim - k, std::max<Eigen::Index>(16, k / 2));
            Block X(dim, k + extra);
            X.leftCols(k) = rp.vectors;
            X.rightCols(extra) = random_block(dim, extra, rng);
            k += extra;
            rp = rayleigh_ritz(H, orthonormalize(X));
            continue;
        }
        // pairs below the cutoff converge to residual_tol, the next few
        // (guard) pairs to its square root so nothing below is missing
        constexpr Eigen::Index guard = 4;
        bool done = passes > 0;
        Eigen::Index above = 0;
        for (Eigen::Index j = 0; j < k && above < guard; ++j) {
            const double scale = std::max(1.0, std::abs(rp.values[j]));
            if (rp.values[j] <= top * (1.0 + 10.0 * opt.tie_tolerance) + 1e-12) {
                if (rp.residuals[j] > opt.residual_tol * scale)
                    done = false;
            } else {
                ++above;
                if (rp.residuals[j] > std::sqrt(opt.residual_tol) * scale)
                    done = false;
            }
        }
        if (done || k == dim)
            break;
        if (passes >= opt.max_passes)
            throw ConvergenceError("level counting did not converge in " + std::to_string(opt.max_passes) + " passes");
        const Block Y = chebyshev_filter(H, rp.vectors, opt.filter_degree, highest, b);
        rp = rayleigh_ritz(H, orthonormalize(Y));
    }

    std::vector<LevelCount> out;
    for (double c : cutoffs) {
        LevelCount lc;
        lc.cutoff = c;
        lc.block_size = static_cast<std::size_t>(k);
        lc.passes = passes;
        lc.trusted_max = trusted;
        const double limit = c - opt.tie_tolerance * std::max(1.0, std::abs(c));
        for (Eigen::Index j = 0; j < k; ++j)
            if (rp.values[j] < limit)
                lc.eigenvalues.push_back(rp.values[j]);
        lc.count = lc.eigenvalues.size();
        out.push_back(std::move(lc));
    }
    return out;
}

LevelCount count_levels(double cutoff, const FieldConfig& cfg, const LevelCountOptions& opt) {
    return count_levels(std::vector<double>{cutoff}, cfg, opt).front();
}

nlohmann::json WeylFit::to_json() const {
    return {{"cutoffs", cutoffs}, {"counts", counts}, {"exponent", exponent}, {"prefactor", prefactor}};
}

WeylFit weyl_fit(const std::vector<double>& cutoffs, const FieldConfig& cfg, const LevelCountOptions& opt) {
    if (cutoffs.size() < 4)
        throw DomainError("Weyl fit needs at least four cutoffs");
    const auto counts = count_levels(cutoffs, cfg, opt);
    WeylFit fit;
    std::vector<double> n;
    for (const auto& c : counts) {
        if (c.count == 0)
            throw DomainError("cutoff " + std::to_string(c.cutoff) + " lies below the ground energy");
        fit.cutoffs.push_back(c.cutoff);
        fit.counts.push_back(c.count);
        n.push_back(static_cast<double>(c.count));
    }
    fit.exponent = loglog_slope(fit.cutoffs, n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) mean += std::log(n[i]) - fit.exponent * std::log(fit.cutoffs[i]);
    fit.prefactor = std::exp(mean / static_cast<double>(n.size()));
    return fit;
}

} // namespace anyon
