// Acceptance run: one PASS/FAIL line per criterion.
// Usage: anyon_acceptance [criterion numbers...]

#include "anyon/afm_solver.hpp"
#include "anyon/cli.hpp"
#include "anyon/error.hpp"
#include "anyon/fewbody_ed.hpp"
#include "anyon/inequality_lab.hpp"
#include "anyon/smeared_potential.hpp"
#include "anyon/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace anyon;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

FieldConfig harmonic(double box, std::size_t n, double beta = 0.0, double R = 0.25) {
    FieldConfig c;
    c.grid = Grid2D(box, n);
    c.beta = beta;
    c.R = R;
    return c;
}

Outcome kernel_scaling() {
    double worst = 0.0;
    for (double p : {3.0, 4.0, 8.0}) {
        const double base = lp_norm_grad(p, 1.0);
        for (int k = 0; k <= 6; ++k) {
            const double R = std::ldexp(1.0, -k);
            const double pred = std::pow(R, 2.0 / p - 1.0) * base;
            worst = std::max(worst, std::abs(lp_norm_grad(p, R) - pred) / pred);
        }
    }
    const double ref = SmearedKernel(1.0).sup_v();
    double spread = 0.0;
    for (int k = 0; k <= 6; ++k) {
        const double R = std::ldexp(1.0, -k);
        spread = std::max(spread, std::abs(R * SmearedKernel(R).sup_v() - ref) / ref);
    }
    return {worst <= 1e-8 && spread <= 1e-10,
            "max relative error " + fmt(worst) + " (<= 1e-8), R sup v spread " + fmt(spread) + " (<= 1e-10)"};
}

Outcome chi_normalization() {
    const double mass = SmoothingProfile::standard().total_mass();
    const double a = chi_fourier_abs_integral(200.0), b = chi_fourier_abs_integral(400.0);
    const double inc = (b - a) / a;
    return {std::abs(mass - 1.0) <= 1e-10 && inc <= 0.01,
            "mass - 1 = " + fmt(mass - 1.0) + ", int|chi^| increment 200->400 " + fmt(inc) + " (<= 0.01)"};
}

Outcome geometric() {
    const auto scan = geom_bound_scan(100000, {1e-2, 1e-1, 1.0}, 0);
    bool ok = true;
    double spread = 0.0;
    for (const auto& c : scan.cells)
        ok = ok && std::isfinite(c.sup) && c.samples >= 100000;
    for (auto r : kTriangleRegimes)
        spread = std::max(spread, scan.spread(r));
    const double all_long = scan.sup(TriangleRegime::AllLong);
    double eq = 0.0;
    for (double R : {1e-2, 1e-1, 1.0})
        for (double L : {2.5 * R, 5.0 * R, 40.0 * R}) {
            const Vec2 x{0.0, 0.0}, y{L, 0.0}, z{0.5 * L, 0.5 * std::sqrt(3.0) * L};
            eq = std::max(eq, std::abs(three_body_S(x, y, z, R) * 3.0 * L * L - 4.5));
        }
    ok = ok && all_long <= 4.5 + 1e-9 && spread <= 2.0 && eq <= 1e-10;
    std::string sups;
    for (auto r : kTriangleRegimes)
        sups += " " + to_string(r) + "=" + fmt(scan.sup(r));
    return {ok, "sups" + sups + "; max spread over R " + fmt(spread) + " (<= 2); equilateral error " + fmt(eq)};
}

Outcome hardy() {
    bool ok = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
        const auto r = hardy_mc("random_separable", i, 1000000, 0);
        ok = ok && r.holds(3.0);
        worst = std::max(worst, r.lhs / r.rhs);
    }
    const auto cs = circumradius_scan(1000000, 0);
    ok = ok && cs.max_ratio <= 1.0 + 1e-12 && cs.equilateral_deviation <= 1e-12;
    return {ok, "20 tests hold at 3 sigma, max lhs/rhs " + fmt(worst) + "; max rho^2/(9 R_c^2) - 1 = " +
                    fmt(cs.max_ratio - 1.0) + " over 1e6 triangles; equilateral " + fmt(cs.equilateral_deviation)};
}

Outcome diamagnetic() {
    const auto st = diamagnetic_refinement_study(50, 0, 8.0, 128);
    const Grid2D g(8.0, 128);
    bool real_ok = true;
    for (std::uint64_t s = 0; s < 10; ++s) {
        WaveFunction u = WaveFunction::random(g, 500 + s);
        for (auto& z : u.values())
            z = std::abs(z);
        const auto r = diamagnetic_check(u, random_smooth_field(500 + s).sample(g));
        real_ok = real_ok && r.lhs >= r.rhs;
    }
    return {st.passed && real_ok, "50 trials at 128^2/256^2: worst violation " + fmt(st.worst_coarse) + " -> " +
                                      fmt(st.worst_fine) + "; real u nonnegative: " + (real_ok ? "yes" : "no")};
}

Outcome magnetic() {
    const Grid2D g(8.0, 128);
    MagneticBoundChecker chk(g);
    double worst = 0.0, homog = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        WaveFunction u = WaveFunction::random(g, 9000 + s);
        const auto r = chk.check(u);
        worst = std::max(worst, r.scaled_ratio());
        if (s < 5) {
            for (auto& z : u.values())
                z *= 1.7;
            const auto q = chk.check(u);
            homog = std::max(homog, std::abs(q.ratio / r.ratio - std::pow(1.7, 4)) / std::pow(1.7, 4));
        }
    }
    return {worst <= 1.5 * (1.0 + 1e-3) && homog <= 1e-12,
            "max ratio " + fmt(worst) + " (<= 1.5015); ||u||^4 homogeneity error " + fmt(homog)};
}

Outcome gradient_oracle() {
    double worst = 0.0;
    for (double beta : {0.0, 1.0, -1.0, 4.0, -4.0}) {
        FieldConfig cfg = harmonic(8.0, 64, beta, 0.5);
        cfg.field = ExternalField(GaugeKind::ConstantPlusPerturbation, 0.5, {GaussianBump{0.7, {0.5, 0.0}, 0.8}});
        AverageFieldFunctional F(cfg);
        for (std::uint64_t s = 0; s < 3; ++s) {
            const WaveFunction u = WaveFunction::random(cfg.grid, 70 + s);
            const WaveFunction d = WaveFunction::random(cfg.grid, 170 + s);
            const ComplexField G = F.gradient(u);
            const double analytic = 2.0 * inner(cfg.grid, G, d.values()).real();
            const double eps = 1e-5;
            auto at = [&](double t) {
                ComplexField v = u.values();
                for (std::size_t i = 0; i < v.size(); ++i)
                    v[i] += t * d[i];
                return F.energy(WaveFunction(cfg.grid, v)).total;
            };
            const double fd = (at(eps) - at(-eps)) / (2.0 * eps);
            worst = std::max(worst, std::abs(fd - analytic) / std::abs(analytic));
        }
    }
    return {worst <= 1e-6, "max relative error " + fmt(worst) + " over beta in {0, +-1, +-4} (<= 1e-6)"};
}

Outcome calibration() {
    const FieldConfig cfg = harmonic(8.0, 128);
    const auto r = minimize(cfg, WaveFunction::trap_adapted(cfg), Schedule{});
    const double spec = one_body_ground(cfg).energy;
    FieldConfig mag = cfg;
    mag.field = symmetric_gauge(2.0);
    const double landau = one_body_ground(mag).energy;
    const bool ok = r.converged && std::abs(r.energy.total - 2.0) <= 0.02 && std::abs(r.energy.total - spec) <= 1e-4 &&
                    std::abs(landau - std::sqrt(8.0)) <= 1e-3;
    return {ok, "E_af = " + fmt(r.energy.total) + ", spectral " + fmt(spec) + ", |diff| " +
                    fmt(std::abs(r.energy.total - spec)) + "; B0=2 ground " + fmt(landau) + " vs sqrt(8)"};
}

Outcome r_convergence() {
    const FieldConfig cfg = harmonic(8.0, 512, 2.0);
    Schedule sch;
    sch.tol = 1e-9;
    const auto st = convergence_study(cfg, {0.5, 0.25, 0.125, 0.0625, 0.03125}, sch);
    return {st.slope >= 0.7 && st.slope <= 1.3,
            "fitted slope " + fmt(st.slope) + " at beta=2, 512^2, R = 1/2..1/32 (target [0.7, 1.3])"};
}

Outcome weyl() {
    const FieldConfig cfg = harmonic(16.0, 128);
    const std::vector<double> cut{10.0, 14.0, 20.0, 28.0, 40.0};
    const auto fit = weyl_fit(cut, cfg);
    std::string counts;
    for (auto c : fit.counts)
        counts += " " + std::to_string(c);
    return {fit.exponent >= 1.8 && fit.exponent <= 2.2 && fit.counts[0] == 10,
            "exponent " + fmt(fit.exponent) + " (in [1.8, 2.2]); counts" + counts};
}

struct FewBodyData {
    std::map<std::pair<double, double>, FewBodyRun> runs;
    std::string error;
};

const FewBodyData& fewbody_data() {
    static FewBodyData data = [] {
        FewBodyData d;
        try {
            for (auto [b, R] : std::vector<std::pair<double, double>>{
                     {1.0, 0.5}, {1.0, 0.25}, {0.5, 0.5}, {0.5, 0.25}, {0.25, 0.25}, {0.0, 0.25}}) {
                FieldConfig c = harmonic(4.0, 32, b, R);
                d.runs.emplace(std::make_pair(b, R), fewbody_compare(c, Schedule{}, 1e-8));
            }
        } catch (const std::exception& e) {
            d.error = e.what();
        }
        return d;
    }();
    return data;
}

Outcome variational() {
    const auto& d = fewbody_data();
    if (!d.error.empty())
        return {false, d.error};
    bool ok = true;
    double worst = -1e300;
    for (double b : {0.5, 1.0})
        for (double R : {0.5, 0.25}) {
            const auto& r = d.runs.at({b, R});
            const double slack = 1e-7 * std::max(1.0, std::abs(r.product_energy));
            ok = ok && r.E2_half <= r.product_energy + slack;
            worst = std::max(worst, r.E2_half - r.product_energy);
        }
    const auto& z = d.runs.at({0.0, 0.25});
    const double rel = std::abs(z.E2_half - z.mf_energy) / z.mf_energy;
    ok = ok && rel <= 1e-6;
    return {ok, "max E2/2 - product " + fmt(worst) + "; beta=0 relative gap " + fmt(rel) + " (<= 1e-6)"};
}

Outcome apriori() {
    const auto& d = fewbody_data();
    if (!d.error.empty())
        return {false, d.error};
    bool ok = true;
    std::string s;
    for (double b : {0.5, 1.0}) {
        const double a = d.runs.at({b, 0.5}).apriori.ratio, c = d.runs.at({b, 0.25}).apriori.ratio;
        ok = ok && std::isfinite(d.runs.at({b, 0.5}).apriori.lhs) && std::isfinite(d.runs.at({b, 0.25}).apriori.lhs);
        ok = ok && std::max(a, c) <= 1.2 * std::min(a, c);
        s += " beta=" + fmt(b) + ": " + fmt(a) + ", " + fmt(c) + ";";
    }
    return {ok, "ratios at R = 0.5, 0.25:" + s + " stable within 20%"};
}

Outcome fidelity() {
    const auto& d = fewbody_data();
    if (!d.error.empty())
        return {false, d.error};
    const double f1 = d.runs.at({1.0, 0.25}).fidelity, f5 = d.runs.at({0.5, 0.25}).fidelity,
                 f25 = d.runs.at({0.25, 0.25}).fidelity, f0 = d.runs.at({0.0, 0.25}).fidelity;
    const bool ok = f1 <= f5 && f5 <= f25 && f25 <= f0 && f0 >= 1.0 - 1e-6;
    return {ok, "fidelity at R=0.25: beta=1 " + fmt(f1) + ", 0.5 " + fmt(f5) + ", 0.25 " + fmt(f25) + ", 0 " +
                    std::to_string(f0)};
}

Outcome positivity() {
    const Grid2D g(8.0, 64);
    double least = 1e300;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const double beta = (s % 2 ? -1.0 : 1.0) * 0.5 * static_cast<double>(s % 9);
        AverageFieldFunctional F(harmonic(8.0, 64, beta, 0.5));
        least = std::min(least, F.energy(WaveFunction::random(g, 3000 + s)).total);
    }
    double gap = 1e300;
    for (double beta : {0.5, 2.0, -3.0}) {
        FieldConfig cfg = harmonic(8.0, 128, beta, 0.25);
        cfg.field = symmetric_gauge(1.0);
        AverageFieldFunctional F(cfg);
        const auto r = minimize(F, WaveFunction::trap_adapted(cfg), Schedule{});
        gap = std::min(gap, (r.energy.total - r.energy.potential) - F.lower_bound(r.u));
    }
    return {least >= 0.0 && gap >= -1e-8,
            "min energy over 100 random states " + fmt(least) + "; min (E - int V rho) - bound at minimizers " + fmt(gap)};
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") {
            std::ifstream in(e.path(), std::ios::binary);
            std::ostringstream os;
            os << in.rdbuf();
            out[fs::relative(e.path(), dir).string()] = os.str();
        }
    return out;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / ("anyon_acceptance_" + std::to_string(std::random_device{}()));
    const std::vector<std::pair<Suite, std::string>> configs{
        {Suite::Minimize, R"({"grid": {"L": 8, "n": 64}, "beta": 1.5, "R": 0.5, "seed": 4})"},
        {Suite::RStudy, R"({"grid": {"L": 8, "n": 64}, "beta": 2, "R_list": [1, 0.5, 0.25]})"},
        {Suite::Verify, R"({"grid": {"L": 8, "n": 128}, "seed": 5, "verify": {"geom_samples": 10000,
            "hardy_tests": 2, "hardy_samples": 100000, "triangle_samples": 100000, "diamagnetic_trials": 3,
            "magnetic_states": 3, "form_members": 6, "form_R": [0.25, 0.125]}})"},
        {Suite::FewBody, R"({"grid": {"L": 4, "n": 16}, "R_list": [0.5],
            "fewbody": {"betas": [0.5], "trend_betas": [0.5, 0]}})"},
        {Suite::Weyl, R"({"grid": {"L": 16, "n": 64}, "weyl": {"cutoffs": [6, 10, 14, 20]}})"}};
    bool ok = true;
    std::size_t compared = 0;
    std::string bad;
    for (const auto& [suite, text] : configs) {
        auto cfg = parse_config_text(text, suite);
        cfg.out_root = root;
        const auto a = run_suite(cfg);
        const auto b = run_suite(cfg);
        const auto fa = csv_files(a.run_dir), fb = csv_files(b.run_dir);
        if (fa != fb || fa.empty()) {
            ok = false;
            bad += " " + to_string(suite);
        }
        compared += fa.size();
    }
    fs::remove_all(root);
    return {ok, std::to_string(compared) + " CSV files byte-identical across reruns of all five suites" +
                    (bad.empty() ? std::string() : "; differing:" + bad)};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"kernel scaling", kernel_scaling},
        {"chi normalization and smoothness", chi_normalization},
        {"geometric three-body bound", geometric},
        {"three-particle Hardy inequality", hardy},
        {"diamagnetic inequality", diamagnetic},
        {"magnetic-term bound", magnetic},
        {"gradient oracle", gradient_oracle},
        {"beta=0 solver calibration", calibration},
        {"R->0 convergence slope", r_convergence},
        {"Weyl counting", weyl},
        {"two-body variational inequality", variational},
        {"a priori kinetic bound", apriori},
        {"fidelity trend", fidelity},
        {"positivity", positivity},
        {"determinism", determinism},
    };
    std::set<std::size_t> pick;
    for (int i = 1; i < argc; ++i)
        pick.insert(static_cast<std::size_t>(std::stoul(argv[i])));
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (!pick.empty() && !pick.count(k + 1))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    o.detail.c_str(), dt);
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
