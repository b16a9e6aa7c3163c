#include "anyon/cli.hpp"

#include "anyon/error.hpp"
#include "anyon/inequality_lab.hpp"
#include "anyon/smeared_potential.hpp"
#include "anyon/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

namespace anyon {

using nlohmann::json;

std::string to_string(Suite s) {
    switch (s) {
    case Suite::Minimize: return "minimize";
    case Suite::RStudy: return "rstudy";
    case Suite::Verify: return "verify";
    case Suite::FewBody: return "fewbody";
    case Suite::Weyl: return "weyl";
    }
    return "minimize";
}

Suite suite_from_string(const std::string& s, const std::string& path) {
    for (Suite k : {Suite::Minimize, Suite::RStudy, Suite::Verify, Suite::FewBody, Suite::Weyl})
        if (to_string(k) == s)
            return k;
    throw ConfigError(path, "unknown suite \"" + s + "\" (minimize, rstudy, verify, fewbody, weyl)");
}

json VerifyOptions::to_json() const {
    return {{"kernel_p", kernel_p},
            {"kernel_R", kernel_R},
            {"geom_samples", geom_samples},
            {"geom_R", geom_R},
            {"hardy_tests", hardy_tests},
            {"hardy_samples", hardy_samples},
            {"triangle_samples", triangle_samples},
            {"diamagnetic_trials", diamagnetic_trials},
            {"magnetic_states", magnetic_states},
            {"form_family", form_family},
            {"form_R", form_R},
            {"form_members", form_members}};
}

json FewBodyOptions::to_json() const {
    return {{"betas", betas}, {"trend_betas", trend_betas}, {"tol", tol}, {"point_cap", point_cap}};
}

json WeylOptions::to_json() const { return {{"cutoffs", cutoffs}, {"tie_tolerance", tie_tolerance}}; }

json ExperimentConfig::to_json() const {
    return {{"suite", to_string(suite)},
            {"seed", seed},
            {"grid", {{"L", field.grid.box()}, {"n", field.grid.n()}}},
            {"field", field.field.to_json()},
            {"trap", field.trap.to_json()},
            {"beta", field.beta},
            {"R", field.R},
            {"R_list", R_list},
            {"schedule", schedule.to_json()},
            {"verify", verify.to_json()},
            {"fewbody", fewbody.to_json()},
            {"weyl", weyl.to_json()}};
}

// ------------------------------------------------------------------ parsing

namespace {

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object())
        throw ConfigError(path, "expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError(path + "/" + key, "unknown key \"" + key + "\"");
}

double positive(const json& v, const std::string& path) {
    if (!v.is_number())
        throw ConfigError(path, "expected a number");
    const double x = v.get<double>();
    if (!(x > 0.0) || !std::isfinite(x))
        throw ConfigError(path, "must be positive");
    return x;
}

std::size_t count_at_least(const json& v, const std::string& path, std::size_t lo) {
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(lo))
        throw ConfigError(path, "expected an integer >= " + std::to_string(lo));
    return v.get<std::size_t>();
}

std::vector<double> positive_list(const json& v, const std::string& path, bool decreasing) {
    if (!v.is_array() || v.empty())
        throw ConfigError(path, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(positive(v[i], path + "/" + std::to_string(i)));
        if (decreasing && i > 0 && !(out[i] < out[i - 1]))
            throw ConfigError(path + "/" + std::to_string(i), "values must be strictly decreasing");
    }
    return out;
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty())
        throw ConfigError(path, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
            throw ConfigError(path + "/" + std::to_string(i), "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

Grid2D parse_grid(const json& j) {
    reject_unknown(j, "/grid", {"L", "n"});
    double L = 8.0;
    std::size_t n = 128;
    if (j.contains("L"))
        L = positive(j["L"], "/grid/L");
    if (j.contains("n")) {
        n = count_at_least(j["n"], "/grid/n", 8);
        if (n % 2 != 0)
            throw ConfigError("/grid/n", "must be even");
    }
    return Grid2D(L, n);
}

void parse_verify(const json& j, VerifyOptions& o) {
    const std::string p = "/verify";
    reject_unknown(j, p,
                   {"kernel_p", "kernel_R", "geom_samples", "geom_R", "hardy_tests", "hardy_samples",
                    "triangle_samples", "diamagnetic_trials", "magnetic_states", "form_family", "form_R",
                    "form_members"});
    if (j.contains("kernel_p")) {
        o.kernel_p = positive_list(j["kernel_p"], p + "/kernel_p", false);
        for (std::size_t i = 0; i < o.kernel_p.size(); ++i)
            if (!(o.kernel_p[i] > 2.0))
                throw ConfigError(p + "/kernel_p/" + std::to_string(i), "p must exceed 2");
    }
    if (j.contains("kernel_R"))
        o.kernel_R = positive_list(j["kernel_R"], p + "/kernel_R", true);
    if (j.contains("geom_samples"))
        o.geom_samples = count_at_least(j["geom_samples"], p + "/geom_samples", 10000);
    if (j.contains("geom_R"))
        o.geom_R = positive_list(j["geom_R"], p + "/geom_R", false);
    if (j.contains("hardy_tests"))
        o.hardy_tests = count_at_least(j["hardy_tests"], p + "/hardy_tests", 1);
    if (j.contains("hardy_samples"))
        o.hardy_samples = count_at_least(j["hardy_samples"], p + "/hardy_samples", 100000);
    if (j.contains("triangle_samples"))
        o.triangle_samples = count_at_least(j["triangle_samples"], p + "/triangle_samples", 1);
    if (j.contains("diamagnetic_trials"))
        o.diamagnetic_trials = count_at_least(j["diamagnetic_trials"], p + "/diamagnetic_trials", 1);
    if (j.contains("magnetic_states"))
        o.magnetic_states = count_at_least(j["magnetic_states"], p + "/magnetic_states", 1);
    if (j.contains("form_family")) {
        if (!j["form_family"].is_string())
            throw ConfigError(p + "/form_family", "expected a string");
        o.form_family = j["form_family"].get<std::string>();
        static const std::set<std::string> families{"gaussian", "gaussian_phase", "concentrated", "mixed"};
        if (!families.count(o.form_family))
            throw ConfigError(p + "/form_family", "unknown family \"" + o.form_family + "\"");
    }
    if (j.contains("form_R")) {
        o.form_R = positive_list(j["form_R"], p + "/form_R", true);
        if (o.form_R.size() < 2)
            throw ConfigError(p + "/form_R", "needs at least two radii");
    }
    if (j.contains("form_members"))
        o.form_members = count_at_least(j["form_members"], p + "/form_members", 1);
}

void parse_fewbody(const json& j, FewBodyOptions& o) {
    const std::string p = "/fewbody";
    reject_unknown(j, p, {"betas", "trend_betas", "tol", "point_cap"});
    if (j.contains("betas"))
        o.betas = number_list(j["betas"], p + "/betas");
    if (j.contains("trend_betas"))
        o.trend_betas = number_list(j["trend_betas"], p + "/trend_betas");
    if (j.contains("tol"))
        o.tol = positive(j["tol"], p + "/tol");
    if (j.contains("point_cap"))
        o.point_cap = count_at_least(j["point_cap"], p + "/point_cap", 8);
}

void parse_weyl(const json& j, WeylOptions& o) {
    const std::string p = "/weyl";
    reject_unknown(j, p, {"cutoffs", "tie_tolerance"});
    if (j.contains("cutoffs")) {
        o.cutoffs = positive_list(j["cutoffs"], p + "/cutoffs", false);
        if (!std::is_sorted(o.cutoffs.begin(), o.cutoffs.end()) ||
            std::adjacent_find(o.cutoffs.begin(), o.cutoffs.end()) != o.cutoffs.end())
            throw ConfigError(p + "/cutoffs", "values must be strictly increasing");
        if (o.cutoffs.size() < 4)
            throw ConfigError(p + "/cutoffs", "needs at least four cutoffs");
    }
    if (j.contains("tie_tolerance"))
        o.tie_tolerance = positive(j["tie_tolerance"], p + "/tie_tolerance");
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text, std::optional<Suite> suite, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    reject_unknown(j, "", {"suite", "seed", "grid", "field", "trap", "beta", "R", "R_list", "schedule", "verify",
                           "fewbody", "weyl"});
    ExperimentConfig cfg;
    cfg.source = source;
    cfg.sha256 = sha256_hex(text);

    std::optional<Suite> from_file;
    if (j.contains("suite")) {
        if (!j["suite"].is_string())
            throw ConfigError("/suite", "expected a string");
        from_file = suite_from_string(j["suite"].get<std::string>());
    }
    if (suite && from_file && *suite != *from_file)
        throw ConfigError("/suite", "config is for suite \"" + to_string(*from_file) + "\", not \"" +
                                        to_string(*suite) + "\"");
    if (!suite && !from_file)
        throw ConfigError("/suite", "no suite given");
    cfg.suite = suite ? *suite : *from_file;

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned())
            throw ConfigError("/seed", "expected a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("grid"))
        cfg.field.grid = parse_grid(j["grid"]);
    if (j.contains("field"))
        cfg.field.field = ExternalField::from_json(j["field"], "/field");
    if (j.contains("trap"))
        cfg.field.trap = TrapPotential::from_json(j["trap"], "/trap");
    if (j.contains("beta")) {
        if (!j["beta"].is_number() || !std::isfinite(j["beta"].get<double>()))
            throw ConfigError("/beta", "expected a number");
        cfg.field.beta = j["beta"].get<double>();
    }
    if (j.contains("R"))
        cfg.field.R = positive(j["R"], "/R");
    if (j.contains("R_list"))
        cfg.R_list = positive_list(j["R_list"], "/R_list", true);
    if (j.contains("schedule"))
        cfg.schedule = Schedule::from_json(j["schedule"], "/schedule");
    if (j.contains("verify"))
        parse_verify(j["verify"], cfg.verify);
    if (j.contains("fewbody"))
        parse_fewbody(j["fewbody"], cfg.fewbody);
    if (j.contains("weyl"))
        parse_weyl(j["weyl"], cfg.weyl);

    if (cfg.R_list.empty()) {
        if (cfg.suite == Suite::RStudy)
            cfg.R_list = {0.5, 0.25, 0.125, 0.0625};
        else if (cfg.suite == Suite::FewBody)
            cfg.R_list = {0.5, 0.25};
    }
    if (cfg.suite == Suite::RStudy && cfg.R_list.size() < 3)
        throw ConfigError("/R_list", "rstudy needs at least three radii");
    if (cfg.suite == Suite::FewBody && cfg.field.grid.n() > cfg.fewbody.point_cap)
        throw ConfigError("/grid/n", "two-body grid exceeds the point cap " + std::to_string(cfg.fewbody.point_cap));
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path, std::optional<Suite> suite) {
    if (!std::filesystem::is_regular_file(path))
        throw ConfigError("", "config file not found: " + path.string());
    return parse_config_text(read_text_file(path), suite, path.string());
}

// ----------------------------------------------------------------- manifest

bool RunManifest::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.status == "pass"; });
}

json RunManifest::to_json() const {
    json cs = json::array();
    for (const auto& c : checks)
        cs.push_back({{"name", c.name}, {"status", c.status}, {"detail", c.detail}});
    return {{"suite", suite},
            {"seed", seed},
            {"run_dir", run_dir},
            {"config_source", config_source},
            {"config_sha256", config_sha256},
            {"config", config},
            {"started", started},
            {"wall_seconds", wall_seconds},
            {"files", files},
            {"lemma_reports", lemma_reports},
            {"checks", cs},
            {"passed", passed()},
            {"summary", summary}};
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.suite = j.value("suite", "");
    m.seed = j.value("seed", std::uint64_t{0});
    m.run_dir = j.value("run_dir", "");
    m.config_source = j.value("config_source", "");
    m.config_sha256 = j.value("config_sha256", "");
    m.config = j.value("config", json::object());
    m.started = j.value("started", "");
    m.wall_seconds = j.value("wall_seconds", 0.0);
    m.files = j.value("files", std::vector<std::string>{});
    m.lemma_reports = j.value("lemma_reports", std::vector<std::string>{});
    for (const auto& c : j.value("checks", json::array()))
        m.checks.push_back({c.value("name", ""), c.value("status", ""), c.value("detail", "")});
    m.summary = j.value("summary", json::object());
    return m;
}

// ------------------------------------------------------------------- suites

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double x) { return format_double(x); }

class SuiteRun {
public:
    SuiteRun(const ExperimentConfig& cfg, RunWriter& out, RunManifest& m) : cfg(cfg), out(out), m(m) {}

    void check(const std::string& name, bool ok, const std::string& detail) {
        m.checks.push_back({name, ok ? "pass" : "fail", detail});
    }
    void flag(const std::string& name, const std::string& detail) { m.checks.push_back({name, "flagged", detail}); }

    // Runs one cell; a module error becomes an "error" check.
    void cell(const std::string& name, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            m.checks.push_back({name, "error", e.what()});
        }
    }

    const ExperimentConfig& cfg;
    RunWriter& out;
    RunManifest& m;
};

// ---------------------------------------------------------------- minimize

void export_kernel(SuiteRun& run, double R) {
    const SmearedKernel kernel(R);
    run.out.json("kernel/kernel.json", kernel.to_json());
    std::ostringstream os;
    kernel.write_table_csv(os, 1025, 4.0 * R);
    run.out.text("kernel/radial_table.csv", os.str());
}

ComplexField as_complex(const VectorField& A) {
    ComplexField z(A.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = cplx(A.x[i], A.y[i]);
    return z;
}

void run_minimize(SuiteRun& run) {
    const auto& cfg = run.cfg;
    run.cell("minimize", [&] {
        AverageFieldFunctional F(cfg.field);
        const WaveFunction init =
            cfg.seed == 0 ? WaveFunction::trap_adapted(cfg.field) : WaveFunction::random(cfg.field.grid, cfg.seed);
        const MinimizeResult mr = minimize(F, init, cfg.schedule);
        const double lb = F.lower_bound(mr.u);
        const double magnetic = mr.energy.total - mr.energy.potential;

        json result = mr.to_json();
        result["lower_bound"] = lb;
        result["init"] = cfg.seed == 0 ? "trap_adapted" : "random";
        result["config"] = cfg.to_json();
        run.out.json("minimize/result.json", result);

        CsvTable trace({"iteration", "energy"});
        for (std::size_t k = 0; k < mr.trace.size(); ++k)
            trace.cell(k * cfg.schedule.trace_stride).cell(mr.trace[k]).end_row();
        run.out.csv("minimize/trace.csv", trace);

        CsvTable energy({"term", "value"});
        const json ej = mr.energy.to_json();
        for (const auto& [k, v] : ej.items())
            energy.cell(k).cell(v.get<double>()).end_row();
        energy.cell(std::string("lambda")).cell(mr.lambda).end_row();
        energy.cell(std::string("lower_bound")).cell(lb).end_row();
        run.out.csv("minimize/energy.csv", energy);

        run.out.complex64("fields/u", cfg.field.grid, mr.u.values(), {{"quantity", "minimizer u"}});
        const VectorField AR = F.self_potential(density(mr.u));
        run.out.complex64("fields/A_R", cfg.field.grid, as_complex(AR),
                          {{"quantity", "A^R[rho] as Ax + i Ay"}, {"R", cfg.field.R}});
        run.out.complex64("fields/A_e", cfg.field.grid, as_complex(F.external_potential()),
                          {{"quantity", "external A_e as Ax + i Ay"}});
        export_kernel(run, cfg.field.R);

        run.check("minimize.converged", mr.converged,
                  "residual " + num(mr.residual) + " after " + std::to_string(mr.iterations) + " iterations");
        const double scale = std::max(1.0, std::abs(mr.energy.total));
        run.check("minimize.energy_consistency", std::abs(mr.energy.total - mr.energy.direct_total) <= 1e-8 * scale,
                  "assembled " + num(mr.energy.total) + " vs direct " + num(mr.energy.direct_total));
        run.check("minimize.lower_bound", magnetic >= lb - 1e-6 * scale,
                  "E - int V rho = " + num(magnetic) + " >= " + num(lb));
        if (cfg.field.trap.offset() <= 0.0)
            run.check("minimize.positivity", mr.energy.total >= -1e-12 * scale, "E = " + num(mr.energy.total));

        run.m.summary["minimize"] = result;
    });
}

// ------------------------------------------------------------------ rstudy

void run_rstudy(SuiteRun& run) {
    const auto& cfg = run.cfg;
    run.cell("rstudy", [&] {
        const double h = cfg.field.grid.spacing();
        const ConvergenceStudy st = convergence_study(cfg.field, cfg.R_list, cfg.schedule);
        json rows = json::array();
        CsvTable csv({"R", "E_af_R", "diff", "slope_fit"});
        for (const auto& r : st.rows) {
            const std::string name = "rstudy.R=" + num(r.R);
            if (r.R < 2.0 * h) {
                run.flag(name, "R below two grid spacings (h = " + num(h) + ")");
                continue;
            }
            if (!r.flags.empty() && !r.converged && r.iterations == 0) {
                run.m.checks.push_back({name, "error", r.flags.front()});
                continue;
            }
            run.check(name + ".converged", r.converged, "iterations " + std::to_string(r.iterations));
            csv.cell(r.R).cell(r.energy).cell(r.diff).cell(st.slope).end_row();
            rows.push_back({{"R", r.R}, {"E_af_R", r.energy}, {"diff", r.diff}, {"slope_fit", st.slope}});
        }
        run.out.csv("rstudy/rstudy.csv", csv);
        json j = st.to_json();
        j["config"] = cfg.to_json();
        run.out.json("rstudy/study.json", j);
        export_kernel(run, cfg.R_list.back());
        const bool defined = std::find(st.flags.begin(), st.flags.end(), "slope_undefined") == st.flags.end();
        run.check("rstudy.slope", defined && st.slope >= 0.7 && st.slope <= 1.3,
                  "fitted slope " + num(st.slope) + " (target [0.7, 1.3])");
        run.m.summary["rstudy"] = {{"rows", rows}, {"slope", st.slope}, {"monotone_diffs", st.monotone_diffs}};
    });
}

// ------------------------------------------------------------------ verify

void add_report(SuiteRun& run, const LemmaReport& rep) {
    const std::string file = "verify/" + rep.lemma_id + ".json";
    json j = rep.to_json();
    run.out.json(file, j);
    run.m.lemma_reports.push_back(file);
    run.m.summary["lemmas"].push_back(j);
    std::string detail = rep.statement;
    if (!rep.entries.empty()) {
        const auto worst = std::max_element(rep.entries.begin(), rep.entries.end(), [](const auto& a, const auto& b) {
            return a.empirical_constant < b.empirical_constant;
        });
        detail += "; max empirical constant " + num(worst->empirical_constant);
    }
    run.check("verify." + rep.lemma_id, rep.passed, detail);
}

LemmaReport kernel_scaling_report(const VerifyOptions& o, std::uint64_t seed) {
    LemmaReport rep;
    rep.lemma_id = "kernel_scaling";
    rep.statement = "||grad w_R||_p = R^(2/p-1) ||grad w_1||_p and R sup v independent of R";
    rep.scope = "exact radial quadrature on the listed p and R";
    double worst = 0.0;
    for (double p : o.kernel_p) {
        const double base = lp_norm_grad(p, 1.0);
        for (double R : o.kernel_R) {
            const double val = lp_norm_grad(p, R);
            const double pred = std::pow(R, 2.0 / p - 1.0) * base;
            const double rel = std::abs(val - pred) / pred;
            worst = std::max(worst, rel);
            rep.entries.push_back({"p=" + num(p), R, val / std::pow(R, 2.0 / p - 1.0),
                                   {{"p", p}, {"norm", val}, {"predicted", pred}, {"relative_error", rel}}, 1, seed});
        }
    }
    const double ref = SmearedKernel(1.0).sup_v();
    double spread = 0.0;
    for (double R : o.kernel_R) {
        const double s = R * SmearedKernel(R).sup_v();
        spread = std::max(spread, std::abs(s - ref) / ref);
        rep.entries.push_back({"R sup v", R, s, {{"sup_v", s / R}}, 1, seed});
    }
    rep.passed = worst <= 1e-8 && spread <= 1e-10;
    rep.details = {{"max_relative_error", worst}, {"sup_v_spread", spread}};
    return rep;
}

LemmaReport singular_report(const FormScan& scan) {
    LemmaReport rep;
    rep.lemma_id = "two_body_singular";
    rep.statement = "sup_f <f, |grad w_R(x1-x2)|^2 f> / <f, ((p^A)^2 + 1) f> grows slower than R^-0.2";
    rep.scope = "separable Gaussian family \"" + scan.family + "\"; necessary consequence of the operator bound";
    for (const auto& r : scan.rows)
        rep.entries.push_back({"singular", r.R, r.sup_singular,
                               {{"function", scan.functions[r.singular_witness].to_json()},
                                {"index", r.singular_witness},
                                {"sup_v_squared", r.sup_v_squared}},
                               scan.members, scan.seed});
    rep.passed = scan.hard_bound_holds && scan.singular_slope <= kFormSlopeLimit;
    rep.details = {{"slope", scan.singular_slope},
                   {"slope_limit", kFormSlopeLimit},
                   {"hard_bound_holds", scan.hard_bound_holds},
                   {"warnings", scan.warnings}};
    return rep;
}

LemmaReport mixed_report(const FormScan& bare, const FormScan& perturbed) {
    LemmaReport rep;
    rep.lemma_id = "two_body_mixed";
    rep.statement = "sup_f |<f, (p^A . grad-perp w_R + h.c.) f>| / <f, ((p^A)^2 + 1) f> grows slower than R^-0.2 and "
                    "stays within 2x between B0 = 0 and a perturbed B0 = 1 field";
    rep.scope = "separable Gaussian family \"" + bare.family + "\"; necessary consequence of the operator bound";
    double robust = 1.0;
    for (std::size_t k = 0; k < bare.rows.size(); ++k) {
        const auto& a = bare.rows[k];
        const auto& b = perturbed.rows[k];
        rep.entries.push_back({"B0=0", a.R, a.sup_mixed,
                               {{"function", bare.functions[a.mixed_witness].to_json()}, {"index", a.mixed_witness}},
                               bare.members, bare.seed});
        rep.entries.push_back({"B0=1 perturbed", b.R, b.sup_mixed,
                               {{"function", perturbed.functions[b.mixed_witness].to_json()},
                                {"index", b.mixed_witness},
                                {"field", perturbed.field.to_json()}},
                               perturbed.members, perturbed.seed});
        const double q = b.sup_mixed / a.sup_mixed;
        robust = std::max({robust, q, 1.0 / q});
    }
    rep.passed = bare.mixed_slope <= kFormSlopeLimit && perturbed.mixed_slope <= kFormSlopeLimit && robust <= 2.0;
    rep.details = {{"slope", bare.mixed_slope},
                   {"slope_perturbed", perturbed.mixed_slope},
                   {"slope_limit", kFormSlopeLimit},
                   {"field_ratio_max", robust}};
    return rep;
}

LemmaReport geometric_report(const GeomScan& scan) {
    LemmaReport rep;
    rep.lemma_id = "three_body_geometric";
    rep.statement = "sup |S(x,y,z)| rho^2 bounded per regime, independent of R; all-long sup <= 9/2";
    rep.scope = "rejection-sampled triangles from uniform, clustered and near-collinear mixtures";
    bool ok = true;
    for (const auto& c : scan.cells) {
        rep.entries.push_back({to_string(c.regime), c.R, c.sup, c.witness.to_json(), c.samples, scan.seed});
        ok = ok && std::isfinite(c.sup);
        if (c.regime == TriangleRegime::AllLong)
            ok = ok && c.sup <= 4.5 + 1e-9;
    }
    json spread = json::object();
    for (auto r : kTriangleRegimes) {
        spread[to_string(r)] = scan.spread(r);
        ok = ok && scan.spread(r) <= 2.0;
    }
    double eq = 0.0;
    for (double R : scan.R_list)
        for (double L : {2.5 * R, 4.0 * R, 10.0 * R}) {
            const Vec2 x{0.0, 0.0}, y{L, 0.0}, z{0.5 * L, 0.5 * std::sqrt(3.0) * L};
            eq = std::max(eq, std::abs(three_body_S(x, y, z, R) * 3.0 * L * L - 4.5));
        }
    ok = ok && eq <= 1e-10;
    rep.passed = ok;
    rep.details = {{"spread", spread}, {"equilateral_deviation", eq}, {"attempts", scan.attempts}};
    return rep;
}

LemmaReport hardy_report(const VerifyOptions& o, std::uint64_t seed, std::vector<HardyResult>& results) {
    LemmaReport rep;
    rep.lemma_id = "three_particle_hardy";
    rep.statement = "3 int |u|^2 / rho^2 <= int |grad u|^2 on R^6 at 3 sigma; circumradius^-2 <= 9 rho^-2";
    rep.scope = "separable Gaussian products, Monte Carlo in Jacobi coordinates; random triangles";
    std::vector<std::pair<std::string, std::size_t>> tests;
    for (std::size_t i = 0; i < o.hardy_tests; ++i)
        tests.emplace_back("random_separable", i);
    tests.emplace_back("isotropic_centered", 0);
    for (std::size_t i = 0; i < 3; ++i)
        tests.emplace_back("displaced", i);
    bool ok = true;
    for (const auto& [family, index] : tests) {
        const HardyTestFunction f = hardy_test_function(family, index, seed);
        const HardyResult r = hardy_mc(f, o.hardy_samples, seed);
        results.push_back(r);
        ok = ok && r.holds(3.0);
        rep.entries.push_back({family, 0.0, r.lhs / r.rhs,
                               {{"function", f.to_json()}, {"result", r.to_json()}}, r.samples, seed});
    }
    const CircumradiusScan cs = circumradius_scan(o.triangle_samples, seed);
    ok = ok && cs.max_ratio <= 1.0 + 1e-12 && cs.equilateral_deviation <= 1e-12;
    rep.entries.push_back({"circumradius", 0.0, cs.max_ratio, cs.to_json(), cs.samples, seed});
    rep.passed = ok;
    rep.details = {{"circumradius", cs.to_json()}, {"sigmas", 3.0}};
    return rep;
}

WaveFunction two_bump_state(const Grid2D& grid) {
    const auto a = WaveFunction::gaussian(grid, 0.5, {-0.8, 0.0});
    const auto b = WaveFunction::gaussian(grid, 0.5, {0.8, 0.3});
    ComplexField v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = a[i] + b[i];
    WaveFunction u(grid, v);
    u.normalize();
    return u;
}

LemmaReport magnetic_report(const VerifyOptions& o, const Grid2D& grid, std::uint64_t seed) {
    LemmaReport rep;
    rep.lemma_id = "magnetic_term_bound";
    rep.statement = "int |A[rho]|^2 rho <= 3/2 ||u||^4 int |grad |u||^2";
    rep.scope = "random smooth states, a Gaussian and a two-bump state; point kernel replaced by R = 2h";
    MagneticBoundChecker checker(grid);
    std::vector<std::pair<std::string, WaveFunction>> states;
    states.emplace_back("gaussian", WaveFunction::gaussian(grid, 1.0));
    states.emplace_back("two_bump", two_bump_state(grid));
    for (std::size_t i = 0; i < o.magnetic_states; ++i)
        states.emplace_back("random", WaveFunction::random(grid, seed * 1000003ULL + i));
    const double limit = kMagneticBoundConstant * (1.0 + 1e-3);
    bool ok = true;
    double homogeneity = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& [kind, u] = states[i];
        const MagneticBoundResult r = checker.check(u);
        ok = ok && r.scaled_ratio() <= limit;
        rep.entries.push_back(
            {kind, checker.radius(), r.scaled_ratio(), {{"index", i}, {"result", r.to_json()}}, 1, seed});
        if (i < 3) {
            ComplexField v = u.values();
            for (auto& z : v)
                z *= 2.0;
            const MagneticBoundResult s = checker.check(WaveFunction(grid, v));
            homogeneity = std::max(homogeneity, std::abs(s.scaled_ratio() - r.scaled_ratio()) / r.scaled_ratio());
        }
    }
    ok = ok && homogeneity <= 1e-12;
    rep.passed = ok;
    rep.details = {{"limit", limit}, {"homogeneity_error", homogeneity}, {"grid", {grid.box(), grid.n()}}};
    return rep;
}

LemmaReport diamagnetic_report(const VerifyOptions& o, const Grid2D& grid, std::uint64_t seed) {
    LemmaReport rep;
    rep.lemma_id = "diamagnetic";
    rep.statement = "int |(grad + iA) u|^2 >= int |grad |u||^2; grid-level violations shrink >= 4x on refinement";
    rep.scope = "random smooth (u, A_e) pairs on n and 2n grids; real u checked exactly";
    const DiamagneticStudy st = diamagnetic_refinement_study(o.diamagnetic_trials, seed, grid.box(), grid.n());
    for (const auto& t : st.trials)
        rep.entries.push_back({"complex", 0.0, std::max(t.coarse.violation(), t.fine.violation()),
                               {{"seed", t.seed},
                                {"field", t.field.to_json()},
                                {"coarse", t.coarse.to_json()},
                                {"fine", t.fine.to_json()}},
                               1, seed});
    double identity = 0.0;
    bool real_ok = true;
    for (std::size_t i = 0; i < 5; ++i) {
        const std::uint64_t s = seed * 1000003ULL + 7919 + i;
        WaveFunction u = WaveFunction::random(grid, s);
        for (auto& z : u.values())
            z = std::abs(z);
        const VectorField A = random_smooth_field(s).sample(grid);
        const DiamagneticResult r = diamagnetic_check(u, A);
        double a2 = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k)
            a2 += (A.x[k] * A.x[k] + A.y[k] * A.y[k]) * std::norm(u[k]);
        a2 *= grid.cell_area();
        real_ok = real_ok && r.lhs >= r.rhs;
        identity = std::max(identity, std::abs(r.lhs - r.rhs - a2) / r.lhs);
        rep.entries.push_back({"real", 0.0, r.rhs - r.lhs, {{"seed", s}, {"result", r.to_json()}}, 1, seed});
    }
    rep.passed = st.passed && real_ok && identity <= 1e-10;
    rep.details = {{"study", st.to_json()}, {"real_identity_error", identity}};
    return rep;
}

ExternalField perturbed_field() {
    return ExternalField(GaugeKind::ConstantPlusPerturbation, 1.0, {GaussianBump{0.5, {0.3, -0.2}, 0.7}});
}

void run_verify(SuiteRun& run) {
    const auto& cfg = run.cfg;
    const auto& o = cfg.verify;
    const std::uint64_t seed = cfg.seed;
    run.m.summary["lemmas"] = json::array();

    run.cell("verify.kernel_scaling", [&] { add_report(run, kernel_scaling_report(o, seed)); });

    std::optional<FormScan> bare;
    run.cell("verify.two_body_singular", [&] {
        bare = quadratic_form_ratios(o.form_family, o.form_R, seed, ExternalField{}, o.form_members);
        add_report(run, singular_report(*bare));
        CsvTable csv({"R", "sup_singular", "sup_mixed", "sup_v_squared"});
        for (const auto& r : bare->rows)
            csv.cell(r.R).cell(r.sup_singular).cell(r.sup_mixed).cell(r.sup_v_squared).end_row();
        run.out.csv("verify/form_ratios.csv", csv);
    });
    run.cell("verify.two_body_mixed", [&] {
        if (!bare)
            throw Error("two-body scan unavailable");
        const ExternalField field = cfg.field.field.is_zero() ? perturbed_field() : cfg.field.field;
        const FormScan pert = quadratic_form_ratios(o.form_family, o.form_R, seed, field, o.form_members);
        add_report(run, mixed_report(*bare, pert));
    });

    run.cell("verify.three_body_geometric", [&] {
        const GeomScan scan = geom_bound_scan(o.geom_samples, o.geom_R, seed);
        add_report(run, geometric_report(scan));
        CsvTable csv({"R", "regime", "sup", "samples"});
        json rows = json::array();
        for (const auto& c : scan.cells) {
            csv.cell(c.R).cell(to_string(c.regime)).cell(c.sup).cell(c.samples).end_row();
            rows.push_back({{"R", c.R}, {"regime", to_string(c.regime)}, {"sup", c.sup}});
        }
        run.out.csv("verify/geom_sup.csv", csv);
        run.m.summary["geom"] = rows;
    });

    run.cell("verify.three_particle_hardy", [&] {
        std::vector<HardyResult> results;
        add_report(run, hardy_report(o, seed, results));
        CsvTable csv({"family", "index", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "rhs_exact"});
        for (const auto& r : results)
            csv.cell(r.family)
                .cell(r.index)
                .cell(r.lhs)
                .cell(r.lhs_stderr)
                .cell(r.rhs)
                .cell(r.rhs_stderr)
                .cell(r.rhs_exact)
                .end_row();
        run.out.csv("verify/hardy.csv", csv);
    });

    run.cell("verify.magnetic_term_bound", [&] { add_report(run, magnetic_report(o, cfg.field.grid, seed)); });
    run.cell("verify.diamagnetic", [&] { add_report(run, diamagnetic_report(o, cfg.field.grid, seed)); });

    CsvTable summary({"lemma_id", "regime", "R", "empirical_constant", "sample_count", "seed", "passed"});
    for (const auto& j : run.m.summary["lemmas"])
        summary.cell(j["lemma_id"].get<std::string>())
            .cell(j.value("regime", std::string()))
            .cell(j.value("R", 0.0))
            .cell(j.value("empirical_constant", 0.0))
            .cell(j.value("sample_count", std::size_t{0}))
            .cell(j.value("seed", std::size_t{0}))
            .cell(std::string(j["passed"].get<bool>() ? "true" : "false"))
            .end_row();
    run.out.csv("verify/lemmas.csv", summary);
}

// ----------------------------------------------------------------- fewbody

std::string run_name(double beta, double R) { return "beta=" + num(beta) + ",R=" + num(R); }

void run_fewbody(SuiteRun& run) {
    const auto& cfg = run.cfg;
    const auto& o = cfg.fewbody;
    const double trend_R = cfg.R_list.back();
    std::vector<std::pair<double, double>> plan;
    auto add = [&](double b, double R) {
        if (std::find(plan.begin(), plan.end(), std::make_pair(b, R)) == plan.end())
            plan.emplace_back(b, R);
    };
    for (double b : o.betas)
        for (double R : cfg.R_list)
            add(b, R);
    for (double b : o.trend_betas)
        add(b, trend_R);

    std::vector<std::optional<FewBodyRun>> runs(plan.size());
    CsvTable csv({"beta", "R", "E2_half", "mf_energy", "product_energy", "gap", "fidelity", "iterations",
                  "apriori_ratio"});
    json rows = json::array();
    for (std::size_t k = 0; k < plan.size(); ++k) {
        const auto [beta, R] = plan[k];
        const std::string name = "fewbody." + run_name(beta, R);
        run.cell(name, [&] {
            FieldConfig fc = cfg.field;
            fc.beta = beta;
            fc.R = R;
            FewBodyRun r = fewbody_compare(fc, cfg.schedule, o.tol, o.point_cap);
            json j = {{"beta", r.beta},     {"R", r.R},       {"E2_half", r.E2_half},
                      {"mf_energy", r.mf_energy}, {"gap", r.gap}, {"fidelity", r.fidelity},
                      {"iterations", r.iterations}, {"flags", r.flags}};
            j["product_energy"] = r.product_energy;
            j["apriori"] = r.apriori.to_json();
            j["ground"] = r.ground.to_json();
            run.out.json("fewbody/run_beta" + num(beta) + "_R" + num(R) + ".json", j);
            csv.cell(beta).cell(R).cell(r.E2_half).cell(r.mf_energy).cell(r.product_energy).cell(r.gap);
            csv.cell(r.fidelity).cell(r.iterations).cell(r.apriori.ratio).end_row();
            rows.push_back({{"beta", beta}, {"R", R}, {"E2_half", r.E2_half}, {"mf_energy", r.mf_energy},
                            {"product_energy", r.product_energy}, {"gap", r.gap}, {"fidelity", r.fidelity},
                            {"apriori_ratio", r.apriori.ratio}});
            const double slack = 10.0 * o.tol * std::max(1.0, std::abs(r.product_energy));
            run.check(name + ".variational", r.E2_half <= r.product_energy + slack,
                      "E2/2 = " + num(r.E2_half) + " vs product " + num(r.product_energy));
            if (beta == 0.0) {
                const double rel = std::abs(r.E2_half - r.mf_energy) / std::abs(r.mf_energy);
                run.check(name + ".factorization", rel <= 1e-6 && r.fidelity >= 1.0 - 1e-6,
                          "relative energy gap " + num(rel) + ", fidelity " + num(r.fidelity));
            } else {
                run.check(name + ".apriori_finite", std::isfinite(r.apriori.lhs) && r.apriori.rhs > 0.0,
                          "Tr[((p^A)^2 + V) gamma] = " + num(r.apriori.lhs) + ", ratio " + num(r.apriori.ratio));
            }
            runs[k] = std::move(r);
        });
    }
    run.out.csv("fewbody/runs.csv", csv);

    for (double b : o.betas) {
        if (b == 0.0 || cfg.R_list.size() < 2)
            continue;
        std::vector<double> ratios;
        for (std::size_t k = 0; k < plan.size(); ++k)
            if (plan[k].first == b && runs[k])
                ratios.push_back(runs[k]->apriori.ratio);
        const std::string name = "fewbody.apriori_stability.beta=" + num(b);
        if (ratios.size() < cfg.R_list.size()) {
            run.m.checks.push_back({name, "error", "missing runs"});
            continue;
        }
        const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        run.check(name, *hi <= 1.2 * *lo, "ratios in [" + num(*lo) + ", " + num(*hi) + "]");
    }

    std::vector<FewBodyRun> trend_runs;
    for (double b : o.trend_betas)
        for (std::size_t k = 0; k < plan.size(); ++k)
            if (plan[k] == std::make_pair(b, trend_R) && runs[k])
                trend_runs.push_back(*runs[k]);
    const std::string tname = "fewbody.fidelity_trend.R=" + num(trend_R);
    if (trend_runs.size() == o.trend_betas.size()) {
        const FidelityTrend t = fidelity_trend(trend_runs);
        CsvTable fcsv({"beta", "fidelity"});
        json frows = json::array();
        for (const auto& r : t.rows) {
            fcsv.cell(r.beta).cell(r.overlap).end_row();
            frows.push_back({{"beta", r.beta}, {"fidelity", r.overlap}});
        }
        run.out.csv("fewbody/fidelity.csv", fcsv);
        run.out.json("fewbody/fidelity_trend.json", t.to_json());
        run.check(tname, t.nondecreasing, "overlap nondecreasing as beta decreases");
        run.m.summary["fidelity"] = frows;
    } else {
        run.m.checks.push_back({tname, "error", "missing runs"});
    }
    run.m.summary["fewbody"] = rows;
}

// -------------------------------------------------------------------- weyl

void run_weyl(SuiteRun& run) {
    const auto& cfg = run.cfg;
    run.cell("weyl", [&] {
        LevelCountOptions opt;
        opt.tie_tolerance = cfg.weyl.tie_tolerance;
        opt.seed = cfg.seed;
        const auto levels = count_levels(cfg.weyl.cutoffs, cfg.field, opt);
        CsvTable csv({"Lambda", "N_Lambda"});
        std::vector<double> xs, ys;
        json rows = json::array(), details = json::array();
        for (const auto& c : levels) {
            csv.cell(c.cutoff).cell(c.count).end_row();
            rows.push_back({{"Lambda", c.cutoff}, {"N_Lambda", c.count}});
            details.push_back(c.to_json());
            if (c.count > 0) {
                xs.push_back(c.cutoff);
                ys.push_back(static_cast<double>(c.count));
            }
        }
        run.out.csv("weyl/weyl.csv", csv);
        if (xs.size() < 4)
            throw DomainError("Weyl fit needs four cutoffs with nonzero counts");
        const double slope = loglog_slope(xs, ys);
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += std::log(xs[i]);
            my += std::log(ys[i]);
        }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        const double prefactor = std::exp(my - slope * mx);
        const double expected = 1.0 + 2.0 / cfg.field.trap.s();
        json fit = {{"exponent", slope},
                    {"prefactor", prefactor},
                    {"expected_exponent", expected},
                    {"levels", details},
                    {"config", cfg.to_json()}};
        run.out.json("weyl/fit.json", fit);
        run.check("weyl.exponent", std::abs(slope - expected) <= 0.2,
                  "fitted " + num(slope) + ", expected " + num(expected) + " +- 0.2");
        const auto& t = cfg.field.trap;
        if (cfg.field.field.is_zero() && t.c() == 1.0 && t.s() == 2.0 && t.offset() == 0.0)
            for (const auto& c : levels)
                if (c.cutoff == 10.0)
                    run.check("weyl.oscillator_count", c.count == 10,
                              "N(10) = " + std::to_string(c.count) + " (exact 10)");
        run.m.summary["weyl"] = {{"rows", rows}, {"exponent", slope}, {"prefactor", prefactor}, {"expected", expected}};
    });
}

} // namespace

RunManifest run_suite(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunWriter out(cfg.out_root);
    RunManifest m;
    m.suite = to_string(cfg.suite);
    m.seed = cfg.seed;
    m.run_dir = out.dir().string();
    m.config_source = cfg.source;
    m.config_sha256 = cfg.sha256;
    m.config = cfg.to_json();
    m.started = utc_timestamp();
    out.json("config.json", m.config);

    SuiteRun run(cfg, out, m);
    switch (cfg.suite) {
    case Suite::Minimize: run_minimize(run); break;
    case Suite::RStudy: run_rstudy(run); break;
    case Suite::Verify: run_verify(run); break;
    case Suite::FewBody: run_fewbody(run); break;
    case Suite::Weyl: run_weyl(run); break;
    }
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_report(m, out);
    m.files = out.files();
    m.files.push_back("manifest.json");
    out.json("manifest.json", m.to_json());
    return m;
}

// ------------------------------------------------------------------ report

namespace {

std::string md_escape(std::string s) {
    std::string out;
    for (char c : s) {
        if (c == '|')
            out += "\\|";
        else if (c == '\n')
            out += ' ';
        else
            out += c;
    }
    return out;
}

std::string cell_text(const json& v) {
    if (v.is_number_float())
        return format_double(v.get<double>());
    if (v.is_string())
        return v.get<std::string>();
    return v.dump();
}

} // namespace

std::vector<std::string> emit_report(const RunManifest& m, RunWriter& out) {
    std::vector<std::string> written;
    std::ostringstream md;
    md << "# anyon-mf " << (m.suite.empty() ? "run" : m.suite) << " report\n\n";
    if (!m.suite.empty()) {
        md << "| field | value |\n|---|---|\n";
        md << "| suite | " << m.suite << " |\n";
        md << "| seed | " << m.seed << " |\n";
        md << "| config | " << md_escape(m.config_source) << " |\n";
        md << "| config sha256 | " << m.config_sha256 << " |\n";
        md << "| started | " << m.started << " |\n";
        md << "| wall time (s) | " << format_double(m.wall_seconds) << " |\n\n";
    }
    if (m.checks.empty()) {
        md << "No checks were recorded.\n";
    } else {
        std::size_t passed = 0;
        for (const auto& c : m.checks)
            passed += c.status == "pass";
        md << "## Checks\n\n" << passed << " of " << m.checks.size() << " passed.\n\n";
        md << "| check | status | detail |\n|---|---|---|\n";
        for (const auto& c : m.checks)
            md << "| " << md_escape(c.name) << " | " << c.status << " | " << md_escape(c.detail) << " |\n";
        md << "\n";
    }
    const json& s = m.summary;

    if (s.contains("minimize")) {
        md << "## Minimizer\n\n| term | value |\n|---|---|\n";
        for (const auto& [k, v] : s["minimize"]["energy"].items())
            md << "| " << k << " | " << cell_text(v) << " |\n";
        md << "| lambda | " << cell_text(s["minimize"]["lambda"]) << " |\n";
        md << "| lower bound | " << cell_text(s["minimize"]["lower_bound"]) << " |\n";
        md << "| iterations | " << cell_text(s["minimize"]["iterations"]) << " |\n\n";
    }
    if (s.contains("rstudy")) {
        CsvTable csv({"R", "E_af_R", "diff", "slope_fit"});
        md << "## Energy against R\n\nFitted slope " << cell_text(s["rstudy"]["slope"]) << ".\n\n";
        md << "| R | E_af_R | diff |\n|---|---|---|\n";
        for (const auto& r : s["rstudy"]["rows"]) {
            csv.cell(r["R"].get<double>()).cell(r["E_af_R"].get<double>()).cell(r["diff"].get<double>());
            csv.cell(r["slope_fit"].get<double>()).end_row();
            md << "| " << cell_text(r["R"]) << " | " << cell_text(r["E_af_R"]) << " | " << cell_text(r["diff"])
               << " |\n";
        }
        md << "\n";
        out.csv("plots/energy_vs_R.csv", csv);
        written.push_back("plots/energy_vs_R.csv");
    }
    if (s.contains("lemmas")) {
        for (const auto& lem : s["lemmas"]) {
            md << "## " << lem["lemma_id"].get<std::string>() << "\n\n";
            md << md_escape(lem["statement"].get<std::string>()) << "\n\n";
            md << "Scope: " << md_escape(lem["scope"].get<std::string>()) << ". Result: "
               << (lem["passed"].get<bool>() ? "pass" : "fail") << ".\n\n";
            md << "| regime | R | empirical constant | samples | seed | witness |\n|---|---|---|---|---|---|\n";
            for (const auto& e : lem["entries"]) {
                std::string w = e["witness"].dump();
                if (w.size() > 160)
                    w = w.substr(0, 157) + "...";
                md << "| " << md_escape(e["regime"].get<std::string>()) << " | " << cell_text(e["R"]) << " | "
                   << cell_text(e["empirical_constant"]) << " | " << cell_text(e["sample_count"]) << " | "
                   << cell_text(e["seed"]) << " | `" << md_escape(w) << "` |\n";
            }
            md << "\n";
        }
    }
    if (s.contains("geom")) {
        CsvTable csv({"R", "regime", "sup"});
        for (const auto& r : s["geom"])
            csv.cell(r["R"].get<double>()).cell(r["regime"].get<std::string>()).cell(r["sup"].get<double>()).end_row();
        out.csv("plots/geom_sup_vs_R.csv", csv);
        written.push_back("plots/geom_sup_vs_R.csv");
    }
    if (s.contains("fewbody")) {
        md << "## Two-body comparison\n\n| beta | R | E2/2 | E_af | product | fidelity | a priori ratio |\n"
              "|---|---|---|---|---|---|---|\n";
        for (const auto& r : s["fewbody"])
            md << "| " << cell_text(r["beta"]) << " | " << cell_text(r["R"]) << " | " << cell_text(r["E2_half"])
               << " | " << cell_text(r["mf_energy"]) << " | " << cell_text(r["product_energy"]) << " | "
               << cell_text(r["fidelity"]) << " | " << cell_text(r["apriori_ratio"]) << " |\n";
        md << "\n";
    }
    if (s.contains("fidelity")) {
        CsvTable csv({"beta", "fidelity"});
        for (const auto& r : s["fidelity"])
            csv.cell(r["beta"].get<double>()).cell(r["fidelity"].get<double>()).end_row();
        out.csv("plots/fidelity_vs_beta.csv", csv);
        written.push_back("plots/fidelity_vs_beta.csv");
    }
    if (s.contains("weyl")) {
        CsvTable csv({"Lambda", "N_Lambda"});
        md << "## Level counts\n\nFitted exponent " << cell_text(s["weyl"]["exponent"]) << " (expected "
           << cell_text(s["weyl"]["expected"]) << ").\n\n| Lambda | N_Lambda |\n|---|---|\n";
        for (const auto& r : s["weyl"]["rows"]) {
            csv.cell(r["Lambda"].get<double>()).cell(r["N_Lambda"].get<std::size_t>()).end_row();
            md << "| " << cell_text(r["Lambda"]) << " | " << cell_text(r["N_Lambda"]) << " |\n";
        }
        md << "\n";
        out.csv("plots/levels_vs_cutoff.csv", csv);
        written.push_back("plots/levels_vs_cutoff.csv");
    }
    out.text("report.md", md.str());
    written.insert(written.begin(), "report.md");
    return written;
}

std::vector<std::string> emit_report(const RunManifest& m, const std::filesystem::path& dir) {
    RunWriter out(dir, RunWriter::Existing{});
    return emit_report(m, out);
}

} // namespace anyon
