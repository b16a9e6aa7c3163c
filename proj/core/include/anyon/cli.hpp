#pragma once

// Experiment harness behind the anyon-mf tool: config parsing, suite
// orchestration, run manifests and report emission.

#include "anyon/afm_solver.hpp"
#include "anyon/fewbody_ed.hpp"
#include "anyon/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace anyon {

enum class Suite { Minimize, RStudy, Verify, FewBody, Weyl };

std::string to_string(Suite s);
// Throws ConfigError at `path` for unknown names.
Suite suite_from_string(const std::string& s, const std::string& path = "/suite");

struct VerifyOptions {
    std::vector<double> kernel_p{3.0, 4.0, 8.0};
    std::vector<double> kernel_R{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
    std::size_t geom_samples = 100000; // per regime and R
    std::vector<double> geom_R{1e-2, 1e-1, 1.0};
    std::size_t hardy_tests = 20;      // random separable members
    std::size_t hardy_samples = 1000000;
    std::size_t triangle_samples = 1000000;
    std::size_t diamagnetic_trials = 50;
    std::size_t magnetic_states = 50;
    std::string form_family = "mixed";
    std::vector<double> form_R{0.25, 0.125, 0.0625, 0.03125, 0.015625};
    std::size_t form_members = 48;

    nlohmann::json to_json() const;
};

struct FewBodyOptions {
    std::vector<double> betas{1.0, 0.5};                 // crossed with R_list
    std::vector<double> trend_betas{1.0, 0.5, 0.25, 0.0}; // at the last R
    double tol = 1e-8;
    std::size_t point_cap = kDefaultPointCap;

    nlohmann::json to_json() const;
};

struct WeylOptions {
    std::vector<double> cutoffs{10.0, 14.0, 20.0, 28.0, 40.0};
    double tie_tolerance = 1e-6;

    nlohmann::json to_json() const;
};

struct ExperimentConfig {
    Suite suite = Suite::Minimize;
    FieldConfig field; // grid, external field, trap, beta, R
    std::vector<double> R_list;
    Schedule schedule;
    std::uint64_t seed = 0;
    std::filesystem::path out_root = "runs";
    std::string source;  // config file path
    std::string sha256;  // of the config file bytes
    VerifyOptions verify;
    FewBodyOptions fewbody;
    WeylOptions weyl;

    // Resolved configuration with every default filled in.
    nlohmann::json to_json() const;
};

// Strict schema: unknown keys and ill-typed values throw ConfigError naming
// the JSON path. A suite given here overrides (and must agree with) the
// file's "suite" key.
ExperimentConfig parse_config(const std::filesystem::path& path, std::optional<Suite> suite = std::nullopt);
ExperimentConfig parse_config_text(const std::string& text, std::optional<Suite> suite = std::nullopt,
                                   const std::string& source = "<memory>");

struct CheckRecord {
    std::string name;
    std::string status; // pass | fail | flagged | error
    std::string detail;
};

struct RunManifest {
    std::string suite;
    std::uint64_t seed = 0;
    std::string run_dir;
    std::string config_source;
    std::string config_sha256;
    nlohmann::json config = nlohmann::json::object();
    std::string started;
    double wall_seconds = 0.0;
    std::vector<std::string> files;
    std::vector<std::string> lemma_reports;
    std::vector<CheckRecord> checks;
    nlohmann::json summary = nlohmann::json::object(); // suite results feeding the report

    bool passed() const;
    int exit_code() const { return passed() ? 0 : 1; }
    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

// Runs the suite under out_root/<timestamp>/, writes its outputs, the report
// and manifest.json. Module errors become "error" checks; sibling cells
// still run.
RunManifest run_suite(const ExperimentConfig& cfg);

// report.md plus plot CSVs under plots/. Returns the names written.
std::vector<std::string> emit_report(const RunManifest& manifest, RunWriter& writer);
std::vector<std::string> emit_report(const RunManifest& manifest, const std::filesystem::path& dir);

} // namespace anyon
