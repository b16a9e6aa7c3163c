#include "anyon/cli.hpp"
#include "anyon/error.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"anyon-mf: average-field anyon experiments"};
    std::string suite, config, out;
    std::optional<std::uint64_t> seed;
    app.add_option("suite", suite, "minimize | rstudy | verify | fewbody | weyl")->required();
    app.add_option("--config", config, "JSON experiment config")->required();
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", out, "root directory for runs (default runs)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    anyon::ExperimentConfig cfg;
    try {
        cfg = anyon::parse_config(config, anyon::suite_from_string(suite, ""));
    } catch (const anyon::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (seed)
        cfg.seed = *seed;
    if (!out.empty())
        cfg.out_root = out;

    try {
        const auto m = anyon::run_suite(cfg);
        for (const auto& c : m.checks)
            std::cout << c.status << "  " << c.name << "  " << c.detail << "\n";
        std::cout << "run directory: " << m.run_dir << "\n"
                  << (m.passed() ? "PASS" : "FAIL") << " (" << m.checks.size() << " checks, " << m.wall_seconds
                  << " s)\n";
        return m.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
