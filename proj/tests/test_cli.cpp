#include "anyon/cli.hpp"
#include "anyon/error.hpp"
#include "anyon/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

using namespace anyon;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    fs::path p = fs::temp_directory_path() / ("anyon_test_" + tag + "_" + std::to_string(rng()));
    fs::create_directories(p);
    return p;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string config_error_path(const std::string& text, std::optional<Suite> s = Suite::Minimize) {
    try {
        parse_config_text(text, s);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<none>";
}

#ifdef ANYON_MF_TOOL
int run_tool(const std::string& args) {
    const std::string cmd = std::string(ANYON_MF_TOOL) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

} // namespace

TEST(ParseConfig, MinimalConfigFillsDefaults) {
    const auto cfg = parse_config_text("{}", Suite::Minimize);
    EXPECT_EQ(cfg.field.grid.n(), 128u);
    EXPECT_EQ(cfg.field.grid.box(), 8.0);
    EXPECT_EQ(cfg.schedule.tol, 1e-8);
    EXPECT_EQ(cfg.seed, 0u);
    EXPECT_EQ(cfg.sha256, sha256_hex("{}"));
    const auto j = cfg.to_json();
    EXPECT_EQ(j["seed"], 0);
    EXPECT_EQ(j["grid"]["n"], 128);
}

TEST(ParseConfig, UnknownKeyIsNamed) {
    try {
        parse_config_text(R"({"betaa": 1.0})", Suite::Minimize);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.path(), "/betaa");
        EXPECT_NE(std::string(e.what()).find("betaa"), std::string::npos);
    }
}

TEST(ParseConfig, NestedPaths) {
    EXPECT_EQ(config_error_path(R"({"grid": {"L": 8, "m": 3}})"), "/grid/m");
    EXPECT_EQ(config_error_path(R"({"grid": {"n": 63}})"), "/grid/n");
    EXPECT_EQ(config_error_path(R"({"schedule": {"tol": -1}})"), "/schedule/tol");
    EXPECT_EQ(config_error_path(R"({"trap": {"c": 1, "z": 0}})"), "/trap/z");
    EXPECT_EQ(config_error_path(R"({"R_list": [0.5, 0.5]})"), "/R_list/1");
    EXPECT_EQ(config_error_path(R"({"verify": {"hardy_samples": 10}})"), "/verify/hardy_samples");
    EXPECT_EQ(config_error_path(R"({"beta": "big"})"), "/beta");
    EXPECT_EQ(config_error_path(R"({"seed": -3})"), "/seed");
    EXPECT_EQ(config_error_path("{not json"), "");
}

TEST(ParseConfig, SuiteHandling) {
    EXPECT_EQ(parse_config_text(R"({"suite": "weyl"})").suite, Suite::Weyl);
    EXPECT_EQ(config_error_path(R"({"suite": "weyl"})", Suite::Verify), "/suite");
    EXPECT_EQ(config_error_path("{}", std::nullopt), "/suite");
    EXPECT_THROW(suite_from_string("solve"), ConfigError);
}

TEST(ParseConfig, SuiteSpecificDefaultsAndLimits) {
    EXPECT_EQ(parse_config_text("{}", Suite::RStudy).R_list.size(), 4u);
    EXPECT_EQ(parse_config_text(R"({"grid": {"L": 4, "n": 32}})", Suite::FewBody).R_list,
              (std::vector<double>{0.5, 0.25}));
    EXPECT_EQ(config_error_path("{}", Suite::FewBody), "/grid/n");
    EXPECT_EQ(config_error_path(R"({"R_list": [0.5, 0.25]})", Suite::RStudy), "/R_list");
}

TEST(ParseConfig, MissingFile) { EXPECT_THROW(parse_config("/nonexistent/anyon.json"), ConfigError); }

TEST(ParseConfig, FileHashIsRecorded) {
    const auto dir = scratch_dir("hash");
    const std::string text = R"({"suite": "minimize", "beta": 0.5})";
    const auto cfg = parse_config(write_file(dir, "c.json", text));
    EXPECT_EQ(cfg.sha256, sha256_hex(text));
    EXPECT_EQ(cfg.field.beta, 0.5);
    fs::remove_all(dir);
}

TEST(Io, Sha256KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, FormatDoubleRoundTrips) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        EXPECT_EQ(std::stod(format_double(x)), x);
    }
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Io, Complex64IsLittleEndianFloatPairs) {
    const ComplexField v{{1.0, -2.0}, {0.5, 0.0}};
    const std::string b = encode_complex64(v);
    ASSERT_EQ(b.size(), 16u);
    EXPECT_EQ(static_cast<unsigned char>(b[3]), 0x3f);
    EXPECT_EQ(static_cast<unsigned char>(b[2]), 0x80);
    EXPECT_EQ(static_cast<unsigned char>(b[0]), 0x00);
    const auto back = decode_complex64(b);
    EXPECT_EQ(back[0], cplx(1.0, -2.0));
    EXPECT_EQ(back[1], cplx(0.5, 0.0));
}

TEST(Io, SidecarRecordsShapeAndSpacing) {
    const auto j = complex64_sidecar(Grid2D(8.0, 64), "u.c64");
    EXPECT_EQ(j["shape"], nlohmann::json({64, 64}));
    EXPECT_EQ(j["spacing"], 0.125);
    EXPECT_EQ(j["dtype"], "complex64");
}

TEST(Io, CsvRowsMustMatchHeader) {
    CsvTable t({"a", "b"});
    t.cell(1.0).cell(std::size_t{2}).end_row();
    EXPECT_EQ(t.str(), "a,b\n1,2\n");
    t.cell(1.0);
    EXPECT_THROW(t.end_row(), Error);
}

TEST(Io, RunWriterUsesFreshDirectories) {
    const auto root = scratch_dir("writer");
    RunWriter a(root), b(root);
    EXPECT_NE(a.dir(), b.dir());
    a.text("x/y.txt", "hi");
    EXPECT_EQ(slurp(a.dir() / "x/y.txt"), "hi");
    EXPECT_EQ(a.files(), std::vector<std::string>{"x/y.txt"});
    fs::remove_all(root);
}

TEST(Report, EmptyManifestGivesValidReport) {
    const auto dir = scratch_dir("empty");
    const auto files = emit_report(RunManifest{}, dir);
    ASSERT_EQ(files, std::vector<std::string>{"report.md"});
    const std::string md = slurp(dir / "report.md");
    EXPECT_EQ(md.rfind("# anyon-mf run report", 0), 0u);
    EXPECT_NE(md.find("No checks were recorded."), std::string::npos);
    EXPECT_TRUE(RunManifest{}.passed());
    fs::remove_all(dir);
}

TEST(Report, ManifestJsonRoundTrip) {
    RunManifest m;
    m.suite = "verify";
    m.seed = 4;
    m.checks.push_back({"a", "fail", "x"});
    const auto back = RunManifest::from_json(m.to_json());
    EXPECT_EQ(back.suite, "verify");
    EXPECT_EQ(back.seed, 4u);
    ASSERT_EQ(back.checks.size(), 1u);
    EXPECT_EQ(back.exit_code(), 1);
}

TEST(RunSuite, MinimizeWritesArtifactsDeterministically) {
    const auto root = scratch_dir("minimize");
    auto cfg = parse_config_text(R"({"grid": {"L": 8, "n": 64}, "beta": 1.0, "R": 0.5})", Suite::Minimize);
    cfg.out_root = root;
    const auto a = run_suite(cfg);
    const auto b = run_suite(cfg);
    EXPECT_EQ(a.exit_code(), 0);
    EXPECT_NE(a.run_dir, b.run_dir);
    for (const char* f : {"minimize/trace.csv", "minimize/energy.csv", "kernel/radial_table.csv"})
        EXPECT_EQ(slurp(fs::path(a.run_dir) / f), slurp(fs::path(b.run_dir) / f)) << f;
    EXPECT_TRUE(fs::exists(fs::path(a.run_dir) / "fields/u.c64"));
    EXPECT_EQ(fs::file_size(fs::path(a.run_dir) / "fields/u.c64"), 64u * 64u * 8u);
    const auto side = nlohmann::json::parse(slurp(fs::path(a.run_dir) / "fields/u.json"));
    EXPECT_EQ(side["spacing"], 0.125);
    EXPECT_EQ(slurp(fs::path(a.run_dir) / "kernel/radial_table.csv").substr(0, 4), "r,v\n");
    const auto man = nlohmann::json::parse(slurp(fs::path(a.run_dir) / "manifest.json"));
    EXPECT_EQ(man["seed"], 0);
    EXPECT_EQ(man["config_sha256"], cfg.sha256);
    EXPECT_TRUE(fs::exists(fs::path(a.run_dir) / "report.md"));
    fs::remove_all(root);
}

TEST(RunSuite, RStudyFlagsUnresolvedRadius) {
    const auto root = scratch_dir("rstudy");
    auto cfg = parse_config_text(R"({"grid": {"L": 8, "n": 32}, "beta": 1.0, "R_list": [1.0, 0.75, 0.5, 0.25]})",
                                 Suite::RStudy);
    cfg.out_root = root;
    const auto m = run_suite(cfg);
    EXPECT_NE(m.exit_code(), 0);
    bool flagged = false;
    for (const auto& c : m.checks)
        flagged = flagged || (c.name == "rstudy.R=0.25" && c.status == "flagged");
    EXPECT_TRUE(flagged);
    const std::string csv = slurp(fs::path(m.run_dir) / "rstudy/rstudy.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "R,E_af_R,diff,slope_fit");
    EXPECT_EQ(slurp(fs::path(m.run_dir) / "plots/energy_vs_R.csv"), csv);
    fs::remove_all(root);
}

TEST(RunSuite, VerifyListsSevenLemmaReports) {
    const auto root = scratch_dir("verify");
    auto cfg = parse_config_text(R"({"grid": {"L": 8, "n": 128}, "verify": {
        "geom_samples": 10000, "hardy_tests": 2, "hardy_samples": 100000, "triangle_samples": 10000,
        "diamagnetic_trials": 2, "magnetic_states": 2, "form_members": 4, "form_R": [0.25, 0.125],
        "kernel_R": [1.0, 0.5]}})",
                                 Suite::Verify);
    cfg.out_root = root;
    const auto m = run_suite(cfg);
    ASSERT_EQ(m.lemma_reports.size(), 7u);
    for (const auto& f : m.lemma_reports) {
        const auto j = nlohmann::json::parse(slurp(fs::path(m.run_dir) / f));
        for (const char* k : {"lemma_id", "regime", "R", "empirical_constant", "witness", "sample_count", "seed"})
            EXPECT_TRUE(j.contains(k)) << f << " " << k;
    }
    EXPECT_EQ(m.checks.size(), 7u);
    const std::string md = slurp(fs::path(m.run_dir) / "report.md");
    EXPECT_NE(md.find("## three_body_geometric"), std::string::npos);
    EXPECT_TRUE(fs::exists(fs::path(m.run_dir) / "plots/geom_sup_vs_R.csv"));
    fs::remove_all(root);
}

#ifdef ANYON_MF_TOOL
TEST(Tool, ExitCodes) {
    const auto dir = scratch_dir("tool");
    const auto bad = write_file(dir, "bad.json", R"({"betaa": 1})");
    EXPECT_EQ(run_tool("minimize --config " + bad.string() + " --out " + dir.string()), 2);
    EXPECT_EQ(run_tool("minimize --config " + (dir / "missing.json").string()), 2);
    EXPECT_EQ(run_tool("frobnicate --config " + bad.string()), 2);
    const auto good = write_file(dir, "good.json", R"({"grid": {"L": 8, "n": 32}, "beta": 0, "R": 1})");
    EXPECT_EQ(run_tool("minimize --config " + good.string() + " --seed 3 --out " + dir.string()), 0);
    const auto flagged = write_file(dir, "flag.json", R"({"grid": {"L": 8, "n": 32}, "beta": 1, "R_list": [1, 0.5, 0.25]})");
    EXPECT_EQ(run_tool("rstudy --config " + flagged.string() + " --out " + dir.string()), 1);
    fs::remove_all(dir);
}
#endif
