#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "elscat/cli.hpp"

using namespace elscat;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    parse_config(in, c, "test.cfg");
    return c;
}

std::string config_error(const std::string& text) {
    try {
        parse(text).validate();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::path(::testing::TempDir()) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Config, DefaultsMatchExperiments) {
    const RunConfig c;
    EXPECT_EQ(c.medium.lambda, 2.0);
    EXPECT_EQ(c.medium.mu, 1.0);
    EXPECT_EQ(c.direction, Vec3(0, 0, 1));
    EXPECT_EQ(c.polarization, Vec3(1, 0, 0));
    EXPECT_EQ(c.source, Vec3(0, 0.05, 0.0866));
    EXPECT_EQ(c.grid.size(), 1300);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParsesKeysAndComments) {
    const RunConfig c = parse(
        "# bean run\n"
        "geometry = bean\n"
        "omega = 6.5   # trailing comment\n"
        "n = 5, 10,15\n"
        "\n"
        "nprime = 31\n"
        "mode = convergence-table\n"
        "incidence = plane-s\n"
        "direction = 1, 0, 0\n"
        "polarization = 0,1,0\n"
        "obs-grid = 10x20\n"
        "threads = 2\n");
    EXPECT_EQ(c.geometry, "bean");
    EXPECT_EQ(c.medium.omega, 6.5);
    EXPECT_EQ(c.n, (std::vector<int>{5, 10, 15}));
    EXPECT_EQ(c.nprime, 31);
    EXPECT_EQ(c.mode, RunMode::ConvergenceTable);
    EXPECT_EQ(c.incidence, IncidenceKind::PlaneS);
    EXPECT_EQ(c.grid.n_theta, 10);
    EXPECT_EQ(c.grid.n_phi, 20);
    EXPECT_EQ(c.threads, 2);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_EQ(config_error("geometry = bean\nn =\n"), "test.cfg:2: n: empty value");
    EXPECT_NE(config_error("omega = 1\n\ncolour = red\n").find("test.cfg:3: unknown key 'colour'"), std::string::npos);
    EXPECT_NE(config_error("n = 5\nomega = fast\n").find("test.cfg:2: omega"), std::string::npos);
    EXPECT_NE(config_error("just words\n").find("test.cfg:1: expected"), std::string::npos);
    EXPECT_NE(config_error("obs-grid = 26\n").find("test.cfg:1: obs-grid"), std::string::npos);
    EXPECT_NE(config_error("mode = sideways\n").find("test.cfg:1"), std::string::npos);
}

TEST(Config, SemanticValidation) {
    EXPECT_NE(config_error("n = 0\n"), "");
    EXPECT_NE(config_error("n = 5\nnprime = 5\n"), "");
    EXPECT_NE(config_error("geometry = torus\n"), "");
    EXPECT_NE(config_error("mode = pointsource-test\nincidence = plane\n"), "");
    EXPECT_NE(config_error("mode = planewave-selfconvergence\n"), "");
    EXPECT_NE(config_error("mode = planewave-selfconvergence\nincidence = plane\nn = 5,40\n"), "");
    EXPECT_NE(config_error("incidence = plane\ndirection = 0,0,2\n"), "");
    EXPECT_NE(config_error("threads = 0\n"), "");
    EXPECT_THROW(parse("mu = -1\n").validate(), InvalidMedium);
    EXPECT_THROW(load_config("/nonexistent/elscat.cfg"), ConfigError);
}

TEST(Table, SingleRowAndMonotoneFlag) {
    std::ostringstream text, csv;
    emit_convergence_table({{5, 2e-4, 0.1, 0.01}}, "err_ps", &text, &csv);
    EXPECT_NE(text.str().find("monotone: yes"), std::string::npos);
    EXPECT_EQ(csv.str(), "n,err_ps,t_coe,t_sol\n5,0.0002,0.1,0.01\n");

    std::ostringstream bad;
    emit_convergence_table({{5, 1e-3, 0, 0}, {15, 2e-3, 0, 0}, {25, 1e-6, 0, 0}}, "err_ps", &bad, nullptr);
    EXPECT_NE(bad.str().find("<- not decreasing"), std::string::npos);
    EXPECT_NE(bad.str().find("monotone: no"), std::string::npos);
    EXPECT_TRUE(monotone_decreasing({{5, 1e-3, 0, 0}, {15, 1e-5, 0, 0}, {25, 1e-7, 0, 0}}));
    EXPECT_THROW(emit_convergence_table({}, "e", &bad, nullptr), ConfigError);
}

TEST(Run, ZeroAmplitudeSolveGivesZeroCsv) {
    RunConfig c = parse("geometry = sphere\nn = 8\namplitude = 0\n");
    std::ostringstream text, log;
    ASSERT_EQ(run(c, text, log), 0);
    std::istringstream in(text.str());
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        const auto parts = detail::split(line, ',');
        ASSERT_EQ(parts.size(), 14u);
        for (std::size_t i = 2; i < parts.size(); ++i) EXPECT_EQ(std::stod(parts[i]), 0.0);
    }
    EXPECT_EQ(rows, 1300);
}

TEST(Run, DeterministicCsvAndCoefficients) {
    const fs::path dir = scratch_dir("elscat_det");
    RunConfig c = parse("geometry = cushion\nn = 4\nthreads = 2\n");
    std::string first;
    for (int k = 0; k < 2; ++k) {
        c.out = (dir / ("ff" + std::to_string(k) + ".csv")).string();
        c.coefficients = (dir / ("co" + std::to_string(k) + ".csv")).string();
        std::ostringstream text, log;
        ASSERT_EQ(run(c, text, log), 0);
        EXPECT_NE(log.str().find("T_coe"), std::string::npos);
    }
    EXPECT_EQ(slurp(dir / "ff0.csv"), slurp(dir / "ff1.csv"));
    EXPECT_EQ(slurp(dir / "co0.csv"), slurp(dir / "co1.csv"));
    EXPECT_FALSE(slurp(dir / "ff0.csv").empty());
}

TEST(Run, PointSourceTableOnEllipsoid) {
    RunConfig c = parse("geometry = ellipsoid\nmode = pointsource-test\nn = 5\n");
    const std::vector<TableRow> rows = error_table(c, nullptr);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_LT(rows[0].error, 1e-3);
    EXPECT_GT(rows[0].error, 1e-5);
    EXPECT_GT(rows[0].t_coe, 0.0);
}

TEST(Run, SelfConvergenceUsesCache) {
    const fs::path dir = scratch_dir("elscat_cache");
    RunConfig c = parse("geometry = sphere\nmode = planewave-selfconvergence\nincidence = plane\nn = 3,5\n"
                        "reference-n = 9\nobs-grid = 6x8\n");
    c.cache_dir = dir.string();
    std::ostringstream t1, l1, t2, l2;
    ASSERT_EQ(run(c, t1, l1), 0);
    EXPECT_NE(l1.str().find("computing reference"), std::string::npos);
    ASSERT_EQ(run(c, t2, l2), 0);
    EXPECT_NE(l2.str().find("read from"), std::string::npos);
    EXPECT_EQ(t1.str().substr(0, 40), t2.str().substr(0, 40));
    EXPECT_NE(t1.str().find("monotone: yes"), std::string::npos);
    // A different reference degree is a different cache entry.
    c.reference_n = 10;
    std::ostringstream t3, l3;
    ASSERT_EQ(run(c, t3, l3), 0);
    EXPECT_NE(l3.str().find("computing reference"), std::string::npos);
}

TEST(Binary, ExitCodesAndOutput) {
    const char* bin = std::getenv("ELSCAT_BIN");
    if (!bin) GTEST_SKIP() << "ELSCAT_BIN not set";
    const fs::path dir = scratch_dir("elscat_bin");
    const fs::path out = dir / "ff.csv";
    const fs::path cfg = dir / "run.cfg";
    {
        std::ofstream f(cfg);
        f << "geometry = sphere\nn = 3\n";
    }
    const std::string ok = std::string(bin) + " --config " + cfg.string() + " --amplitude 0 --obs-grid 3x4 --out " +
                           out.string() + " 2>/dev/null";
    EXPECT_EQ(std::system(ok.c_str()), 0);
    const std::string csv = slurp(out);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
    {
        std::ofstream f(cfg);
        f << "geometry = sphere\nn = -2\n";
    }
    const std::string bad = std::string(bin) + " --config " + cfg.string() + " >/dev/null 2>&1";
    const int status = std::system(bad.c_str());
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 2);
}
