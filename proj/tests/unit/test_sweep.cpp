#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "zigzag/sweep.hpp"

using namespace zigzag;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("zigzag_sweep_" + name);
    fs::remove_all(p);
    return p;
}

SweepConfig small_config(const fs::path& dir) {
    SweepConfig c;
    c.g_values = {0.1};
    c.omega2_values = {1.0, 2.0};
    c.L_values = {6, 8};
    c.run.d = 4;
    c.run.D_max = 8;
    c.run.energy_tol = 1e-10;
    c.output_dir = dir.string();
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(SweepConfig, ParsesAndRejectsUnknownKeys) {
    const auto j = nlohmann::json::parse(
        R"({"g_values":[0.05,0.1],"omega2_values":[1.0],"L_values":[8],"d":6,"init":"random","seed":4,"output_dir":"x"})");
    const SweepConfig c = sweep_config_from_json(j);
    EXPECT_EQ(c.g_values.size(), 2u);
    EXPECT_EQ(c.run.d, 6);
    EXPECT_EQ(c.run.init, InitStrategy::Random);
    EXPECT_EQ(c.run.seed, 4u);
    EXPECT_EQ(sweep_config_from_json(to_json(c)).run.d, 6);
    EXPECT_THROW(sweep_config_from_json(nlohmann::json::parse(R"({"g_values":[0.1],"omega2_values":[1.0],"L_values":[8],"colour":1})")),
                 std::invalid_argument);
    EXPECT_THROW(sweep_config_from_json(nlohmann::json::parse("[1]")), std::invalid_argument);
}

TEST(SweepConfig, OutputDirectoryFallsBackToEnvironment) {
    ::setenv(kOutputDirEnv, "/tmp/zigzag-env-dir", 1);
    const SweepConfig c = sweep_config_from_json(nlohmann::json::parse(R"({"g_values":[0.1],"omega2_values":[1.0],"L_values":[8]})"));
    EXPECT_EQ(c.output_dir, "/tmp/zigzag-env-dir");
    ::unsetenv(kOutputDirEnv);
    EXPECT_EQ(sweep_config_from_json(nlohmann::json::parse(R"({"g_values":[0.1],"omega2_values":[1.0],"L_values":[8]})")).output_dir, "zigzag-out");
}

TEST(SweepConfig, ValidationRejectsBadGrids) {
    SweepConfig c = small_config("unused");
    EXPECT_NO_THROW(c.validate());
    c.L_values = {};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config("unused");
    c.jobs = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SweepConfig, LoadsFileWithComments) {
    const fs::path dir = scratch_dir("cfgfile");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "c.json");
        f << "{\n  // grid\n  \"g_values\": [0.1], \"omega2_values\": [1.0], \"L_values\": [8]\n}\n";
    }
    EXPECT_EQ(load_sweep_config((dir / "c.json").string()).L_values, std::vector<int>{8});
    EXPECT_THROW(load_sweep_config((dir / "none.json").string()), std::runtime_error);
}

TEST(Sweep, PointNamesAndPaths) {
    PointSpec p;
    p.g = 0.1;
    p.omega2 = 1.5;
    p.L = 32;
    EXPECT_EQ(record_relative_path(p), "g_0.100000/omega2_1.500000_L32.json");
    p.alpha = 3.0;
    EXPECT_NE(record_relative_path(p).find("alpha_3.000000"), std::string::npos);
    EXPECT_NE(point_id(p).find("L=32"), std::string::npos);
}

TEST(Sweep, SinglePointRunsAndIsJournalled) {
    const fs::path dir = scratch_dir("single");
    SweepConfig c = small_config(dir);
    c.omega2_values = {1.0};
    c.L_values = {6};
    const SweepOutcome o = run_sweep(c);
    EXPECT_EQ(o.executed, 1);
    EXPECT_EQ(o.failed, 0);
    const auto manifest = read_manifest(dir.string());
    ASSERT_EQ(manifest.size(), 1u);
    EXPECT_EQ(manifest.begin()->second, "done");

    PointSpec p{1.0, 0.1, 1.0, 6};
    const RunRecord r = load_run_record((dir / record_relative_path(p)).string());
    EXPECT_EQ(r.point.L, 6);
    EXPECT_EQ(r.d, 4);
    EXPECT_TRUE(r.report.converged);
    EXPECT_EQ(r.local_energies.size(), 4u);
    EXPECT_FALSE(r.code_revision.empty());
    EXPECT_TRUE(fs::exists(dir / "config.json"));
    const std::string summary = slurp(dir / "summary.csv");
    EXPECT_EQ(summary.substr(0, summary.find('\n')), "g,omega2,L,xi_L,energy");
    EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 2);
}

TEST(Sweep, RecordRoundTrip) {
    const fs::path dir = scratch_dir("roundtrip");
    SweepConfig c = small_config(dir);
    LocalBasisCache cache;
    const RunRecord r = run_point({1.0, 0.1, 1.0, 6}, c.run, cache);
    const RunRecord back = run_record_from_json(nlohmann::json::parse(to_json(r).dump()));
    EXPECT_EQ(back.energy, r.energy);
    EXPECT_EQ(back.observables.xi_L, r.observables.xi_L);
    EXPECT_EQ(back.observables.entropy_profile, r.observables.entropy_profile);
    EXPECT_EQ(back.observables.correlation_profile, r.observables.correlation_profile);
    EXPECT_EQ(back.report.sweep_energies, r.report.sweep_energies);
    EXPECT_EQ(back.init, r.init);
    EXPECT_EQ(back.point.omega2, 1.0);
}

TEST(Sweep, ResumeRunsOnlyMissingPoints) {
    const fs::path dir = scratch_dir("resume");
    SweepConfig c = small_config(dir);
    c.L_values = {6};
    EXPECT_EQ(run_sweep(c).executed, 2);

    // Widen the grid and resume: only the new points run.
    c.L_values = {6, 8};
    c.resume = true;
    const SweepOutcome o = run_sweep(c);
    EXPECT_EQ(o.executed, 2);
    EXPECT_EQ(o.skipped, 2);
    EXPECT_EQ(read_manifest(dir.string()).size(), 4u);

    // A second resume is a no-op.
    const SweepOutcome again = run_sweep(c);
    EXPECT_EQ(again.executed, 0);
    EXPECT_EQ(again.skipped, 4);
}

TEST(Sweep, InterruptedPointResumesFromCheckpoint) {
    const fs::path dir = scratch_dir("interrupt");
    SweepConfig c = small_config(dir);
    LocalBasisCache cache;
    const PointSpec p{1.0, 0.1, 2.0, 8};
    const fs::path mps = dir / "partial.mps";
    fs::create_directories(dir);
    RunSettings one = c.run;
    one.sweep_limit = 1;
    one.min_sweeps = 1;
    run_point(p, one, cache, mps.string());
    ASSERT_TRUE(fs::exists(mps));
    const RunRecord r = run_point(p, c.run, cache, mps.string());
    EXPECT_EQ(r.init, "checkpoint");
    const RunRecord fresh = run_point(p, c.run, cache);
    EXPECT_NEAR(r.energy, fresh.energy, 1e-9 * std::abs(fresh.energy));
}

TEST(Sweep, DeterministicAcrossRuns) {
    const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
    SweepConfig ca = small_config(a), cb = small_config(b);
    ca.run.init = cb.run.init = InitStrategy::Random;
    ca.run.seed = cb.run.seed = 11;
    ca.jobs = 2;
    run_sweep(ca);
    run_sweep(cb);
    for (double w : ca.omega2_values)
        for (int L : ca.L_values) {
            const PointSpec p{1.0, 0.1, w, L};
            const RunRecord ra = load_run_record((a / record_relative_path(p)).string());
            const RunRecord rb = load_run_record((b / record_relative_path(p)).string());
            EXPECT_EQ(ra.energy, rb.energy);
            EXPECT_EQ(ra.observables.xi_L, rb.observables.xi_L);
        }
}

TEST(Bisection, SyntheticStepFunction) {
    int probes = 0;
    const auto [mid, half] = bisect_boundary(
        [&](double w) {
            ++probes;
            return w < 2.0;
        },
        1.0, 3.0, 1e-3);
    EXPECT_NEAR(mid, 2.0, half);
    EXPECT_LE(2 * half, 1e-3);
    EXPECT_LE(probes, 15);
    EXPECT_THROW(bisect_boundary([](double) { return true; }, 1.0, 3.0, 1e-3), std::invalid_argument);
    EXPECT_THROW(bisect_boundary([](double w) { return w < 2.0; }, 1.0, 3.0, 1e-9, 5), std::runtime_error);
}
