#include "wavefdi/monte_carlo.hpp"
#include "wavefdi/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wavefdi;
namespace fs = std::filesystem;

namespace {

ScenarioConfig short_config() {
    auto c = ScenarioConfig::defaults(ScenarioKind::custom);
    c.sim.steps = 700;
    c.fdi.plan.burn_in = 100;
    c.fdi.plan.window = 200;
    c.fdi.plan.overlap = 0.0;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("wavefdi_test_" + name);
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST(Scenario, WritesArtifacts) {
    const auto dir = fresh_dir("artifacts");
    auto c = short_config();
    c.fdi.dump_matrices = true;
    const auto r = run_scenario(c, dir);
    for (const char* f : {"trajectory.csv", "estimates.csv", "summary.txt", "snapshots.svg", "innovation_bars.svg",
                          "fdi_report.csv", "armax.csv", "armax_weights.csv", "fdi_statistic.svg", "fdi_matrices.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_EQ(r.reports.size(), 2u);

    std::istringstream rep(slurp(dir / "fdi_report.csv"));
    std::string line;
    std::getline(rep, line);
    EXPECT_EQ(line, "window_start,window_end,t,lambda,verdict,best_subset,t_subset");
    std::istringstream est(slurp(dir / "estimates.csv"));
    std::getline(est, line);
    const auto cols = std::count(line.begin(), line.end(), ',');
    int rows = 0;
    while (std::getline(est, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), cols);
    }
    EXPECT_EQ(rows, 700);
    fs::remove_all(dir);
}

TEST(Scenario, SimulateModeSkipsFdiArtifacts) {
    const auto dir = fresh_dir("simonly");
    const auto r = run_scenario(short_config(), dir, {.fdi = false});
    EXPECT_TRUE(r.reports.empty());
    EXPECT_FALSE(fs::exists(dir / "fdi_report.csv"));
    EXPECT_TRUE(fs::exists(dir / "trajectory.csv"));
    fs::remove_all(dir);
}

TEST(Scenario, SameSeedGivesIdenticalFiles) {
    const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
    auto c = short_config();
    c.faults.push_back({FaultKind::sensor_bias, 5, 0.05, 300, std::nullopt});
    run_scenario(c, a);
    run_scenario(c, b);
    for (const auto& entry : fs::directory_iterator(a))
        EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path().filename();
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Scenario, DefaultSensorFaultIsFlagged) {
    const auto dir = fresh_dir("sensor_fault");
    const auto r = run_scenario(ScenarioConfig::defaults(), dir, {.fdi = false});
    EXPECT_TRUE(r.sensors.flagged);
    EXPECT_EQ(r.sensors.suspect_row, 21u);
    EXPECT_EQ(r.exit_code(), 3);
    EXPECT_NE(slurp(dir / "summary.txt").find("suspect_sensor: 22"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Scenario, HealthyRunExitsZero) {
    const auto dir = fresh_dir("healthy");
    const auto r = run_scenario(short_config(), dir, {.fdi = false});
    EXPECT_FALSE(r.sensors.flagged);
    EXPECT_EQ(r.exit_code(), 0);
    fs::remove_all(dir);
}

TEST(Scenario, SensorDiagnosisRule) {
    SensorAccumulator acc(3, 4);
    for (std::size_t k = 0; k < 4; ++k) acc.add(k, (Vec(3) << 1.0, 1.0, 6.0).finished());
    const auto d = acc.diagnose(5.0);
    EXPECT_EQ(d.suspect_row, 2u);
    EXPECT_DOUBLE_EQ(d.ratio, 6.0);
    EXPECT_TRUE(d.flagged);
    EXPECT_FALSE(acc.diagnose(6.0).flagged);
}

TEST(MonteCarlo, TrialsReproduceSingleRuns) {
    auto c = short_config();
    c.faults.push_back({FaultKind::sensor_bias, 25, 0.02, 200, std::nullopt});
    const std::vector<std::uint64_t> seeds{3, 4, 5};
    const auto trials = run_trials(c, seeds, 2);
    ASSERT_EQ(trials.size(), 3u);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        auto single = c;
        single.sim.seed = seeds[i];
        const auto dir = fresh_dir("mc_" + std::to_string(i));
        const auto r = run_scenario(single, dir, {.fdi = true, .isolation = IsolationMode::none});
        fs::remove_all(dir);
        EXPECT_EQ(trials[i].seed, seeds[i]);
        ASSERT_EQ(trials[i].t.size(), r.reports.size());
        for (std::size_t w = 0; w < r.reports.size(); ++w) {
            EXPECT_EQ(trials[i].t[w], r.reports[w].t);
            EXPECT_EQ(trials[i].window_start[w], r.reports[w].window_start);
            EXPECT_EQ(trials[i].faulty[w], r.reports[w].faulty);
        }
        EXPECT_EQ(trials[i].sensors.mean_abs_innovation, r.sensors.mean_abs_innovation);
        EXPECT_EQ(trials[i].fault_detected, r.fault_detected);
    }
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
    const auto c = short_config();
    const std::vector<std::uint64_t> seeds{10, 11, 12, 13, 14};
    const auto one = run_trials(c, seeds, 1);
    const auto many = run_trials(c, seeds, 4);
    for (std::size_t i = 0; i < seeds.size(); ++i) EXPECT_EQ(one[i].t, many[i].t);
}
