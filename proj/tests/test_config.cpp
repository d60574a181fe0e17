#include "wavefdi/config.hpp"
#include "wavefdi/errors.hpp"
#include "wavefdi/scenario.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

using namespace wavefdi;

TEST(Config, EmptyDocumentGivesDefaults) {
    const auto c = parse_config("");
    EXPECT_EQ(c.model.N, 50u);
    EXPECT_EQ(c.sensors.size(), 25u);
    EXPECT_DOUBLE_EQ(c.model.K, 0.0405);
    EXPECT_EQ(c.scenario, ScenarioKind::sensor_fault);
    EXPECT_EQ(c, ScenarioConfig::defaults());
}

TEST(Config, PresetFaults) {
    const auto sf = ScenarioConfig::defaults(ScenarioKind::sensor_fault);
    ASSERT_EQ(sf.faults.size(), 1u);
    EXPECT_EQ(sf.faults[0].kind, FaultKind::sensor_bias);
    EXPECT_EQ(sf.faults[0].target, 22u);
    const auto pc = ScenarioConfig::defaults(ScenarioKind::param_change);
    ASSERT_EQ(pc.faults.size(), 1u);
    EXPECT_EQ(pc.faults[0].kind, FaultKind::param_drift_K);
    EXPECT_TRUE(ScenarioConfig::defaults(ScenarioKind::custom).faults.empty());
    EXPECT_EQ(parse_config("scenario: param-change\nseed: 9\n").faults, pc.faults);
}

TEST(Config, SensorOutsideGridNamesTheKey) {
    try {
        parse_config("sensors: [1, 3, 51]\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "sensors[2]");
    }
}

TEST(Config, UnknownKeyReportsLine) {
    try {
        parse_config("seed: 3\nmodel:\n  K: 0.05\n  Kappa: 1\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "model.Kappa");
        EXPECT_EQ(e.line(), 4);
    }
}

TEST(Config, BadValues) {
    EXPECT_THROW(parse_config("fdi:\n  alpha: 1.5\n"), ConfigError);
    EXPECT_THROW(parse_config("fdi:\n  threshold: median\n"), ConfigError);
    EXPECT_THROW(parse_config("sim:\n  steps: lots\n"), ConfigError);
    EXPECT_THROW(parse_config("scenario: other\n"), ConfigError);
    EXPECT_THROW(parse_config("faults:\n  - {kind: sensor-bias, target: 30, magnitude: 1, onset: 0}\n"),
                 ConfigError);
    EXPECT_THROW(parse_config("model: [1, 2\n"), ConfigError);
}

TEST(Config, RoundTrip) {
    auto c = ScenarioConfig::defaults(ScenarioKind::param_change);
    c.sim.seed = 12345;
    c.model.K = 0.1 / 3.0;
    c.filter.q = 1e-13;
    c.filter.discretization = Discretization::euler;
    c.fdi.isolation = IsolationMode::minmax;
    c.fdi.subsets = {{0}, {1, 2}};
    c.fdi.plan.overlap = 0.25;
    c.faults.push_back({FaultKind::sensor_stuck, 4, -0.125, 10, 20});
    c.output_dir = "some/where";
    const auto back = parse_config(dump_config(c));
    EXPECT_EQ(back, c);
    EXPECT_EQ(dump_config(back), dump_config(c));
}

TEST(Config, MonitoredSubsystem) {
    auto c = ScenarioConfig::defaults();
    EXPECT_EQ(c.monitored_grid_point(), 49u);
    EXPECT_EQ(c.monitored_sensor_row(), 24u);
    c.fdi.subsystem = 43;
    EXPECT_EQ(c.monitored_sensor_row(), 21u);
    c.fdi.subsystem = 44;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, NoiseDefaults) {
    const auto c = ScenarioConfig::defaults();
    EXPECT_DOUBLE_EQ(c.q_value(), c.sim.process_noise_std * c.sim.process_noise_std);
    EXPECT_DOUBLE_EQ(c.r_value(), c.sim.measurement_noise_std * c.sim.measurement_noise_std);
    auto z = c;
    z.sim.measurement_noise_std = 0.0;
    EXPECT_DOUBLE_EQ(z.r_value(), 1e-12);
}

TEST(Config, OutputDirectoryPrecedence) {
    auto c = ScenarioConfig::defaults();
    ::unsetenv("WAVEFDI_OUT");
    EXPECT_EQ(resolve_output_dir(std::nullopt, c), std::filesystem::path("wavefdi_out"));
    ::setenv("WAVEFDI_OUT", "from_env", 1);
    EXPECT_EQ(resolve_output_dir(std::nullopt, c), std::filesystem::path("from_env"));
    c.output_dir = "from_config";
    EXPECT_EQ(resolve_output_dir(std::nullopt, c), std::filesystem::path("from_config"));
    EXPECT_EQ(resolve_output_dir(std::string("from_cli"), c), std::filesystem::path("from_cli"));
    ::unsetenv("WAVEFDI_OUT");
}
