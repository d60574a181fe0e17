#pragma once

#include "wavefdi/fdi.hpp"
#include "wavefdi/kalman.hpp"
#include "wavefdi/simulator.hpp"
#include "wavefdi/wave_model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wavefdi {

enum class ScenarioKind { sensor_fault, param_change, custom };

std::string to_string(ScenarioKind k);
std::optional<ScenarioKind> parse_scenario_kind(const std::string& s);

struct FilterParams {
    std::optional<double> q;  ///< Q = q I; unset: process_noise_std^2
    std::optional<double> r;  ///< R = r I; unset: max(measurement_noise_std^2, 1e-12)
    double p0 = 1.0;          ///< P0 = p0 I
    Discretization discretization = Discretization::exact;

    bool operator==(const FilterParams&) const = default;
};

struct FdiParams {
    double alpha = 0.01;
    ThresholdMode threshold = ThresholdMode::quantile;
    IsolationMode isolation = IsolationMode::none;
    WindowPlan plan;
    int lags = 3;
    std::vector<Subset> subsets;  ///< 0-based in memory, 1-based weight numbers in the file
    std::size_t subsystem = 0;    ///< monitored grid point; 0 = last sensed point
    double sensor_ratio = 5.0;    ///< sensor flagged when its mean |innovation| exceeds ratio x median
    bool dump_matrices = false;

    bool operator==(const FdiParams& o) const {
        return alpha == o.alpha && threshold == o.threshold && isolation == o.isolation &&
               plan.window == o.plan.window && plan.overlap == o.plan.overlap && plan.burn_in == o.plan.burn_in &&
               lags == o.lags && subsets == o.subsets && subsystem == o.subsystem && sensor_ratio == o.sensor_ratio &&
               dump_matrices == o.dump_matrices;
    }
};

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::sensor_fault;
    WaveModel model;
    SimConfig sim;                     ///< sim.seed is the run seed
    std::vector<std::size_t> sensors;  ///< 1-based grid points
    std::vector<FaultSpec> faults;
    FilterParams filter;
    FdiParams fdi;
    std::string output_dir;            ///< empty: fall back to WAVEFDI_OUT, then "wavefdi_out"

    /// Defaults of each scenario: N = 50, dx = 0.2, sine-Gordon source,
    /// sensors on the odd grid points, plus the scenario's fault list and
    /// run length.
    static ScenarioConfig defaults(ScenarioKind kind = ScenarioKind::sensor_fault);

    /// Grid point whose subsystem the FDI layer monitors.
    std::size_t monitored_grid_point() const;
    /// Row of C measuring `monitored_grid_point()`.
    std::size_t monitored_sensor_row() const;

    double q_value() const;
    double r_value() const;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    bool operator==(const ScenarioConfig&) const;
};

std::vector<std::size_t> odd_grid_points(std::size_t N);

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ScenarioConfig& cfg);
void save_config(const ScenarioConfig& cfg, const std::filesystem::path& path);

}  // namespace wavefdi
