#pragma once

#include "wavefdi/armax.hpp"
#include "wavefdi/config.hpp"
#include "wavefdi/fdi.hpp"
#include "wavefdi/kalman.hpp"
#include "wavefdi/simulator.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wavefdi {

/// Discretized nominal model with Q = q I and R = r I from the config.
DiscreteModel filter_model(const ScenarioConfig& cfg);
/// xhat0 = 0, P0 = p0 I.
FilterState filter_init(const ScenarioConfig& cfg);

/// Per-sensor mean |innovation| over the second half of a run, fed one step
/// at a time so that single runs and Monte-Carlo trials agree exactly.
class SensorAccumulator {
public:
    SensorAccumulator(std::size_t sensors, std::size_t steps);
    void add(std::size_t step, const Vec& innovation);

    struct Diagnosis {
        std::vector<double> mean_abs_innovation;
        std::size_t suspect_row = 0;  ///< 0-based sensor row with the largest mean
        double ratio = 0.0;           ///< largest mean / median mean
        bool flagged = false;
    };
    Diagnosis diagnose(double ratio_threshold) const;

private:
    Vec sum_;
    std::size_t from_;
    std::size_t count_ = 0;
};

SubsystemSeries subsystem_series(const FilterRun& run, const WaveModel& model, std::size_t grid_point,
                                 std::size_t sensor_row);

FdiOptions fdi_options(const ScenarioConfig& cfg);

/// FDI reports for every window of the run's residual stream.
std::vector<FdiReport> fdi_over_windows(const SubsystemSeries& series, const ScenarioConfig& cfg,
                                        const FdiOptions& opt);

/// Steady-state ARMAX form of the monitored subsystem (forward-Euler
/// subsystem with the filter's q, r, p0).
ArmaxModel subsystem_armax(const ScenarioConfig& cfg, std::size_t max_steps = 2'000'000);

struct ScenarioResult {
    Trajectory trajectory;
    FilterRun filter;
    SensorAccumulator::Diagnosis sensors;
    std::vector<FdiReport> reports;
    std::optional<ArmaxModel> armax;
    std::string armax_note;  ///< why `armax` is empty, if it is
    bool fault_detected = false;

    int exit_code() const { return fault_detected ? 3 : 0; }
};

struct RunOptions {
    bool fdi = true;
    std::optional<IsolationMode> isolation;  ///< overrides cfg.fdi.isolation
};

/// Simulate, filter, diagnose sensors, run the FDI windows and write the
/// artifacts to `out_dir` (created if missing).
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                            const RunOptions& options = {});

/// --out, else the config's output_dir, else $WAVEFDI_OUT, else "wavefdi_out".
std::filesystem::path resolve_output_dir(const std::optional<std::string>& cli, const ScenarioConfig& cfg);

/// Header `window_start,window_end,t,lambda,verdict,best_subset,t_subset`.
void write_fdi_report_csv(std::ostream& os, const std::vector<FdiReport>& reports);

}  // namespace wavefdi
