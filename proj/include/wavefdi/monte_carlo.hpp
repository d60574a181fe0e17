#pragma once

#include "wavefdi/config.hpp"
#include "wavefdi/fdi.hpp"
#include "wavefdi/scenario.hpp"

#include <cstdint>
#include <vector>

namespace wavefdi {

struct TrialOutcome {
    std::uint64_t seed = 0;
    std::vector<std::size_t> window_start;
    std::vector<double> t;
    std::vector<bool> faulty;
    double lambda = 0.0;
    SensorAccumulator::Diagnosis sensors;
    bool fault_detected = false;  ///< same rule as run_scenario's exit status
};

/// Runs the scenario once per seed (faults as configured) without writing
/// artifacts. Trials are stepped in lockstep so the data-independent
/// covariance recursion is computed once per chunk; every trial still
/// reproduces the single-run result for its seed exactly. `threads` = 0 uses
/// the hardware concurrency.
std::vector<TrialOutcome> run_trials(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                     unsigned threads = 0);

}  // namespace wavefdi
