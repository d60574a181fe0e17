#pragma once

#include "wavefdi/wave_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace wavefdi {

using Rng = std::mt19937_64;

struct InitialProfile {
    enum class Shape { zero, gaussian_pulse, custom };
    Shape shape = Shape::gaussian_pulse;
    double center = 40.0;     ///< in grid-index units (1-based)
    double width = 4.0;       ///< standard deviation, grid-index units
    double amplitude = 2.0;
    std::vector<double> values;  ///< custom positions, length N
    bool operator==(const InitialProfile&) const = default;
};

/// Positions from the profile, zero velocities, interleaved layout.
Vec initial_state(const InitialProfile& profile, std::size_t N);

struct SimConfig {
    double Ts = 0.01;
    std::size_t steps = 2000;
    int substeps = 2;
    double process_noise_std = 1e-6;      ///< added to every velocity state after each sample
    double measurement_noise_std = 1e-3;
    std::uint64_t seed = 1;
    InitialProfile initial;

    void validate() const;
    bool operator==(const SimConfig&) const = default;
};

enum class FaultKind { sensor_bias, sensor_stuck, sensor_noise_inflation, param_drift_K };

std::string to_string(FaultKind kind);
std::optional<FaultKind> parse_fault_kind(const std::string& s);

struct FaultSpec {
    FaultKind kind = FaultKind::sensor_bias;
    /// 1-based output number for sensor faults (z_target); ignored for param_drift_K.
    std::size_t target = 0;
    /// bias: added offset; stuck: reported value; noise inflation: noise multiplier;
    /// param drift: relative change of K (0.01 = +1 %).
    double magnitude = 0.0;
    std::size_t onset = 0;
    std::optional<std::size_t> duration;  ///< unbounded when empty

    bool is_sensor_fault() const { return kind != FaultKind::param_drift_K; }
    bool active(std::size_t step) const {
        return step >= onset && (!duration || step < onset + *duration);
    }
    bool operator==(const FaultSpec&) const = default;
};

/// Throws InvalidArgument when a sensor fault targets an output outside 1..m.
void validate_faults(const std::vector<FaultSpec>& faults, std::size_t num_sensors);

struct Trajectory {
    Mat states;        ///< steps x 2N true states
    Mat measurements;  ///< steps x m
    Mat inputs;        ///< steps x N true virtual inputs v(k)
    double Ts = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(states.rows()); }
};

/// One sample of classical RK4 over Ts split into `substeps` internal steps.
/// `step` only labels the diverged-integration error.
Vec integrate_step(const WaveModel& model, const Vec& state, double Ts, int substeps, std::size_t step = 0);

/// z = C y + noise, then the active sensor faults in `faults` are applied.
Vec measure(const Vec& true_state, const Mat& C, double noise_std, const std::vector<FaultSpec>& faults,
            Rng& rng, std::size_t step = 0);

/// Plant model stepped one sample at a time. `simulate` and the Monte-Carlo
/// driver both use it, so a trial reproduces the single-run stream exactly.
class Plant {
public:
    struct Sample {
        Vec state;        ///< y(k)
        Vec measurement;  ///< z(k)
        Vec input;        ///< v(k)
    };

    Plant(const WaveModel& nominal, const SimConfig& cfg, const std::vector<std::size_t>& sensors,
          std::vector<FaultSpec> faults);

    /// Measures y(k), then advances the state to y(k+1).
    Sample step();

    std::size_t current_step() const { return k_; }
    const Vec& state() const { return y_; }
    const Mat& output_matrix() const { return C_; }

private:
    WaveModel nominal_;
    SimConfig cfg_;
    Mat C_;
    std::vector<FaultSpec> faults_;
    Rng rng_;
    Vec y_;
    std::size_t k_ = 0;
};

Trajectory simulate(const WaveModel& model, const SimConfig& cfg, const std::vector<std::size_t>& sensors,
                    const std::vector<FaultSpec>& faults);

/// Header `t,y_true_1..y_true_2N,z_1..z_m`, one row per step.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace wavefdi
