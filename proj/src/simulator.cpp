#include "wavefdi/simulator.hpp"

#include "csv.hpp"
#include "wavefdi/errors.hpp"

#include <cmath>
#include <ostream>

namespace wavefdi {

Vec initial_state(const InitialProfile& profile, std::size_t N) {
    const auto n = static_cast<Eigen::Index>(N);
    Vec y = Vec::Zero(2 * n);
    switch (profile.shape) {
    case InitialProfile::Shape::zero:
        break;
    case InitialProfile::Shape::gaussian_pulse: {
        if (!(profile.width > 0.0)) throw DomainError("gaussian pulse width must be positive");
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = (static_cast<double>(i + 1) - profile.center) / profile.width;
            y[2 * i] = profile.amplitude * std::exp(-0.5 * u * u);
        }
        break;
    }
    case InitialProfile::Shape::custom:
        if (profile.values.size() != N)
            throw InvalidArgument("custom initial profile has " + std::to_string(profile.values.size()) +
                                  " values, expected " + std::to_string(N));
        for (Eigen::Index i = 0; i < n; ++i) y[2 * i] = profile.values[static_cast<std::size_t>(i)];
        break;
    }
    if (!y.allFinite()) throw DomainError("initial profile is not finite");
    return y;
}

void SimConfig::validate() const {
    if (!(Ts > 0.0) || !std::isfinite(Ts)) throw DomainError("sampling period Ts must be positive");
    if (substeps < 1) throw InvalidArgument("integrator substeps must be >= 1");
    if (!(process_noise_std >= 0.0) || !std::isfinite(process_noise_std))
        throw DomainError("process noise std must be finite and >= 0");
    if (!(measurement_noise_std >= 0.0) || !std::isfinite(measurement_noise_std))
        throw DomainError("measurement noise std must be finite and >= 0");
}

std::string to_string(FaultKind kind) {
    switch (kind) {
    case FaultKind::sensor_bias: return "sensor-bias";
    case FaultKind::sensor_stuck: return "sensor-stuck";
    case FaultKind::sensor_noise_inflation: return "sensor-noise-inflation";
    case FaultKind::param_drift_K: return "param-drift-K";
    }
    return "?";
}

std::optional<FaultKind> parse_fault_kind(const std::string& s) {
    for (auto k : {FaultKind::sensor_bias, FaultKind::sensor_stuck, FaultKind::sensor_noise_inflation,
                   FaultKind::param_drift_K}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

void validate_faults(const std::vector<FaultSpec>& faults, std::size_t num_sensors) {
    for (const auto& f : faults) {
        if (f.is_sensor_fault() && (f.target < 1 || f.target > num_sensors))
            throw InvalidArgument(to_string(f.kind) + " fault targets sensor " + std::to_string(f.target) +
                                  ", only 1.." + std::to_string(num_sensors) + " exist");
        if (!std::isfinite(f.magnitude)) throw DomainError("fault magnitude must be finite");
        if (f.kind == FaultKind::param_drift_K && !(1.0 + f.magnitude > 0.0))
            throw DomainError("param-drift-K would make K non-positive");
    }
}

Vec integrate_step(const WaveModel& model, const Vec& state, double Ts, int substeps, std::size_t step) {
    if (substeps < 1) throw InvalidArgument("substeps must be >= 1");
    if (!state.allFinite()) throw DomainError("integrate_step: non-finite state");
    const double h = Ts / substeps;
    Vec y = state;
    for (int s = 0; s < substeps; ++s) {
        const Vec k1 = wave_rhs(model, y);
        const Vec k2 = wave_rhs(model, y + 0.5 * h * k1);
        const Vec k3 = wave_rhs(model, y + 0.5 * h * k2);
        const Vec k4 = wave_rhs(model, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!y.allFinite()) throw IntegrationDiverged(step, "state became non-finite");
    return y;
}

Vec measure(const Vec& true_state, const Mat& C, double noise_std, const std::vector<FaultSpec>& faults,
            Rng& rng, std::size_t step) {
    const Eigen::Index m = C.rows();
    validate_faults(faults, static_cast<std::size_t>(m));

    std::normal_distribution<double> normal(0.0, 1.0);
    Vec noise(m);
    for (Eigen::Index j = 0; j < m; ++j) noise[j] = normal(rng);

    for (const auto& f : faults) {
        if (f.kind == FaultKind::sensor_noise_inflation && f.active(step))
            noise[static_cast<Eigen::Index>(f.target - 1)] *= f.magnitude;
    }
    Vec z = C * true_state + noise_std * noise;
    for (const auto& f : faults) {
        if (!f.active(step)) continue;
        const auto j = static_cast<Eigen::Index>(f.target) - 1;
        if (f.kind == FaultKind::sensor_bias) z[j] += f.magnitude;
        if (f.kind == FaultKind::sensor_stuck) z[j] = f.magnitude;
    }
    return z;
}

Plant::Plant(const WaveModel& nominal, const SimConfig& cfg, const std::vector<std::size_t>& sensors,
             std::vector<FaultSpec> faults)
    : nominal_(nominal), cfg_(cfg), C_(selection_matrix(nominal.N, sensors)), faults_(std::move(faults)),
      rng_(cfg.seed) {
    nominal_.validate();
    cfg_.validate();
    validate_faults(faults_, sensors.size());
    y_ = initial_state(cfg_.initial, nominal_.N);
}

Plant::Sample Plant::step() {
    Sample s;
    s.state = y_;
    s.input = virtual_inputs(nominal_, positions_of(y_), velocities_of(y_));

    // measurement noise first, then process noise: the draw order is part of
    // the determinism contract
    s.measurement = measure(y_, C_, cfg_.measurement_noise_std, faults_, rng_, k_);

    WaveModel plant = nominal_;
    for (const auto& f : faults_) {
        if (f.kind == FaultKind::param_drift_K && f.active(k_)) plant.K *= 1.0 + f.magnitude;
    }
    if (plant.K != nominal_.K) {
        s.input = virtual_inputs(plant, positions_of(y_), velocities_of(y_));
    }
    y_ = integrate_step(plant, y_, cfg_.Ts, cfg_.substeps, k_);
    if (cfg_.process_noise_std > 0.0) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 1; i < y_.size(); i += 2) y_[i] += cfg_.process_noise_std * normal(rng_);
    }
    ++k_;
    return s;
}

Trajectory simulate(const WaveModel& model, const SimConfig& cfg, const std::vector<std::size_t>& sensors,
                    const std::vector<FaultSpec>& faults) {
    Plant plant(model, cfg, sensors, faults);
    const auto steps = static_cast<Eigen::Index>(cfg.steps);
    const auto N = static_cast<Eigen::Index>(model.N);
    const auto m = static_cast<Eigen::Index>(sensors.size());

    Trajectory traj;
    traj.Ts = cfg.Ts;
    traj.states.resize(steps, 2 * N);
    traj.measurements.resize(steps, m);
    traj.inputs.resize(steps, N);
    for (Eigen::Index k = 0; k < steps; ++k) {
        auto s = plant.step();
        traj.states.row(k) = s.state.transpose();
        traj.measurements.row(k) = s.measurement.transpose();
        traj.inputs.row(k) = s.input.transpose();
    }
    return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const Eigen::Index n = traj.states.cols();
    const Eigen::Index m = traj.measurements.cols();
    os << "t";
    for (Eigen::Index i = 1; i <= n; ++i) os << ",y_true_" << i;
    for (Eigen::Index j = 1; j <= m; ++j) os << ",z_" << j;
    os << '\n';
    for (Eigen::Index k = 0; k < traj.states.rows(); ++k) {
        os << detail::num(static_cast<double>(k) * traj.Ts);
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << detail::num(traj.states(k, i));
        for (Eigen::Index j = 0; j < m; ++j) os << ',' << detail::num(traj.measurements(k, j));
        os << '\n';
    }
}

}  // namespace wavefdi
