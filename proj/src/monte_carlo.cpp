#include "wavefdi/monte_carlo.hpp"

#include "wavefdi/errors.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

namespace wavefdi {

namespace {

struct Trial {
    Plant plant;
    Vec prior;
    SubsystemSeries series;
    SensorAccumulator acc;
};

void run_chunk(const ScenarioConfig& cfg, const DiscreteModel& dm, std::span<const std::uint64_t> seeds,
               std::span<TrialOutcome> out) {
    const std::size_t steps = cfg.sim.steps;
    const std::size_t grid = cfg.monitored_grid_point();
    const std::size_t row = cfg.monitored_sensor_row();
    const auto pos = static_cast<Eigen::Index>(position_index(grid));
    const FilterState init = filter_init(cfg);

    std::vector<Trial> trials;
    trials.reserve(seeds.size());
    for (auto seed : seeds) {
        SimConfig sim = cfg.sim;
        sim.seed = seed;
        trials.push_back({Plant(cfg.model, sim, cfg.sensors, cfg.faults), init.xhat_prior, {},
                          SensorAccumulator(cfg.sensors.size(), steps)});
    }

    Mat P_prior = init.P_prior;
    Vec innovation;
    for (std::size_t k = 0; k < steps; ++k) {
        const auto cov = covariance_measurement_update(P_prior, dm.Cd, dm.R);
        for (auto& tr : trials) {
            const auto sample = tr.plant.step();
            const Vec post = mean_measurement_update(tr.prior, cov.gain, dm.Cd, sample.measurement, innovation);
            const Vec v = virtual_inputs(cfg.model, positions_of(post), velocities_of(post));
            tr.series.push(tr.prior[pos], innovation[static_cast<Eigen::Index>(row)],
                           subsystem_input(cfg.model, post, grid));
            tr.acc.add(k, innovation);
            tr.prior = mean_time_update(post, dm.Ad, dm.Bd, v);
        }
        P_prior = covariance_time_update(cov.P, dm.Ad, dm.Q);
    }

    FdiOptions opt = fdi_options(cfg);
    opt.isolation = IsolationMode::none;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        TrialOutcome& o = out[i];
        o.seed = seeds[i];
        o.sensors = trials[i].acc.diagnose(cfg.fdi.sensor_ratio);
        o.lambda = fdi_threshold(opt, ArmaxModel::kOrder);
        o.fault_detected = o.sensors.flagged;
        for (const auto& rep : fdi_over_windows(trials[i].series, cfg, opt)) {
            o.window_start.push_back(rep.window_start);
            o.t.push_back(rep.t);
            o.faulty.push_back(rep.faulty);
            o.fault_detected = o.fault_detected || rep.faulty;
        }
    }
}

}  // namespace

std::vector<TrialOutcome> run_trials(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                     unsigned threads) {
    cfg.validate();
    const DiscreteModel dm = filter_model(cfg);
    dm.validate();
    const Eigen::Index rank = observability_rank(dm.Ad, dm.Cd);
    if (rank != dm.state_dim())
        throw NotObservable("observability rank " + std::to_string(rank) + " < " + std::to_string(dm.state_dim()));

    std::vector<TrialOutcome> out(seeds.size());
    if (seeds.empty()) return out;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, seeds.size()));

    const std::size_t per = (seeds.size() + threads - 1) / threads;
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex mu;
    for (std::size_t begin = 0; begin < seeds.size(); begin += per) {
        const std::size_t n = std::min(per, seeds.size() - begin);
        pool.emplace_back([&, begin, n] {
            try {
                run_chunk(cfg, dm, std::span(seeds).subspan(begin, n), std::span(out).subspan(begin, n));
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace wavefdi
