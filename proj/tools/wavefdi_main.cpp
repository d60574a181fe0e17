#include "wavefdi/config.hpp"
#include "wavefdi/errors.hpp"
#include "wavefdi/monte_carlo.hpp"
#include "wavefdi/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <numeric>

using namespace wavefdi;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "scenario config (YAML)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "override the config seed");
    cmd->add_option("--out", c.out, "output directory");
}

ScenarioConfig load(const Common& c) {
    ScenarioConfig cfg = load_config(c.config);
    if (c.seed) cfg.sim.seed = *c.seed;
    return cfg;
}

int report(const ScenarioConfig& cfg, const ScenarioResult& r, const std::filesystem::path& dir) {
    std::cout << "output: " << dir.string() << '\n';
    if (!r.sensors.mean_abs_innovation.empty())
        std::cout << fmt::format("suspect sensor: {} (grid point {}, ratio {:.3g}){}\n", r.sensors.suspect_row + 1,
                                 cfg.sensors[r.sensors.suspect_row], r.sensors.ratio,
                                 r.sensors.flagged ? " FLAGGED" : "");
    for (const auto& rep : r.reports) {
        std::cout << fmt::format("window [{}, {}): t = {:.4g}, lambda = {:.4g}, {}", rep.window_start,
                                 rep.window_end, rep.t, rep.lambda, rep.verdict());
        if (rep.best)
            std::cout << fmt::format(", best subset {} ({:.4g})", subset_name(rep.isolation[*rep.best].subset),
                                     rep.isolation[*rep.best].statistic);
        std::cout << '\n';
    }
    std::cout << (r.fault_detected ? "fault detected\n" : "healthy\n");
    return r.exit_code();
}

int calibrate(ScenarioConfig cfg, const std::filesystem::path& dir, std::size_t trials, unsigned threads) {
    cfg.faults.clear();
    std::vector<std::uint64_t> seeds(trials);
    std::iota(seeds.begin(), seeds.end(), cfg.sim.seed);
    const auto outcomes = run_trials(cfg, seeds, threads);

    std::filesystem::create_directories(dir);
    std::ofstream os(dir / "calibration.csv");
    if (!os) throw Error("cannot write " + (dir / "calibration.csv").string());
    os << "seed,window_start,t,lambda,verdict\n";
    std::size_t windows = 0, alarms = 0, healthy_runs = 0;
    double tsum = 0.0;
    for (const auto& o : outcomes) {
        for (std::size_t i = 0; i < o.t.size(); ++i) {
            os << o.seed << ',' << o.window_start[i] << ',' << fmt::format("{}", o.t[i]) << ','
               << fmt::format("{}", o.lambda) << ',' << (o.faulty[i] ? "faulty" : "healthy") << '\n';
            ++windows;
            alarms += o.faulty[i];
            tsum += o.t[i];
        }
        healthy_runs += !o.fault_detected;
    }
    std::cout << fmt::format("trials: {}\nwindows: {}\n", trials, windows);
    if (windows > 0)
        std::cout << fmt::format("mean t: {:.4g}\nwindow false-alarm rate: {:.4g}\n", tsum / windows,
                                 static_cast<double>(alarms) / windows);
    std::cout << fmt::format("runs healthy: {} / {}\n", healthy_runs, trials);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"State estimation and fault diagnosis for a sensed 1D wave-type system"};
    app.require_subcommand(1);

    Common sim_opts, det_opts, iso_opts, cal_opts;
    auto* sim = app.add_subcommand("simulate", "simulate, filter and check the sensors");
    add_common(sim, sim_opts);
    auto* det = app.add_subcommand("detect", "full run including the windowed chi-square test");
    add_common(det, det_opts);
    auto* iso = app.add_subcommand("isolate", "detection followed by isolation of the changed weights");
    add_common(iso, iso_opts);
    std::string mode = "sensitivity";
    iso->add_option("--mode", mode, "isolation test")->check(CLI::IsMember({"sensitivity", "minmax"}));
    auto* cal = app.add_subcommand("calibrate", "fault-free Monte-Carlo calibration of the test");
    add_common(cal, cal_opts);
    std::size_t trials = 100;
    unsigned threads = 0;
    cal->add_option("--trials", trials, "number of seeded trials")->required()->check(CLI::PositiveNumber);
    cal->add_option("--threads", threads, "worker threads (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) {
            const auto cfg = load(sim_opts);
            const auto dir = resolve_output_dir(sim_opts.out, cfg);
            return report(cfg, run_scenario(cfg, dir, {.fdi = false}), dir);
        }
        if (det->parsed()) {
            const auto cfg = load(det_opts);
            const auto dir = resolve_output_dir(det_opts.out, cfg);
            return report(cfg, run_scenario(cfg, dir, {.fdi = true}), dir);
        }
        if (iso->parsed()) {
            const auto cfg = load(iso_opts);
            const auto dir = resolve_output_dir(iso_opts.out, cfg);
            return report(cfg, run_scenario(cfg, dir, {.fdi = true, .isolation = parse_isolation_mode(mode)}), dir);
        }
        if (cal->parsed()) {
            const auto cfg = load(cal_opts);
            return calibrate(cfg, resolve_output_dir(cal_opts.out, cfg), trials, threads);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
