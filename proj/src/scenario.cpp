#include "wavefdi/scenario.hpp"

#include "csv.hpp"
#include "wavefdi/errors.hpp"
#include "wavefdi/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>

namespace wavefdi {

DiscreteModel filter_model(const ScenarioConfig& cfg) {
    const StateSpace ss = build_state_space(cfg.model, cfg.sensors);
    DiscreteModel dm = discretize(ss, cfg.sim.Ts, cfg.filter.discretization);
    const Eigen::Index n = dm.state_dim();
    const Eigen::Index m = dm.output_dim();
    dm.Q = cfg.q_value() * Mat::Identity(n, n);
    dm.R = cfg.r_value() * Mat::Identity(m, m);
    return dm;
}

FilterState filter_init(const ScenarioConfig& cfg) {
    const auto n = static_cast<Eigen::Index>(2 * cfg.model.N);
    return initial_filter_state(Vec::Zero(n), cfg.filter.p0 * Mat::Identity(n, n));
}

SensorAccumulator::SensorAccumulator(std::size_t sensors, std::size_t steps)
    : sum_(Vec::Zero(static_cast<Eigen::Index>(sensors))), from_(steps / 2) {}

void SensorAccumulator::add(std::size_t step, const Vec& innovation) {
    if (step < from_) return;
    sum_ += innovation.cwiseAbs();
    ++count_;
}

SensorAccumulator::Diagnosis SensorAccumulator::diagnose(double ratio_threshold) const {
    Diagnosis d;
    const Eigen::Index m = sum_.size();
    d.mean_abs_innovation.resize(static_cast<std::size_t>(m), 0.0);
    if (count_ == 0 || m == 0) return d;
    for (Eigen::Index j = 0; j < m; ++j)
        d.mean_abs_innovation[static_cast<std::size_t>(j)] = sum_[j] / static_cast<double>(count_);
    const auto& v = d.mean_abs_innovation;
    d.suspect_row = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t h = sorted.size() / 2;
    const double median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
    d.ratio = median > 0.0 ? v[d.suspect_row] / median : 0.0;
    d.flagged = m > 1 && d.ratio > ratio_threshold;
    return d;
}

SubsystemSeries subsystem_series(const FilterRun& run, const WaveModel& model, std::size_t grid_point,
                                 std::size_t sensor_row) {
    SubsystemSeries s;
    const auto pos = static_cast<Eigen::Index>(position_index(grid_point));
    const auto row = static_cast<Eigen::Index>(sensor_row);
    for (Eigen::Index k = 0; k < run.prior.rows(); ++k) {
        const Vec post = run.posterior.row(k).transpose();
        s.push(run.prior(k, pos), run.innovations(k, row), subsystem_input(model, post, grid_point));
    }
    return s;
}

FdiOptions fdi_options(const ScenarioConfig& cfg) {
    FdiOptions o;
    o.alpha = cfg.fdi.alpha;
    o.threshold = cfg.fdi.threshold;
    o.isolation = cfg.fdi.isolation;
    o.subsets = cfg.fdi.subsets;
    o.lags = cfg.fdi.lags;
    return o;
}

std::vector<FdiReport> fdi_over_windows(const SubsystemSeries& series, const ScenarioConfig& cfg,
                                        const FdiOptions& opt) {
    std::vector<FdiReport> out;
    for (std::size_t s : window_starts(series.size(), cfg.fdi.plan)) {
        FdiReport r = run_fdi_pipeline(subsystem_batch(series, s, cfg.fdi.plan.window), opt);
        r.window_start = s;
        r.window_end = s + cfg.fdi.plan.window;
        out.push_back(std::move(r));
    }
    return out;
}

ArmaxModel subsystem_armax(const ScenarioConfig& cfg, std::size_t max_steps) {
    const StateSpace ss = subsystem_state_space(cfg.model, cfg.monitored_grid_point());
    DiscreteModel dm = discretize(ss, cfg.sim.Ts, Discretization::euler);
    dm.Q = cfg.q_value() * Mat::Identity(2, 2);
    dm.R = Mat::Constant(1, 1, cfg.r_value());
    const auto gains = riccati_gain_history(dm, cfg.filter.p0 * Mat::Identity(2, 2), max_steps);
    return kf_to_armax(dm, gains);
}

std::filesystem::path resolve_output_dir(const std::optional<std::string>& cli, const ScenarioConfig& cfg) {
    if (cli && !cli->empty()) return *cli;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("WAVEFDI_OUT"); env && *env) return env;
    return "wavefdi_out";
}

void write_fdi_report_csv(std::ostream& os, const std::vector<FdiReport>& reports) {
    os << "window_start,window_end,t,lambda,verdict,best_subset,t_subset\n";
    for (const auto& r : reports) {
        os << r.window_start << ',' << r.window_end << ',' << detail::num(r.t) << ',' << detail::num(r.lambda) << ','
           << r.verdict() << ',';
        if (r.best) {
            const auto& b = r.isolation[*r.best];
            os << subset_name(b.subset) << ',' << detail::num(b.statistic);
        } else {
            os << "none,";
        }
        os << '\n';
    }
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw Error("cannot write " + p.string());
    return os;
}

void write_armax_stream(std::ostream& os, const SubsystemSeries& s) {
    os << "k,X_1,X_2,X_3,X_4,X_5,residual\n";
    for (std::size_t k = 2; k + 1 < s.size(); ++k) {
        const Vec X = build_regressor(s.zhat, s.v, s.innov, k);
        os << k;
        for (Eigen::Index i = 0; i < X.size(); ++i) os << ',' << detail::num(X[i]);
        os << ',' << detail::num(-s.innov[k + 1]) << '\n';
    }
}

void write_matrices(std::ostream& os, const std::vector<FdiReport>& reports) {
    os << "window_start,matrix,row,c1,c2,c3,c4,c5\n";
    for (const auto& r : reports) {
        for (const auto& [name, A] : {std::pair<const char*, const Mat*>{"M", &r.M}, {"S", &r.S}}) {
            for (Eigen::Index i = 0; i < A->rows(); ++i) {
                os << r.window_start << ',' << name << ',' << i + 1;
                for (Eigen::Index j = 0; j < A->cols(); ++j) os << ',' << detail::num((*A)(i, j));
                os << '\n';
            }
        }
    }
}

std::vector<double> position_rmse(const Trajectory& traj, const FilterRun& run) {
    std::vector<double> out(traj.size());
    const Eigen::Index N = traj.states.cols() / 2;
    for (Eigen::Index k = 0; k < traj.states.rows(); ++k) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < N; ++i) {
            const double e = run.posterior(k, 2 * i) - traj.states(k, 2 * i);
            acc += e * e;
        }
        out[static_cast<std::size_t>(k)] = std::sqrt(acc / static_cast<double>(N));
    }
    return out;
}

void write_plots(const std::filesystem::path& dir, const ScenarioConfig& cfg, const ScenarioResult& r, bool fdi) {
    const std::size_t steps = r.trajectory.size();
    const auto N = static_cast<Eigen::Index>(cfg.model.N);
    std::vector<double> x(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) x[static_cast<std::size_t>(i)] = static_cast<double>(i + 1) * cfg.model.dx;

    std::vector<svg::Series> snaps;
    if (steps > 0) {
        for (std::size_t k : {std::size_t{0}, steps / 4, steps / 2, steps - 1}) {
            svg::Series s{fmt::format("true, t = {:g}", static_cast<double>(k) * cfg.sim.Ts), x, {}};
            for (Eigen::Index i = 0; i < N; ++i) s.y.push_back(r.trajectory.states(static_cast<Eigen::Index>(k), 2 * i));
            snaps.push_back(std::move(s));
        }
        svg::Series est{"estimate, last step", x, {}};
        for (Eigen::Index i = 0; i < N; ++i) est.y.push_back(r.filter.posterior(static_cast<Eigen::Index>(steps - 1), 2 * i));
        snaps.push_back(std::move(est));
    }
    open_out(dir / "snapshots.svg") << svg::line_plot({"phi(x, t) snapshots", "x", "phi"}, snaps);

    std::vector<std::string> labels;
    for (std::size_t j = 0; j < r.sensors.mean_abs_innovation.size(); ++j) labels.push_back(std::to_string(j + 1));
    std::optional<std::size_t> hl;
    if (!labels.empty()) hl = r.sensors.suspect_row;
    open_out(dir / "innovation_bars.svg")
        << svg::bar_chart({"mean |innovation| per sensor (second half of run)", "sensor output", "mean |innovation|"},
                          labels, r.sensors.mean_abs_innovation, hl);

    if (fdi) {
        svg::Series ts{"t", {}, {}};
        for (const auto& rep : r.reports) {
            ts.x.push_back(static_cast<double>(rep.window_start));
            ts.y.push_back(rep.t);
        }
        const FdiOptions opt = fdi_options(cfg);
        const double lambda = r.reports.empty() ? fdi_threshold(opt, ArmaxModel::kOrder) : r.reports.front().lambda;
        open_out(dir / "fdi_statistic.svg")
            << svg::line_plot({"global test statistic per window", "window start (step)", "t"}, {ts}, lambda,
                              fmt::format("threshold {:.4g}", lambda));
    }
}

void write_summary(std::ostream& os, const ScenarioConfig& cfg, const ScenarioResult& r, bool fdi) {
    os << "scenario: " << to_string(cfg.scenario) << '\n';
    os << "seed: " << cfg.sim.seed << '\n';
    os << "steps: " << r.trajectory.size() << '\n';
    os << "grid_points: " << cfg.model.N << '\n';
    os << "sensors: " << cfg.sensors.size() << '\n';
    os << "discretization: " << to_string(cfg.filter.discretization) << '\n';
    const auto rmse = position_rmse(r.trajectory, r.filter);
    if (!rmse.empty()) os << "position_rmse_final: " << detail::num(rmse.back()) << '\n';

    const auto& d = r.sensors;
    if (!d.mean_abs_innovation.empty()) {
        os << "suspect_sensor: " << d.suspect_row + 1 << '\n';
        os << "suspect_sensor_grid_point: " << cfg.sensors[d.suspect_row] << '\n';
        os << "suspect_sensor_state: " << position_index(cfg.sensors[d.suspect_row]) + 1 << '\n';
        os << "suspect_sensor_ratio: " << detail::num(d.ratio) << '\n';
        os << "sensor_fault: " << (d.flagged ? "yes" : "no") << '\n';
    }

    if (fdi) {
        os << "monitored_grid_point: " << cfg.monitored_grid_point() << '\n';
        std::size_t faulty = 0;
        double tmax = 0.0;
        for (const auto& rep : r.reports) {
            faulty += rep.faulty;
            tmax = std::max(tmax, rep.t);
        }
        os << "fdi_windows: " << r.reports.size() << '\n';
        os << "fdi_faulty_windows: " << faulty << '\n';
        if (!r.reports.empty()) {
            os << "fdi_threshold: " << detail::num(r.reports.front().lambda) << '\n';
            os << "fdi_max_t: " << detail::num(tmax) << '\n';
        }
        for (const auto& rep : r.reports) {
            if (rep.best) {
                os << "isolated_subset: " << subset_name(rep.isolation[*rep.best].subset) << " (window "
                   << rep.window_start << ")\n";
                break;
            }
        }
        if (r.armax) {
            os << "armax_weights:";
            for (Eigen::Index i = 0; i < r.armax->w.size(); ++i) os << ' ' << detail::num(r.armax->w[i]);
            os << '\n';
        } else {
            os << "armax_weights: unavailable (" << r.armax_note << ")\n";
        }
    }
    os << "verdict: " << (r.fault_detected ? "fault detected" : "healthy") << '\n';
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                            const RunOptions& options) {
    cfg.validate();
    ScenarioResult r;
    r.trajectory = simulate(cfg.model, cfg.sim, cfg.sensors, cfg.faults);
    const DiscreteModel dm = filter_model(cfg);
    r.filter = run_filter(dm, cfg.model, r.trajectory.measurements, filter_init(cfg), cfg.sim.Ts);

    SensorAccumulator acc(cfg.sensors.size(), r.trajectory.size());
    for (Eigen::Index k = 0; k < r.filter.innovations.rows(); ++k)
        acc.add(static_cast<std::size_t>(k), r.filter.innovations.row(k).transpose());
    r.sensors = acc.diagnose(cfg.fdi.sensor_ratio);
    r.fault_detected = r.sensors.flagged;

    SubsystemSeries series;
    if (options.fdi) {
        FdiOptions opt = fdi_options(cfg);
        if (options.isolation) opt.isolation = *options.isolation;
        series = subsystem_series(r.filter, cfg.model, cfg.monitored_grid_point(), cfg.monitored_sensor_row());
        r.reports = fdi_over_windows(series, cfg, opt);
        for (const auto& rep : r.reports) r.fault_detected = r.fault_detected || rep.faulty;
        try {
            r.armax = subsystem_armax(cfg);
        } catch (const NotSteadyState& e) {
            r.armax_note = e.what();
        }
    }

    std::filesystem::create_directories(out_dir);
    {
        auto os = open_out(out_dir / "trajectory.csv");
        write_trajectory_csv(os, r.trajectory);
    }
    {
        auto os = open_out(out_dir / "estimates.csv");
        write_estimates_csv(os, r.filter);
    }
    if (options.fdi) {
        auto os = open_out(out_dir / "fdi_report.csv");
        write_fdi_report_csv(os, r.reports);
        auto as = open_out(out_dir / "armax.csv");
        write_armax_stream(as, series);
        if (r.armax) {
            auto ws = open_out(out_dir / "armax_weights.csv");
            ws << "w_1,w_2,w_3,w_4,w_5,kappa_1,kappa_2\n";
            for (Eigen::Index i = 0; i < 5; ++i) ws << detail::num(r.armax->w[i]) << ',';
            ws << detail::num(r.armax->kappa[0]) << ',' << detail::num(r.armax->kappa[1]) << '\n';
        }
        if (cfg.fdi.dump_matrices) {
            auto ms = open_out(out_dir / "fdi_matrices.csv");
            write_matrices(ms, r.reports);
        }
    }
    {
        auto os = open_out(out_dir / "summary.txt");
        write_summary(os, cfg, r, options.fdi);
    }
    write_plots(out_dir, cfg, r, options.fdi);
    return r;
}

}  // namespace wavefdi
