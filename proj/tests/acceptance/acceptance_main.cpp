// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "wavefdi/armax.hpp"
#include "wavefdi/chi2.hpp"
#include "wavefdi/config.hpp"
#include "wavefdi/fdi.hpp"
#include "wavefdi/kalman.hpp"
#include "wavefdi/monte_carlo.hpp"
#include "wavefdi/scenario.hpp"
#include "wavefdi/simulator.hpp"
#include "wavefdi/wave_model.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

using namespace wavefdi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vec random_vec(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    Vec v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

Mat random_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    return random_vec(r * c, rng).reshaped(r, c);
}

Mat random_spd(Eigen::Index n, std::mt19937_64& rng) {
    const Mat G = random_mat(n, n, rng);
    return G * G.transpose() + 0.5 * Mat::Identity(n, n);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Right-hand side written point by point from the semi-discrete PDE.
Vec direct_rhs(const WaveModel& m, const Vec& y) {
    const auto N = static_cast<Eigen::Index>(m.N);
    Vec out(2 * N);
    for (Eigen::Index i = 0; i < N; ++i) {
        const double left = i == 0 ? m.phi_left : y[2 * (i - 1)];
        const double right = i == N - 1 ? m.phi_right : y[2 * (i + 1)];
        out[2 * i] = y[2 * i + 1];
        out[2 * i + 1] = m.K * (right - 2.0 * y[2 * i] + left) / (m.dx * m.dx) +
                         evaluate_source(m.source, y[2 * i], y[2 * i + 1]);
    }
    return out;
}

Outcome canonical_form() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (std::size_t N : {3u, 5u, 50u}) {
        auto m = WaveModel::sine_gordon({}, N, 0.2);
        m.phi_left = 0.3;
        m.phi_right = -0.2;
        const auto ss = build_state_space(m, {1});
        for (int trial = 0; trial < 100; ++trial) {
            const Vec y = random_vec(static_cast<Eigen::Index>(2 * N), rng);
            const Vec v = virtual_inputs(m, positions_of(y), velocities_of(y));
            worst = std::max(worst, (ss.A * y + ss.B * v - direct_rhs(m, y)).cwiseAbs().maxCoeff());
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-12 && secs < 1.0, fmt::format("max abs error {:.3g}, {:.3f} s", worst, secs)};
}

Outcome armax_equivalence() {
    const auto t0 = Clock::now();
    auto cfg = ScenarioConfig::defaults(ScenarioKind::custom);
    cfg.sim.steps = 800;
    cfg.sim.process_noise_std = 0.0;
    cfg.sim.measurement_noise_std = 0.0;
    cfg.filter.q = 1e-6;
    cfg.filter.r = 1e-4;
    const std::size_t grid = cfg.model.N;  // last subsystem
    cfg.sensors = odd_grid_points(cfg.model.N);
    cfg.sensors.push_back(grid);
    const auto traj = simulate(cfg.model, cfg.sim, cfg.sensors, {});
    const ArmaxModel am = subsystem_armax(cfg);

    auto sub = discretize(subsystem_state_space(cfg.model, grid), cfg.sim.Ts, Discretization::euler);
    const Mat gain = am.filter_gain.reshaped(2, 1);
    const Eigen::Index row = static_cast<Eigen::Index>(cfg.sensors.size()) - 1;
    Vec prior = Vec::Zero(2);
    std::vector<double> zhat, v, innov;
    for (Eigen::Index k = 0; k < traj.measurements.rows(); ++k) {
        Vec e;
        const Vec post = mean_measurement_update(prior, gain, sub.Cd, Vec::Constant(1, traj.measurements(k, row)), e);
        const double u = subsystem_input(cfg.model, traj.states.row(k).transpose(), grid);
        zhat.push_back(prior[0]);
        innov.push_back(e[0]);
        v.push_back(u);
        prior = mean_time_update(post, sub.Ad, sub.Bd, Vec::Constant(1, u));
    }
    zhat.push_back(prior[0]);
    double worst = 0.0;
    std::size_t compared = 0;
    for (std::size_t k = 2; k + 1 < zhat.size(); ++k) {
        worst = std::max(worst, std::abs(armax_predict(am, build_regressor(zhat, v, innov, k)) - zhat[k + 1]));
        ++compared;
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-8 && compared >= 500 && secs < 5.0,
            fmt::format("max abs error {:.3g} over {} steps, {:.2f} s", worst, compared, secs)};
}

Outcome null_calibration() {
    const auto t0 = Clock::now();
    auto cfg = ScenarioConfig::defaults(ScenarioKind::custom);
    cfg.sim.steps = 7001;
    cfg.fdi.plan.overlap = 0.0;
    cfg.fdi.alpha = 0.05;
    cfg.fdi.threshold = ThresholdMode::quantile;
    std::vector<std::uint64_t> seeds(100);
    std::iota(seeds.begin(), seeds.end(), 1000);
    const auto trials = run_trials(cfg, seeds);
    std::size_t windows = 0, alarms = 0;
    double sum = 0.0;
    for (const auto& o : trials)
        for (std::size_t w = 0; w < o.t.size(); ++w) {
            ++windows;
            alarms += o.faulty[w];
            sum += o.t[w];
        }
    const double mean = sum / static_cast<double>(windows);
    const double fa = static_cast<double>(alarms) / static_cast<double>(windows);
    const double secs = seconds_since(t0);
    return {windows >= 500 && std::abs(mean - 5.0) <= 0.5 && std::abs(fa - 0.05) <= 0.02 && secs < 120.0,
            fmt::format("{} windows, mean t {:.3f}, false-alarm rate {:.3f}, {:.1f} s", windows, mean, fa, secs)};
}

Outcome parameter_change() {
    const auto t0 = Clock::now();
    std::string detail;
    bool pass = true;
    for (double K : {0.04050, 0.05050}) {
        auto cfg = ScenarioConfig::defaults(ScenarioKind::param_change);
        cfg.model.K = K;
        cfg.fdi.threshold = ThresholdMode::dof_mean;
        std::vector<std::uint64_t> seeds(50);
        std::iota(seeds.begin(), seeds.end(), 1);
        const auto trials = run_trials(cfg, seeds);
        std::size_t hits = 0;
        double tmin = INFINITY;
        for (const auto& o : trials) {
            const double t = o.t.empty() ? 0.0 : o.t.back();
            hits += t >= 2.0 * o.lambda;
            tmin = std::min(tmin, t);
        }
        pass = pass && hits >= 45;
        detail += fmt::format("K={}: {}/50 with t >= 2 eta (min t {:.3g}); ", K, hits, tmin);
    }
    const double secs = seconds_since(t0);
    return {pass && secs < 300.0, detail + fmt::format("{:.1f} s", secs)};
}

Outcome sensor_fault_localization() {
    const auto cfg = ScenarioConfig::defaults(ScenarioKind::sensor_fault);
    const auto dir = fs::temp_directory_path() / "wavefdi_acceptance_sensor";
    const auto r = run_scenario(cfg, dir, {.fdi = false});
    fs::remove_all(dir);

    const auto& d = r.sensors;
    const auto argmax = static_cast<std::size_t>(
        std::max_element(d.mean_abs_innovation.begin(), d.mean_abs_innovation.end()) - d.mean_abs_innovation.begin());

    const Eigen::Index from = static_cast<Eigen::Index>(r.trajectory.size() / 2);
    auto mean_error = [&](std::size_t g0, std::size_t g1) {
        double s = 0.0;
        for (std::size_t g = g0; g <= g1; ++g) {
            const auto p = static_cast<Eigen::Index>(position_index(g));
            const auto rows = r.trajectory.states.rows() - from;
            s += (r.filter.posterior.col(p).tail(rows) - r.trajectory.states.col(p).tail(rows)).cwiseAbs().mean();
        }
        return s / static_cast<double>(g1 - g0 + 1);
    };
    const double near = mean_error(42, 44), far = mean_error(31, 32);
    const double ratio = near / far;
    return {argmax == 21 && ratio >= 3.0,
            fmt::format("largest mean |innovation| at sensor {}, error ratio (42-44 vs 31-32) {:.2f}", argmax + 1,
                        ratio)};
}

Outcome invariants() {
    std::vector<std::string> failed;

    auto cfg = ScenarioConfig::defaults(ScenarioKind::sensor_fault);
    const auto traj = simulate(cfg.model, cfg.sim, cfg.sensors, cfg.faults);
    const auto dm = filter_model(cfg);
    double asym = 0.0, min_eig = 0.0;
    run_filter(dm, cfg.model, traj.measurements, filter_init(cfg), cfg.sim.Ts, [&](std::size_t, const FilterState& fs) {
        asym = std::max(asym, (fs.P - fs.P.transpose()).cwiseAbs().maxCoeff());
        const double scale = fs.P.cwiseAbs().maxCoeff();
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat>(fs.P, Eigen::EigenvaluesOnly).eigenvalues()[0] / scale);
    });
    if (asym > 1e-12 || min_eig < -1e-10) failed.push_back(fmt::format("P (asym {:.2g}, min eig {:.2g})", asym, min_eig));

    const auto rank = observability_rank(dm.Ad, dm.Cd);
    if (rank != dm.state_dim()) failed.push_back(fmt::format("observability rank {}", rank));

    bool mono = true;
    for (int dof = 1; dof <= 10; ++dof) {
        double prev = 0.0;
        for (double alpha : {0.5, 0.2, 0.1, 0.05, 0.01, 0.001, 1e-6}) {
            const double l = chi2_threshold(alpha, dof);
            mono = mono && l > prev && chi2_threshold(alpha, dof + 1) > l;
            prev = l;
        }
    }
    if (!mono) failed.push_back("chi2 threshold monotonicity");

    std::mt19937_64 rng(7);
    double mm_gap = 0.0, id_gap = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Mat S = random_spd(5, rng);
        const Mat L = Eigen::LLT<Mat>(S).matrixL();
        const Mat Q = Eigen::HouseholderQR<Mat>(random_mat(5, 5, rng)).householderQ();
        Mat D = Mat::Zero(5, 5);
        D.topLeftCorner(2, 2) = random_spd(2, rng);
        D.bottomRightCorner(3, 3) = random_spd(3, rng);
        const Mat M = L * Q * D;
        const Vec X = random_vec(5, rng);
        const double mm = minmax_test(X, M, S, {0, 1});
        mm_gap = std::max(mm_gap, std::abs(mm - sensitivity_test(X, M, S, Subset{0, 1})) / (1.0 + mm));
        const Mat Mg = random_spd(5, rng);
        const double t = global_chi2_test(X, Mg, S);
        id_gap = std::max(id_gap, std::abs(sensitivity_test(X, Mg, S, Mat(Mat::Identity(5, 5))) - t) / (1.0 + t));
    }
    if (mm_gap > 1e-10) failed.push_back(fmt::format("min-max vs sensitivity {:.2g}", mm_gap));
    if (id_gap > 1e-10) failed.push_back(fmt::format("sensitivity(A = I) vs global {:.2g}", id_gap));

    std::string detail = fmt::format(
        "P asym {:.2g}, min rel eig {:.2g}, rank {}/{}, min-max gap {:.2g}, identity gap {:.2g}", asym, min_eig, rank,
        dm.state_dim(), mm_gap, id_gap);
    for (const auto& f : failed) detail += "; failed: " + f;
    return {failed.empty(), detail};
}

Outcome determinism() {
    std::size_t files = 0;
    std::vector<std::string> mismatched;
    for (auto kind : {ScenarioKind::sensor_fault, ScenarioKind::param_change, ScenarioKind::custom}) {
        const auto cfg = ScenarioConfig::defaults(kind);
        const auto base = fs::temp_directory_path() / ("wavefdi_acceptance_det_" + to_string(kind));
        fs::remove_all(base);
        run_scenario(cfg, base / "a");
        run_scenario(cfg, base / "b");
        for (const auto& e : fs::directory_iterator(base / "a")) {
            if (e.path().extension() != ".csv") continue;
            ++files;
            if (slurp(e.path()) != slurp(base / "b" / e.path().filename()))
                mismatched.push_back(to_string(kind) + "/" + e.path().filename().string());
        }
        fs::remove_all(base);
    }
    std::string detail = fmt::format("{} CSV files compared", files);
    for (const auto& m : mismatched) detail += "; differs: " + m;
    return {mismatched.empty() && files > 0, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 canonical form", canonical_form},
        {"2 KF/ARMAX equivalence", armax_equivalence},
        {"3 chi-square calibration under H0", null_calibration},
        {"4 parameter change detection", parameter_change},
        {"5 sensor fault localization", sensor_fault_localization},
        {"6 numerical invariants", invariants},
        {"7 determinism", determinism},
    };
    bool all = true;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
