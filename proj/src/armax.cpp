#include "wavefdi/armax.hpp"

#include "wavefdi/errors.hpp"

#include <cmath>

namespace wavefdi {

namespace {

void check_subsystem_layout(const DiscreteModel& dm) {
    if (dm.Ad.rows() != 2 || dm.Ad.cols() != 2 || dm.Bd.rows() != 2 || dm.Bd.cols() != 1 || dm.Cd.rows() != 1 ||
        dm.Cd.cols() != 2)
        throw InvalidArgument("ARMAX conversion needs a 2-state, 1-input, 1-output subsystem");
    if (dm.Cd(0, 0) != 1.0 || dm.Cd(0, 1) != 0.0)
        throw InvalidArgument("ARMAX conversion needs C = [1, 0]");
    if (dm.Bd(0, 0) != 0.0)
        throw InvalidArgument("ARMAX conversion needs the input to enter the velocity state only (Euler layout)");
}

double max_change(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

std::vector<Vec> riccati_gain_history(const DiscreteModel& dm, const Mat& P0, std::size_t max_steps, double tol,
                                      std::size_t window) {
    dm.validate();
    std::vector<Vec> gains;
    Mat P_prior = P0;
    std::size_t quiet = 0;
    for (std::size_t k = 0; k < max_steps; ++k) {
        auto cov = covariance_measurement_update(P_prior, dm.Cd, dm.R);
        gains.emplace_back(cov.gain.col(0));
        if (gains.size() >= 2) {
            quiet = max_change(gains[gains.size() - 1], gains[gains.size() - 2]) < tol ? quiet + 1 : 0;
            if (quiet >= window) break;
        }
        P_prior = covariance_time_update(cov.P, dm.Ad, dm.Q);
    }
    return gains;
}

ArmaxModel armax_from_predictor_gain(const DiscreteModel& subsystem, const Vec& kappa) {
    check_subsystem_layout(subsystem);
    if (kappa.size() != 2 || !kappa.allFinite()) throw InvalidArgument("gain must be a finite 2-vector");
    const Mat& A = subsystem.Ad;
    const double b2 = subsystem.Bd(1, 0);

    ArmaxModel m;
    m.kappa = kappa;
    m.w.resize(ArmaxModel::kOrder);
    m.w << A.trace(), -A.determinant(), A(0, 1) * b2, kappa[0], A(0, 1) * kappa[1] - A(1, 1) * kappa[0];
    return m;
}

ArmaxModel armax_from_gain(const DiscreteModel& subsystem, const Vec& filter_gain) {
    check_subsystem_layout(subsystem);
    if (filter_gain.size() != 2 || !filter_gain.allFinite()) throw InvalidArgument("gain must be a finite 2-vector");
    ArmaxModel m = armax_from_predictor_gain(subsystem, subsystem.Ad * filter_gain);
    m.filter_gain = filter_gain;
    return m;
}

ArmaxModel kf_to_armax(const DiscreteModel& subsystem, std::span<const Vec> gain_history, double tol,
                       std::size_t window) {
    check_subsystem_layout(subsystem);
    if (gain_history.size() < window + 1)
        throw NotSteadyState("gain history has " + std::to_string(gain_history.size()) + " entries, need at least " +
                             std::to_string(window + 1) + " to judge convergence");
    const std::size_t last = gain_history.size() - 1;
    for (std::size_t j = 0; j < window; ++j) {
        const double d = max_change(gain_history[last - j], gain_history[last - j - 1]);
        if (!(d < tol))
            throw NotSteadyState("Kalman gain still changing by " + std::to_string(d) + " at step " +
                                 std::to_string(last - j));
    }
    return armax_from_gain(subsystem, gain_history[last]);
}

Vec build_regressor(std::span<const double> zhat, std::span<const double> v, std::span<const double> innov,
                    std::size_t k) {
    if (k < 2) throw InsufficientHistory("regressor needs k >= 2, got k = " + std::to_string(k));
    if (zhat.size() <= k || v.size() <= k - 1 || innov.size() <= k)
        throw InsufficientHistory("history too short for regressor at k = " + std::to_string(k));
    Vec X(ArmaxModel::kOrder);
    X << zhat[k], zhat[k - 1], v[k - 1], innov[k], innov[k - 1];
    return X;
}

double armax_predict(const ArmaxModel& m, const Vec& X) {
    if (X.size() != m.w.size()) throw InvalidArgument("regressor length does not match the weight vector");
    return m.w.dot(X);
}

}  // namespace wavefdi
