#pragma once

#include "wavefdi/kalman.hpp"

#include <span>
#include <vector>

namespace wavefdi {

/// Scalar ARMAX form of the steady-state Kalman predictor of one grid
/// subsystem:
///   zhat(k+1) = w1 zhat(k) + w2 zhat(k-1) + w3 v(k-1) + w4 e(k) + w5 e(k-1)
/// with e(k) = z(k) - zhat(k) the innovation.
struct ArmaxModel {
    static constexpr Eigen::Index kOrder = 5;

    Vec w;             ///< 5 weights
    Vec filter_gain;   ///< steady-state measurement-update gain K (2-vector), when known
    Vec kappa;         ///< predictor gain Ad K, the kappa_1, kappa_2 of the weights
};

/// Gains K(k) of the Riccati recursion of a 2-state, 1-output model started
/// from P0. Stops once the max-abs change stayed below `tol` for `window`
/// consecutive steps, or after `max_steps`.
std::vector<Vec> riccati_gain_history(const DiscreteModel& dm, const Mat& P0, std::size_t max_steps,
                                      double tol = 1e-9, std::size_t window = 10);

/// Builds the weights from the converged gain. For Ad = [[a11,a12],[a21,a22]],
/// Bd = [0, b2]^T and kappa = Ad K:
///   w = [tr Ad, -det Ad, a12 b2, kappa_1, a12 kappa_2 - a22 kappa_1]
/// which for the forward-Euler subsystem is
///   [2, -(1 + Ts^2 2K/dx^2), Ts^2, kappa_1, Ts kappa_2 - kappa_1].
/// Throws NotSteadyState unless the last `window` gain changes are below
/// `tol`, InvalidArgument unless the model has one output selecting the first
/// state and an input entering the second state only.
ArmaxModel kf_to_armax(const DiscreteModel& subsystem, std::span<const Vec> gain_history, double tol = 1e-9,
                       std::size_t window = 10);

/// Weights for a given steady measurement-update gain, no convergence check.
ArmaxModel armax_from_gain(const DiscreteModel& subsystem, const Vec& filter_gain);

/// Weights straight from the predictor gain kappa; `filter_gain` stays empty.
ArmaxModel armax_from_predictor_gain(const DiscreteModel& subsystem, const Vec& kappa);

/// X(k) = [zhat(k), zhat(k-1), v(k-1), e(k), e(k-1)]; k is 0-based.
/// Throws InsufficientHistory when k < 2 or a history is too short (zhat and
/// innov need k+1 samples, v needs k).
Vec build_regressor(std::span<const double> zhat, std::span<const double> v, std::span<const double> innov,
                    std::size_t k);

double armax_predict(const ArmaxModel& m, const Vec& X);

}  // namespace wavefdi
