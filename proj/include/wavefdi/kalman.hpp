#pragma once

#include "wavefdi/wave_model.hpp"

#include <functional>
#include <optional>
#include <string>

namespace wavefdi {

enum class Discretization { euler, exact };

std::string to_string(Discretization d);
std::optional<Discretization> parse_discretization(const std::string& s);

struct DiscreteModel {
    Mat Ad;  ///< 2N x 2N
    Mat Bd;  ///< 2N x N
    Mat Cd;  ///< m x 2N
    Mat Q;   ///< process noise covariance
    Mat R;   ///< measurement noise covariance

    Eigen::Index state_dim() const { return Ad.rows(); }
    Eigen::Index output_dim() const { return Cd.rows(); }

    /// Checks dimensions and that Q, R are symmetric with R positive definite.
    void validate() const;
};

/// euler: Ad = I + A Ts, Bd = B Ts.  exact: the top blocks of
/// exp([[A, B], [0, 0]] Ts), which needs no inverse of A.
/// Q and R are left empty (zero-sized); callers fill them in.
DiscreteModel discretize(const StateSpace& ss, double Ts, Discretization method);

struct FilterState {
    Vec xhat;        ///< posterior estimate
    Mat P;           ///< posterior covariance
    Vec xhat_prior;  ///< prior estimate used by the last measurement update
    Mat P_prior;
    Mat gain;        ///< 2N x m
    Vec innovation;  ///< z - C xhat_prior
};

/// Prior and posterior both set to (x0, P0); the first measurement update
/// starts from this prior.
FilterState initial_filter_state(const Vec& x0, const Mat& P0);

// Covariance and mean halves of the recursion. The covariance part does not
// depend on the data, so Monte-Carlo runs share one covariance track and only
// step the means; both paths call these same functions.

struct CovarianceUpdate {
    Mat gain;
    Mat P;  ///< posterior, symmetrized
};

CovarianceUpdate covariance_measurement_update(const Mat& P_prior, const Mat& C, const Mat& R);
Mat covariance_time_update(const Mat& P, const Mat& Ad, const Mat& Q);

/// Returns the posterior mean; writes z - C prior into `innovation`.
Vec mean_measurement_update(const Vec& prior, const Mat& gain, const Mat& C, const Vec& z, Vec& innovation);
Vec mean_time_update(const Vec& posterior, const Mat& Ad, const Mat& Bd, const Vec& u);

FilterState kf_measurement_update(const FilterState& fs, const DiscreteModel& dm, const Vec& z);

/// Propagates the posterior of `fs` into xhat_prior / P_prior.
FilterState kf_time_update(const FilterState& fs, const DiscreteModel& dm, const Vec& u);

/// Rank of the observability matrix of (Ad, Cd). Computed from an orthogonal
/// Krylov sequence on (Ad - I) rather than by stacking powers of Ad, which is
/// hopelessly ill-conditioned when Ad is close to the identity.
Eigen::Index observability_rank(const Mat& Ad, const Mat& Cd, double rel_tol = 1e-9);

/// Compact per-step record of a filter run, one row per step.
struct FilterRun {
    Mat prior;        ///< xhat_prior(k)
    Mat posterior;    ///< xhat(k)
    Mat innovations;  ///< z(k) - C xhat_prior(k)
    Mat inputs;       ///< vhat(k) evaluated at the posterior
    Vec trace_P;      ///< trace of the posterior covariance
    double Ts = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(prior.rows()); }
};

using FilterObserver = std::function<void(std::size_t step, const FilterState&)>;

/// Step k: measurement update with z(k), vhat(k) from the posterior
/// (certainty equivalence), time update to the prior of step k+1.
/// Throws NotObservable if (Ad, Cd) is not observable. `observer`, when set,
/// sees the full FilterState of every step.
FilterRun run_filter(const DiscreteModel& dm, const WaveModel& model, const Mat& measurements,
                     const FilterState& init, double Ts, const FilterObserver& observer = {});

/// Header `t,yhat_1..yhat_2N,innov_1..innov_m,trace_P`.
void write_estimates_csv(std::ostream& os, const FilterRun& run);

}  // namespace wavefdi
